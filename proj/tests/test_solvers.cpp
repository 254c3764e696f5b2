#include <doctest.h>

#include <cmath>
#include <vector>

#include "gs/solvers.hpp"
#include "support/oracles.hpp"

using namespace gs;
using namespace gs::solvers;
using gs::manifold::ManifoldPoint;

namespace {

problems::GpeProblem make_gpe(double kappa, int cells, int order = 2, double L = 8.0) {
  problems::GpeSettings s;
  s.kappa = kappa;
  s.cells_per_dim = cells;
  s.order = order;
  s.half_width = L;
  return problems::GpeProblem(s);
}

ManifoldPoint smooth_start(const problems::Problem& prob, int p) {
  return {manifold::m_gram_schmidt(prob.starting_frame(p, 1), *prob.metric()), prob.metric()};
}

double rel(const Frame& a, const Frame& b) { return (a - b).norm() / std::max(a.norm(), b.norm()); }

void check_feasible(const SolverResult& r) {
  for (const auto& rec : r.records) CHECK(rec.feasibility <= 1e-10);
}

}  // namespace

TEST_CASE("method names round trip") {
  for (Method m : {Method::newton_grassmann, Method::newton_stiefel, Method::scf, Method::rgd}) {
    REQUIRE(parse_method(method_name(m)).has_value());
    CHECK(*parse_method(method_name(m)) == m);
  }
  CHECK_FALSE(parse_method("newton").has_value());
}

TEST_CASE("solver config validation") {
  SolverConfig cfg;
  CHECK_NOTHROW(cfg.validate());
  cfg.eta = 1.5;
  CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
  cfg = {};
  cfg.scf_mixing = 0.0;
  CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
  cfg = {};
  cfg.nonmonotone_window = 0;
  CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
}

TEST_CASE("inner tolerance rule") {
  CHECK(inner_tolerance(1, 1.0) == doctest::Approx(1e-3));
  CHECK(inner_tolerance(1, 1e4) == 1.0);
  CHECK(inner_tolerance(4, 1e4) == 0.25);
  CHECK(inner_tolerance(2, 1e-6) == doctest::Approx(1e-9));
}

TEST_CASE("linear case: every solver reproduces the eigenpairs") {
  const auto prob = make_gpe(0.0, 8);
  const int p = 2;
  SolverConfig cfg;
  const ManifoldPoint start = initial_guess(prob, p, 1, cfg).point;
  const auto eig = linalg::smallest_eigenpairs(prob.hamiltonian(prob.density(start.frame())), prob.mass(), p, 1e-14,
                                               {linalg::EigenMethod::dense});

  const SolverResult s = scf(prob, start, cfg);
  CHECK(s.status == Status::converged);
  CHECK(s.records.size() == 1);

  for (Method m : {Method::newton_grassmann, Method::newton_stiefel, Method::scf, Method::rgd}) {
    CAPTURE(method_name(m));
    const SolverResult r = run(m, prob, start, cfg);
    CHECK(r.status == Status::converged);
    check_feasible(r);
    const Vector lam = linalg::sym_eig_small(linalg::sym(r.Lambda)).values;
    for (int j = 0; j < p; ++j) CHECK(std::abs(lam(j) - eig.values(j)) <= 1e-8 * std::abs(eig.values(j)));
    CHECK(r.energy == doctest::Approx(0.5 * eig.values.sum()).epsilon(1e-10));
  }
}

TEST_CASE("gradient descent in the linear regime reaches half the smallest eigenvalue") {
  const auto prob = make_gpe(0.0, 6);
  SolverConfig cfg;
  cfg.max_outer = 2000;
  const SolverResult r = gradient_descent(prob, smooth_start(prob, 1), cfg);
  REQUIRE(r.status == Status::converged);
  const auto eig = linalg::smallest_eigenpairs(prob.hamiltonian(Vector::Zero(prob.space().n_quadrature_points())), prob.mass(), 1, 1e-14,
                                               {linalg::EigenMethod::dense});
  CHECK(r.energy == doctest::Approx(eig.values(0) / 2).epsilon(1e-12));
}

TEST_CASE("Stiefel and Grassmann Newton coincide for one state") {
  const auto prob = make_gpe(100.0, 8);
  SolverConfig cfg;
  const ManifoldPoint start = initial_guess(prob, 1, 1, cfg).point;
  const SolverResult g = newton_grassmann(prob, start, cfg);
  const SolverResult s = newton_stiefel(prob, start, cfg);
  REQUIRE(g.records.size() == s.records.size());
  for (std::size_t k = 0; k < g.records.size(); ++k) {
    CHECK(std::abs(g.records[k].energy - s.records[k].energy) <= 1e-12 * std::abs(g.records[k].energy));
    CHECK(std::abs(g.records[k].residual - s.records[k].residual) <= 1e-12 + 1e-6 * g.records[k].residual);
  }
  CHECK(rel(g.point.frame(), s.point.frame()) <= 1e-12);
}

TEST_CASE("Newton on the harmonic trap: convergence, monotone energy, superlinear tail") {
  for (double kappa : {10.0, 1000.0}) {
    CAPTURE(kappa);
    const auto prob = make_gpe(kappa, 16);
    SolverConfig cfg;
    const ManifoldPoint start = initial_guess(prob, 1, 1, cfg).point;
    std::vector<IterationTrace> trace;
    cfg.observer = [&](const IterationTrace& t) { trace.push_back(t); };
    const SolverResult r = newton_grassmann(prob, start, cfg);
    REQUIRE(r.status == Status::converged);
    CHECK(r.residual <= 1e-8);
    check_feasible(r);
    for (const auto& t : trace) CHECK(t.energy_after <= t.energy_before);

    std::vector<double> res{r.initial_residual};
    for (const auto& rec : r.records) res.push_back(rec.residual);
    REQUIRE(res.size() >= 3);
    for (std::size_t k = res.size() - 2; k + 1 < res.size(); ++k) CHECK(res[k + 1] <= 10.0 * std::pow(res[k], 1.5));
  }
}

TEST_CASE("descent test fallback uses the negative gradient") {
  const auto prob = make_gpe(100.0, 6);
  SolverConfig cfg;
  cfg.eta = 0.9;  // rejects nearly every Newton direction
  cfg.max_outer = 30;
  int fallbacks = 0;
  cfg.observer = [&](const IterationTrace& t) {
    if (!t.fallback) return;
    ++fallbacks;
    CHECK(t.direction == -t.gradient);
  };
  const SolverResult r = newton_grassmann(prob, oracle::random_point(prob, 2, 5), cfg);
  CHECK(fallbacks > 0);
  int recorded = 0;
  for (const auto& rec : r.records) recorded += rec.fallback ? 1 : 0;
  CHECK(recorded == fallbacks);
  check_feasible(r);
}

TEST_CASE("accepted steps satisfy the window Armijo inequality") {
  const auto prob = make_gpe(100.0, 8);
  for (int window : {1, 5}) {
    CAPTURE(window);
    SolverConfig cfg;
    cfg.nonmonotone_window = window;
    cfg.max_outer = 500;
    std::vector<IterationTrace> trace;
    cfg.observer = [&](const IterationTrace& t) { trace.push_back(t); };
    const SolverResult r = gradient_descent(prob, smooth_start(prob, 1), cfg);
    CHECK(r.status == Status::converged);
    check_feasible(r);
    std::vector<double> energies{prob.energy(smooth_start(prob, 1).frame())};
    for (const auto& t : trace) {
      // Recompute the reference from the energy history.
      const std::size_t first = energies.size() > static_cast<std::size_t>(window) ? energies.size() - window : 0;
      double reference = energies[first];
      for (std::size_t i = first; i < energies.size(); ++i) reference = std::max(reference, energies[i]);
      CHECK(t.energy_reference == reference);
      const double slack = 1e-14 * std::max(1.0, std::abs(reference));
      CHECK(t.energy_after - reference <= cfg.sigma * t.step * t.slope + slack);
      CHECK(t.slope < 0.0);
      if (window == 1) CHECK(t.energy_after <= t.energy_before + slack);
      energies.push_back(t.energy_after);
    }
  }
}

TEST_CASE("saddle-point direction matches MINRES") {
  const auto prob = make_gpe(100.0, 7);
  REQUIRE(prob.n() <= 200);
  for (int p : {1, 2}) {
    CAPTURE(p);
    const ManifoldPoint x = smooth_start(prob, p);
    const SaddleSolution sd = saddle_newton_direction(prob, x);
    const NewtonDirection g = grassmann_direction(prob, x, 1e-14, 5000);
    REQUIRE(g.converged);
    CHECK(rel(sd.direction, g.direction) <= 1e-10);
    // Constraint block: Phi^T M psi = 0.
    const DenseSmall c = manifold::outer(x.frame(), sd.direction, x.metric());
    CHECK(c.norm() <= 1e-12 * sd.direction.norm());
    // First block: H psi + M Phi Mu = -A Phi.
    const auto lin = prob.linearize(x.frame());
    const auto d = problems::dual_residual(lin, x);
    const Frame lhs = problems::newton_operator(lin, x, d.Lambda, sd.direction) + x.m_frame() * sd.multiplier;
    CHECK(rel(lhs, -d.APhi) <= 1e-10);
  }
}

TEST_CASE("Lagrange-Newton step") {
  SUBCASE("tangent direction, symmetric multiplier, equal to the Stiefel direction") {
    const auto prob = make_gpe(100.0, 7);
    const ManifoldPoint x = smooth_start(prob, 2);
    const auto d = problems::dual_residual(prob.linearize(x.frame()), x);
    REQUIRE((d.Lambda - d.Lambda.transpose()).norm() <= 1e-13 * d.Lambda.norm());
    const LagrangeNewtonStep ln = lagrange_newton_step(prob, x, linalg::sym(d.Lambda));
    CHECK((ln.Xi - ln.Xi.transpose()).norm() <= 1e-10 * ln.Xi.norm());
    const DenseSmall s = linalg::sym(manifold::outer(x.frame(), ln.eta, x.metric()));
    CHECK(s.norm() <= 1e-12 * ln.eta.norm());
    const NewtonDirection st = stiefel_direction(prob, x, 1e-14, 5000);
    REQUIRE(st.converged);
    CHECK(rel(st.direction, ln.eta) <= 1e-9);
  }
  SUBCASE("zero at an exact eigenpair") {
    const auto prob = make_gpe(0.0, 6);
    const auto eig = linalg::smallest_eigenpairs(prob.hamiltonian(Vector::Zero(prob.space().n_quadrature_points())),
                                                 prob.mass(), 1, 1e-14, {linalg::EigenMethod::dense});
    const ManifoldPoint x(eig.vectors, prob.metric());
    const LagrangeNewtonStep ln = lagrange_newton_step(prob, x, eig.values.asDiagonal());
    CHECK(ln.eta.norm() <= 1e-10);
    CHECK(ln.Xi.norm() <= 1e-10);
  }
  SUBCASE("singular at a critical point with several states") {
    const auto prob = make_gpe(0.0, 6);
    const auto eig = linalg::smallest_eigenpairs(prob.hamiltonian(Vector::Zero(prob.space().n_quadrature_points())),
                                                 prob.mass(), 2, 1e-14, {linalg::EigenMethod::dense});
    const ManifoldPoint x(eig.vectors, prob.metric());
    CHECK_THROWS_AS(lagrange_newton_step(prob, x, eig.values.asDiagonal()), std::runtime_error);
  }
}

TEST_CASE("Stiefel directions stay horizontal") {
  const auto prob = make_gpe(100.0, 7);
  const ManifoldPoint x = smooth_start(prob, 2);
  const NewtonDirection st = stiefel_direction(prob, x, 1e-14, 5000);
  const Frame vertical = x.frame() * manifold::outer(x.frame(), st.direction, x.metric());
  CHECK(vertical.norm() <= 1e-8 * st.direction.norm());
}

TEST_CASE("Hessian positivity") {
  SUBCASE("spectral gap in the linear case") {
    const auto prob = make_gpe(0.0, 6);
    const auto eig = linalg::smallest_eigenpairs(prob.hamiltonian(Vector::Zero(prob.space().n_quadrature_points())), prob.mass(), 2, 1e-14,
                                                 {linalg::EigenMethod::dense});
    const ManifoldPoint ground(eig.vectors.col(0), prob.metric());
    const double gap = eig.values(1) - eig.values(0);
    CHECK(hessian_positivity_check(prob, ground) == doctest::Approx(gap).epsilon(1e-6));
    PositivityOptions it;
    it.dense_limit = 0;
    CHECK(hessian_positivity_check(prob, ground, it) == doctest::Approx(gap).epsilon(1e-6));
    const ManifoldPoint excited(eig.vectors.col(1), prob.metric());
    CHECK(hessian_positivity_check(prob, excited) < 0.0);
  }
  SUBCASE("interacting ground state, dense and iterative paths agree") {
    const auto prob = make_gpe(100.0, 8);
    SolverConfig cfg;
    const SolverResult r = newton_grassmann(prob, initial_guess(prob, 1, 1, cfg).point, cfg);
    REQUIRE(r.status == Status::converged);
    PositivityOptions it;
    it.dense_limit = 0;
    const double dense = hessian_positivity_check(prob, r.point);
    CHECK(dense > 0.0);
    CHECK(hessian_positivity_check(prob, r.point, it) == doctest::Approx(dense).epsilon(1e-6));
  }
}

TEST_CASE("cross-solver agreement on the harmonic trap") {
  const auto prob = make_gpe(10.0, 8);
  SolverConfig cfg;
  cfg.max_outer = 1000;
  const ManifoldPoint start = initial_guess(prob, 1, 1, cfg).point;
  std::vector<SolverResult> results;
  for (Method m : {Method::newton_grassmann, Method::newton_stiefel, Method::scf, Method::rgd}) {
    CAPTURE(method_name(m));
    results.push_back(run(m, prob, start, cfg));
    CHECK(results.back().status == Status::converged);
    check_feasible(results.back());
  }
  const Vector rho0 = prob.density(results[0].point.frame());
  for (const auto& r : results) {
    CHECK(std::abs(r.energy - results[0].energy) <= 1e-8);
    CHECK((prob.density(r.point.frame()) - rho0).cwiseAbs().maxCoeff() <= 1e-6);
  }
}

TEST_CASE("toy Kohn-Sham: Stiefel and Grassmann Newton reach the same energy") {
  problems::KsSettings s;  // 10^3 grid points
  const problems::KsProblem prob(s);
  SolverConfig cfg;
  const ManifoldPoint start = initial_guess(prob, 4, 1, cfg).point;
  const SolverResult g = newton_grassmann(prob, start, cfg);
  const SolverResult st = newton_stiefel(prob, start, cfg);
  REQUIRE(g.status == Status::converged);
  REQUIRE(st.status == Status::converged);
  check_feasible(g);
  check_feasible(st);
  CHECK(std::abs(g.energy - st.energy) <= 1e-9);
  CHECK((prob.density(g.point.frame()) - prob.density(st.point.frame())).cwiseAbs().maxCoeff() <= 1e-6);
}

TEST_CASE("SCF reports eigensolver failure as stagnation") {
  const auto prob = make_gpe(100.0, 8);
  SolverConfig cfg;
  cfg.eigen.method = linalg::EigenMethod::iterative;
  cfg.eigen.max_iter = 1;
  const SolverResult r = scf(prob, smooth_start(prob, 1), cfg);
  CHECK(r.status == Status::stagnation);
  CHECK(r.records.empty());
}

TEST_CASE("runs are deterministic") {
  const auto prob = make_gpe(100.0, 8);
  SolverConfig cfg;
  auto once = [&] {
    const ManifoldPoint start = initial_guess(prob, 2, 3, cfg).point;
    return newton_stiefel(prob, start, cfg);
  };
  const SolverResult a = once(), b = once();
  REQUIRE(a.records.size() == b.records.size());
  for (std::size_t k = 0; k < a.records.size(); ++k) {
    CHECK(a.records[k].residual == b.records[k].residual);
    CHECK(a.records[k].energy == b.records[k].energy);
    CHECK(a.records[k].inner_iters == b.records[k].inner_iters);
  }
  CHECK(a.point.frame() == b.point.frame());
}

TEST_CASE("operator applies are counted per solver run") {
  const auto prob = make_gpe(100.0, 6);
  SolverConfig cfg;
  const ManifoldPoint start = smooth_start(prob, 1);
  const SolverResult g = newton_grassmann(prob, start, cfg);
  const SolverResult s = scf(prob, start, cfg);
  CHECK(g.operator_applies > 0);
  CHECK(s.operator_applies > 0);
  prob.reset_apply_count();
  const SolverResult again = newton_grassmann(prob, start, cfg);
  CHECK(prob.apply_count() == again.operator_applies);
  CHECK(again.operator_applies == g.operator_applies);
}
