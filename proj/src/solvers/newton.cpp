#include "gs/solvers.hpp"
#include "solver_internal.hpp"

#include <cmath>

#include <spdlog/spdlog.h>

namespace gs::solvers {

namespace detail {

NewtonDirection newton_direction(const State& s, Space space, double tol, int max_iter,
                                 const FrameOperator& precond) {
  const ManifoldPoint& x = s.x;
  FrameOperator project;
  if (space == Space::horizontal) {
    project = [&x](const Frame& Y) { return manifold::project_constraint_euclidean(x, Y); };
  } else {
    project = [&x](const Frame& Y) { return manifold::project_tangent_euclidean(x, Y); };
  }
  const DenseSmall& Lambda = s.d.Lambda;
  const problems::Linearization& lin = s.lin;
  const FrameOperator apply = [&](const Frame& eta) { return problems::newton_operator(lin, x, Lambda, eta); };
  const linalg::MinresResult m = linalg::minres_projected(apply, project, -s.d.r, tol, max_iter, precond);
  return {m.x, m.iterations, m.relative_residual, m.converged};
}

namespace {

SolverResult newton_loop(const Problem& problem, const ManifoldPoint& start, const SolverConfig& cfg, Space space) {
  cfg.validate();
  const Clock clock;
  const std::uint64_t applies0 = problem.apply_count();
  const FrameOperator precond = cfg.preconditioner ? kinetic_preconditioner(problem) : FrameOperator{};
  State s = evaluate(problem, start);
  const double res0 = s.residual;
  std::vector<ConvergenceRecord> records;
  Status status = Status::max_iterations;
  const char* label = space == Space::horizontal ? "newton_grassmann" : "newton_stiefel";

  for (int k = 1; k <= cfg.max_outer && s.residual > cfg.outer_tol; ++k) {
    const NewtonDirection nd =
        newton_direction(s, space, inner_tolerance(k, s.residual), cfg.inner_max_iter, precond);
    const Frame grad = problems::riemannian_gradient(s.x, s.d.r).frame;
    Frame psi = nd.direction;
    double slope = linalg::pair(psi, s.d.r);
    const double psi_norm2 = manifold::outer(psi, psi, s.x.metric()).trace();
    bool fallback = false;
    if (!(-slope >= cfg.eta * psi_norm2) || !psi.allFinite()) {
      psi = -grad;
      slope = -s.residual * s.residual;
      fallback = true;
      spdlog::debug("{}: iteration {} descent test failed, using -grad", label, k);
    }
    const LineSearch ls = armijo(problem, s.x, psi, slope, s.energy, 1.0, cfg);
    if (!ls.accepted) {
      spdlog::warn("{}: line search stagnated at iteration {} (residual {:.3e})", label, k, s.residual);
      status = Status::stagnation;
      break;
    }
    const double e_before = s.energy;
    s = evaluate(problem, *ls.point, ls.energy);
    records.push_back(make_record(k, s, ls.step, nd.iterations, clock.seconds(), fallback));
    spdlog::info("{} {:3d}  residual {:.3e}  energy {:.12e}  step {:.3e}  inner {}", label, k, s.residual,
                 s.energy, ls.step, nd.iterations);
    if (cfg.observer) {
      cfg.observer(IterationTrace{k, psi, grad, fallback, slope, ls.step, e_before, s.energy, e_before});
    }
  }
  if (s.residual <= cfg.outer_tol) status = Status::converged;
  return finish(problem, s, status, std::move(records), res0, applies0, clock);
}

}  // namespace
}  // namespace detail

SolverResult newton_grassmann(const Problem& problem, const ManifoldPoint& start, const SolverConfig& cfg) {
  return detail::newton_loop(problem, start, cfg, detail::Space::horizontal);
}

SolverResult newton_stiefel(const Problem& problem, const ManifoldPoint& start, const SolverConfig& cfg) {
  return detail::newton_loop(problem, start, cfg, detail::Space::tangent);
}

NewtonDirection grassmann_direction(const Problem& problem, const ManifoldPoint& phi, double tol, int max_iter,
                                    bool preconditioned) {
  const detail::State s = detail::evaluate(problem, phi);
  return detail::newton_direction(s, detail::Space::horizontal, tol, max_iter,
                                  preconditioned ? detail::kinetic_preconditioner(problem) : FrameOperator{});
}

NewtonDirection stiefel_direction(const Problem& problem, const ManifoldPoint& phi, double tol, int max_iter,
                                  bool preconditioned) {
  const detail::State s = detail::evaluate(problem, phi);
  return detail::newton_direction(s, detail::Space::tangent, tol, max_iter,
                                  preconditioned ? detail::kinetic_preconditioner(problem) : FrameOperator{});
}

}  // namespace gs::solvers
