#include "gs/solvers.hpp"
#include "solver_internal.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include <spdlog/spdlog.h>

namespace gs::solvers {

std::string method_name(Method m) {
  switch (m) {
    case Method::newton_grassmann: return "newton_grassmann";
    case Method::newton_stiefel: return "newton_stiefel";
    case Method::scf: return "scf";
    case Method::rgd: return "rgd";
  }
  return "unknown";
}

std::optional<Method> parse_method(const std::string& name) {
  for (Method m : {Method::newton_grassmann, Method::newton_stiefel, Method::scf, Method::rgd}) {
    if (method_name(m) == name) return m;
  }
  return std::nullopt;
}

void SolverConfig::validate() const {
  auto fail = [](const std::string& what) { throw std::invalid_argument("solver config: " + what); };
  if (!(outer_tol > 0.0)) fail("outer_tol must be positive");
  if (max_outer < 1) fail("max_outer must be at least 1");
  if (inner_max_iter < 1) fail("inner_max_iter must be at least 1");
  if (!(eta > 0.0 && eta < 1.0)) fail("eta must lie in (0, 1)");
  if (!(delta > 0.0 && delta < 1.0)) fail("delta must lie in (0, 1)");
  if (!(sigma > 0.0 && sigma <= 0.5)) fail("sigma must lie in (0, 1/2]");
  if (nonmonotone_window < 1) fail("nonmonotone_window must be at least 1");
  if (max_backtracks < 1) fail("max_backtracks must be at least 1");
  if (!(scf_mixing > 0.0 && scf_mixing <= 1.0)) fail("scf_mixing must lie in (0, 1]");
  if (!(initial_tol > 0.0)) fail("initial_tol must be positive");
  if (initial_max_iter < 1) fail("initial_max_iter must be at least 1");
}

double inner_tolerance(int k, double residual) { return std::min(1.0 / k, 1e-3 * residual); }

SolverResult run(Method method, const Problem& problem, const ManifoldPoint& start, const SolverConfig& cfg) {
  switch (method) {
    case Method::newton_grassmann: return newton_grassmann(problem, start, cfg);
    case Method::newton_stiefel: return newton_stiefel(problem, start, cfg);
    case Method::scf: return scf(problem, start, cfg);
    case Method::rgd: return gradient_descent(problem, start, cfg);
  }
  throw std::invalid_argument("unknown method");
}

namespace detail {

State evaluate(const Problem& problem, ManifoldPoint x) {
  const double e = problem.energy(x.frame());
  return evaluate(problem, std::move(x), e);
}

State evaluate(const Problem& problem, ManifoldPoint x, double energy) {
  if (!std::isfinite(energy)) throw std::runtime_error("energy is not finite");
  problems::Linearization lin = problem.linearize(x.frame());
  problems::DualResidual d = problems::dual_residual(lin, x);
  const double res = problems::residual_norm(x.metric(), d.r);
  return State{std::move(x), std::move(lin), std::move(d), res, energy};
}

double armijo_slack(double reference) { return 1e-14 * std::max(1.0, std::abs(reference)); }

LineSearch armijo(const Problem& problem, const ManifoldPoint& x, const Frame& psi, double slope,
                  double reference, double tau0, const SolverConfig& cfg) {
  LineSearch out;
  double tau = tau0;
  for (int l = 0; l <= cfg.max_backtracks; ++l) {
    std::optional<ManifoldPoint> y;
    try {
      y.emplace(manifold::retract(x, tau * psi, cfg.retraction));
    } catch (const std::exception& e) {
      spdlog::debug("retraction failed at step {:.3e}: {}", tau, e.what());
    }
    if (y) {
      const double e = problem.energy(y->frame());
      if (std::isfinite(e) && e - reference <= cfg.sigma * tau * slope + armijo_slack(reference)) {
        out.accepted = true;
        out.step = tau;
        out.backtracks = l;
        out.energy = e;
        out.point = std::move(y);
        return out;
      }
    }
    tau *= cfg.delta;
  }
  out.backtracks = cfg.max_backtracks;
  return out;
}

FrameOperator kinetic_preconditioner(const Problem& problem) {
  auto solver = std::make_shared<const linalg::MassSolver>(problem.kinetic_shifted());
  return [solver](const Frame& X) { return solver->solve(X); };
}

ConvergenceRecord make_record(int iter, const State& s, double step, int inner, double wall, bool fallback) {
  ConvergenceRecord r;
  r.iter = iter;
  r.residual = s.residual;
  r.energy = s.energy;
  r.step = step;
  r.inner_iters = inner;
  r.wall_time = wall;
  r.fallback = fallback;
  r.feasibility = manifold::feasibility_defect(s.x.frame(), s.x.metric());
  return r;
}

SolverResult finish(const Problem& problem, const State& s, Status status, std::vector<ConvergenceRecord> records,
                    double initial_residual, std::uint64_t applies_before, const Clock& clock) {
  return SolverResult{s.x,
                      s.d.Lambda,
                      s.energy,
                      s.residual,
                      initial_residual,
                      status,
                      std::move(records),
                      problem.apply_count() - applies_before,
                      clock.seconds()};
}

}  // namespace detail
}  // namespace gs::solvers
