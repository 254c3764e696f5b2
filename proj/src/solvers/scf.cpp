#include "gs/solvers.hpp"
#include "solver_internal.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include <spdlog/spdlog.h>

namespace gs::solvers {

namespace {

double inf_norm(const SparseMatrix& A) {
  double worst = 0.0;
  for (Index i = 0; i < A.outerSize(); ++i) worst = std::max(worst, A.row(i).cwiseAbs().sum());
  return worst;
}

}  // namespace

SolverResult scf(const Problem& problem, const ManifoldPoint& start, const SolverConfig& cfg) {
  cfg.validate();
  const detail::Clock clock;
  const std::uint64_t applies0 = problem.apply_count();
  detail::State s = detail::evaluate(problem, start);
  const double res0 = s.residual;
  const int p = static_cast<int>(start.p());
  Vector rho = problem.density(start.frame());
  std::vector<ConvergenceRecord> records;
  bool failed = false;

  for (int k = 1; k <= cfg.max_outer && s.residual > cfg.outer_tol; ++k) {
    const SparseMatrix A = problem.hamiltonian(rho);
    linalg::EigenOptions eo = cfg.eigen;
    eo.start = s.x.frame();
    // Absolute eigen-residual well below the outer tolerance.
    const double tol = std::max(1e-3 * cfg.outer_tol / std::max(inf_norm(A), 1e-300), 1e-15);
    linalg::EigenPairs e;
    try {
      e = linalg::smallest_eigenpairs(A, s.x.metric().matrix(), p, tol, eo);
    } catch (const std::runtime_error& err) {
      spdlog::warn("scf: stopping at iteration {}: {}", k, err.what());
      failed = true;
      break;
    }
    problem.count_applies(static_cast<std::uint64_t>(e.operator_applies));
    ManifoldPoint next(e.vectors, s.x.metric_ptr());
    rho = (1.0 - cfg.scf_mixing) * rho + cfg.scf_mixing * problem.density(next.frame());
    s = detail::evaluate(problem, std::move(next));
    records.push_back(detail::make_record(k, s, cfg.scf_mixing, e.iterations, clock.seconds(), false));
    spdlog::info("scf {:3d}  residual {:.3e}  energy {:.12e}  eigen iters {}", k, s.residual, s.energy,
                 e.iterations);
  }
  const Status status = s.residual <= cfg.outer_tol ? Status::converged
                        : failed                     ? Status::stagnation
                                                     : Status::max_iterations;
  return detail::finish(problem, s, status, std::move(records), res0, applies0, clock);
}

}  // namespace gs::solvers
