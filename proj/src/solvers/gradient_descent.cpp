#include "gs/solvers.hpp"
#include "solver_internal.hpp"

#include <algorithm>
#include <cmath>
#include <deque>

#include <spdlog/spdlog.h>

namespace gs::solvers {

SolverResult gradient_descent(const Problem& problem, const ManifoldPoint& start, const SolverConfig& cfg) {
  cfg.validate();
  const detail::Clock clock;
  const std::uint64_t applies0 = problem.apply_count();
  detail::State s = detail::evaluate(problem, start);
  const double res0 = s.residual;
  std::vector<ConvergenceRecord> records;
  Status status = Status::max_iterations;
  std::deque<double> window{s.energy};

  // Barzilai-Borwein trial steps; the first trial is 1.
  double tau0 = 1.0;
  for (int k = 1; k <= cfg.max_outer && s.residual > cfg.outer_tol; ++k) {
    const Frame grad = problems::riemannian_gradient(s.x, s.d.r).frame;
    const Frame psi = -grad;
    const double slope = -s.residual * s.residual;
    const double reference = *std::max_element(window.begin(), window.end());
    const detail::LineSearch ls = detail::armijo(problem, s.x, psi, slope, reference, tau0, cfg);
    if (!ls.accepted) {
      spdlog::warn("rgd: line search stagnated at iteration {} (residual {:.3e})", k, s.residual);
      status = Status::stagnation;
      break;
    }
    const double e_before = s.energy;
    s = detail::evaluate(problem, *ls.point, ls.energy);
    records.push_back(detail::make_record(k, s, ls.step, 0, clock.seconds(), false));
    spdlog::debug("rgd {:4d}  residual {:.3e}  energy {:.12e}  step {:.3e}", k, s.residual, s.energy, ls.step);
    if (cfg.observer) cfg.observer(IterationTrace{k, psi, grad, false, slope, ls.step, e_before, s.energy, reference});

    window.push_back(s.energy);
    while (static_cast<int>(window.size()) > cfg.nonmonotone_window) window.pop_front();

    const Frame grad_new = problems::riemannian_gradient(s.x, s.d.r).frame;
    const Frame step = ls.step * psi;
    const double ss = manifold::outer(step, step, s.x.metric()).trace();
    const double sy = manifold::outer(step, grad_new - grad, s.x.metric()).trace();
    tau0 = sy > 0.0 ? std::clamp(ss / sy, 1e-10, 1e10) : 1.0;
  }
  if (s.residual <= cfg.outer_tol) status = Status::converged;
  return detail::finish(problem, s, status, std::move(records), res0, applies0, clock);
}

InitialGuess initial_guess(const Problem& problem, int p, std::uint64_t seed, const SolverConfig& cfg) {
  Frame start = manifold::m_gram_schmidt(problem.starting_frame(p, seed), *problem.metric());
  if (problem.random_start()) {
    const SparseMatrix A = problem.hamiltonian(problem.density(start));
    linalg::EigenOptions eo = cfg.eigen;
    const linalg::EigenPairs e = linalg::smallest_eigenpairs(A, problem.metric()->matrix(), p, 1e-8, eo);
    start = e.vectors;
  }
  SolverConfig pre = cfg;
  pre.outer_tol = cfg.initial_tol;
  pre.max_outer = cfg.initial_max_iter;
  pre.observer = {};
  const SolverResult r = gradient_descent(problem, ManifoldPoint(start, problem.metric()), pre);
  if (r.status != Status::converged) {
    spdlog::warn("initial guess: gradient descent stopped at residual {:.3e}", r.residual);
  }
  spdlog::info("initial guess: residual {:.3e} after {} gradient steps", r.residual, r.records.size());
  return {r.point, r.residual, static_cast<int>(r.records.size())};
}

}  // namespace gs::solvers
