#pragma once

#include <chrono>
#include <memory>
#include <optional>

#include "gs/solvers.hpp"

namespace gs::solvers::detail {

/// Everything a solver needs at one iterate.
struct State {
  ManifoldPoint x;
  problems::Linearization lin;
  problems::DualResidual d;
  double residual;
  double energy;
};

State evaluate(const Problem& problem, ManifoldPoint x);
State evaluate(const Problem& problem, ManifoldPoint x, double energy);

struct LineSearch {
  bool accepted = false;
  double step = 0.0;
  int backtracks = 0;
  std::optional<ManifoldPoint> point;
  double energy = 0.0;
};

/// Backtracking from tau0: accept the first tau = tau0 delta^l with
/// E(R(x, tau psi)) - reference <= sigma tau slope (up to roundoff).
LineSearch armijo(const Problem& problem, const ManifoldPoint& x, const Frame& psi, double slope,
                  double reference, double tau0, const SolverConfig& cfg);

/// Roundoff allowance in the Armijo test.
double armijo_slack(double reference);

class Clock {
 public:
  Clock() : start_(std::chrono::steady_clock::now()) {}
  double seconds() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
  }

 private:
  std::chrono::steady_clock::time_point start_;
};

/// (K + c M)^{-1} applied columnwise, or an empty operator.
FrameOperator kinetic_preconditioner(const Problem& problem);

enum class Space { horizontal, tangent };

NewtonDirection newton_direction(const State& s, Space space, double tol, int max_iter,
                                 const FrameOperator& precond);

ConvergenceRecord make_record(int iter, const State& s, double step, int inner, double wall, bool fallback);

SolverResult finish(const Problem& problem, const State& s, Status status, std::vector<ConvergenceRecord> records,
                    double initial_residual, std::uint64_t applies_before, const Clock& clock);

/// Dense matrix of eta -> A eta + B eta - M eta Lambda on vec(eta)
/// (column-major, n p unknowns).
Eigen::MatrixXd dense_newton_matrix(const problems::Linearization& lin, const ManifoldPoint& x,
                                    const DenseSmall& Lambda);

}  // namespace gs::solvers::detail
