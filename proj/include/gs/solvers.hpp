#pragma once

// Inexact Riemannian Newton (Grassmann and Stiefel), SCF with linear
// density mixing and Riemannian gradient descent, with shared line search
// and bookkeeping.

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "gs/manifold.hpp"
#include "gs/problems.hpp"

namespace gs::solvers {

using manifold::ManifoldPoint;
using problems::Problem;

enum class Method { newton_grassmann, newton_stiefel, scf, rgd };

std::string method_name(Method m);
std::optional<Method> parse_method(const std::string& name);

/// Data handed to an observer after every accepted iteration.
struct IterationTrace {
  int iter = 0;
  Frame direction;   // psi before scaling by the step
  Frame gradient;    // primal Riemannian gradient at the old point
  bool fallback = false;
  double slope = 0.0;  // (grad, psi)_H
  double step = 0.0;
  double energy_before = 0.0;
  double energy_after = 0.0;
  double energy_reference = 0.0;  // Armijo reference (window max)
};

struct SolverConfig {
  double outer_tol = 1e-8;
  int max_outer = 100;
  int inner_max_iter = 1000;
  double eta = 1e-8;
  double delta = 0.5;
  double sigma = 1e-4;
  int nonmonotone_window = 1;
  int max_backtracks = 60;
  manifold::Retraction retraction = manifold::Retraction::qr;
  double scf_mixing = 0.7;
  bool preconditioner = false;
  double initial_tol = 1e-2;
  int initial_max_iter = 20000;
  linalg::EigenOptions eigen;
  std::function<void(const IterationTrace&)> observer;

  /// Throws std::invalid_argument when a parameter is out of range.
  void validate() const;
};

struct ConvergenceRecord {
  int iter = 0;
  double residual = 0.0;  // ||grad||_H at the new iterate
  double energy = 0.0;
  double step = 0.0;
  int inner_iters = 0;
  double wall_time = 0.0;  // seconds since the solver started
  bool fallback = false;
  double feasibility = 0.0;  // ||Phi^T M Phi - I||_F
};

enum class Status { converged, max_iterations, stagnation };

struct SolverResult {
  ManifoldPoint point;
  DenseSmall Lambda;
  double energy = 0.0;
  double residual = 0.0;
  double initial_residual = 0.0;
  Status status = Status::max_iterations;
  std::vector<ConvergenceRecord> records;
  std::uint64_t operator_applies = 0;
  double wall_time = 0.0;
};

SolverResult newton_grassmann(const Problem& problem, const ManifoldPoint& start, const SolverConfig& cfg);
SolverResult newton_stiefel(const Problem& problem, const ManifoldPoint& start, const SolverConfig& cfg);
SolverResult scf(const Problem& problem, const ManifoldPoint& start, const SolverConfig& cfg);
SolverResult gradient_descent(const Problem& problem, const ManifoldPoint& start, const SolverConfig& cfg);

SolverResult run(Method method, const Problem& problem, const ManifoldPoint& start, const SolverConfig& cfg);

/// Inner tolerance of outer iteration k (1-based) given ||grad E|| at the
/// current iterate.
double inner_tolerance(int k, double residual);

/// One Newton direction at phi, the quantity each Newton iteration solves for.
struct NewtonDirection {
  Frame direction;
  int iterations = 0;
  double relative_residual = 0.0;
  bool converged = false;
};

NewtonDirection grassmann_direction(const Problem& problem, const ManifoldPoint& phi, double tol, int max_iter,
                                    bool preconditioned = false);
NewtonDirection stiefel_direction(const Problem& problem, const ManifoldPoint& phi, double tol, int max_iter,
                                  bool preconditioned = false);

struct SaddleSolution {
  Frame direction;       // horizontal psi
  DenseSmall multiplier;
};

/// Dense bordered system: H psi + M Phi Mu = -A Phi, Phi^T M psi = 0.
/// Throws std::runtime_error when the bordered matrix is singular.
SaddleSolution saddle_newton_direction(const Problem& problem, const ManifoldPoint& phi);

struct LagrangeNewtonStep {
  Frame eta;
  DenseSmall Xi;
};

/// Dense Lagrange-Newton system with the symmetric-multiplier update:
///   A eta + B eta - M eta Lambda - M Phi Xi = -(A Phi - M Phi Lambda)
///   sym(Phi^T M eta) = -(Phi^T M Phi - I)/2
///   skew(Xi) = -skew(Lambda)
LagrangeNewtonStep lagrange_newton_step(const Problem& problem, const ManifoldPoint& phi,
                                        const DenseSmall& Lambda);

struct PositivityOptions {
  Index dense_limit = 1500;  // dense horizontal basis up to n * p entries
  double tol = 1e-10;
  int max_iter = 2000;
};

/// Smallest eigenvalue of the horizontal Hessian in the M metric.
double hessian_positivity_check(const Problem& problem, const ManifoldPoint& phi,
                                const PositivityOptions& opts = {});

struct InitialGuess {
  ManifoldPoint point;
  double residual = 0.0;
  int iterations = 0;
};

/// Starting frame, orthonormalized (plus one SCF step for random starts),
/// then gradient descent until the residual drops below cfg.initial_tol.
InitialGuess initial_guess(const Problem& problem, int p, std::uint64_t seed, const SolverConfig& cfg);

}  // namespace gs::solvers
