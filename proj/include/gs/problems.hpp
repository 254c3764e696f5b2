#pragma once

// Energy functionals and their derivatives: the finite-element
// Gross-Pitaevskii problem and a finite-difference toy Kohn-Sham problem.
// Operators return dual-side frames (no mass inverse applied).

#include <array>
#include <atomic>
#include <cstdint>
#include <functional>
#include <memory>
#include <string>
#include <vector>

#include "gs/fem.hpp"
#include "gs/linalg.hpp"
#include "gs/manifold.hpp"

namespace gs::problems {

using manifold::ManifoldPoint;

/// Pointwise density nonlinearity: Gamma(rho), gamma = Gamma', beta = gamma'.
struct NonlinearityModel {
  std::function<double(double)> Gamma;
  std::function<double(double)> gamma;
  std::function<double(double)> beta;

  /// Gamma = kappa rho^2 / 2.
  static NonlinearityModel cubic(double kappa);
};

/// A(Phi) and B(Phi) frozen at one point.
class Linearization {
 public:
  Linearization(SparseMatrix A, FrameOperator B, std::atomic<std::uint64_t>* counter);

  Frame apply_A(const Frame& V) const;
  Frame apply_B(const Frame& V) const;
  const SparseMatrix& A() const { return A_; }

 private:
  SparseMatrix A_;
  FrameOperator B_;
  std::atomic<std::uint64_t>* counter_;
};

class Problem {
 public:
  virtual ~Problem() = default;

  virtual std::string name() const = 0;
  const manifold::MetricPtr& metric() const { return metric_; }
  Index n() const { return metric_->size(); }

  /// E(Phi) for any frame with n rows (feasibility is the caller's concern).
  virtual double energy(const Frame& phi) const = 0;

  /// Density representation used for mixing and comparisons.
  virtual Vector density(const Frame& phi) const = 0;

  /// A as a function of the density.
  virtual SparseMatrix hamiltonian(const Vector& rho) const = 0;

  virtual Linearization linearize(const Frame& phi) const = 0;

  /// SPD kinetic-type matrix used by the optional inner preconditioner.
  virtual SparseMatrix kinetic_shifted() const = 0;

  /// Deterministic starting frame before the initial-guess iteration.
  virtual Frame starting_frame(int p, std::uint64_t seed) const = 0;
  /// True when starting_frame is unstructured noise (the initial-guess
  /// protocol then takes one SCF step first).
  virtual bool random_start() const { return false; }

  /// Writes the converged state (density for p > 1) as CSV.
  virtual void write_field(const Frame& phi, const std::string& path) const = 0;

  /// Number of apply_A / apply_B calls on frames (eigensolver calls count
  /// one per operator application to a block).
  std::uint64_t apply_count() const { return applies_.load(); }
  void reset_apply_count() const { applies_.store(0); }
  void count_applies(std::uint64_t columns) const { applies_.fetch_add(columns); }

 protected:
  explicit Problem(manifold::MetricPtr metric) : metric_(std::move(metric)) {}
  std::atomic<std::uint64_t>* counter() const { return &applies_; }

 private:
  manifold::MetricPtr metric_;
  mutable std::atomic<std::uint64_t> applies_{0};
};

enum class PotentialKind { none, harmonic, disorder, both };

struct GpeSettings {
  double half_width = 8.0;
  int cells_per_dim = 32;
  int order = 2;
  double kappa = 100.0;
  PotentialKind potential = PotentialKind::harmonic;
  double epsilon = 0.0625;
  std::uint64_t seed = 1;
};

/// E = 1/2 tr(Phi^T K Phi) + tr(Phi^T M_v Phi) + 1/2 int Gamma(rho).
class GpeProblem final : public Problem {
 public:
  explicit GpeProblem(const GpeSettings& settings);
  GpeProblem(fem::FeSpace space, fem::PointFunction potential, NonlinearityModel model);

  std::string name() const override { return "gpe"; }
  double energy(const Frame& phi) const override;
  Vector density(const Frame& phi) const override;
  SparseMatrix hamiltonian(const Vector& rho) const override;
  Linearization linearize(const Frame& phi) const override;
  SparseMatrix kinetic_shifted() const override;
  Frame starting_frame(int p, std::uint64_t seed) const override;
  void write_field(const Frame& phi, const std::string& path) const override;

  const fem::FeSpace& space() const { return space_; }
  const SparseMatrix& stiffness() const { return K_; }
  const SparseMatrix& mass() const { return metric()->matrix(); }
  const SparseMatrix& potential_mass() const { return Mv_; }
  const NonlinearityModel& model() const { return model_; }

 private:
  fem::FeSpace space_;
  NonlinearityModel model_;
  SparseMatrix K_, Mv_, K2V_;  // K2V = K + 2 M_v
};

struct Atom {
  std::array<double, 3> center{0.0, 0.0, 0.0};
};

struct KsSettings {
  int grid = 10;            // interior points per dimension
  double half_width = 5.0;  // box (-a, a)^3
  std::vector<Atom> atoms{Atom{{-1.0, 0.0, 0.0}}, Atom{{1.0, 0.0, 0.0}}};
  double ion_depth = 4.0;
  double ion_width = 1.0;
};

/// Exchange-only LDA: energy density, potential and its derivative.
struct XcValues {
  double eps = 0.0;
  double mu = 0.0;
  double zeta = 0.0;
};

inline constexpr double xc_density_floor = 1e-12;

/// Throws std::invalid_argument for negative rho.
XcValues xc_exchange(double rho);

/// Toy Kohn-Sham model on a Dirichlet finite-difference grid with M = I.
///
/// rho = diag(Phi Phi^T) / w with cell volume w, and
/// E = 1/2 tr(Phi^T L Phi) + tr(Phi^T D Phi) + w/2 rho^T L^{-1} rho + w rho^T eps(rho).
class KsProblem final : public Problem {
 public:
  explicit KsProblem(const KsSettings& settings);

  std::string name() const override { return "ks"; }
  double energy(const Frame& phi) const override;
  Vector density(const Frame& phi) const override;
  SparseMatrix hamiltonian(const Vector& rho) const override;
  Linearization linearize(const Frame& phi) const override;
  SparseMatrix kinetic_shifted() const override;
  Frame starting_frame(int p, std::uint64_t seed) const override;
  bool random_start() const override { return true; }
  void write_field(const Frame& phi, const std::string& path) const override;

  /// Solves L v = rho.
  Vector hartree(const Vector& rho) const;

  const SparseMatrix& laplacian() const { return L_; }
  const Vector& ionic() const { return ion_; }
  double cell_volume() const { return w_; }
  double spacing() const { return h_; }
  int grid() const { return grid_; }
  std::array<double, 3> point(Index i) const;

 private:
  int grid_;
  double half_width_, h_, w_;
  SparseMatrix L_;
  Vector ion_;
  linalg::MassSolver hartree_solver_;
};

/// 7-point Dirichlet -Laplacian on `grid`^3 interior points with spacing h.
SparseMatrix fd_laplacian_3d(int grid, double h);

Vector ks_hartree(const KsProblem& problem, const Vector& rho);

struct DualResidual {
  Frame r;        // A Phi - M Phi Lambda
  DenseSmall Lambda;  // Phi^T A Phi
  Frame APhi;
};

DualResidual dual_residual(const Linearization& lin, const ManifoldPoint& phi);

/// (tr(r^T M^{-1} r))^{1/2}.
double residual_norm(const manifold::Metric& metric, const Frame& r);

/// Primal gradient M^{-1} r projected onto the tangent space.
manifold::TangentVector riemannian_gradient(const ManifoldPoint& phi, const Frame& r);

/// (I - M Phi Phi^T)(A psi + B psi - M psi Lambda) for horizontal psi.
/// Throws std::invalid_argument if psi is not horizontal.
Frame hessian_apply_horizontal(const Linearization& lin, const ManifoldPoint& phi,
                               const DenseSmall& Lambda, const Frame& psi);

/// A eta + B eta - M eta sym(Lambda), the unprojected Newton operator.
Frame newton_operator(const Linearization& lin, const ManifoldPoint& phi, const DenseSmall& Lambda,
                      const Frame& eta);

/// M times the Stiefel Riemannian Hessian applied to tangent eta:
/// Z - M Phi sym(Phi^T Z) with Z = newton_operator(eta).
Frame stiefel_hessian_dual(const Linearization& lin, const ManifoldPoint& phi, const DenseSmall& Lambda,
                           const Frame& eta);

}  // namespace gs::problems
