#pragma once

// Generalized Stiefel manifold {Phi : Phi^T M Phi = I_p} and its Grassmann
// quotient.

#include <memory>

#include "gs/linalg.hpp"

namespace gs::manifold {

/// SPD mass matrix M with its cached Cholesky factorization.
class Metric {
 public:
  explicit Metric(SparseMatrix M);
  static std::shared_ptr<const Metric> identity(Index n);

  const SparseMatrix& matrix() const { return M_; }
  Index size() const { return M_.rows(); }
  Frame apply(const Frame& X) const;
  Frame solve(const Frame& R) const { return solver_.solve(R); }

 private:
  SparseMatrix M_;
  linalg::MassSolver solver_;
};

using MetricPtr = std::shared_ptr<const Metric>;

/// V^T M W.
DenseSmall outer(const Frame& V, const Frame& W, const SparseMatrix& M);
DenseSmall outer(const Frame& V, const Frame& W, const Metric& M);

/// ||Phi^T M Phi - I||_F.
double feasibility_defect(const Frame& phi, const Metric& M);

/// M-orthonormal frame. Construction re-orthonormalizes (polar factor) when
/// the defect exceeds `reorth_tol` and logs that it did so.
class ManifoldPoint {
 public:
  static constexpr double reorth_tol = 1e-10;

  ManifoldPoint(Frame phi, MetricPtr metric);

  const Frame& frame() const { return phi_; }
  /// M * Phi, cached.
  const Frame& m_frame() const { return mphi_; }
  const Metric& metric() const { return *metric_; }
  const MetricPtr& metric_ptr() const { return metric_; }
  Index n() const { return phi_.rows(); }
  Index p() const { return phi_.cols(); }

  /// Defect of the input frame before any correction.
  double input_defect() const { return input_defect_; }
  bool reorthonormalized() const { return reorth_; }

  /// Euclidean Gram matrix C = (M Phi)^T (M Phi) and its spectral factors.
  const DenseSmall& euclidean_gram() const { return gram_; }
  const linalg::SymEig& euclidean_gram_eig() const { return gram_eig_; }

 private:
  Frame phi_, mphi_;
  MetricPtr metric_;
  double input_defect_ = 0.0;
  bool reorth_ = false;
  DenseSmall gram_;
  linalg::SymEig gram_eig_;
};

/// Tangent at some base point: sym(Phi^T M eta) = 0.
struct TangentVector {
  Frame frame;
};

/// Horizontal at some base point: Phi^T M psi = 0.
struct HorizontalVector {
  Frame frame;
};

/// P(Y) = Y - Phi sym(Phi^T M Y).
TangentVector project_tangent(const ManifoldPoint& base, const Frame& Y);

/// P^h(Y) = Y - Phi Phi^T M Y.
HorizontalVector project_horizontal(const ManifoldPoint& base, const Frame& Y);

/// Euclidean orthogonal projector onto {X : Phi^T M X = 0}.
Frame project_constraint_euclidean(const ManifoldPoint& base, const Frame& Y);

/// Euclidean orthogonal projector onto {X : sym(Phi^T M X) = 0}.
Frame project_tangent_euclidean(const ManifoldPoint& base, const Frame& Y);

/// Two-pass modified Gram-Schmidt in the M inner product. On return
/// X = Q R with R upper triangular and positive on the diagonal.
/// Throws std::runtime_error on a (numerically) dependent column.
Frame m_gram_schmidt(const Frame& X, const Metric& M, DenseSmall* R = nullptr);

enum class Retraction { qr, polar };

ManifoldPoint retract_qr(const ManifoldPoint& base, const Frame& step);

/// (Phi + eta) <<Phi + eta, Phi + eta>>^{-1/2}. Throws on a singular Gram matrix.
ManifoldPoint retract_polar(const ManifoldPoint& base, const Frame& step);

ManifoldPoint retract(const ManifoldPoint& base, const Frame& step, Retraction kind);

/// Grassmann geodesic Phi W cos(S) W^T + u sin(S) W^T with psi = u S W^T.
ManifoldPoint grassmann_exp(const ManifoldPoint& base, const HorizontalVector& psi);

/// Sines of the principal angles between span(A) and span(B), both
/// M-orthonormal, ascending.
Vector principal_angle_sines(const Frame& A, const Frame& B, const Metric& M);

/// sqrt(sum sin^2 theta_i): projection distance between the subspaces.
double subspace_distance(const Frame& A, const Frame& B, const Metric& M);

}  // namespace gs::manifold
