#include "gs/manifold.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

#include <spdlog/spdlog.h>

namespace gs::manifold {

using linalg::sym;

Metric::Metric(SparseMatrix M) : M_(std::move(M)), solver_(M_) {}

MetricPtr Metric::identity(Index n) { return std::make_shared<const Metric>(linalg::identity(n)); }

Frame Metric::apply(const Frame& X) const { return linalg::spmv(M_, X); }

DenseSmall outer(const Frame& V, const Frame& W, const SparseMatrix& M) {
  if (V.rows() != M.rows() || W.rows() != M.cols()) {
    throw std::invalid_argument("outer: dimension mismatch");
  }
  return V.transpose() * linalg::spmv(M, W);
}

DenseSmall outer(const Frame& V, const Frame& W, const Metric& M) { return outer(V, W, M.matrix()); }

double feasibility_defect(const Frame& phi, const Metric& M) {
  const DenseSmall G = outer(phi, phi, M);
  return (G - DenseSmall::Identity(G.rows(), G.cols())).norm();
}

ManifoldPoint::ManifoldPoint(Frame phi, MetricPtr metric) : phi_(std::move(phi)), metric_(std::move(metric)) {
  if (!metric_) throw std::invalid_argument("ManifoldPoint: null metric");
  if (phi_.rows() != metric_->size()) throw std::invalid_argument("ManifoldPoint: dimension mismatch");
  if (!phi_.allFinite()) throw std::invalid_argument("ManifoldPoint: non-finite frame");
  mphi_ = metric_->apply(phi_);
  const DenseSmall G = phi_.transpose() * mphi_;
  input_defect_ = (G - DenseSmall::Identity(G.rows(), G.cols())).norm();
  if (input_defect_ > reorth_tol) {
    const DenseSmall S = linalg::inv_sqrt_spd(G);
    phi_ = phi_ * S;
    mphi_ = mphi_ * S;
    reorth_ = true;
    spdlog::debug("re-orthonormalized frame with feasibility defect {:.3e}", input_defect_);
  }
  gram_ = mphi_.transpose() * mphi_;
  gram_eig_ = linalg::sym_eig_small(gram_);
}

TangentVector project_tangent(const ManifoldPoint& base, const Frame& Y) {
  return {Y - base.frame() * sym(base.m_frame().transpose() * Y)};
}

HorizontalVector project_horizontal(const ManifoldPoint& base, const Frame& Y) {
  return {Y - base.frame() * (base.m_frame().transpose() * Y)};
}

Frame project_constraint_euclidean(const ManifoldPoint& base, const Frame& Y) {
  const auto& e = base.euclidean_gram_eig();
  const DenseSmall GtY = base.m_frame().transpose() * Y;
  const DenseSmall coef = e.vectors * (e.values.cwiseInverse().asDiagonal() * (e.vectors.transpose() * GtY));
  return Y - base.m_frame() * coef;
}

Frame project_tangent_euclidean(const ManifoldPoint& base, const Frame& Y) {
  // Y - G S with C S + S C = 2 sym(G^T Y), solved in the eigenbasis of C.
  const auto& e = base.euclidean_gram_eig();
  const DenseSmall GtY = base.m_frame().transpose() * Y;
  DenseSmall R = e.vectors.transpose() * (GtY + GtY.transpose()) * e.vectors;
  for (Index i = 0; i < R.rows(); ++i)
    for (Index j = 0; j < R.cols(); ++j) R(i, j) /= e.values(i) + e.values(j);
  return Y - base.m_frame() * (e.vectors * R * e.vectors.transpose());
}

Frame m_gram_schmidt(const Frame& X, const Metric& M, DenseSmall* R) {
  const Index n = X.rows(), p = X.cols();
  Frame Q(n, p), MQ(n, p);
  DenseSmall Rm = DenseSmall::Zero(p, p);
  for (Index j = 0; j < p; ++j) {
    Vector v = X.col(j);
    const double scale = std::sqrt(std::max(0.0, v.dot(M.matrix() * v)));
    for (int pass = 0; pass < 2; ++pass) {
      for (Index i = 0; i < j; ++i) {
        const double c = MQ.col(i).dot(v);
        v -= c * Q.col(i);
        Rm(i, j) += c;
      }
    }
    Vector Mv = M.matrix() * v;
    const double nrm = std::sqrt(std::max(0.0, v.dot(Mv)));
    if (!(nrm > 1e-12 * scale) || nrm == 0.0) {
      throw std::runtime_error("m_gram_schmidt: column " + std::to_string(j) +
                               " is numerically dependent on the previous ones");
    }
    Rm(j, j) = nrm;
    Q.col(j) = v / nrm;
    MQ.col(j) = Mv / nrm;
  }
  if (R != nullptr) *R = Rm;
  return Q;
}

ManifoldPoint retract_qr(const ManifoldPoint& base, const Frame& step) {
  if (step.rows() != base.n() || step.cols() != base.p()) {
    throw std::invalid_argument("retract_qr: step shape does not match the base point");
  }
  return {m_gram_schmidt(base.frame() + step, base.metric()), base.metric_ptr()};
}

ManifoldPoint retract_polar(const ManifoldPoint& base, const Frame& step) {
  if (step.rows() != base.n() || step.cols() != base.p()) {
    throw std::invalid_argument("retract_polar: step shape does not match the base point");
  }
  const Frame Y = base.frame() + step;
  const DenseSmall G = outer(Y, Y, base.metric());
  return {Y * linalg::inv_sqrt_spd(G), base.metric_ptr()};
}

ManifoldPoint retract(const ManifoldPoint& base, const Frame& step, Retraction kind) {
  return kind == Retraction::qr ? retract_qr(base, step) : retract_polar(base, step);
}

ManifoldPoint grassmann_exp(const ManifoldPoint& base, const HorizontalVector& psi) {
  const Frame& Y = psi.frame;
  if (Y.rows() != base.n() || Y.cols() != base.p()) {
    throw std::invalid_argument("grassmann_exp: direction shape does not match the base point");
  }
  // psi = u S W^T with u = psi W S^{-1}; sin(S) S^{-1} is smooth at S = 0,
  // so zero singular values need no special treatment.
  const auto e = linalg::sym_eig_small(outer(Y, Y, base.metric()));
  const Index p = base.p();
  Vector c(p), sc(p);
  for (Index i = 0; i < p; ++i) {
    const double s = std::sqrt(std::max(0.0, e.values(i)));
    c(i) = std::cos(s);
    sc(i) = s < 1e-8 ? 1.0 - s * s / 6.0 : std::sin(s) / s;
  }
  const DenseSmall& W = e.vectors;
  const Frame out = base.frame() * (W * c.asDiagonal() * W.transpose()) + Y * (W * sc.asDiagonal() * W.transpose());
  return {out, base.metric_ptr()};
}

Vector principal_angle_sines(const Frame& A, const Frame& B, const Metric& M) {
  const Frame MA = M.apply(A);
  const Frame D = B - A * (MA.transpose() * B);
  const auto e = linalg::sym_eig_small(outer(D, D, M));
  return e.values.cwiseMax(0.0).cwiseSqrt().cwiseMin(1.0);
}

double subspace_distance(const Frame& A, const Frame& B, const Metric& M) {
  const Frame MA = M.apply(A);
  const Frame D = B - A * (MA.transpose() * B);
  return std::sqrt(std::max(0.0, outer(D, D, M).trace()));
}

}  // namespace gs::manifold
