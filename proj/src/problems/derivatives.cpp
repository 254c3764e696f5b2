#include "gs/problems.hpp"

#include <cmath>
#include <stdexcept>

namespace gs::problems {

DualResidual dual_residual(const Linearization& lin, const ManifoldPoint& phi) {
  DualResidual out;
  out.APhi = lin.apply_A(phi.frame());
  out.Lambda = linalg::sym(phi.frame().transpose() * out.APhi);
  out.r = out.APhi - phi.m_frame() * out.Lambda;
  return out;
}

double residual_norm(const manifold::Metric& metric, const Frame& r) {
  return std::sqrt(std::max(0.0, linalg::pair(r, metric.solve(r))));
}

manifold::TangentVector riemannian_gradient(const ManifoldPoint& phi, const Frame& r) {
  return manifold::project_tangent(phi, phi.metric().solve(r));
}

Frame newton_operator(const Linearization& lin, const ManifoldPoint& phi, const DenseSmall& Lambda,
                      const Frame& eta) {
  return lin.apply_A(eta) + lin.apply_B(eta) - phi.metric().apply(eta) * linalg::sym(Lambda);
}

Frame hessian_apply_horizontal(const Linearization& lin, const ManifoldPoint& phi, const DenseSmall& Lambda,
                               const Frame& psi) {
  const DenseSmall c = phi.m_frame().transpose() * psi;
  const double scale = std::sqrt(std::max(0.0, manifold::outer(psi, psi, phi.metric()).trace()));
  if (c.norm() > 1e-8 * std::max(scale, 1e-300) && c.norm() > 1e-14) {
    throw std::invalid_argument("hessian_apply_horizontal: direction is not horizontal");
  }
  const Frame Z = newton_operator(lin, phi, Lambda, psi);
  return Z - phi.m_frame() * (phi.frame().transpose() * Z);
}

Frame stiefel_hessian_dual(const Linearization& lin, const ManifoldPoint& phi, const DenseSmall& Lambda,
                           const Frame& eta) {
  const Frame Z = newton_operator(lin, phi, Lambda, eta);
  return Z - phi.m_frame() * linalg::sym(phi.frame().transpose() * Z);
}

}  // namespace gs::problems
