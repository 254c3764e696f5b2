#include "gs/problems.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace gs::problems {

NonlinearityModel NonlinearityModel::cubic(double kappa) {
  if (kappa < 0.0) throw std::invalid_argument("nonlinearity: kappa must be nonnegative");
  return {[kappa](double r) { return 0.5 * kappa * r * r; }, [kappa](double r) { return kappa * r; },
          [kappa](double) { return kappa; }};
}

XcValues xc_exchange(double rho) {
  if (rho < 0.0 || std::isnan(rho)) throw std::invalid_argument("xc_exchange: negative density");
  const double c = std::cbrt(3.0 / std::numbers::pi);
  const double r13 = std::cbrt(rho);
  const double floored = std::cbrt(std::max(rho, xc_density_floor));
  return {-0.75 * c * r13, -c * r13, -c / (3.0 * floored * floored)};
}

Linearization::Linearization(SparseMatrix A, FrameOperator B, std::atomic<std::uint64_t>* counter)
    : A_(std::move(A)), B_(std::move(B)), counter_(counter) {}

Frame Linearization::apply_A(const Frame& V) const {
  if (counter_ != nullptr) counter_->fetch_add(1);
  return linalg::spmv(A_, V);
}

Frame Linearization::apply_B(const Frame& V) const {
  if (V.rows() != A_.rows()) throw std::invalid_argument("apply_B: dimension mismatch");
  if (counter_ != nullptr) counter_->fetch_add(1);
  return B_(V);
}

}  // namespace gs::problems
