#include "gs/linalg.hpp"

#include <cmath>

namespace gs::linalg {

// Preconditioned MINRES in the Lanczos/Givens form of Elman, Silvester and
// Wathen, working on frames with the Frobenius pairing.
MinresResult minres_projected(const FrameOperator& apply, const FrameOperator& project,
                              const Frame& rhs, double tol, int max_iter,
                              const FrameOperator& precond) {
  const Frame b = project(rhs);
  const double bnorm = b.norm();
  MinresResult out;
  out.x = Frame::Zero(rhs.rows(), rhs.cols());
  if (bnorm == 0.0) {
    out.converged = true;
    return out;
  }

  auto prec = [&](const Frame& v) -> Frame { return precond ? project(precond(v)) : v; };
  auto true_residual = [&](const Frame& x) { return (project(apply(x)) - b).norm() / bnorm; };

  const Frame zero = Frame::Zero(rhs.rows(), rhs.cols());
  Frame v_prev = zero, v = b;
  Frame z = prec(v);
  double gamma_prev = 1.0;
  double gamma = std::sqrt(std::max(0.0, pair(z, v)));
  const double eta0 = gamma;
  double eta = gamma;
  double c_prev = 1.0, c = 1.0, s_prev = 0.0, s = 0.0;
  Frame w_prev = zero, w = zero;
  Frame& x = out.x;

  for (int it = 1; it <= max_iter; ++it) {
    z /= gamma;
    const Frame Az = project(apply(z));
    const double delta = pair(Az, z);
    Frame v_next = project(Az - (delta / gamma) * v - (gamma / gamma_prev) * v_prev);
    Frame z_next = prec(v_next);
    const double gamma_next = std::sqrt(std::max(0.0, pair(z_next, v_next)));

    const double alpha0 = c * delta - c_prev * s * gamma;
    const double alpha1 = std::hypot(alpha0, gamma_next);
    const double alpha2 = s * delta + c_prev * c * gamma;
    const double alpha3 = s_prev * gamma;
    out.iterations = it;
    if (alpha1 == 0.0) break;  // singular on the Krylov space

    c_prev = c;
    s_prev = s;
    c = alpha0 / alpha1;
    s = gamma_next / alpha1;

    Frame w_next = (z - alpha3 * w_prev - alpha2 * w) / alpha1;
    x = project(x + (c * eta) * w_next);
    eta = -s * eta;

    v_prev = std::move(v);
    v = std::move(v_next);
    z = std::move(z_next);
    w_prev = std::move(w);
    w = std::move(w_next);
    gamma_prev = gamma;
    gamma = gamma_next;

    const bool lucky = gamma == 0.0;
    if (std::abs(eta) <= tol * eta0 || lucky) {
      // The recurrence estimate is in the preconditioner norm; confirm.
      out.relative_residual = true_residual(x);
      if (out.relative_residual <= tol || lucky) {
        out.converged = out.relative_residual <= tol;
        return out;
      }
    }
  }
  out.relative_residual = true_residual(x);
  out.converged = out.relative_residual <= tol;
  return out;
}

}  // namespace gs::linalg
