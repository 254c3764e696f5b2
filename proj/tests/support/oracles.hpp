#pragma once

// Independent reference computations shared by the unit and acceptance
// suites. They only touch the energy functional and the retractions.

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

#include "gs/manifold.hpp"
#include "gs/problems.hpp"

namespace gs::oracle {

inline Frame random_frame(Index n, Index p, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> g;
  Frame X(n, p);
  for (Index j = 0; j < p; ++j)
    for (Index i = 0; i < n; ++i) X(i, j) = g(rng);
  return X;
}

inline DenseSmall random_orthogonal(Index p, std::uint64_t seed) {
  return random_frame(p, p, seed).householderQr().householderQ();
}

inline manifold::ManifoldPoint random_point(const problems::Problem& prob, Index p, std::uint64_t seed) {
  return {manifold::m_gram_schmidt(random_frame(prob.n(), p, seed), *prob.metric()), prob.metric()};
}

inline double m_norm(const manifold::Metric& M, const Frame& X) {
  return std::sqrt(std::max(0.0, manifold::outer(X, X, M).trace()));
}

inline Frame random_tangent(const manifold::ManifoldPoint& x, std::uint64_t seed) {
  Frame t = manifold::project_tangent(x, random_frame(x.n(), x.p(), seed)).frame;
  return t / m_norm(x.metric(), t);
}

inline Frame random_horizontal(const manifold::ManifoldPoint& x, std::uint64_t seed) {
  Frame t = manifold::project_horizontal(x, random_frame(x.n(), x.p(), seed)).frame;
  return t / m_norm(x.metric(), t);
}

/// d/dt E(R_qr(Phi, t eta)) at 0, fourth-order central differences; the
/// step with the smallest spread between neighbouring estimates wins.
inline double fd_directional_derivative(const problems::Problem& prob, const manifold::ManifoldPoint& x,
                                        const Frame& eta) {
  auto f = [&](double t) { return prob.energy(manifold::retract_qr(x, t * eta).frame()); };
  double best = 0.0, spread = std::numeric_limits<double>::infinity(), prev = 0.0;
  bool have_prev = false;
  for (double t : {1e-2, 3e-3, 1e-3, 3e-4, 1e-4}) {
    const double d = (-f(2 * t) + 8 * f(t) - 8 * f(-t) + f(-2 * t)) / (12 * t);
    if (have_prev && std::abs(d - prev) < spread) {
      spread = std::abs(d - prev);
      best = d;
    }
    prev = d;
    have_prev = true;
  }
  return best;
}

/// d^2/dt^2 E(R_polar(Phi, t eta)) at 0, fourth-order central differences
/// with the same step selection as the first derivative.
inline double fd_second_derivative(const problems::Problem& prob, const manifold::ManifoldPoint& x,
                                   const Frame& eta) {
  auto f = [&](double s) { return prob.energy(manifold::retract_polar(x, s * eta).frame()); };
  const double f0 = f(0.0);
  double best = 0.0, spread = std::numeric_limits<double>::infinity(), prev = 0.0;
  bool have_prev = false;
  for (double t : {1e-2, 3e-3, 1e-3, 3e-4, 1e-4}) {
    const double d = (-f(2 * t) + 16 * f(t) - 30 * f0 + 16 * f(-t) - f(-2 * t)) / (12 * t * t);
    if (have_prev && std::abs(d - prev) < spread) {
      spread = std::abs(d - prev);
      best = d;
    }
    prev = d;
    have_prev = true;
  }
  return best;
}

/// Polarized FD Hessian form (xi, Hess eta).
inline double fd_hessian_form(const problems::Problem& prob, const manifold::ManifoldPoint& x,
                              const Frame& xi, const Frame& eta) {
  return 0.25 * (fd_second_derivative(prob, x, xi + eta) - fd_second_derivative(prob, x, xi - eta));
}

}  // namespace gs::oracle
