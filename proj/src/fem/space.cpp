#include "gs/fem.hpp"
#include "fem_internal.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

namespace gs::fem {

QuadratureRule gauss_legendre(int npoints) {
  if (npoints < 1) throw std::invalid_argument("gauss_legendre: need at least one point");
  QuadratureRule rule;
  rule.points.resize(static_cast<std::size_t>(npoints));
  rule.weights.resize(static_cast<std::size_t>(npoints));
  const int n = npoints;
  for (int i = 0; i < n; ++i) {
    // Newton on P_n from the Chebyshev-like initial guess.
    double x = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
    double dp = 1.0;
    for (int it = 0; it < 100; ++it) {
      double p0 = 1.0, p1 = x;
      for (int k = 2; k <= n; ++k) {
        const double pk = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = pk;
      }
      const double pn = n == 1 ? x : p1;
      const double pm = n == 1 ? 1.0 : p0;
      dp = n * (x * pn - pm) / (x * x - 1.0);
      const double dx = pn / dp;
      x -= dx;
      if (std::abs(dx) < 1e-16) break;
    }
    if (n == 1) {
      x = 0.0;
      dp = 1.0;
    }
    const double w = n == 1 ? 2.0 : 2.0 / ((1.0 - x * x) * dp * dp);
    // Map from [-1, 1] to [0, 1], ascending.
    const auto slot = static_cast<std::size_t>(n - 1 - i);
    rule.points[slot] = 0.5 * (x + 1.0);
    rule.weights[slot] = 0.5 * w;
  }
  return rule;
}

namespace {

double shape_1d(int order, int a, double s) {
  if (order == 1) return a == 0 ? 1.0 - s : s;
  switch (a) {
    case 0: return 2.0 * (s - 0.5) * (s - 1.0);
    case 1: return -4.0 * s * (s - 1.0);
    default: return 2.0 * s * (s - 0.5);
  }
}

double shape_1d_derivative(int order, int a, double s) {
  if (order == 1) return a == 0 ? -1.0 : 1.0;
  switch (a) {
    case 0: return 4.0 * s - 3.0;
    case 1: return -8.0 * s + 4.0;
    default: return 4.0 * s - 1.0;
  }
}

}  // namespace

FeSpace::FeSpace(CartesianMesh mesh, int order) : mesh_(mesh), order_(order) {
  if (order != 1 && order != 2) {
    throw std::invalid_argument("FeSpace: order must be 1 or 2, got " + std::to_string(order));
  }
  if (mesh.cells_per_dim < 2) throw std::invalid_argument("FeSpace: need at least 2 cells per dimension");
  if (!(mesh.half_width > 0.0)) throw std::invalid_argument("FeSpace: half width must be positive");

  rule_ = gauss_legendre(order + 3);
  const int nq = rule_.size();
  const int n1 = order + 1;
  const int nloc = n1 * n1;
  const double h = mesh_.h();
  values_.resize(static_cast<std::size_t>(nq * nq * nloc));
  dx_.resize(values_.size());
  dy_.resize(values_.size());
  qweights_.resize(static_cast<std::size_t>(nq * nq));
  for (int qy = 0; qy < nq; ++qy) {
    for (int qx = 0; qx < nq; ++qx) {
      const int q = qy * nq + qx;
      const double sx = rule_.points[static_cast<std::size_t>(qx)];
      const double sy = rule_.points[static_cast<std::size_t>(qy)];
      qweights_[static_cast<std::size_t>(q)] =
          rule_.weights[static_cast<std::size_t>(qx)] * rule_.weights[static_cast<std::size_t>(qy)] * h * h;
      for (int b = 0; b < n1; ++b) {
        for (int a = 0; a < n1; ++a) {
          const auto k = static_cast<std::size_t>(q * nloc + b * n1 + a);
          values_[k] = shape_1d(order, a, sx) * shape_1d(order, b, sy);
          dx_[k] = shape_1d_derivative(order, a, sx) * shape_1d(order, b, sy) / h;
          dy_[k] = shape_1d(order, a, sx) * shape_1d_derivative(order, b, sy) / h;
        }
      }
    }
  }
  interior_pattern_ = detail::make_pattern(*this, false);
  full_pattern_ = detail::make_pattern(*this, true);
}

double FeSpace::node_coordinate(int i) const {
  return -mesh_.half_width + i * (mesh_.h() / order_);
}

std::array<double, 2> FeSpace::dof_coordinate(Index dof) const {
  const int m = interior_per_dim();
  const int ix = static_cast<int>(dof % m) + 1;
  const int iy = static_cast<int>(dof / m) + 1;
  return {node_coordinate(ix), node_coordinate(iy)};
}

Index FeSpace::dof_of_node(int ix, int iy) const {
  const int last = nodes_per_dim() - 1;
  if (ix <= 0 || iy <= 0 || ix >= last || iy >= last) return -1;
  return static_cast<Index>(iy - 1) * interior_per_dim() + (ix - 1);
}

std::array<int, 2> FeSpace::cell_node(int cx, int cy, int local) const {
  const int n1 = order_ + 1;
  return {cx * order_ + local % n1, cy * order_ + local / n1};
}

std::array<double, 2> FeSpace::quadrature_point(int cx, int cy, int q) const {
  const int nq = rule_.size();
  const double h = mesh_.h();
  const double x0 = -mesh_.half_width + cx * h;
  const double y0 = -mesh_.half_width + cy * h;
  return {x0 + h * rule_.points[static_cast<std::size_t>(q % nq)],
          y0 + h * rule_.points[static_cast<std::size_t>(q / nq)]};
}

const AssemblyPattern& FeSpace::pattern(bool include_boundary) const {
  return include_boundary ? *full_pattern_ : *interior_pattern_;
}

FeSpace build_space(double half_width, int cells_per_dim, int order) {
  return FeSpace(CartesianMesh{half_width, cells_per_dim}, order);
}

}  // namespace gs::fem
