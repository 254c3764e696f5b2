#include "gs/fem.hpp"
#include "gs/io.hpp"
#include "fem_internal.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>
#include <stdexcept>
#include <string>

namespace gs::fem {

namespace {

void check_rows(const FeSpace& space, Index rows, const char* who) {
  if (rows != space.n_dofs()) {
    throw std::invalid_argument(std::string(who) + ": frame has " + std::to_string(rows) +
                                " rows, space has " + std::to_string(space.n_dofs()) + " dofs");
  }
}

// Local coefficients of every column of `X` on one cell (zero on the boundary).
void gather(const AssemblyPattern& pat, int cell, int nloc, const Frame& X, Eigen::MatrixXd& out) {
  out.resize(nloc, X.cols());
  const Index* idx = &pat.node_index[static_cast<std::size_t>(cell) * static_cast<std::size_t>(nloc)];
  for (int a = 0; a < nloc; ++a) {
    if (idx[a] < 0) {
      out.row(a).setZero();
    } else {
      out.row(a) = X.row(idx[a]);
    }
  }
}

Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>> shape_table(
    const FeSpace& space) {
  return {space.shape_values().data(), space.points_per_cell(), space.nodes_per_cell()};
}

}  // namespace

QuadratureField sample(const FeSpace& space, const PointFunction& f) {
  const int cells = space.cells();
  const int nqc = space.points_per_cell();
  QuadratureField out(space.n_quadrature_points());
  for (int cy = 0; cy < cells; ++cy) {
    for (int cx = 0; cx < cells; ++cx) {
      const Index base = static_cast<Index>(cy * cells + cx) * nqc;
      for (int q = 0; q < nqc; ++q) {
        const auto x = space.quadrature_point(cx, cy, q);
        out(base + q) = f(x[0], x[1]);
      }
    }
  }
  return out;
}

QuadratureField evaluate(const FeSpace& space, const Vector& coeffs) {
  check_rows(space, coeffs.size(), "evaluate");
  const AssemblyPattern& pat = space.pattern(false);
  const int nloc = space.nodes_per_cell();
  const int nqc = space.points_per_cell();
  const auto N = shape_table(space);
  QuadratureField out(space.n_quadrature_points());
  Eigen::MatrixXd loc;
  for (int cell = 0; cell < space.cells() * space.cells(); ++cell) {
    gather(pat, cell, nloc, coeffs, loc);
    out.segment(static_cast<Index>(cell) * nqc, nqc) = N * loc;
  }
  return out;
}

QuadratureField density(const FeSpace& space, const Frame& phi) {
  check_rows(space, phi.rows(), "density");
  const AssemblyPattern& pat = space.pattern(false);
  const int nloc = space.nodes_per_cell();
  const int nqc = space.points_per_cell();
  const auto N = shape_table(space);
  QuadratureField out(space.n_quadrature_points());
  Eigen::MatrixXd loc;
  for (int cell = 0; cell < space.cells() * space.cells(); ++cell) {
    gather(pat, cell, nloc, phi, loc);
    const Eigen::MatrixXd vals = N * loc;
    out.segment(static_cast<Index>(cell) * nqc, nqc) = vals.rowwise().squaredNorm();
  }
  return out;
}

double integrate(const FeSpace& space, const QuadratureField& f) {
  if (f.size() != space.n_quadrature_points()) {
    throw std::invalid_argument("integrate: wrong number of quadrature values");
  }
  const int nqc = space.points_per_cell();
  double total = 0.0;
  for (Index cell = 0; cell < static_cast<Index>(space.cells()) * space.cells(); ++cell) {
    for (int q = 0; q < nqc; ++q) total += space.weight(q) * f(cell * nqc + q);
  }
  return total;
}

Frame coupled_load(const FeSpace& space, const Frame& phi, const Frame& v, const QuadratureField& c) {
  check_rows(space, phi.rows(), "coupled_load");
  check_rows(space, v.rows(), "coupled_load");
  if (phi.cols() != v.cols()) throw std::invalid_argument("coupled_load: column mismatch");
  if (c.size() != space.n_quadrature_points()) {
    throw std::invalid_argument("coupled_load: wrong number of quadrature values");
  }
  const AssemblyPattern& pat = space.pattern(false);
  const int nloc = space.nodes_per_cell();
  const int nqc = space.points_per_cell();
  const auto N = shape_table(space);
  Frame out = Frame::Zero(phi.rows(), phi.cols());
  Eigen::MatrixXd lphi, lv;
  for (int cell = 0; cell < space.cells() * space.cells(); ++cell) {
    gather(pat, cell, nloc, phi, lphi);
    gather(pat, cell, nloc, v, lv);
    const Eigen::MatrixXd fq = N * lphi;  // nqc x p
    const Eigen::MatrixXd vq = N * lv;
    Vector s = (fq.array() * vq.array()).rowwise().sum();
    for (int q = 0; q < nqc; ++q) s(q) *= space.weight(q) * c(static_cast<Index>(cell) * nqc + q);
    const Eigen::MatrixXd loc = N.transpose() * (s.asDiagonal() * fq);  // nloc x p
    const Index* idx = &pat.node_index[static_cast<std::size_t>(cell) * static_cast<std::size_t>(nloc)];
    for (int a = 0; a < nloc; ++a) {
      if (idx[a] >= 0) out.row(idx[a]) += loc.row(a);
    }
  }
  return out;
}

Frame interpolate(const FeSpace& space, const PointFunction& f) {
  Frame out(space.n_dofs(), 1);
  for (Index i = 0; i < space.n_dofs(); ++i) {
    const auto x = space.dof_coordinate(i);
    out(i, 0) = f(x[0], x[1]);
  }
  return out;
}

Frame interpolate_one(const FeSpace& space) { return Frame::Ones(space.n_dofs(), 1); }

Frame smooth_bumps(const FeSpace& space, int p) {
  if (p < 1) throw std::invalid_argument("smooth_bumps: p must be positive");
  const double L = space.mesh().half_width;
  Frame out(space.n_dofs(), p);
  int col = 0;
  for (int degree = 0; col < p; ++degree) {
    for (int ey = 0; ey <= degree && col < p; ++ey) {
      const int ex = degree - ey;
      out.col(col++) = interpolate(space, [=](double x, double y) {
        return std::pow(x / L, ex) * std::pow(y / L, ey);
      });
    }
  }
  return out;
}

PointFunction harmonic_potential() {
  return [](double x, double y) { return 0.5 * (x * x + y * y); };
}

PiecewiseConstantField::PiecewiseConstantField(double half_width, int cells_per_dim,
                                               std::vector<double> values)
    : half_width_(half_width), cells_(cells_per_dim), values_(std::move(values)) {
  if (cells_ < 1 || values_.size() != static_cast<std::size_t>(cells_) * static_cast<std::size_t>(cells_)) {
    throw std::invalid_argument("PiecewiseConstantField: value count does not match the grid");
  }
}

double PiecewiseConstantField::operator()(double x, double y) const {
  const double width = 2.0 * half_width_ / cells_;
  auto cell_of = [&](double t) {
    const int c = static_cast<int>(std::floor((t + half_width_) / width));
    return std::clamp(c, 0, cells_ - 1);
  };
  return values_[static_cast<std::size_t>(cell_of(y) * cells_ + cell_of(x))];
}

PiecewiseConstantField build_disorder_potential(double half_width, double epsilon, std::uint64_t seed,
                                                int fe_cells_per_dim) {
  if (!(epsilon > 0.0) || epsilon >= 1.0) {
    throw std::invalid_argument("disorder potential: epsilon must lie in (0, 1)");
  }
  const double k = std::round(-std::log2(epsilon));
  if (std::abs(std::ldexp(1.0, -static_cast<int>(k)) - epsilon) > 1e-15 || k > 30) {
    throw std::invalid_argument("disorder potential: epsilon must be a power of two, got " +
                                std::to_string(epsilon));
  }
  const int coarse = 1 << static_cast<int>(k);
  if (fe_cells_per_dim % coarse != 0) {
    throw std::invalid_argument("disorder potential: " + std::to_string(coarse) +
                                " coarse cells per dimension do not divide the FE mesh (" +
                                std::to_string(fe_cells_per_dim) + " cells)");
  }
  const double high = 1.0 / (epsilon * epsilon);
  std::mt19937_64 engine(seed);
  std::vector<double> values(static_cast<std::size_t>(coarse) * static_cast<std::size_t>(coarse));
  for (double& v : values) v = (engine() >> 63) != 0 ? high : 0.0;
  return {half_width, coarse, std::move(values)};
}

void write_field_csv(const FeSpace& space, const Vector& values, const std::string& path) {
  check_rows(space, values.size(), "write_field_csv");
  std::ostringstream out;
  out << "x,y,value\n";
  for (Index i = 0; i < space.n_dofs(); ++i) {
    const auto x = space.dof_coordinate(i);
    out << io::format_real(x[0]) << ',' << io::format_real(x[1]) << ',' << io::format_real(values(i))
        << '\n';
  }
  io::write_file_atomic(path, out.str());
}

}  // namespace gs::fem
