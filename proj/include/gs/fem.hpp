#pragma once

// Q1/Q2 finite elements on uniform Cartesian meshes of (-L, L)^2 with
// homogeneous Dirichlet boundary conditions.

#include <array>
#include <cstdint>
#include <functional>
#include <memory>
#include <string>
#include <vector>

#include "gs/linalg.hpp"

namespace gs::fem {

struct CartesianMesh {
  double half_width = 1.0;  // domain (-L, L)^2
  int cells_per_dim = 2;

  double h() const { return 2.0 * half_width / cells_per_dim; }
};

/// Tensor Gauss-Legendre rule; 1D points and weights on [0, 1].
struct QuadratureRule {
  std::vector<double> points;
  std::vector<double> weights;

  int size() const { return static_cast<int>(points.size()); }
};

QuadratureRule gauss_legendre(int npoints);

using PointFunction = std::function<double(double, double)>;

/// Values at every quadrature point of the mesh, cell-major
/// (cell = cy * cells + cx, point = qy * nq + qx).
using QuadratureField = Vector;

struct AssemblyPattern;

class FeSpace {
 public:
  FeSpace(CartesianMesh mesh, int order);

  const CartesianMesh& mesh() const { return mesh_; }
  int order() const { return order_; }
  double h() const { return mesh_.h(); }
  int cells() const { return mesh_.cells_per_dim; }

  /// Interior degrees of freedom, (order * cells - 1)^2.
  Index n_dofs() const { return static_cast<Index>(interior_per_dim()) * interior_per_dim(); }
  int nodes_per_dim() const { return order_ * mesh_.cells_per_dim + 1; }
  int interior_per_dim() const { return nodes_per_dim() - 2; }
  Index n_nodes() const { return static_cast<Index>(nodes_per_dim()) * nodes_per_dim(); }

  double node_coordinate(int i) const;
  std::array<double, 2> dof_coordinate(Index dof) const;

  /// Lexicographic interior dof of node (ix, iy), or -1 on the boundary.
  Index dof_of_node(int ix, int iy) const;

  int nodes_per_cell() const { return (order_ + 1) * (order_ + 1); }

  /// Global node indices (ix, iy) of local node `local` in cell (cx, cy).
  std::array<int, 2> cell_node(int cx, int cy, int local) const;

  const QuadratureRule& quadrature() const { return rule_; }
  int points_per_cell() const { return rule_.size() * rule_.size(); }
  Index n_quadrature_points() const {
    return static_cast<Index>(cells()) * cells() * points_per_cell();
  }
  std::array<double, 2> quadrature_point(int cx, int cy, int q) const;

  /// Reference shape values N[q * nloc + a] and scaled gradients.
  const std::vector<double>& shape_values() const { return values_; }
  const std::vector<double>& shape_dx() const { return dx_; }
  const std::vector<double>& shape_dy() const { return dy_; }
  /// Physical quadrature weight (identical on every cell).
  double weight(int q) const { return qweights_[static_cast<std::size_t>(q)]; }

  const AssemblyPattern& pattern(bool include_boundary) const;

 private:
  CartesianMesh mesh_;
  int order_;
  QuadratureRule rule_;
  std::vector<double> values_, dx_, dy_, qweights_;
  std::shared_ptr<const AssemblyPattern> interior_pattern_;
  std::shared_ptr<const AssemblyPattern> full_pattern_;
};

/// Throws std::invalid_argument for cells < 2 or order not in {1, 2}.
FeSpace build_space(double half_width, int cells_per_dim, int order);

/// K_ij = int grad chi_i . grad chi_j. With include_boundary the boundary
/// nodes are kept (numbered iy * nodes_per_dim + ix).
SparseMatrix assemble_stiffness(const FeSpace& space, bool include_boundary = false);

/// M_ij = int w chi_i chi_j, with w = 1 when no weight is given.
SparseMatrix assemble_mass(const FeSpace& space, const PointFunction& weight = {},
                           bool include_boundary = false);

/// Weighted mass with the weight given at quadrature points.
SparseMatrix assemble_weighted_mass(const FeSpace& space, const QuadratureField& weight);

QuadratureField sample(const FeSpace& space, const PointFunction& f);

/// FE function with interior coefficients `coeffs` evaluated at quadrature points.
QuadratureField evaluate(const FeSpace& space, const Vector& coeffs);

/// rho(phi) = sum_j phi_j^2 at quadrature points, from the FE interpolant.
QuadratureField density(const FeSpace& space, const Frame& phi);

/// M_{rho(phi)}; for p = 1 this is M_{phi^2}.
SparseMatrix assemble_density_mass(const FeSpace& space, const Frame& phi);

double integrate(const FeSpace& space, const QuadratureField& f);

/// out(i, j) = int c (phi . v) phi_j chi_i for every interior dof i and state j.
Frame coupled_load(const FeSpace& space, const Frame& phi, const Frame& v,
                   const QuadratureField& c);

/// Nodal interpolation at interior dofs.
Frame interpolate(const FeSpace& space, const PointFunction& f);

/// Interpolant of the constant 1 (all ones on interior dofs), not normalized.
Frame interpolate_one(const FeSpace& space);

/// p smooth columns 1, x, y, xy, x^2, y^2, ... interpolated at interior dofs.
Frame smooth_bumps(const FeSpace& space, int p);

/// Half the squared distance to the origin.
PointFunction harmonic_potential();

/// Piecewise constant field on a coarse Cartesian grid of (-L, L)^2.
class PiecewiseConstantField {
 public:
  PiecewiseConstantField(double half_width, int cells_per_dim, std::vector<double> values);

  double operator()(double x, double y) const;
  int cells_per_dim() const { return cells_; }
  const std::vector<double>& values() const { return values_; }

 private:
  double half_width_;
  int cells_;
  std::vector<double> values_;
};

/// Random field on cells of width 2 L epsilon taking values 0 or epsilon^-2,
/// each with probability 1/2, drawn from a seeded 64-bit Mersenne twister.
/// epsilon must be a power of two whose coarse grid the FE mesh refines.
PiecewiseConstantField build_disorder_potential(double half_width, double epsilon,
                                                std::uint64_t seed, int fe_cells_per_dim);

/// Writes "x,y,value" rows for every interior dof in lexicographic order.
void write_field_csv(const FeSpace& space, const Vector& values, const std::string& path);

}  // namespace gs::fem
