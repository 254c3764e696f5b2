#include "gs/fem.hpp"
#include "fem_internal.hpp"

#include <algorithm>
#include <stdexcept>
#include <string>

namespace gs::fem {

namespace detail {

std::shared_ptr<const AssemblyPattern> make_pattern(const FeSpace& space, bool include_boundary) {
  auto pat = std::make_shared<AssemblyPattern>();
  const int cells = space.cells();
  const int nloc = space.nodes_per_cell();
  const int npd = space.nodes_per_dim();
  const Index n = include_boundary ? space.n_nodes() : space.n_dofs();
  const auto ncells = static_cast<std::size_t>(cells) * static_cast<std::size_t>(cells);

  pat->node_index.resize(ncells * static_cast<std::size_t>(nloc));
  for (int cy = 0; cy < cells; ++cy) {
    for (int cx = 0; cx < cells; ++cx) {
      const auto cell = static_cast<std::size_t>(cy * cells + cx);
      for (int a = 0; a < nloc; ++a) {
        const auto node = space.cell_node(cx, cy, a);
        pat->node_index[cell * static_cast<std::size_t>(nloc) + static_cast<std::size_t>(a)] =
            include_boundary ? static_cast<Index>(node[1]) * npd + node[0]
                             : space.dof_of_node(node[0], node[1]);
      }
    }
  }

  std::vector<Eigen::Triplet<double, int>> triplets;
  triplets.reserve(ncells * static_cast<std::size_t>(nloc * nloc));
  for (std::size_t cell = 0; cell < ncells; ++cell) {
    const Index* idx = &pat->node_index[cell * static_cast<std::size_t>(nloc)];
    for (int a = 0; a < nloc; ++a) {
      if (idx[a] < 0) continue;
      for (int b = 0; b < nloc; ++b) {
        if (idx[b] < 0) continue;
        triplets.emplace_back(static_cast<int>(idx[a]), static_cast<int>(idx[b]), 0.0);
      }
    }
  }
  pat->structure.resize(n, n);
  pat->structure.setFromTriplets(triplets.begin(), triplets.end());
  pat->structure.makeCompressed();

  const int* offsets = pat->structure.outerIndexPtr();
  const int* cols = pat->structure.innerIndexPtr();
  pat->slots.assign(ncells * static_cast<std::size_t>(nloc * nloc), -1);
  for (std::size_t cell = 0; cell < ncells; ++cell) {
    const Index* idx = &pat->node_index[cell * static_cast<std::size_t>(nloc)];
    for (int a = 0; a < nloc; ++a) {
      if (idx[a] < 0) continue;
      const int* first = cols + offsets[idx[a]];
      const int* last = cols + offsets[idx[a] + 1];
      for (int b = 0; b < nloc; ++b) {
        if (idx[b] < 0) continue;
        const int* hit = std::lower_bound(first, last, static_cast<int>(idx[b]));
        pat->slots[cell * static_cast<std::size_t>(nloc * nloc) + static_cast<std::size_t>(a * nloc + b)] =
            static_cast<int>(hit - cols);
      }
    }
  }
  return pat;
}

}  // namespace detail

namespace {

enum class Form { stiffness, mass };

// Accumulates sum_cells sum_q w_q c_q (form) into the pattern. The cell
// loop runs in a fixed order so the result is bit-reproducible.
SparseMatrix assemble(const FeSpace& space, Form form, const QuadratureField* coeff,
                      bool include_boundary) {
  const AssemblyPattern& pat = space.pattern(include_boundary);
  SparseMatrix A = pat.structure;
  double* vals = A.valuePtr();
  std::fill(vals, vals + A.nonZeros(), 0.0);

  const int cells = space.cells();
  const int nloc = space.nodes_per_cell();
  const int nqc = space.points_per_cell();
  const auto& N = space.shape_values();
  const auto& dx = space.shape_dx();
  const auto& dy = space.shape_dy();

  std::vector<double> local(static_cast<std::size_t>(nloc * nloc));
  std::vector<double> ref;  // coefficient-free local matrix, reused when coeff is absent
  for (int cell = 0; cell < cells * cells; ++cell) {
    if (coeff == nullptr && !ref.empty()) {
      local = ref;
    } else {
      std::fill(local.begin(), local.end(), 0.0);
      for (int q = 0; q < nqc; ++q) {
        double wq = space.weight(q);
        if (coeff != nullptr) wq *= (*coeff)(static_cast<Index>(cell) * nqc + q);
        if (wq == 0.0) continue;
        const std::size_t base = static_cast<std::size_t>(q * nloc);
        for (int a = 0; a < nloc; ++a) {
          for (int b = a; b < nloc; ++b) {
            const std::size_t ia = base + static_cast<std::size_t>(a);
            const std::size_t ib = base + static_cast<std::size_t>(b);
            const double v = form == Form::mass ? N[ia] * N[ib] : dx[ia] * dx[ib] + dy[ia] * dy[ib];
            local[static_cast<std::size_t>(a * nloc + b)] += wq * v;
          }
        }
      }
      for (int a = 0; a < nloc; ++a)
        for (int b = 0; b < a; ++b)
          local[static_cast<std::size_t>(a * nloc + b)] = local[static_cast<std::size_t>(b * nloc + a)];
      if (coeff == nullptr) ref = local;
    }
    const int* slot = &pat.slots[static_cast<std::size_t>(cell) * static_cast<std::size_t>(nloc * nloc)];
    for (int k = 0; k < nloc * nloc; ++k) {
      if (slot[k] >= 0) vals[slot[k]] += local[static_cast<std::size_t>(k)];
    }
  }
  return A;
}

}  // namespace

SparseMatrix assemble_stiffness(const FeSpace& space, bool include_boundary) {
  return assemble(space, Form::stiffness, nullptr, include_boundary);
}

SparseMatrix assemble_mass(const FeSpace& space, const PointFunction& weight, bool include_boundary) {
  if (!weight) return assemble(space, Form::mass, nullptr, include_boundary);
  const QuadratureField w = sample(space, weight);
  return assemble(space, Form::mass, &w, include_boundary);
}

SparseMatrix assemble_weighted_mass(const FeSpace& space, const QuadratureField& weight) {
  if (weight.size() != space.n_quadrature_points()) {
    throw std::invalid_argument("assemble_weighted_mass: expected " +
                                std::to_string(space.n_quadrature_points()) + " quadrature values");
  }
  return assemble(space, Form::mass, &weight, false);
}

SparseMatrix assemble_density_mass(const FeSpace& space, const Frame& phi) {
  return assemble_weighted_mass(space, density(space, phi));
}

}  // namespace gs::fem
