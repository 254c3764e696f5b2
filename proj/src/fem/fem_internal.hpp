#pragma once

#include <memory>
#include <vector>

#include "gs/fem.hpp"

namespace gs::fem {

/// Sparsity structure plus, for every cell, the value slot of each local
/// (row, column) pair; -1 where a boundary node was eliminated.
struct AssemblyPattern {
  SparseMatrix structure;
  std::vector<int> slots;  // cell * nloc^2 + a * nloc + b
  std::vector<Index> node_index;  // cell * nloc + a -> row, or -1
};

namespace detail {

std::shared_ptr<const AssemblyPattern> make_pattern(const FeSpace& space, bool include_boundary);

}  // namespace detail
}  // namespace gs::fem
