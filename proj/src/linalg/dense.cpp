#include "gs/linalg.hpp"

#include <stdexcept>

namespace gs::linalg {

SymEig sym_eig_small(const DenseSmall& S) {
  if (S.rows() != S.cols()) throw std::invalid_argument("sym_eig_small: matrix is not square");
  Eigen::SelfAdjointEigenSolver<DenseSmall> es(sym(S));
  return {es.eigenvectors(), es.eigenvalues()};
}

DenseSmall sym(const DenseSmall& S) { return 0.5 * (S + S.transpose()); }

DenseSmall skew(const DenseSmall& S) { return 0.5 * (S - S.transpose()); }

DenseSmall inv_sqrt_spd(const DenseSmall& S) {
  const SymEig eig = sym_eig_small(S);
  const double largest = eig.values.cwiseAbs().maxCoeff();
  if (eig.values.minCoeff() <= 1e-14 * std::max(largest, 1e-300)) {
    throw std::runtime_error("inv_sqrt_spd: matrix is singular or indefinite");
  }
  const Vector d = eig.values.cwiseSqrt().cwiseInverse();
  return eig.vectors * d.asDiagonal() * eig.vectors.transpose();
}

}  // namespace gs::linalg
