#include "gs/linalg.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

namespace gs::linalg {

Frame spmv(const SparseMatrix& A, const Frame& X) {
  if (A.cols() != X.rows()) {
    throw std::invalid_argument("spmv: matrix has " + std::to_string(A.cols()) +
                                " columns but frame has " + std::to_string(X.rows()) + " rows");
  }
  Frame Y(A.rows(), X.cols());
  for (Index j = 0; j < X.cols(); ++j) Y.col(j).noalias() = A * X.col(j);
  return Y;
}

double symmetry_defect(const SparseMatrix& A) {
  if (A.rows() != A.cols()) return std::numeric_limits<double>::infinity();
  double worst = 0.0;
  for (Index i = 0; i < A.outerSize(); ++i) {
    for (SparseMatrix::InnerIterator it(A, i); it; ++it) {
      worst = std::max(worst, std::abs(it.value() - A.coeff(it.col(), it.row())));
    }
  }
  return worst;
}

bool csr_well_formed(const SparseMatrix& A) {
  if (!A.isCompressed()) return false;
  const int* offsets = A.outerIndexPtr();
  const int* cols = A.innerIndexPtr();
  if (offsets[0] != 0) return false;
  for (Index i = 0; i < A.rows(); ++i) {
    if (offsets[i + 1] < offsets[i]) return false;
    for (int k = offsets[i]; k < offsets[i + 1]; ++k) {
      if (cols[k] < 0 || cols[k] >= A.cols()) return false;
      if (k > offsets[i] && cols[k] <= cols[k - 1]) return false;
    }
  }
  return offsets[A.rows()] == A.nonZeros();
}

SparseMatrix identity(Index n) {
  SparseMatrix I(n, n);
  I.setIdentity();
  I.makeCompressed();
  return I;
}

namespace {

bool is_identity(const SparseMatrix& M) {
  if (M.rows() != M.cols() || M.nonZeros() != M.rows()) return false;
  for (Index i = 0; i < M.outerSize(); ++i) {
    for (SparseMatrix::InnerIterator it(M, i); it; ++it) {
      if (it.col() != i || it.value() != 1.0) return false;
    }
  }
  return true;
}

}  // namespace

MassSolver::MassSolver(const SparseMatrix& M) : n_(M.rows()) {
  if (M.rows() != M.cols()) throw std::invalid_argument("MassSolver: matrix is not square");
  identity_ = is_identity(M);
  if (identity_) return;
  factor_ = std::make_shared<Factor>();
  factor_->compute(Eigen::SparseMatrix<double>(M));
  if (factor_->info() != Eigen::Success) {
    throw std::runtime_error("MassSolver: Cholesky factorization failed (matrix not SPD)");
  }
}

Frame MassSolver::solve(const Frame& R) const {
  if (R.rows() != n_) throw std::invalid_argument("MassSolver: dimension mismatch");
  if (identity_) return R;
  Frame X(R.rows(), R.cols());
  for (Index j = 0; j < R.cols(); ++j) X.col(j) = factor_->solve(R.col(j));
  return X;
}

Frame mass_solve(const SparseMatrix& M, const Frame& R) { return MassSolver(M).solve(R); }

}  // namespace gs::linalg
