#pragma once

// Sparse and small dense kernels shared by the whole workbench.

#include <functional>
#include <memory>

#include <Eigen/Dense>
#include <Eigen/Sparse>

namespace gs {

using Index = Eigen::Index;
using Vector = Eigen::VectorXd;

/// n x p coefficient matrix: one column per state.
using Frame = Eigen::MatrixXd;

/// p x p dense matrix (outer products, multipliers, rotations).
using DenseSmall = Eigen::MatrixXd;

/// Compressed sparse row storage.
using SparseMatrix = Eigen::SparseMatrix<double, Eigen::RowMajor, int>;

/// Linear map on frames.
using FrameOperator = std::function<Frame(const Frame&)>;

namespace linalg {

/// A * X, column by column. Throws std::invalid_argument on shape mismatch.
Frame spmv(const SparseMatrix& A, const Frame& X);

/// Max |A_ij - A_ji| over stored entries.
double symmetry_defect(const SparseMatrix& A);

/// Structural checks of the CSR arrays (offsets, bounds, sorted columns).
bool csr_well_formed(const SparseMatrix& A);

SparseMatrix identity(Index n);

/// Cached sparse Cholesky of an SPD matrix.
///
/// The factorization is computed once at construction; solve() is const and
/// may be called concurrently.
class MassSolver {
 public:
  explicit MassSolver(const SparseMatrix& M);

  Frame solve(const Frame& R) const;
  Index size() const { return n_; }

 private:
  using Factor = Eigen::SimplicialLLT<Eigen::SparseMatrix<double>>;
  Index n_ = 0;
  bool identity_ = false;
  std::shared_ptr<Factor> factor_;
};

/// One-shot convenience wrapper around MassSolver.
Frame mass_solve(const SparseMatrix& M, const Frame& R);

struct MinresResult {
  Frame x;
  int iterations = 0;
  double relative_residual = 0.0;  // ||project(apply(x)) - rhs|| / ||rhs||
  bool converged = false;
};

/// MINRES restricted to the subspace im(project).
///
/// `apply` must be symmetric on im(project) in the Frobenius pairing and
/// `project` must be the orthogonal projector onto that subspace. The iterate
/// and the Lanczos vectors are re-projected every step. An optional SPD
/// preconditioner is applied as project(precond(project(.))).
MinresResult minres_projected(const FrameOperator& apply, const FrameOperator& project,
                              const Frame& rhs, double tol, int max_iter,
                              const FrameOperator& precond = {});

struct SymEig {
  DenseSmall vectors;  // orthogonal, columns match `values`
  Vector values;       // ascending
};

SymEig sym_eig_small(const DenseSmall& S);

DenseSmall sym(const DenseSmall& S);
DenseSmall skew(const DenseSmall& S);

/// S^{-1/2} for SPD S via the spectral decomposition. Throws if S is singular.
DenseSmall inv_sqrt_spd(const DenseSmall& S);

/// Linear map on blocks of column vectors.
using BlockOperator = std::function<Eigen::MatrixXd(const Eigen::MatrixXd&)>;

struct LobpcgOptions {
  int max_iter = 500;
  double tol = 1e-10;  // absolute residual tolerance per wanted pair
  int guard_vectors = 2;
};

struct LobpcgResult {
  Eigen::MatrixXd vectors;  // M-orthonormal
  Vector values;            // ascending
  Vector residuals;         // ||A x - lambda M x|| per pair
  int iterations = 0;
  bool converged = false;
};

/// Locally optimal block preconditioned conjugate gradient for the `nev`
/// smallest eigenpairs of the symmetric pencil (A, M).
///
/// `precond` is an optional SPD preconditioner. `project`, if given, is the
/// M-orthogonal projector onto a constraint subspace that is invariant for
/// the pencil restricted to it; all search directions are kept inside it.
LobpcgResult lobpcg(const BlockOperator& A, const BlockOperator& M, Eigen::MatrixXd X0,
                    int nev, const LobpcgOptions& opts, const BlockOperator& precond = {},
                    const BlockOperator& project = {});

enum class EigenMethod { automatic, dense, iterative };

struct EigenOptions {
  EigenMethod method = EigenMethod::automatic;
  Index dense_threshold = 2000;  // automatic: dense solve up to this size
  int max_iter = 1000;
  unsigned seed = 7;
  Frame start;  // optional initial block for the iterative path
};

struct EigenPairs {
  Frame vectors;  // M-orthonormal
  Vector values;  // ascending
  int iterations = 0;
  int operator_applies = 0;  // block applications of A (1 on the dense path)
};

/// The p smallest eigenpairs of A x = lambda M x.
///
/// Residuals satisfy ||A x - lambda M x|| <= tol * ||A||_inf. Throws
/// std::runtime_error if the iterative path does not converge.
EigenPairs smallest_eigenpairs(const SparseMatrix& A, const SparseMatrix& M, int p, double tol,
                               const EigenOptions& opts = {});

/// Frobenius pairing tr(X^T Y).
inline double pair(const Frame& X, const Frame& Y) { return (X.array() * Y.array()).sum(); }

}  // namespace linalg
}  // namespace gs
