#include "gs/linalg.hpp"

#include <cmath>
#include <memory>
#include <random>
#include <stdexcept>
#include <string>

namespace gs::linalg {

namespace {

using Dense = Eigen::MatrixXd;

// Coefficients C such that S*C is M-orthonormal, given the Gram matrix
// G = S^T M S. Directions with tiny Gram eigenvalues are dropped.
Dense svqb_coefficients(const Dense& G, double drop = 1e-13) {
  const Index k = G.rows();
  Vector d(k);
  for (Index i = 0; i < k; ++i) d(i) = G(i, i) > 0.0 ? 1.0 / std::sqrt(G(i, i)) : 0.0;
  const Dense Gs = d.asDiagonal() * sym(G) * d.asDiagonal();
  Eigen::SelfAdjointEigenSolver<Dense> es(Gs);
  const double top = es.eigenvalues().maxCoeff();
  std::vector<Index> keep;
  for (Index i = 0; i < k; ++i) {
    if (es.eigenvalues()(i) > drop * top) keep.push_back(i);
  }
  Dense C(k, static_cast<Index>(keep.size()));
  for (Index c = 0; c < C.cols(); ++c) {
    const Index i = keep[static_cast<std::size_t>(c)];
    C.col(c) = d.asDiagonal() * es.eigenvectors().col(i) / std::sqrt(es.eigenvalues()(i));
  }
  return C;
}

double inf_norm(const SparseMatrix& A) {
  double worst = 0.0;
  for (Index i = 0; i < A.outerSize(); ++i) {
    double row = 0.0;
    for (SparseMatrix::InnerIterator it(A, i); it; ++it) row += std::abs(it.value());
    worst = std::max(worst, row);
  }
  return worst;
}

}  // namespace

LobpcgResult lobpcg(const BlockOperator& A, const BlockOperator& M, Dense X0, int nev,
                    const LobpcgOptions& opts, const BlockOperator& precond,
                    const BlockOperator& project) {
  const Index m = X0.cols();
  if (nev < 1 || nev > m) throw std::invalid_argument("lobpcg: need 1 <= nev <= block size");

  auto constrain = [&](Dense V) { return project ? project(V) : V; };

  Dense X = constrain(std::move(X0));
  Dense MX = M(X);
  {
    const Dense C = svqb_coefficients(X.transpose() * MX);
    if (C.cols() < m) throw std::runtime_error("lobpcg: initial block is rank deficient");
    X = X * C;
  }
  Dense AX = A(X);
  MX = M(X);

  Vector theta;
  {
    Eigen::SelfAdjointEigenSolver<Dense> es(sym(X.transpose() * AX));
    X = X * es.eigenvectors();
    AX = AX * es.eigenvectors();
    MX = MX * es.eigenvectors();
    theta = es.eigenvalues();
  }

  Dense P, AP, MP;
  LobpcgResult out;
  Vector res(m);
  for (int it = 0;; ++it) {
    const Dense R = AX - MX * theta.asDiagonal();
    for (Index j = 0; j < m; ++j) res(j) = R.col(j).norm();
    out.iterations = it;
    if (res.head(nev).maxCoeff() <= opts.tol) {
      out.converged = true;
      break;
    }
    if (it >= opts.max_iter) break;

    Dense W = constrain(precond ? precond(R) : R);
    W -= X * (MX.transpose() * W);
    const Dense AW = A(W);
    const Dense MW = M(W);

    const Index np = P.cols();
    const Index ns = 2 * m + np;
    Dense S(X.rows(), ns), AS(X.rows(), ns), MS(X.rows(), ns);
    S << X, W, P;
    AS << AX, AW, AP;
    MS << MX, MW, MP;

    const Dense C = svqb_coefficients(S.transpose() * MS);
    if (C.cols() < m) break;
    const Dense H = C.transpose() * sym(S.transpose() * AS) * C;
    Eigen::SelfAdjointEigenSolver<Dense> es(sym(H));
    const Dense Y = C * es.eigenvectors().leftCols(m);
    theta = es.eigenvalues().head(m);

    X = S * Y;
    AX = AS * Y;
    MX = MS * Y;

    Dense Yp = Y;
    Yp.topRows(m).setZero();
    P = S * Yp;
    AP = AS * Yp;
    MP = MS * Yp;
  }

  // Final clean-up: exact M-orthonormality and a last Rayleigh-Ritz.
  const Dense C = svqb_coefficients(X.transpose() * M(X), 0.0);
  X = X * C;
  AX = A(X);
  MX = M(X);
  Eigen::SelfAdjointEigenSolver<Dense> es(sym(X.transpose() * AX));
  X = X * es.eigenvectors();
  AX = AX * es.eigenvectors();
  MX = MX * es.eigenvectors();
  theta = es.eigenvalues();
  const Dense R = AX - MX * theta.asDiagonal();

  out.vectors = X.leftCols(nev);
  out.values = theta.head(nev);
  out.residuals.resize(nev);
  for (Index j = 0; j < nev; ++j) out.residuals(j) = R.col(j).norm();
  return out;
}

EigenPairs smallest_eigenpairs(const SparseMatrix& A, const SparseMatrix& M, int p, double tol,
                               const EigenOptions& opts) {
  const Index n = A.rows();
  if (A.cols() != n || M.rows() != n || M.cols() != n) {
    throw std::invalid_argument("smallest_eigenpairs: dimension mismatch");
  }
  if (p < 1 || p > n) throw std::invalid_argument("smallest_eigenpairs: invalid p");

  const double scale = inf_norm(A);
  const bool dense = opts.method == EigenMethod::dense ||
                     (opts.method == EigenMethod::automatic && n <= opts.dense_threshold);
  EigenPairs out;
  if (dense) {
    const Dense Ad = Dense(A);
    const Dense Md = Dense(M);
    Eigen::GeneralizedSelfAdjointEigenSolver<Dense> es(Ad, Md);
    if (es.info() != Eigen::Success) {
      throw std::runtime_error("smallest_eigenpairs: dense generalized eigensolver failed");
    }
    out.vectors = es.eigenvectors().leftCols(p);
    out.values = es.eigenvalues().head(p);
    out.operator_applies = 1;
    return out;
  }

  // Shifted-inverse preconditioner (A + sigma M)^{-1} with the smallest
  // tried shift that makes the matrix positive definite.
  using Factor = Eigen::SimplicialLLT<Eigen::SparseMatrix<double>>;
  auto factor = std::make_shared<Factor>();
  const double shift_unit = scale / std::max(inf_norm(M), 1e-300);
  double sigma = 0.0;
  for (int attempt = 0;; ++attempt) {
    factor->compute(Eigen::SparseMatrix<double>(A + sigma * M));
    if (factor->info() == Eigen::Success) break;
    if (attempt > 12) throw std::runtime_error("smallest_eigenpairs: cannot build preconditioner");
    sigma = sigma == 0.0 ? 1e-3 * shift_unit : 4.0 * sigma;
  }

  const Eigen::SparseMatrix<double> Ac(A), Mc(M);
  int applies = 0;
  auto applyA = [&Ac, &applies](const Dense& X) -> Dense {
    ++applies;
    return Ac * X;
  };
  auto applyM = [&Mc](const Dense& X) -> Dense { return Mc * X; };
  auto applyT = [factor](const Dense& X) -> Dense {
    Dense Y(X.rows(), X.cols());
    for (Index j = 0; j < X.cols(); ++j) Y.col(j) = factor->solve(X.col(j));
    return Y;
  };

  const Index block = std::min<Index>(n, p + std::max(2, p / 2));
  std::mt19937 rng(opts.seed);
  std::uniform_real_distribution<double> uni(-1.0, 1.0);
  Dense X0(n, block);
  for (Index j = 0; j < block; ++j)
    for (Index i = 0; i < n; ++i) X0(i, j) = uni(rng);
  // One inverse-iteration sweep gives a much better start than noise.
  X0 = applyT(X0);
  if (opts.start.rows() == n) {
    const Index k = std::min<Index>(opts.start.cols(), block);
    X0.leftCols(k) = opts.start.leftCols(k);
  }

  LobpcgOptions lo;
  lo.max_iter = opts.max_iter;
  lo.tol = tol * scale;
  const LobpcgResult r = lobpcg(applyA, applyM, std::move(X0), p, lo, applyT);
  if (!r.converged && r.residuals.maxCoeff() > lo.tol) {
    throw std::runtime_error("smallest_eigenpairs: LOBPCG did not converge in " +
                             std::to_string(r.iterations) + " iterations");
  }
  out.vectors = r.vectors;
  out.values = r.values;
  out.iterations = r.iterations;
  out.operator_applies = applies;
  return out;
}

}  // namespace gs::linalg
