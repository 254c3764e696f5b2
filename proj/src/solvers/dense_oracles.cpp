#include "gs/solvers.hpp"
#include "solver_internal.hpp"

#include <algorithm>
#include <cmath>
#include <memory>
#include <random>
#include <stdexcept>

#include <spdlog/spdlog.h>

namespace gs::solvers {

namespace detail {

Eigen::MatrixXd dense_newton_matrix(const problems::Linearization& lin, const ManifoldPoint& x,
                                    const DenseSmall& Lambda) {
  const Index n = x.n(), p = x.p();
  Eigen::MatrixXd H(n * p, n * p);
  Frame unit = Frame::Zero(n, p);
  for (Index j = 0; j < p; ++j) {
    for (Index i = 0; i < n; ++i) {
      unit(i, j) = 1.0;
      const Frame col = problems::newton_operator(lin, x, Lambda, unit);
      H.col(j * n + i) = Eigen::Map<const Vector>(col.data(), n * p);
      unit(i, j) = 0.0;
    }
  }
  return linalg::sym(H);
}

}  // namespace detail

SaddleSolution saddle_newton_direction(const Problem& problem, const ManifoldPoint& phi) {
  const Index n = phi.n(), p = phi.p(), np = n * p;
  const auto lin = problem.linearize(phi.frame());
  const auto d = problems::dual_residual(lin, phi);
  const Eigen::MatrixXd H = detail::dense_newton_matrix(lin, phi, d.Lambda);
  const Frame& G = phi.m_frame();

  Eigen::MatrixXd K = Eigen::MatrixXd::Zero(np + p * p, np + p * p);
  K.topLeftCorner(np, np) = H;
  for (Index b = 0; b < p; ++b)
    for (Index a = 0; a < p; ++a) {
      const Index c = np + b * p + a;
      K.block(b * n, c, n, 1) = G.col(a);
      K.block(c, b * n, 1, n) = G.col(a).transpose();
    }
  Vector rhs = Vector::Zero(np + p * p);
  rhs.head(np) = -Eigen::Map<const Vector>(d.APhi.data(), np);

  const Eigen::FullPivLU<Eigen::MatrixXd> lu(K);
  if (!lu.isInvertible()) throw std::runtime_error("saddle_newton_direction: bordered matrix is singular");
  const Vector sol = lu.solve(rhs);
  SaddleSolution out;
  out.direction = Eigen::Map<const Frame>(sol.data(), n, p);
  out.multiplier = Eigen::Map<const DenseSmall>(sol.data() + np, p, p);
  return out;
}

LagrangeNewtonStep lagrange_newton_step(const Problem& problem, const ManifoldPoint& phi,
                                        const DenseSmall& Lambda) {
  const Index n = phi.n(), p = phi.p(), np = n * p;
  const auto lin = problem.linearize(phi.frame());
  const Frame APhi = lin.apply_A(phi.frame());
  const Frame& G = phi.m_frame();
  const Eigen::MatrixXd H = detail::dense_newton_matrix(lin, phi, Lambda);
  const Index size = np + p * p;

  Eigen::MatrixXd K = Eigen::MatrixXd::Zero(size, size);
  Vector rhs = Vector::Zero(size);
  K.topLeftCorner(np, np) = H;
  for (Index b = 0; b < p; ++b)
    for (Index a = 0; a < p; ++a) K.block(b * n, np + b * p + a, n, 1) = -G.col(a);
  const Frame r = APhi - G * Lambda;
  rhs.head(np) = -Eigen::Map<const Vector>(r.data(), np);

  const DenseSmall defect = phi.frame().transpose() * G - DenseSmall::Identity(p, p);
  Index row = np;
  for (Index b = 0; b < p; ++b)
    for (Index a = 0; a <= b; ++a, ++row) {
      // (Phi^T M eta + eta^T M Phi)_ab
      K.block(row, b * n, 1, n) += G.col(a).transpose();
      K.block(row, a * n, 1, n) += G.col(b).transpose();
      rhs(row) = -defect(a, b);
    }
  for (Index b = 0; b < p; ++b)
    for (Index a = 0; a < b; ++a, ++row) {
      K(row, np + b * p + a) = 1.0;
      K(row, np + a * p + b) = -1.0;
      rhs(row) = -(Lambda(a, b) - Lambda(b, a));
    }

  const Eigen::FullPivLU<Eigen::MatrixXd> lu(K);
  if (!lu.isInvertible()) throw std::runtime_error("lagrange_newton_step: KKT matrix is singular");
  const Vector sol = lu.solve(rhs);
  LagrangeNewtonStep out;
  out.eta = Eigen::Map<const Frame>(sol.data(), n, p);
  out.Xi = Eigen::Map<const DenseSmall>(sol.data() + np, p, p);
  return out;
}

namespace {

double positivity_dense(const problems::Linearization& lin, const ManifoldPoint& x, const DenseSmall& Lambda) {
  const Index n = x.n(), p = x.p();
  const Eigen::MatrixXd H = detail::dense_newton_matrix(lin, x, Lambda);
  // Euclidean basis Z of {v : Phi^T M v = 0}.
  const Eigen::HouseholderQR<Eigen::MatrixXd> qr(x.m_frame());
  const Eigen::MatrixXd Q = qr.householderQ();
  const Eigen::MatrixXd Z = Q.rightCols(n - p);
  const Eigen::MatrixXd MZ = x.metric().apply(Z);
  const Index m = n - p;
  Eigen::MatrixXd P = Eigen::MatrixXd::Zero(n * p, m * p);
  Eigen::MatrixXd Mh = Eigen::MatrixXd::Zero(m * p, m * p);
  const Eigen::MatrixXd ZMZ = linalg::sym(Z.transpose() * MZ);
  for (Index j = 0; j < p; ++j) {
    P.block(j * n, j * m, n, m) = Z;
    Mh.block(j * m, j * m, m, m) = ZMZ;
  }
  const Eigen::MatrixXd Hh = linalg::sym(P.transpose() * H * P);
  const Eigen::GeneralizedSelfAdjointEigenSolver<Eigen::MatrixXd> es(Hh, Mh, Eigen::EigenvaluesOnly);
  if (es.info() != Eigen::Success) throw std::runtime_error("hessian_positivity_check: dense solve failed");
  return es.eigenvalues()(0);
}

double positivity_iterative(const problems::Linearization& lin, const ManifoldPoint& x,
                            const DenseSmall& Lambda, const PositivityOptions& opts) {
  const Index n = x.n(), p = x.p();
  auto frame_of = [n, p](const Eigen::MatrixXd& V, Index c) { return Frame(Eigen::Map<const Frame>(V.col(c).data(), n, p)); };
  auto columnwise = [&](const Eigen::MatrixXd& V, const std::function<Frame(const Frame&)>& f) {
    Eigen::MatrixXd out(V.rows(), V.cols());
    for (Index c = 0; c < V.cols(); ++c) {
      const Frame F = f(frame_of(V, c));
      out.col(c) = Eigen::Map<const Vector>(F.data(), n * p);
    }
    return out;
  };
  const Frame& G = x.m_frame();
  const linalg::BlockOperator A = [&](const Eigen::MatrixXd& V) {
    return columnwise(V, [&](const Frame& F) {
      const Frame Z = problems::newton_operator(lin, x, Lambda, F);
      return Frame(Z - G * (x.frame().transpose() * Z));
    });
  };
  const linalg::BlockOperator M = [&](const Eigen::MatrixXd& V) {
    return columnwise(V, [&](const Frame& F) { return x.metric().apply(F); });
  };
  const linalg::BlockOperator project = [&](const Eigen::MatrixXd& V) {
    return columnwise(V, [&](const Frame& F) { return manifold::project_horizontal(x, F).frame; });
  };

  // Shifted A(Phi) as preconditioner, applied state by state.
  using Factor = Eigen::SimplicialLLT<Eigen::SparseMatrix<double>>;
  auto factor = std::make_shared<Factor>();
  const SparseMatrix& Ah = lin.A();
  const SparseMatrix& Mm = x.metric().matrix();
  double scale = 0.0;
  for (Index i = 0; i < Ah.outerSize(); ++i) scale = std::max(scale, Ah.row(i).cwiseAbs().sum());
  double sigma = 0.0;
  for (int attempt = 0;; ++attempt) {
    factor->compute(Eigen::SparseMatrix<double>(Ah + sigma * Mm));
    if (factor->info() == Eigen::Success) break;
    if (attempt > 12) throw std::runtime_error("hessian_positivity_check: cannot build preconditioner");
    sigma = sigma == 0.0 ? 1e-3 * scale : 4.0 * sigma;
  }
  const linalg::BlockOperator T = [&](const Eigen::MatrixXd& V) {
    return columnwise(V, [&](const Frame& F) {
      Frame out(F.rows(), F.cols());
      for (Index j = 0; j < F.cols(); ++j) out.col(j) = factor->solve(F.col(j));
      return out;
    });
  };

  std::mt19937 rng(11);
  std::uniform_real_distribution<double> uni(-1.0, 1.0);
  Eigen::MatrixXd X0(n * p, 3);
  for (Index j = 0; j < X0.cols(); ++j)
    for (Index i = 0; i < X0.rows(); ++i) X0(i, j) = uni(rng);
  X0 = T(X0);
  linalg::LobpcgOptions lo;
  lo.max_iter = opts.max_iter;
  lo.tol = opts.tol * scale;
  const linalg::LobpcgResult r = linalg::lobpcg(A, M, project(X0), 1, lo, T, project);
  if (!r.converged) {
    spdlog::warn("hessian_positivity_check: LOBPCG stopped after {} iterations, residual {:.3e}", r.iterations,
                 r.residuals(0));
  }
  return r.values(0);
}

}  // namespace

double hessian_positivity_check(const Problem& problem, const ManifoldPoint& phi, const PositivityOptions& opts) {
  const auto lin = problem.linearize(phi.frame());
  const auto d = problems::dual_residual(lin, phi);
  if (phi.n() * phi.p() <= opts.dense_limit) return positivity_dense(lin, phi, d.Lambda);
  return positivity_iterative(lin, phi, d.Lambda, opts);
}

}  // namespace gs::solvers
