#include "gs/problems.hpp"

#include <cmath>
#include <random>
#include <sstream>
#include <stdexcept>

#include "gs/io.hpp"

namespace gs::problems {

SparseMatrix fd_laplacian_3d(int grid, double h) {
  if (grid < 1) throw std::invalid_argument("fd_laplacian_3d: empty grid");
  const Index g = grid;
  const Index n = g * g * g;
  const double c = 1.0 / (h * h);
  std::vector<Eigen::Triplet<double, int>> t;
  t.reserve(static_cast<std::size_t>(7 * n));
  for (Index k = 0; k < g; ++k)
    for (Index j = 0; j < g; ++j)
      for (Index i = 0; i < g; ++i) {
        const auto row = static_cast<int>((k * g + j) * g + i);
        t.emplace_back(row, row, 6.0 * c);
        if (i > 0) t.emplace_back(row, row - 1, -c);
        if (i + 1 < g) t.emplace_back(row, row + 1, -c);
        if (j > 0) t.emplace_back(row, row - static_cast<int>(g), -c);
        if (j + 1 < g) t.emplace_back(row, row + static_cast<int>(g), -c);
        if (k > 0) t.emplace_back(row, row - static_cast<int>(g * g), -c);
        if (k + 1 < g) t.emplace_back(row, row + static_cast<int>(g * g), -c);
      }
  SparseMatrix L(n, n);
  L.setFromTriplets(t.begin(), t.end());
  L.makeCompressed();
  return L;
}

namespace {

Vector ionic_potential(const KsSettings& s, int grid, double half_width, double h) {
  const Index g = grid;
  Vector v(g * g * g);
  for (Index k = 0; k < g; ++k)
    for (Index j = 0; j < g; ++j)
      for (Index i = 0; i < g; ++i) {
        const double x = -half_width + (i + 1) * h;
        const double y = -half_width + (j + 1) * h;
        const double z = -half_width + (k + 1) * h;
        double sum = 0.0;
        for (const Atom& a : s.atoms) {
          const double dx = x - a.center[0], dy = y - a.center[1], dz = z - a.center[2];
          sum -= s.ion_depth * std::exp(-(dx * dx + dy * dy + dz * dz) / (2.0 * s.ion_width * s.ion_width));
        }
        v((k * g + j) * g + i) = sum;
      }
  return v;
}

SparseMatrix with_diagonal(const SparseMatrix& A, const Vector& d) {
  SparseMatrix D(A.rows(), A.cols());
  std::vector<Eigen::Triplet<double, int>> t;
  t.reserve(static_cast<std::size_t>(d.size()));
  for (Index i = 0; i < d.size(); ++i) t.emplace_back(static_cast<int>(i), static_cast<int>(i), d(i));
  D.setFromTriplets(t.begin(), t.end());
  SparseMatrix out = A + D;
  out.makeCompressed();
  return out;
}

}  // namespace

KsProblem::KsProblem(const KsSettings& s)
    : Problem(manifold::Metric::identity(static_cast<Index>(s.grid) * s.grid * s.grid)),
      grid_(s.grid),
      half_width_(s.half_width),
      h_(2.0 * s.half_width / (s.grid + 1)),
      w_(h_ * h_ * h_),
      L_(fd_laplacian_3d(s.grid, h_)),
      ion_(ionic_potential(s, s.grid, s.half_width, h_)),
      hartree_solver_(L_) {
  if (s.grid < 2) throw std::invalid_argument("KsProblem: grid must have at least 2 points per dimension");
  if (!(s.half_width > 0.0)) throw std::invalid_argument("KsProblem: box half width must be positive");
  if (!(s.ion_width > 0.0)) throw std::invalid_argument("KsProblem: ion width must be positive");
}

std::array<double, 3> KsProblem::point(Index idx) const {
  const Index g = grid_;
  const Index i = idx % g, j = (idx / g) % g, k = idx / (g * g);
  return {-half_width_ + (i + 1) * h_, -half_width_ + (j + 1) * h_, -half_width_ + (k + 1) * h_};
}

Vector KsProblem::hartree(const Vector& rho) const { return hartree_solver_.solve(rho); }

Vector ks_hartree(const KsProblem& problem, const Vector& rho) {
  if ((rho.array() < 0.0).any()) throw std::invalid_argument("ks_hartree: negative density");
  return problem.hartree(rho);
}

Vector KsProblem::density(const Frame& phi) const { return phi.rowwise().squaredNorm() / w_; }

double KsProblem::energy(const Frame& phi) const {
  const Vector rho = density(phi);
  const Vector vh = hartree(rho);
  double exc = 0.0;
  for (Index i = 0; i < rho.size(); ++i) exc += rho(i) * xc_exchange(rho(i)).eps;
  return 0.5 * linalg::pair(phi, linalg::spmv(L_, phi)) + linalg::pair(phi, ion_.asDiagonal() * phi) +
         0.5 * w_ * rho.dot(vh) + w_ * exc;
}

SparseMatrix KsProblem::hamiltonian(const Vector& rho) const {
  const Vector vh = hartree(rho);
  Vector d(rho.size());
  for (Index i = 0; i < rho.size(); ++i) d(i) = 2.0 * (ion_(i) + vh(i) + xc_exchange(rho(i)).mu);
  return with_diagonal(L_, d);
}

Linearization KsProblem::linearize(const Frame& phi) const {
  const Vector rho = density(phi);
  Vector zeta(rho.size());
  for (Index i = 0; i < rho.size(); ++i) zeta(i) = xc_exchange(rho(i)).zeta;
  const KsProblem* self = this;
  FrameOperator B = [self, phi, zeta](const Frame& V) -> Frame {
    const Vector drho = 2.0 * (phi.array() * V.array()).rowwise().sum().matrix() / self->w_;
    const Vector kernel = self->hartree(drho) + zeta.cwiseProduct(drho);
    return 2.0 * kernel.asDiagonal() * phi;
  };
  return {hamiltonian(rho), std::move(B), counter()};
}

SparseMatrix KsProblem::kinetic_shifted() const { return with_diagonal(L_, Vector::Ones(L_.rows())); }

Frame KsProblem::starting_frame(int p, std::uint64_t seed) const {
  if (p < 1) throw std::invalid_argument("starting_frame: p must be positive");
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> uni(-1.0, 1.0);
  Frame X(n(), p);
  for (Index j = 0; j < p; ++j)
    for (Index i = 0; i < n(); ++i) X(i, j) = uni(rng);
  return X;
}

void KsProblem::write_field(const Frame& phi, const std::string& path) const {
  const Vector rho = density(phi);
  std::ostringstream out;
  out << "x,y,z,value\n";
  for (Index i = 0; i < rho.size(); ++i) {
    const auto x = point(i);
    out << io::format_real(x[0]) << ',' << io::format_real(x[1]) << ',' << io::format_real(x[2]) << ','
        << io::format_real(rho(i)) << '\n';
  }
  io::write_file_atomic(path, out.str());
}

}  // namespace gs::problems
