#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <random>
#include <string>

#include "gs/fem.hpp"
#include "gs/linalg.hpp"

using namespace gs;

namespace {

Frame random_frame(Index n, Index p, unsigned seed) {
  std::mt19937 rng(seed);
  std::normal_distribution<double> g;
  Frame X(n, p);
  for (Index j = 0; j < p; ++j)
    for (Index i = 0; i < n; ++i) X(i, j) = g(rng);
  return X;
}

double max_asym(const SparseMatrix& A) {
  const Eigen::MatrixXd D(A);
  return (D - D.transpose()).cwiseAbs().maxCoeff();
}

}  // namespace

TEST_CASE("gauss rules integrate polynomials exactly") {
  for (int n = 1; n <= 6; ++n) {
    const auto r = fem::gauss_legendre(n);
    double wsum = 0.0;
    for (double w : r.weights) wsum += w;
    CHECK(wsum == doctest::Approx(1.0).epsilon(1e-15));
    for (int deg = 0; deg <= 2 * n - 1; ++deg) {
      double s = 0.0;
      for (int i = 0; i < n; ++i) s += r.weights[static_cast<std::size_t>(i)] * std::pow(r.points[static_cast<std::size_t>(i)], deg);
      CHECK(s == doctest::Approx(1.0 / (deg + 1)).epsilon(1e-14));
    }
  }
}

TEST_CASE("build_space dof counts and errors") {
  CHECK(fem::build_space(0.5, 2, 1).n_dofs() == 1);
  CHECK(fem::build_space(0.5, 2, 2).n_dofs() == 9);
  CHECK(fem::build_space(8.0, 32, 2).n_dofs() == 3969);
  CHECK_THROWS_AS(fem::build_space(1.0, 4, 3), std::invalid_argument);
  CHECK_THROWS_AS(fem::build_space(1.0, 1, 1), std::invalid_argument);
  const auto s = fem::build_space(1.0, 4, 2);
  const auto x = s.dof_coordinate(0);
  CHECK(x[0] == doctest::Approx(-0.75));
  CHECK(x[1] == doctest::Approx(-0.75));
  const auto last = s.dof_coordinate(s.n_dofs() - 1);
  CHECK(last[0] == doctest::Approx(0.75));
  CHECK(s.dof_of_node(0, 3) == -1);
  CHECK(s.dof_of_node(1, 1) == 0);
}

TEST_CASE("stiffness annihilates constants before boundary elimination") {
  for (int order : {1, 2}) {
    const auto s = fem::build_space(1.5, 4, order);
    const SparseMatrix K = fem::assemble_stiffness(s, true);
    const Vector ones = Vector::Ones(s.n_nodes());
    CHECK((K * ones).cwiseAbs().maxCoeff() < 1e-13);
    CHECK(max_asym(K) == 0.0);
    CHECK(max_asym(fem::assemble_stiffness(s)) == 0.0);
  }
}

TEST_CASE("mass matrix partition of unity and 1D element mass") {
  for (int order : {1, 2}) {
    const double L = 1.25;
    const auto s = fem::build_space(L, 4, order);
    const SparseMatrix M = fem::assemble_mass(s, {}, true);
    CHECK(Eigen::MatrixXd(M).sum() == doctest::Approx(4.0 * L * L).epsilon(1e-13));
    CHECK(max_asym(M) == 0.0);
  }
  // Q1 tensor element: the 2D element mass is the Kronecker product of
  // the 1D element mass (h/6)[[2,1],[1,2]] with itself.
  const double L = 0.5;
  const auto s = fem::build_space(L, 2, 1);
  const double h = s.h();
  const SparseMatrix M = fem::assemble_mass(s, {}, true);
  Eigen::Matrix2d m1;
  m1 << 2, 1, 1, 2;
  m1 *= h / 6.0;
  // Corner node 0 belongs to one element only; nodes 0 and 1 share one edge.
  CHECK(M.coeff(0, 0) == doctest::Approx(m1(0, 0) * m1(0, 0)).epsilon(1e-14));
  CHECK(M.coeff(0, 1) == doctest::Approx(m1(0, 1) * m1(0, 0)).epsilon(1e-14));
  CHECK(M.coeff(0, 4) == doctest::Approx(m1(0, 1) * m1(0, 1)).epsilon(1e-14));
}

TEST_CASE("harmonic weighted mass is nonnegative and SPD") {
  const auto s = fem::build_space(2.0, 4, 1);
  const SparseMatrix Mv = fem::assemble_mass(s, fem::harmonic_potential());
  for (Index i = 0; i < Mv.outerSize(); ++i)
    for (SparseMatrix::InnerIterator it(Mv, i); it; ++it) CHECK(it.value() >= 0.0);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es{Eigen::MatrixXd(Mv)};
  CHECK(es.eigenvalues().minCoeff() > 0.0);
  CHECK(max_asym(Mv) == 0.0);
}

TEST_CASE("Galerkin consistency of the stiffness form") {
  // u = sin(pi (x+1)/2) sin(pi (y+1)/2) on (-1,1)^2: int |grad u|^2 = pi^2/2.
  const double pi = std::numbers::pi;
  auto u = [pi](double x, double y) { return std::sin(pi * (x + 1) / 2) * std::sin(pi * (y + 1) / 2); };
  for (int order : {1, 2}) {
    double prev = 0.0;
    for (int cells : {4, 8, 16}) {
      const auto s = fem::build_space(1.0, cells, order);
      const Frame U = fem::interpolate(s, u);
      const double e = std::abs((U.transpose() * (fem::assemble_stiffness(s) * U))(0, 0) - pi * pi / 2);
      if (prev > 0.0) CHECK(std::log2(prev / e) > 2.0 * order - 0.3);
      prev = e;
    }
  }
}

TEST_CASE("density and density mass") {
  const auto s = fem::build_space(1.0, 4, 2);
  const Index n = s.n_dofs();
  const SparseMatrix Z = fem::assemble_density_mass(s, Frame::Zero(n, 1));
  CHECK(Eigen::MatrixXd(Z).cwiseAbs().maxCoeff() == 0.0);

  const Frame phi = random_frame(n, 1, 3);
  Frame two(n, 2);
  two << phi, Frame::Zero(n, 1);
  const SparseMatrix A = fem::assemble_density_mass(s, phi);
  const SparseMatrix B = fem::assemble_density_mass(s, two);
  CHECK(Eigen::MatrixXd(A - B).cwiseAbs().maxCoeff() <= 1e-15 * Eigen::MatrixXd(A).cwiseAbs().maxCoeff());
  CHECK(max_asym(A) == 0.0);

  // Additivity of the density over columns.
  const Frame F = random_frame(n, 3, 4);
  const Vector rho = fem::density(s, F);
  Vector sum = Vector::Zero(rho.size());
  for (Index j = 0; j < 3; ++j) sum += fem::density(s, F.col(j));
  CHECK((rho - sum).norm() < 1e-12 * rho.norm());

  // Nonnegative quadratic form for random frames.
  const SparseMatrix Mr = fem::assemble_density_mass(s, F);
  for (unsigned k = 0; k < 5; ++k) {
    const Frame v = random_frame(n, 1, 10 + k);
    CHECK((v.transpose() * (Mr * v))(0, 0) >= 0.0);
  }
}

TEST_CASE("density of an interpolated constant on an interior cell") {
  const double c = 1.7;
  const auto s = fem::build_space(1.0, 4, 1);
  const Frame phi = c * fem::interpolate_one(s);
  const Vector rho = fem::density(s, phi);
  const int nqc = s.points_per_cell();
  const int interior_cell = 1 * 4 + 1;
  for (int q = 0; q < nqc; ++q) CHECK(rho(interior_cell * nqc + q) == doctest::Approx(c * c).epsilon(1e-14));
  // Matching weighted mass on that cell equals c^2 times the plain mass entry.
  const SparseMatrix Mr = fem::assemble_density_mass(s, phi);
  const SparseMatrix M = fem::assemble_mass(s);
  const Index i = s.dof_of_node(2, 2);
  CHECK(Mr.coeff(i, i) == doctest::Approx(c * c * M.coeff(i, i)).epsilon(1e-13));
}

TEST_CASE("quartic integrals are exact for Q2 data") {
  // Random Q2 function; reference uses a 10-point rule per direction.
  const auto s = fem::build_space(1.0, 2, 2);
  const Frame phi = random_frame(s.n_dofs(), 1, 5);
  const double coarse = fem::integrate(s, fem::density(s, phi).array().square().matrix());
  // Reference: 10-point product rule per cell via sampling the FE function.
  const auto r = fem::gauss_legendre(10);
  double ref = 0.0;
  const double h = s.h();
  auto shape = [](int a, double t) {
    return a == 0 ? 2 * (t - 0.5) * (t - 1) : a == 1 ? -4 * t * (t - 1) : 2 * t * (t - 0.5);
  };
  for (int cy = 0; cy < 2; ++cy)
    for (int cx = 0; cx < 2; ++cx)
      for (int qy = 0; qy < 10; ++qy)
        for (int qx = 0; qx < 10; ++qx) {
          double v = 0.0;
          for (int b = 0; b < 3; ++b)
            for (int a = 0; a < 3; ++a) {
              const Index d = s.dof_of_node(2 * cx + a, 2 * cy + b);
              if (d >= 0) v += phi(d, 0) * shape(a, r.points[qx]) * shape(b, r.points[qy]);
            }
          ref += r.weights[qx] * r.weights[qy] * h * h * std::pow(v, 4);
        }
  CHECK(coarse == doctest::Approx(ref).epsilon(1e-13));
}

TEST_CASE("coupled load matches the density-mass form for one state") {
  const auto s = fem::build_space(1.0, 4, 2);
  const Frame phi = random_frame(s.n_dofs(), 1, 6);
  const Frame v = random_frame(s.n_dofs(), 1, 7);
  const Vector ones = Vector::Ones(s.n_quadrature_points());
  const Frame load = fem::coupled_load(s, phi, v, ones);
  const Frame expect = fem::assemble_density_mass(s, phi) * v;
  CHECK((load - expect).norm() < 1e-12 * expect.norm());
}

TEST_CASE("interpolate_one and M-normalization") {
  const auto s = fem::build_space(1.0, 4, 2);
  const Frame one = fem::interpolate_one(s);
  CHECK(one.rows() == s.n_dofs());
  CHECK((one.array() == 1.0).all());
  const SparseMatrix M = fem::assemble_mass(s);
  const Frame phi = one / std::sqrt((one.transpose() * (M * one))(0, 0));
  CHECK(std::abs((phi.transpose() * (M * phi))(0, 0) - 1.0) < 1e-14);
  const Frame bumps = fem::smooth_bumps(s, 3);
  CHECK((bumps.col(0) - one.col(0)).norm() == 0.0);
}

TEST_CASE("disorder potential") {
  const auto f = fem::build_disorder_potential(1.0, 0.5, 42, 8);
  CHECK(f.cells_per_dim() == 2);
  CHECK(f.values().size() == 4);
  for (double v : f.values()) CHECK((v == 0.0 || v == 4.0));
  const auto g = fem::build_disorder_potential(1.0, 0.5, 42, 8);
  CHECK(f.values() == g.values());
  CHECK(f(-0.9, -0.9) == f.values()[0]);
  CHECK(f(0.9, 0.9) == f.values()[3]);

  const auto fine = fem::build_disorder_potential(8.0, 1.0 / 64, 1, 64);
  bool high = false, low = false;
  for (double v : fine.values()) {
    CHECK((v == 0.0 || v == 4096.0));
    high = high || v == 4096.0;
    low = low || v == 0.0;
  }
  CHECK(high);
  CHECK(low);
  CHECK_THROWS_AS(fem::build_disorder_potential(1.0, 0.3, 1, 8), std::invalid_argument);
  CHECK_THROWS_AS(fem::build_disorder_potential(1.0, 1.0 / 16, 1, 8), std::invalid_argument);
}

TEST_CASE("field dump format") {
  const auto s = fem::build_space(1.0, 2, 1);
  const auto path = (std::filesystem::temp_directory_path() / "gs_field_test.csv").string();
  Vector v(1);
  v << 0.1;
  fem::write_field_csv(s, v, path);
  std::ifstream in(path);
  std::string header, row;
  std::getline(in, header);
  std::getline(in, row);
  CHECK(header == "x,y,value");
  CHECK(row == "0.0000000000000000e+00,0.0000000000000000e+00,1.0000000000000001e-01");
  std::filesystem::remove(path);
}
