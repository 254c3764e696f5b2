#include "gs/problems.hpp"

#include <stdexcept>
#include <sstream>

#include "gs/io.hpp"

namespace gs::problems {

namespace {

fem::PointFunction make_potential(const GpeSettings& s) {
  const auto harmonic = fem::harmonic_potential();
  switch (s.potential) {
    case PotentialKind::none:
      return {};
    case PotentialKind::harmonic:
      return harmonic;
    case PotentialKind::disorder:
      return fem::build_disorder_potential(s.half_width, s.epsilon, s.seed, s.cells_per_dim);
    case PotentialKind::both: {
      const auto dis = fem::build_disorder_potential(s.half_width, s.epsilon, s.seed, s.cells_per_dim);
      return [harmonic, dis](double x, double y) { return harmonic(x, y) + dis(x, y); };
    }
  }
  return {};
}

Vector map_values(const Vector& rho, const std::function<double(double)>& f) {
  Vector out(rho.size());
  for (Index i = 0; i < rho.size(); ++i) out(i) = f(rho(i));
  return out;
}

}  // namespace

GpeProblem::GpeProblem(const GpeSettings& s)
    : GpeProblem(fem::build_space(s.half_width, s.cells_per_dim, s.order), make_potential(s),
                 NonlinearityModel::cubic(s.kappa)) {}

GpeProblem::GpeProblem(fem::FeSpace space, fem::PointFunction potential, NonlinearityModel model)
    : Problem(std::make_shared<const manifold::Metric>(fem::assemble_mass(space))),
      space_(std::move(space)),
      model_(std::move(model)) {
  K_ = fem::assemble_stiffness(space_);
  if (potential) {
    Mv_ = fem::assemble_mass(space_, potential);
  } else {
    Mv_ = SparseMatrix(K_.rows(), K_.cols());
    Mv_.makeCompressed();
  }
  K2V_ = K_ + 2.0 * Mv_;
  K2V_.makeCompressed();
}

double GpeProblem::energy(const Frame& phi) const {
  const Vector rho = fem::density(space_, phi);
  const double kinetic = 0.5 * linalg::pair(phi, linalg::spmv(K_, phi));
  const double pot = linalg::pair(phi, linalg::spmv(Mv_, phi));
  return kinetic + pot + 0.5 * fem::integrate(space_, map_values(rho, model_.Gamma));
}

Vector GpeProblem::density(const Frame& phi) const { return fem::density(space_, phi); }

SparseMatrix GpeProblem::hamiltonian(const Vector& rho) const {
  SparseMatrix A = K2V_ + fem::assemble_weighted_mass(space_, map_values(rho, model_.gamma));
  A.makeCompressed();
  return A;
}

Linearization GpeProblem::linearize(const Frame& phi) const {
  const Vector rho = fem::density(space_, phi);
  const Vector coeff = 2.0 * map_values(rho, model_.beta);
  const fem::FeSpace* space = &space_;
  FrameOperator B = [space, phi, coeff](const Frame& V) { return fem::coupled_load(*space, phi, V, coeff); };
  return {hamiltonian(rho), std::move(B), counter()};
}

SparseMatrix GpeProblem::kinetic_shifted() const {
  SparseMatrix S = K_ + mass();
  S.makeCompressed();
  return S;
}

Frame GpeProblem::starting_frame(int p, std::uint64_t) const {
  if (p < 1) throw std::invalid_argument("starting_frame: p must be positive");
  return p == 1 ? fem::interpolate_one(space_) : fem::smooth_bumps(space_, p);
}

void GpeProblem::write_field(const Frame& phi, const std::string& path) const {
  const Vector values = phi.cols() == 1 ? Vector(phi.col(0)) : Vector(phi.rowwise().squaredNorm());
  fem::write_field_csv(space_, values, path);
}

}  // namespace gs::problems
