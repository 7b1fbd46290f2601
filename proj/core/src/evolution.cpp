#include "spinstore/evolution.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <numbers>
#include <stdexcept>
#include <string>

#include <unsupported/Eigen/KroneckerProduct>

namespace spinstore {

namespace {

using Complex = std::complex<double>;

constexpr double kUnitaryTol = 1e-10;
constexpr double kTraceTol = 1e-10;
constexpr double kEigenvalueTol = 1e-10;
// Inputs this far from positive semidefinite are treated as corrupt rather
// than as round-off.
constexpr double kEigenvalueHardTol = 1e-8;

void require(bool condition, const std::string& message) {
  if (!condition) throw std::invalid_argument(message);
}

int dim_for(int n_spins) {
  require(n_spins >= 1 && n_spins <= 30, "spin count out of range");
  return 1 << n_spins;
}

void check_square(const Eigen::MatrixXcd& m, int n_spins, const char* what) {
  const int dim = dim_for(n_spins);
  require(m.rows() == dim && m.cols() == dim,
          std::string(what) + " dimension does not match the spin count");
  require(m.allFinite(), std::string(what) + " entries must be finite");
}

void check_hermitian_arg(const HermitianOperator& h, const char* what) {
  check_square(h.matrix, h.n_spins, what);
  const double scale = std::max(1.0, h.matrix.cwiseAbs().maxCoeff());
  require((h.matrix - h.matrix.adjoint()).cwiseAbs().maxCoeff() <= 1e-10 * scale,
          std::string(what) + " must be Hermitian");
}

// Trace and hermiticity are cheap to keep checked on every evolution step;
// positivity is only re-examined through make_density and density_hygiene.
DensityMatrix density_fast(int n_spins, Eigen::MatrixXcd matrix) {
  check_square(matrix, n_spins, "density");
  require(std::abs(matrix.trace() - Complex(1.0, 0.0)) <= kTraceTol,
          "density trace must be one");
  require((matrix - matrix.adjoint()).cwiseAbs().maxCoeff() <= 1e-10,
          "density must be Hermitian");
  return DensityMatrix{n_spins, std::move(matrix)};
}

// Deterministic standard normal: explicit Box-Muller on the raw 64-bit
// stream, so results do not depend on the standard library's distributions.
double gaussian(std::mt19937_64& rng) {
  const double u1 = (static_cast<double>(rng() >> 11) + 1.0) * 0x1p-53;
  const double u2 = (static_cast<double>(rng() >> 11) + 0.5) * 0x1p-53;
  return std::sqrt(-2.0 * std::log(u1)) *
         std::cos(2.0 * std::numbers::pi * u2);
}

// Spreads the bits of value over the given bit positions (ascending).
int scatter_bits(int value, const std::vector<int>& positions) {
  int result = 0;
  for (std::size_t k = 0; k < positions.size(); ++k)
    if (value & (1 << k)) result |= 1 << positions[k];
  return result;
}

}  // namespace

double Schedule::period() const {
  double total = 0.0;
  for (const auto& segment : segments) total += segment.duration;
  return total;
}

int Schedule::n_spins() const {
  if (segments.empty() || !segments.front().hamiltonian) return 0;
  return segments.front().hamiltonian->n_spins;
}

double unitarity_defect(const Eigen::MatrixXcd& matrix) {
  const Eigen::MatrixXcd gram = matrix * matrix.adjoint();
  return (gram - Eigen::MatrixXcd::Identity(matrix.rows(), matrix.cols()))
      .cwiseAbs()
      .maxCoeff();
}

Unitary make_unitary(int n_spins, Eigen::MatrixXcd matrix) {
  check_square(matrix, n_spins, "unitary");
  require(unitarity_defect(matrix) <= kUnitaryTol, "matrix is not unitary");
  return Unitary{n_spins, std::move(matrix)};
}

Unitary identity_unitary(int n_spins) {
  const int dim = dim_for(n_spins);
  return Unitary{n_spins, Eigen::MatrixXcd::Identity(dim, dim)};
}

Unitary expm_hermitian(const HermitianOperator& h, double time) {
  check_hermitian_arg(h, "propagator generator");
  require(std::isfinite(time), "propagation time must be finite");

  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> solver(h.matrix);
  require(solver.info() == Eigen::Success, "eigendecomposition failed");
  const Eigen::VectorXd& values = solver.eigenvalues();
  Eigen::VectorXcd phases(values.size());
  for (Eigen::Index k = 0; k < values.size(); ++k)
    phases[k] = std::exp(Complex(0.0, -values[k] * time));
  Eigen::MatrixXcd u = solver.eigenvectors() * phases.asDiagonal() *
                       solver.eigenvectors().adjoint();
  return make_unitary(h.n_spins, std::move(u));
}

Unitary pulse_unitary(int n_spins, const PulseEvent& pulse) {
  require(pulse.axis != Axis::Z, "pulse axis must be x or y");
  require(pulse.sign == 1 || pulse.sign == -1, "pulse sign must be +1 or -1");
  require(std::isfinite(pulse.angle), "pulse angle must be finite");
  return expm_hermitian(collective_spin_op(n_spins, pulse.axis),
                        pulse.sign * pulse.angle);
}

Unitary compose_schedule(const Schedule& schedule) {
  require(!schedule.segments.empty(), "schedule has no segments");
  const int n = schedule.n_spins();
  require(n >= 1, "schedule segments need a Hamiltonian");
  for (const auto& segment : schedule.segments) {
    require(static_cast<bool>(segment.hamiltonian), "schedule segment has no Hamiltonian");
    require(segment.hamiltonian->n_spins == n, "schedule mixes system sizes");
    require(std::isfinite(segment.duration) && segment.duration >= 0.0,
            "segment duration must be nonnegative");
  }
  for (const auto& pulse : schedule.pulses)
    require(pulse.placement <= schedule.segments.size(),
            "pulse placement is past the end of the schedule");

  const int dim = dim_for(n);
  Eigen::MatrixXcd u = Eigen::MatrixXcd::Identity(dim, dim);
  for (std::size_t k = 0; k <= schedule.segments.size(); ++k) {
    for (const auto& pulse : schedule.pulses)
      if (pulse.placement == k) u = pulse_unitary(n, pulse).matrix * u;
    if (k < schedule.segments.size()) {
      const auto& segment = schedule.segments[k];
      u = expm_hermitian(*segment.hamiltonian, segment.duration).matrix * u;
    }
  }
  return make_unitary(n, std::move(u));
}

Unitary unitary_power(const Unitary& u, long cycles) {
  require(cycles >= 0, "cycle count must be nonnegative");
  check_square(u.matrix, u.n_spins, "unitary");

  Eigen::MatrixXcd result = Eigen::MatrixXcd::Identity(u.dim(), u.dim());
  Eigen::MatrixXcd base = u.matrix;
  long remaining = cycles;
  while (remaining > 0) {
    if (remaining & 1) result = (result * base).eval();
    remaining >>= 1;
    if (remaining > 0) base = (base * base).eval();
  }
  return make_unitary(u.n_spins, std::move(result));
}

double distance_to_identity(const Unitary& u) {
  const double overlap = std::abs(u.matrix.trace()) / u.dim();
  return std::max(0.0, 1.0 - overlap);
}

HermitianOperator conjugated(const HermitianOperator& h, const Unitary& u) {
  require(h.n_spins == u.n_spins, "frame change must match the operator size");
  Eigen::MatrixXcd moved = u.matrix * h.matrix * u.matrix.adjoint();
  // Conjugation keeps hermiticity up to round-off; fold that off before
  // revalidating.
  moved = 0.5 * (moved + moved.adjoint()).eval();
  return make_hermitian(h.n_spins, std::move(moved));
}

DensityMatrix make_density(int n_spins, Eigen::MatrixXcd matrix) {
  DensityMatrix rho = density_fast(n_spins, std::move(matrix));
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> solver(rho.matrix,
                                                         Eigen::EigenvaluesOnly);
  require(solver.info() == Eigen::Success, "eigendecomposition failed");
  require(solver.eigenvalues().minCoeff() >= -kEigenvalueTol,
          "density must be positive semidefinite");
  return rho;
}

DensityMatrix pure_density(int n_spins, const Eigen::VectorXcd& amplitudes) {
  const int dim = dim_for(n_spins);
  require(amplitudes.size() == dim, "state vector dimension does not match");
  require(amplitudes.allFinite(), "state amplitudes must be finite");
  const double norm = amplitudes.norm();
  require(norm > 1e-12, "state vector must be nonzero");
  const Eigen::VectorXcd psi = amplitudes / norm;
  return DensityMatrix{n_spins, psi * psi.adjoint()};
}

DensityMatrix ground_density(int n_spins) {
  const int dim = dim_for(n_spins);
  Eigen::VectorXcd psi = Eigen::VectorXcd::Zero(dim);
  psi[0] = 1.0;
  return pure_density(n_spins, psi);
}

DensityMatrix random_pure_density(int n_spins, std::mt19937_64& rng) {
  const int dim = dim_for(n_spins);
  Eigen::VectorXcd psi(dim);
  for (int k = 0; k < dim; ++k) psi[k] = Complex(gaussian(rng), gaussian(rng));
  return pure_density(n_spins, psi);
}

DensityMatrix tensor_density(const DensityMatrix& left, const DensityMatrix& right) {
  check_square(left.matrix, left.n_spins, "density");
  check_square(right.matrix, right.n_spins, "density");
  Eigen::MatrixXcd product =
      Eigen::kroneckerProduct(left.matrix, right.matrix).eval();
  return density_fast(left.n_spins + right.n_spins, std::move(product));
}

DensityMatrix evolve_density(const DensityMatrix& rho, const Unitary& u) {
  require(rho.n_spins == u.n_spins, "state and propagator sizes differ");
  Eigen::MatrixXcd evolved = u.matrix * rho.matrix * u.matrix.adjoint();
  return density_fast(rho.n_spins, std::move(evolved));
}

DensityMatrix partial_trace(const DensityMatrix& rho,
                            std::span<const int> traced_sites) {
  const int n = rho.n_spins;
  check_square(rho.matrix, n, "density");
  require(!traced_sites.empty(), "no sites to trace out");
  require(static_cast<int>(traced_sites.size()) < n, "cannot trace out every site");

  std::vector<bool> traced(n, false);
  int previous = -1;
  for (int site : traced_sites) {
    require(site >= 0 && site < n, "traced site index out of range");
    require(site > previous, "traced sites must be ascending and unique");
    traced[site] = true;
    previous = site;
  }

  // Site k lives at bit (n - 1 - k); collect bit positions for both groups.
  std::vector<int> kept_bits;
  std::vector<int> traced_bits;
  for (int site = n - 1; site >= 0; --site) {
    (traced[site] ? traced_bits : kept_bits).push_back(n - 1 - site);
  }

  const int kept_dim = 1 << kept_bits.size();
  const int traced_dim = 1 << traced_bits.size();
  std::vector<int> kept_offset(kept_dim);
  for (int a = 0; a < kept_dim; ++a) kept_offset[a] = scatter_bits(a, kept_bits);
  std::vector<int> traced_offset(traced_dim);
  for (int t = 0; t < traced_dim; ++t)
    traced_offset[t] = scatter_bits(t, traced_bits);

  Eigen::MatrixXcd reduced = Eigen::MatrixXcd::Zero(kept_dim, kept_dim);
  for (int a = 0; a < kept_dim; ++a) {
    for (int b = 0; b < kept_dim; ++b) {
      Complex sum = 0.0;
      for (int t = 0; t < traced_dim; ++t)
        sum += rho.matrix(kept_offset[a] + traced_offset[t],
                          kept_offset[b] + traced_offset[t]);
      reduced(a, b) = sum;
    }
  }
  return density_fast(n - static_cast<int>(traced_sites.size()), std::move(reduced));
}

double fidelity(const DensityMatrix& a, const DensityMatrix& b) {
  require(a.n_spins == b.n_spins, "fidelity needs states of equal size");
  check_square(a.matrix, a.n_spins, "density");
  check_square(b.matrix, b.n_spins, "density");

  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> solver_a(a.matrix);
  require(solver_a.info() == Eigen::Success, "eigendecomposition failed");
  require(solver_a.eigenvalues().minCoeff() >= -kEigenvalueHardTol,
          "fidelity input is not positive semidefinite");
  const Eigen::VectorXd clamped = solver_a.eigenvalues().cwiseMax(0.0);
  const Eigen::MatrixXcd sqrt_a = solver_a.eigenvectors() *
                                  clamped.cwiseSqrt().asDiagonal() *
                                  solver_a.eigenvectors().adjoint();

  Eigen::MatrixXcd inner = sqrt_a * b.matrix * sqrt_a;
  inner = 0.5 * (inner + inner.adjoint()).eval();
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> solver_m(inner,
                                                           Eigen::EigenvaluesOnly);
  require(solver_m.info() == Eigen::Success, "eigendecomposition failed");
  require(solver_m.eigenvalues().minCoeff() >= -kEigenvalueHardTol,
          "fidelity input is not positive semidefinite");

  const double root_sum = solver_m.eigenvalues().cwiseMax(0.0).cwiseSqrt().sum();
  return std::clamp(root_sum * root_sum, 0.0, 1.0);
}

DensityHygiene density_hygiene(const DensityMatrix& rho) {
  check_square(rho.matrix, rho.n_spins, "density");
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> solver(rho.matrix,
                                                         Eigen::EigenvaluesOnly);
  require(solver.info() == Eigen::Success, "eigendecomposition failed");
  return DensityHygiene{std::abs(rho.matrix.trace() - Complex(1.0, 0.0)),
                        solver.eigenvalues().minCoeff()};
}

}  // namespace spinstore
