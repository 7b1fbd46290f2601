#include <cmath>
#include <complex>
#include <numbers>
#include <random>
#include <stdexcept>

#include <doctest.h>

#include "spinstore/evolution.hpp"

using namespace spinstore;
using Complex = std::complex<double>;

namespace {

const Complex kI(0.0, 1.0);

// Independent matrix exponential: plain Taylor series with scaling and
// squaring, no spectral decomposition.
Eigen::MatrixXcd series_expm(const Eigen::MatrixXcd& a) {
  const double norm = a.cwiseAbs().maxCoeff() * static_cast<double>(a.rows());
  int squarings = 0;
  double scale = 1.0;
  while (norm * scale > 0.25) {
    scale *= 0.5;
    ++squarings;
  }
  const Eigen::MatrixXcd small = scale * a;
  Eigen::MatrixXcd term = Eigen::MatrixXcd::Identity(a.rows(), a.cols());
  Eigen::MatrixXcd sum = term;
  for (int k = 1; k <= 25; ++k) {
    term = (term * small / static_cast<double>(k)).eval();
    sum += term;
  }
  for (int s = 0; s < squarings; ++s) sum = (sum * sum).eval();
  return sum;
}

std::shared_ptr<const HermitianOperator> shared_op(HermitianOperator op) {
  return std::make_shared<const HermitianOperator>(std::move(op));
}

}  // namespace

TEST_CASE("single spin propagator matches the closed form") {
  const HermitianOperator ix = single_spin_op(1, 0, Axis::X);
  const double angle = 0.83;
  const Unitary u = expm_hermitian(ix, angle);

  Eigen::MatrixXcd expected(2, 2);
  expected << std::cos(angle / 2.0), -kI * std::sin(angle / 2.0),
      -kI * std::sin(angle / 2.0), std::cos(angle / 2.0);
  CHECK((u.matrix - expected).cwiseAbs().maxCoeff() < 1e-14);

  CHECK((expm_hermitian(ix, 0.0).matrix - Eigen::MatrixXcd::Identity(2, 2))
            .cwiseAbs()
            .maxCoeff() < 1e-15);
}

TEST_CASE("propagator agrees with an independent series expansion") {
  const CouplingMatrix c =
      dipolar_couplings(build_chain(3, 1.0), field_along({0, 0, 1}));
  const HermitianOperator h = dipolar_hamiltonian(c, HamiltonianKind::Dz);
  const double t = 0.9;
  const Unitary u = expm_hermitian(h, t);
  const Eigen::MatrixXcd reference = series_expm(-kI * t * h.matrix);
  CHECK((u.matrix - reference).cwiseAbs().maxCoeff() < 1e-13);
}

TEST_CASE("schedules compose in time order with pulses at their placement") {
  const HermitianOperator hx = single_spin_op(1, 0, Axis::X);
  const HermitianOperator hz = single_spin_op(1, 0, Axis::Z);
  const double t1 = 0.4;
  const double t2 = 0.7;

  Schedule schedule;
  schedule.segments.push_back({shared_op(hx), t1});
  schedule.segments.push_back({shared_op(hz), t2});
  const Unitary u = compose_schedule(schedule);
  const Eigen::MatrixXcd expected =
      expm_hermitian(hz, t2).matrix * expm_hermitian(hx, t1).matrix;
  CHECK((u.matrix - expected).cwiseAbs().maxCoeff() < 1e-14);

  const PulseEvent pulse{Axis::Y, std::numbers::pi / 2.0, +1, 1};
  Schedule pulsed = schedule;
  pulsed.pulses.push_back(pulse);
  const Eigen::MatrixXcd with_pulse = expm_hermitian(hz, t2).matrix *
                                      pulse_unitary(1, pulse).matrix *
                                      expm_hermitian(hx, t1).matrix;
  CHECK((compose_schedule(pulsed).matrix - with_pulse).cwiseAbs().maxCoeff() <
        1e-14);

  // placement 0 fires before everything, placement == size after everything.
  PulseEvent leading = pulse;
  leading.placement = 0;
  Schedule front = schedule;
  front.pulses.push_back(leading);
  const Eigen::MatrixXcd lead_expected = expm_hermitian(hz, t2).matrix *
                                         expm_hermitian(hx, t1).matrix *
                                         pulse_unitary(1, pulse).matrix;
  CHECK((compose_schedule(front).matrix - lead_expected).cwiseAbs().maxCoeff() <
        1e-14);
}

TEST_CASE("schedule validation") {
  Schedule empty;
  CHECK_THROWS_AS(compose_schedule(empty), std::invalid_argument);

  Schedule negative;
  negative.segments.push_back({shared_op(single_spin_op(1, 0, Axis::X)), -0.1});
  CHECK_THROWS_AS(compose_schedule(negative), std::invalid_argument);

  Schedule missing;
  missing.segments.push_back({nullptr, 0.1});
  CHECK_THROWS_AS(compose_schedule(missing), std::invalid_argument);

  Schedule mixed;
  mixed.segments.push_back({shared_op(single_spin_op(1, 0, Axis::X)), 0.1});
  mixed.segments.push_back({shared_op(single_spin_op(2, 0, Axis::X)), 0.1});
  CHECK_THROWS_AS(compose_schedule(mixed), std::invalid_argument);

  Schedule stray;
  stray.segments.push_back({shared_op(single_spin_op(1, 0, Axis::X)), 0.1});
  stray.pulses.push_back({Axis::X, 1.0, +1, 2});
  CHECK_THROWS_AS(compose_schedule(stray), std::invalid_argument);

  CHECK_THROWS_AS(pulse_unitary(1, PulseEvent{Axis::Z, 1.0, +1, 0}),
                  std::invalid_argument);
  CHECK_THROWS_AS(pulse_unitary(1, PulseEvent{Axis::X, 1.0, +2, 0}),
                  std::invalid_argument);
}

TEST_CASE("unitary powers") {
  const Unitary u = expm_hermitian(single_spin_op(2, 0, Axis::X), 0.3);
  Eigen::MatrixXcd manual = Eigen::MatrixXcd::Identity(4, 4);
  for (int k = 0; k < 5; ++k) manual = u.matrix * manual;
  CHECK((unitary_power(u, 5).matrix - manual).cwiseAbs().maxCoeff() < 1e-13);
  CHECK((unitary_power(u, 0).matrix - Eigen::MatrixXcd::Identity(4, 4))
            .cwiseAbs()
            .maxCoeff() == 0.0);
  CHECK_THROWS_AS(unitary_power(u, -1), std::invalid_argument);
}

TEST_CASE("identity distance ignores global phase") {
  CHECK(distance_to_identity(identity_unitary(3)) == 0.0);

  const Complex phase = std::exp(kI * 0.7);
  const Unitary phased =
      make_unitary(2, phase * Eigen::MatrixXcd::Identity(4, 4));
  CHECK(distance_to_identity(phased) < 1e-15);

  Eigen::MatrixXcd flipped = Eigen::MatrixXcd::Identity(4, 4);
  flipped(3, 3) = -1.0;
  CHECK(distance_to_identity(make_unitary(2, flipped)) ==
        doctest::Approx(0.5).epsilon(1e-14));
}

TEST_CASE("conjugation rotates the distinguished dipolar axis") {
  const CouplingMatrix c =
      dipolar_couplings(build_chain(3, 1.0), field_along({0, 0, 1}));
  const HermitianOperator dz = dipolar_hamiltonian(c, HamiltonianKind::Dz);
  const HermitianOperator dy = dipolar_hamiltonian(c, HamiltonianKind::Dy);
  const HermitianOperator dx = dipolar_hamiltonian(c, HamiltonianKind::Dx);

  for (int sign : {+1, -1}) {
    const Unitary rx =
        pulse_unitary(3, PulseEvent{Axis::X, std::numbers::pi / 2.0, sign, 0});
    const Unitary ry =
        pulse_unitary(3, PulseEvent{Axis::Y, std::numbers::pi / 2.0, sign, 0});
    CHECK((conjugated(dz, rx).matrix - dy.matrix).cwiseAbs().maxCoeff() < 1e-13);
    CHECK((conjugated(dz, ry).matrix - dx.matrix).cwiseAbs().maxCoeff() < 1e-13);
  }
}

TEST_CASE("partial trace follows the site convention") {
  // |up> on site 0, |down> on site 1.
  Eigen::VectorXcd psi = Eigen::VectorXcd::Zero(4);
  psi[1] = 1.0;
  const DensityMatrix rho = pure_density(2, psi);

  const int site0[] = {0};
  const DensityMatrix kept1 = partial_trace(rho, site0);
  CHECK(kept1.matrix(1, 1).real() == doctest::Approx(1.0));  // site 1 is down

  const int site1[] = {1};
  const DensityMatrix kept0 = partial_trace(rho, site1);
  CHECK(kept0.matrix(0, 0).real() == doctest::Approx(1.0));  // site 0 is up
}

TEST_CASE("partial trace of a product state recovers the factors") {
  std::mt19937_64 rng(11);
  const DensityMatrix left = random_pure_density(1, rng);
  const DensityMatrix right = random_pure_density(2, rng);
  const DensityMatrix joint = tensor_density(left, right);

  const int tail[] = {1, 2};
  CHECK((partial_trace(joint, tail).matrix - left.matrix).cwiseAbs().maxCoeff() <
        1e-14);
  const int head[] = {0};
  CHECK((partial_trace(joint, head).matrix - right.matrix).cwiseAbs().maxCoeff() <
        1e-14);
}

TEST_CASE("partial trace of an entangled pair is maximally mixed") {
  Eigen::VectorXcd bell = Eigen::VectorXcd::Zero(4);
  bell[0] = 1.0 / std::numbers::sqrt2;
  bell[3] = 1.0 / std::numbers::sqrt2;
  const int site0[] = {0};
  const DensityMatrix half = partial_trace(pure_density(2, bell), site0);
  CHECK((half.matrix - 0.5 * Eigen::MatrixXcd::Identity(2, 2)).cwiseAbs().maxCoeff() <
        1e-14);
}

TEST_CASE("partial trace validation") {
  const DensityMatrix rho = ground_density(2);
  const int all[] = {0, 1};
  CHECK_THROWS_AS(partial_trace(rho, all), std::invalid_argument);
  const int unsorted[] = {1, 0};
  CHECK_THROWS_AS(partial_trace(rho, unsorted), std::invalid_argument);
  const int out[] = {2};
  CHECK_THROWS_AS(partial_trace(rho, out), std::invalid_argument);
}

TEST_CASE("fidelity") {
  std::mt19937_64 rng(5);
  const DensityMatrix a = random_pure_density(2, rng);
  const DensityMatrix b = random_pure_density(2, rng);

  CHECK(fidelity(a, a) == doctest::Approx(1.0).epsilon(1e-12));
  // For pure states the fidelity is the squared overlap. The matrix square
  // roots inside the general formula halve the working precision, so the
  // comparison tolerance sits near sqrt(machine epsilon).
  const double overlap = std::abs((a.matrix * b.matrix).trace());
  CHECK(fidelity(a, b) == doctest::Approx(overlap).epsilon(1e-6));
  CHECK(fidelity(a, b) == doctest::Approx(fidelity(b, a)).epsilon(1e-6));

  Eigen::VectorXcd up(2), down(2);
  up << 1.0, 0.0;
  down << 0.0, 1.0;
  CHECK(fidelity(pure_density(1, up), pure_density(1, down)) < 1e-14);

  const DensityMatrix mixed =
      make_density(1, 0.5 * Eigen::MatrixXcd::Identity(2, 2));
  CHECK(fidelity(mixed, pure_density(1, up)) == doctest::Approx(0.5).epsilon(1e-12));

  CHECK_THROWS_AS(fidelity(a, ground_density(3)), std::invalid_argument);
}

TEST_CASE("random states are deterministic in the seed") {
  std::mt19937_64 rng_a(123);
  std::mt19937_64 rng_b(123);
  std::mt19937_64 rng_c(124);
  const DensityMatrix a = random_pure_density(3, rng_a);
  const DensityMatrix b = random_pure_density(3, rng_b);
  const DensityMatrix c = random_pure_density(3, rng_c);
  CHECK((a.matrix - b.matrix).cwiseAbs().maxCoeff() == 0.0);
  CHECK((a.matrix - c.matrix).cwiseAbs().maxCoeff() > 1e-3);

  const DensityHygiene hygiene = density_hygiene(a);
  CHECK(hygiene.trace_defect < 1e-13);
  CHECK(hygiene.min_eigenvalue > -1e-13);
}

TEST_CASE("state constructors and evolution") {
  CHECK(ground_density(2).matrix(0, 0) == Complex(1.0, 0.0));

  const Unitary u = expm_hermitian(single_spin_op(2, 1, Axis::Y), 1.1);
  std::mt19937_64 rng(9);
  const DensityMatrix rho = random_pure_density(2, rng);
  const DensityMatrix evolved = evolve_density(rho, u);
  CHECK(std::abs(evolved.matrix.trace() - Complex(1.0, 0.0)) < 1e-13);
  // Unitary evolution preserves purity.
  CHECK(std::abs((evolved.matrix * evolved.matrix).trace() - Complex(1.0, 0.0)) <
        1e-12);
}

TEST_CASE("state and unitary validation") {
  Eigen::MatrixXcd not_unitary = 2.0 * Eigen::MatrixXcd::Identity(2, 2);
  CHECK_THROWS_AS(make_unitary(1, not_unitary), std::invalid_argument);

  Eigen::MatrixXcd wrong_trace = Eigen::MatrixXcd::Identity(2, 2);
  CHECK_THROWS_AS(make_density(1, wrong_trace), std::invalid_argument);

  Eigen::MatrixXcd negative(2, 2);
  negative << 1.5, 0.0, 0.0, -0.5;
  CHECK_THROWS_AS(make_density(1, negative), std::invalid_argument);

  Eigen::VectorXcd zero = Eigen::VectorXcd::Zero(4);
  CHECK_THROWS_AS(pure_density(2, zero), std::invalid_argument);
}
