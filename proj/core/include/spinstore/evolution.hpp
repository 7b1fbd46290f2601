#pragma once

#include <memory>
#include <random>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "spinstore/operators.hpp"

// Propagators, piecewise-constant schedules, density matrices, and the
// comparison metrics used by the storage protocols. Site ordering follows
// operators.hpp: site 0 is the most significant bit of the basis index.

namespace spinstore {

struct Unitary {
  int n_spins = 0;
  Eigen::MatrixXcd matrix;

  int dim() const { return static_cast<int>(matrix.rows()); }
};

struct DensityMatrix {
  int n_spins = 0;
  Eigen::MatrixXcd matrix;

  int dim() const { return static_cast<int>(matrix.rows()); }
};

// Instantaneous collective rotation exp(-i sign angle sum_k I_axis,k)
// inserted between schedule segments. placement counts the segments that
// run before the pulse; placement == segments.size() fires after the last
// segment. Only x and y rotation axes are allowed.
struct PulseEvent {
  Axis axis = Axis::X;
  double angle = 0.0;
  int sign = +1;
  std::size_t placement = 0;
};

struct ScheduleSegment {
  std::shared_ptr<const HermitianOperator> hamiltonian;
  double duration = 0.0;
};

// Ordered evolution plan: segment k runs for duration_k under its
// Hamiltonian, with pulses interleaved by placement.
struct Schedule {
  std::vector<ScheduleSegment> segments;
  std::vector<PulseEvent> pulses;

  double period() const;
  int n_spins() const;
};

// Rejects matrices whose defect max |U U+ - 1| exceeds 1e-10.
Unitary make_unitary(int n_spins, Eigen::MatrixXcd matrix);

Unitary identity_unitary(int n_spins);

double unitarity_defect(const Eigen::MatrixXcd& matrix);

// exp(-i H t) through the spectral decomposition of H.
Unitary expm_hermitian(const HermitianOperator& h, double time);

Unitary pulse_unitary(int n_spins, const PulseEvent& pulse);

// Time-ordered product of the schedule, later factors on the left.
Unitary compose_schedule(const Schedule& schedule);

// U^cycles by binary exponentiation; cycles >= 0.
Unitary unitary_power(const Unitary& u, long cycles);

// 1 - |tr U| / dim. Zero exactly when U is a global phase times identity;
// grows quadratically in a small deviation angle.
double distance_to_identity(const Unitary& u);

// u h u+, the operator h pushed through the frame change u.
HermitianOperator conjugated(const HermitianOperator& h, const Unitary& u);

// Rejects matrices that are not Hermitian, unit trace within 1e-10, and
// positive semidefinite down to eigenvalues of -1e-10.
DensityMatrix make_density(int n_spins, Eigen::MatrixXcd matrix);

DensityMatrix pure_density(int n_spins, const Eigen::VectorXcd& amplitudes);

// Fully polarized up state |00...0><00...0|.
DensityMatrix ground_density(int n_spins);

// Haar-like random pure state with a deterministic Gaussian sampler, so a
// fixed generator state reproduces the same state bit for bit.
DensityMatrix random_pure_density(int n_spins, std::mt19937_64& rng);

// Kronecker product; left occupies the more significant (lower-index) sites.
DensityMatrix tensor_density(const DensityMatrix& left, const DensityMatrix& right);

DensityMatrix evolve_density(const DensityMatrix& rho, const Unitary& u);

// Traces out the listed sites (ascending, no duplicates, at least one site
// kept). Kept sites retain their relative order.
DensityMatrix partial_trace(const DensityMatrix& rho, std::span<const int> traced_sites);

// Uhlmann fidelity (tr sqrt(sqrt(a) b sqrt(a)))^2, clamped into [0, 1].
double fidelity(const DensityMatrix& a, const DensityMatrix& b);

struct DensityHygiene {
  double trace_defect = 0.0;   // |tr rho - 1|
  double min_eigenvalue = 0.0;
};

DensityHygiene density_hygiene(const DensityMatrix& rho);

}  // namespace spinstore
