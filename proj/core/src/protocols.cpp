#include "spinstore/protocols.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <memory>
#include <numbers>
#include <stdexcept>
#include <string>
#include <utility>

namespace spinstore {

namespace {

constexpr double kHalfPi = std::numbers::pi / 2.0;

void require(bool condition, const std::string& message) {
  if (!condition) throw std::invalid_argument(message);
}

void check_tau(double tau) {
  require(std::isfinite(tau) && tau > 0.0, "segment duration must be positive");
}

void check_scheme(const ReversalScheme& scheme) {
  check_tau(scheme.tau);
  require(scheme.cycles >= 0, "cycle count must be nonnegative");
}

std::shared_ptr<const HermitianOperator> shared_op(HermitianOperator op) {
  return std::make_shared<const HermitianOperator>(std::move(op));
}

std::vector<int> complement_sites(int n, const std::vector<int>& sites) {
  std::vector<bool> member(n, false);
  for (int site : sites) member[site] = true;
  std::vector<int> rest;
  for (int site = 0; site < n; ++site)
    if (!member[site]) rest.push_back(site);
  return rest;
}

// Diagonal weight outside the zero- and one-flip sectors.
bool has_multi_excitation_weight(const DensityMatrix& rho) {
  double weight = 0.0;
  for (int b = 0; b < rho.dim(); ++b)
    if (std::popcount(static_cast<unsigned>(b)) > 1)
      weight += std::abs(rho.matrix(b, b).real());
  return weight > 1e-9;
}

}  // namespace

double scheme_period(const ReversalScheme& scheme) {
  check_scheme(scheme);
  switch (scheme.tag) {
    case SchemeTag::ChainReversal:
    case SchemeTag::PlanarReversal:
      return 3.0 * scheme.tau;
    case SchemeTag::PulseStorage:
    default:
      return 6.0 * scheme.tau;
  }
}

Schedule sign_switch_schedule(const HermitianOperator& h, double tau2) {
  check_tau(tau2);
  Schedule schedule;
  schedule.segments.push_back({shared_op(h), 2.0 * tau2});
  schedule.segments.push_back({shared_op(scaled(h, -2.0)), tau2});
  return schedule;
}

Schedule chain_reversal_schedule(const CouplingMatrix& perpendicular, double tau2) {
  return sign_switch_schedule(
      dipolar_hamiltonian(perpendicular, HamiltonianKind::Dz), tau2);
}

Schedule planar_reversal_schedule(const OrientationCouplings& orientations,
                                  double tau) {
  check_tau(tau);
  const int n = orientations.along_e1.size();
  require(orientations.along_e2.size() == n && orientations.along_normal.size() == n,
          "orientation coupling sizes differ");
  const Eigen::MatrixXd sum = orientations.along_e1.values +
                              orientations.along_e2.values +
                              orientations.along_normal.values;
  const double scale = std::max(
      {1.0, orientations.along_e1.values.cwiseAbs().maxCoeff(),
       orientations.along_e2.values.cwiseAbs().maxCoeff(),
       orientations.along_normal.values.cwiseAbs().maxCoeff()});
  require(sum.cwiseAbs().maxCoeff() <= 1e-10 * scale,
          "orientation couplings must sum to zero pair by pair");

  Schedule schedule;
  schedule.segments.push_back(
      {shared_op(dipolar_hamiltonian(orientations.along_e1, HamiltonianKind::Dz)), tau});
  schedule.segments.push_back(
      {shared_op(dipolar_hamiltonian(orientations.along_e2, HamiltonianKind::Dz)), tau});
  schedule.segments.push_back(
      {shared_op(dipolar_hamiltonian(orientations.along_normal, HamiltonianKind::Dz)), tau});
  return schedule;
}

Schedule pulse_storage_schedule(const CouplingMatrix& couplings, double tau,
                                PulseModel model) {
  check_tau(tau);
  Schedule schedule;
  if (model == PulseModel::IdealToggling) {
    auto dz = shared_op(dipolar_hamiltonian(couplings, HamiltonianKind::Dz));
    auto dy = shared_op(dipolar_hamiltonian(couplings, HamiltonianKind::Dy));
    auto dx = shared_op(dipolar_hamiltonian(couplings, HamiltonianKind::Dx));
    schedule.segments.push_back({dz, tau});
    schedule.segments.push_back({dy, tau});
    schedule.segments.push_back({dx, 2.0 * tau});
    schedule.segments.push_back({dy, tau});
    schedule.segments.push_back({dz, tau});
  } else {
    auto dz = shared_op(dipolar_hamiltonian(couplings, HamiltonianKind::Dz));
    schedule.segments.push_back({dz, tau});
    schedule.segments.push_back({dz, tau});
    schedule.segments.push_back({dz, 2.0 * tau});
    schedule.segments.push_back({dz, tau});
    schedule.segments.push_back({dz, tau});
    // Rotations cancel pairwise across the cycle, so their product is the
    // identity and the cycle needs no closing pulse.
    schedule.pulses.push_back({Axis::X, kHalfPi, +1, 1});
    schedule.pulses.push_back({Axis::Y, kHalfPi, +1, 2});
    schedule.pulses.push_back({Axis::Y, kHalfPi, -1, 3});
    schedule.pulses.push_back({Axis::X, kHalfPi, -1, 4});
  }
  return schedule;
}

Unitary chain_reversal_unitary(const CouplingMatrix& perpendicular, double tau2) {
  return compose_schedule(chain_reversal_schedule(perpendicular, tau2));
}

Unitary planar_reversal_unitary(const OrientationCouplings& orientations,
                                double tau) {
  return compose_schedule(planar_reversal_schedule(orientations, tau));
}

Unitary pulse_storage_unitary(const CouplingMatrix& couplings, double tau,
                              PulseModel model) {
  return compose_schedule(pulse_storage_schedule(couplings, tau, model));
}

Unitary storage_cycle_unitary(const ReversalScheme& scheme,
                              const CouplingMatrix& couplings) {
  check_scheme(scheme);
  switch (scheme.tag) {
    case SchemeTag::ChainReversal:
      return chain_reversal_unitary(couplings, scheme.tau);
    case SchemeTag::PulseStorage:
      return pulse_storage_unitary(couplings, scheme.tau, scheme.pulse_model);
    case SchemeTag::PlanarReversal:
    default:
      throw std::invalid_argument(
          "planar reversal needs the three orientation coupling sets; "
          "use planar_reversal_unitary");
  }
}

ProtocolBuilder chain_reversal_builder(CouplingMatrix perpendicular) {
  return [couplings = std::move(perpendicular)](double tau) {
    return SweepPoint{chain_reversal_unitary(couplings, tau), 3.0 * tau};
  };
}

ProtocolBuilder planar_reversal_builder(OrientationCouplings orientations) {
  return [orientations = std::move(orientations)](double tau) {
    return SweepPoint{planar_reversal_unitary(orientations, tau), 3.0 * tau};
  };
}

ProtocolBuilder pulse_storage_builder(CouplingMatrix couplings, PulseModel model) {
  return [couplings = std::move(couplings), model](double tau) {
    return SweepPoint{pulse_storage_unitary(couplings, tau, model), 6.0 * tau};
  };
}

ProtocolBuilder fixed_time_builder(ProtocolBuilder cycle, double total_time) {
  require(static_cast<bool>(cycle), "fixed time builder needs a cycle builder");
  require(std::isfinite(total_time) && total_time > 0.0,
          "total time must be positive");
  return [cycle = std::move(cycle), total_time](double tau) {
    SweepPoint point = cycle(tau);
    require(point.period > 0.0, "cycle period must be positive");
    const long repeats =
        std::max(1L, std::lround(total_time / point.period));
    return SweepPoint{unitary_power(point.unitary, repeats), point.period};
  };
}

FrozenSubsystemReport run_frozen_subsystem(const CouplingMatrix& couplings,
                                           const Partition& partition,
                                           const DensityMatrix& initial,
                                           double free_time,
                                           const ReversalScheme& scheme) {
  const int n = couplings.size();
  require(partition.n_sites == n, "partition does not match the coupling matrix");
  require(initial.n_spins == n, "initial state does not match the coupling matrix");
  require(!partition.subset_b.empty(), "stored subset must be nonempty");
  require(std::isfinite(free_time) && free_time >= 0.0,
          "free evolution time must be nonnegative");
  check_scheme(scheme);
  require(scheme.tag != SchemeTag::PlanarReversal,
          "planar reversal cannot be derived from a single coupling matrix");

  const PartitionedHamiltonian parts =
      partition_hamiltonian(couplings, partition, HamiltonianKind::Dz);
  const HermitianOperator h_full = make_hermitian(
      n, parts.within_a.matrix + parts.within_b.matrix + parts.between.matrix);

  const Unitary settle = expm_hermitian(h_full, free_time);
  const DensityMatrix rho_start = evolve_density(initial, settle);
  const DensityMatrix rho_b_reference = partial_trace(rho_start, partition.subset_a);
  const bool a_empty = partition.subset_a.empty();
  const DensityMatrix rho_a_reference =
      a_empty ? rho_start : partial_trace(rho_start, partition.subset_b);

  // The stored side sees only its internal couplings during a cycle; the
  // other side keeps running under its own. The two commute, so one cycle is
  // a single product propagator.
  const CouplingMatrix stored_couplings =
      subsystem_couplings(couplings, partition.subset_b);
  const ReversalScheme cycle_scheme{scheme.tag, scheme.tau, scheme.cycles,
                                    PulseModel::IdealToggling};
  const Unitary cycle_b = storage_cycle_unitary(cycle_scheme, stored_couplings);
  const double period = scheme_period(scheme);
  const Unitary cycle_a = expm_hermitian(parts.within_a, period);
  const Unitary cycle = make_unitary(n, cycle_a.matrix * cycle_b.matrix);

  FrozenSubsystemReport report;
  report.free_time = free_time;
  report.storage.cycle_period = period;
  report.storage.exact_scheme = scheme.tag == SchemeTag::ChainReversal;

  DensityMatrix rho = rho_start;
  Unitary stored_power = identity_unitary(n);
  for (int k = 0; k < scheme.cycles; ++k) {
    rho = evolve_density(rho, cycle);
    stored_power = make_unitary(n, cycle_b.matrix * stored_power.matrix);
    report.storage.per_cycle_fidelity.push_back(
        fidelity(rho_b_reference, partial_trace(rho, partition.subset_a)));
    report.storage.per_cycle_identity_distance.push_back(
        distance_to_identity(stored_power));
  }

  report.fidelity_a_after_storage =
      a_empty ? 1.0
              : fidelity(rho_a_reference, partial_trace(rho, partition.subset_b));

  const DensityMatrix resumed = evolve_density(rho, settle);
  report.fidelity_b_after_resume =
      fidelity(rho_b_reference, partial_trace(resumed, partition.subset_a));
  return report;
}

TransferReport run_transfer_and_store(const TransferPlan& plan,
                                      const DensityMatrix& payload,
                                      const ReversalScheme& scheme) {
  require(plan.sender_sites >= 1, "sender block needs at least one site");
  require(plan.line_sites >= 1, "transfer line needs at least one site");
  require(std::isfinite(plan.transfer_time) && plan.transfer_time > 0.0,
          "transfer time must be positive");
  require(payload.n_spins == plan.sender_sites,
          "payload does not match the sender block");
  check_scheme(scheme);
  require(scheme.tag == SchemeTag::ChainReversal,
          "parked storage uses the sign-switch scheme; rotation cycles do not "
          "cancel the exchange couplings");

  const int front = plan.sender_sites + plan.line_sites;  // sender plus line
  const int n = front + plan.sender_sites;
  const double lambda = std::numbers::pi / plan.transfer_time;
  const std::vector<double> bonds = transfer_chain_bonds(n, lambda);

  std::vector<double> front_bonds(bonds.size(), 0.0);
  std::vector<double> receiver_bonds(bonds.size(), 0.0);
  for (std::size_t k = 0; k < bonds.size(); ++k) {
    if (static_cast<int>(k) < front - 1) front_bonds[k] = bonds[k];
    if (static_cast<int>(k) >= front) receiver_bonds[k] = bonds[k];
  }
  const HermitianOperator h_line = xy_chain_hamiltonian(n, bonds);
  const HermitianOperator h_front = xy_chain_hamiltonian(n, front_bonds);
  const HermitianOperator h_receiver = xy_chain_hamiltonian(n, receiver_bonds);

  std::vector<int> front_sites(front);
  for (int site = 0; site < front; ++site) front_sites[site] = site;

  TransferReport report;
  report.multi_excitation = has_multi_excitation_weight(payload);

  DensityMatrix rho = tensor_density(payload, ground_density(n - plan.sender_sites));
  const Unitary run_line = expm_hermitian(h_line, plan.transfer_time);
  rho = evolve_density(rho, run_line);

  const DensityMatrix received = partial_trace(rho, front_sites);
  const Eigen::MatrixXcd mirror = mirror_permutation(plan.sender_sites);
  const DensityMatrix mirrored_payload = make_density(
      plan.sender_sites, mirror * payload.matrix * mirror.adjoint());
  report.transfer_fidelity = fidelity(received, mirrored_payload);

  // Line detached: the receiver block is parked under sign-switch cycles
  // while the rest of the chain keeps evolving internally.
  const double period = scheme_period(scheme);
  report.storage.cycle_period = period;
  report.storage.exact_scheme = true;
  const Unitary park_receiver =
      compose_schedule(sign_switch_schedule(h_receiver, scheme.tau));
  const Unitary run_front = expm_hermitian(h_front, period);
  const Unitary cycle = make_unitary(n, run_front.matrix * park_receiver.matrix);

  Unitary stored_power = identity_unitary(n);
  for (int k = 0; k < scheme.cycles; ++k) {
    rho = evolve_density(rho, cycle);
    stored_power = make_unitary(n, park_receiver.matrix * stored_power.matrix);
    report.storage.per_cycle_fidelity.push_back(
        fidelity(received, partial_trace(rho, front_sites)));
    report.storage.per_cycle_identity_distance.push_back(
        distance_to_identity(stored_power));
  }

  // Sender and line are reset to the reference state before the return trip.
  const DensityMatrix kept = partial_trace(rho, front_sites);
  rho = tensor_density(ground_density(front), kept);
  rho = evolve_density(rho, run_line);

  std::vector<int> tail_sites(n - plan.sender_sites);
  for (std::size_t k = 0; k < tail_sites.size(); ++k)
    tail_sites[k] = plan.sender_sites + static_cast<int>(k);
  report.round_trip_fidelity =
      fidelity(partial_trace(rho, tail_sites), payload);
  report.total_time = 2.0 * plan.transfer_time + scheme.cycles * period;
  return report;
}

ImpurityReport run_impurity_switch(const CouplingMatrix& couplings,
                                   const ImpuritySwitch& impurity,
                                   const DensityMatrix& initial,
                                   std::span<const double> drive_amplitudes) {
  const int n = couplings.size();
  require(initial.n_spins == n, "initial state does not match the coupling matrix");
  require(impurity.impurity_site >= 1 && impurity.impurity_site <= n - 2,
          "impurity site must leave sites on both sides");
  require(std::isfinite(impurity.window) && impurity.window > 0.0,
          "observation window must be positive");
  for (double omega : drive_amplitudes)
    require(std::isfinite(omega) && omega >= 0.0,
            "drive amplitudes must be nonnegative");

  const HermitianOperator h_internal =
      dipolar_hamiltonian(couplings, HamiltonianKind::Dz, impurity.secular_hetero);
  const HermitianOperator drive_axis =
      single_spin_op(n, impurity.impurity_site, Axis::X);

  std::vector<int> front_sites(impurity.impurity_site + 1);
  for (int site = 0; site <= impurity.impurity_site; ++site)
    front_sites[site] = site;
  const DensityMatrix block_reference = partial_trace(initial, front_sites);

  const auto leakage_at = [&](double omega) {
    const HermitianOperator h = make_hermitian(
        n, h_internal.matrix + omega * drive_axis.matrix);
    const Unitary window = expm_hermitian(h, impurity.window);
    const DensityMatrix evolved = evolve_density(initial, window);
    return 1.0 - fidelity(block_reference, partial_trace(evolved, front_sites));
  };

  ImpurityReport report;
  report.window = impurity.window;
  report.baseline_leakage = leakage_at(0.0);
  report.drive_amplitudes.assign(drive_amplitudes.begin(), drive_amplitudes.end());
  report.leakage.reserve(drive_amplitudes.size());
  for (double omega : drive_amplitudes)
    report.leakage.push_back(leakage_at(omega));
  return report;
}

}  // namespace spinstore
