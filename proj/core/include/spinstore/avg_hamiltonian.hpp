#pragma once

#include <functional>
#include <span>
#include <vector>

#include "spinstore/evolution.hpp"

// Leading average-Hamiltonian terms of a schedule and the scaling probe used
// to measure how fast a reversal cycle approaches the identity.

namespace spinstore {

// Root mean square coupling strength per site,
// omega_loc = sqrt(sum_{i != j} D_ij^2 / n). Sets the time scale below which
// the segment-averaged description of a cycle is trustworthy.
struct LocalField {
  double omega_loc = 0.0;
};

struct SweepPoint {
  Unitary unitary;
  double period = 0.0;
};

// Maps a segment duration tau to the composed cycle (or cycle train) and the
// single-cycle period.
using ProtocolBuilder = std::function<SweepPoint(double tau)>;

struct ScalingFit {
  std::vector<double> taus;
  std::vector<double> periods;
  std::vector<double> distances;
  double slope = 0.0;           // d log(distance) / d log(tau)
  double intercept = 0.0;
  int fitted_points = 0;        // points above the distance floor
  bool regime_violation = false;  // some cycle period reached 1 / omega_loc
  bool exact_identity = false;    // every distance sat below the floor
};

// Folds the pulses into the segments: segment k is conjugated into the frame
// of all pulses that fire before it. The returned schedule has no pulses and
// composes to the same unitary whenever the full pulse product is identity.
Schedule toggling_frame_schedule(const Schedule& schedule);

// Duration-weighted mean of the (toggled) segment Hamiltonians.
HermitianOperator zeroth_order(const Schedule& schedule);

// First correction (-i / 2T) sum_{k > l} [H_k tau_k, H_l tau_l] over the
// (toggled) segments; vanishes for palindromic schedules.
HermitianOperator first_order(const Schedule& schedule);

LocalField local_field(const CouplingMatrix& couplings);

// Log-log fit of distance against tau. Points with distance below 1e-13 are
// treated as exact and excluded; fewer than two surviving points yield NaN
// slope and intercept.
ScalingFit fit_scaling(std::span<const double> taus, std::span<const double> periods,
                       std::span<const double> distances, const LocalField& field);

// Evaluates the builder on an increasing grid of at least three taus and
// fits the resulting identity distances.
ScalingFit error_scaling_probe(const ProtocolBuilder& builder,
                               std::span<const double> taus,
                               const LocalField& field);

}  // namespace spinstore
