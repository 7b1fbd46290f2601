#include "spinstore/avg_hamiltonian.hpp"

#include <cmath>
#include <complex>
#include <limits>
#include <stdexcept>
#include <string>

namespace spinstore {

namespace {

using Complex = std::complex<double>;

// Distances below this are indistinguishable from an exact identity at
// double precision and would poison a log-log fit.
constexpr double kDistanceFloor = 1e-13;

void require(bool condition, const std::string& message) {
  if (!condition) throw std::invalid_argument(message);
}

void check_schedule(const Schedule& schedule) {
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
}

}  // namespace

Schedule toggling_frame_schedule(const Schedule& schedule) {
  check_schedule(schedule);
  const int n = schedule.n_spins();
  const int dim = 1 << n;

  Schedule toggled;
  toggled.segments.reserve(schedule.segments.size());
  Eigen::MatrixXcd frame = Eigen::MatrixXcd::Identity(dim, dim);
  for (std::size_t k = 0; k < schedule.segments.size(); ++k) {
    for (const auto& pulse : schedule.pulses)
      if (pulse.placement == k) frame = pulse_unitary(n, pulse).matrix * frame;
    Eigen::MatrixXcd moved =
        frame.adjoint() * schedule.segments[k].hamiltonian->matrix * frame;
    moved = 0.5 * (moved + moved.adjoint()).eval();
    toggled.segments.push_back(
        {std::make_shared<const HermitianOperator>(make_hermitian(n, std::move(moved))),
         schedule.segments[k].duration});
  }
  return toggled;
}

HermitianOperator zeroth_order(const Schedule& schedule) {
  check_schedule(schedule);
  const Schedule plain =
      schedule.pulses.empty() ? schedule : toggling_frame_schedule(schedule);
  const double period = plain.period();
  require(period > 0.0, "schedule period must be positive");

  const int n = plain.n_spins();
  Eigen::MatrixXcd mean = Eigen::MatrixXcd::Zero(1 << n, 1 << n);
  for (const auto& segment : plain.segments)
    mean += segment.duration * segment.hamiltonian->matrix;
  mean /= period;
  return make_hermitian(n, std::move(mean));
}

HermitianOperator first_order(const Schedule& schedule) {
  check_schedule(schedule);
  const Schedule plain =
      schedule.pulses.empty() ? schedule : toggling_frame_schedule(schedule);
  const double period = plain.period();
  require(period > 0.0, "schedule period must be positive");

  const int n = plain.n_spins();
  const int dim = 1 << n;
  Eigen::MatrixXcd commutators = Eigen::MatrixXcd::Zero(dim, dim);
  Eigen::MatrixXcd earlier = Eigen::MatrixXcd::Zero(dim, dim);
  for (const auto& segment : plain.segments) {
    const Eigen::MatrixXcd weighted =
        segment.duration * segment.hamiltonian->matrix;
    commutators += weighted * earlier - earlier * weighted;
    earlier += weighted;
  }
  Eigen::MatrixXcd result = Complex(0.0, -0.5 / period) * commutators;
  result = 0.5 * (result + result.adjoint()).eval();
  return make_hermitian(n, std::move(result));
}

LocalField local_field(const CouplingMatrix& couplings) {
  const int n = couplings.size();
  require(n >= 1, "coupling matrix must be nonempty");
  double sum = 0.0;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      if (i != j) sum += couplings.values(i, j) * couplings.values(i, j);
  return LocalField{std::sqrt(sum / n)};
}

ScalingFit fit_scaling(std::span<const double> taus, std::span<const double> periods,
                       std::span<const double> distances, const LocalField& field) {
  require(taus.size() == periods.size() && taus.size() == distances.size(),
          "scaling samples must have equal lengths");
  require(!taus.empty(), "scaling fit needs samples");

  ScalingFit fit;
  fit.taus.assign(taus.begin(), taus.end());
  fit.periods.assign(periods.begin(), periods.end());
  fit.distances.assign(distances.begin(), distances.end());

  std::vector<double> log_tau;
  std::vector<double> log_distance;
  for (std::size_t k = 0; k < taus.size(); ++k) {
    require(std::isfinite(distances[k]) && distances[k] >= 0.0,
            "identity distances must be nonnegative");
    if (periods[k] * field.omega_loc >= 1.0) fit.regime_violation = true;
    if (distances[k] < kDistanceFloor) continue;
    log_tau.push_back(std::log(taus[k]));
    log_distance.push_back(std::log(distances[k]));
  }
  fit.fitted_points = static_cast<int>(log_tau.size());

  if (fit.fitted_points < 2) {
    fit.slope = std::numeric_limits<double>::quiet_NaN();
    fit.intercept = std::numeric_limits<double>::quiet_NaN();
    fit.exact_identity = fit.fitted_points == 0;
    return fit;
  }

  double mean_x = 0.0;
  double mean_y = 0.0;
  for (std::size_t k = 0; k < log_tau.size(); ++k) {
    mean_x += log_tau[k];
    mean_y += log_distance[k];
  }
  mean_x /= fit.fitted_points;
  mean_y /= fit.fitted_points;

  double covariance = 0.0;
  double variance = 0.0;
  for (std::size_t k = 0; k < log_tau.size(); ++k) {
    covariance += (log_tau[k] - mean_x) * (log_distance[k] - mean_y);
    variance += (log_tau[k] - mean_x) * (log_tau[k] - mean_x);
  }
  require(variance > 0.0, "scaling fit needs distinct taus");
  fit.slope = covariance / variance;
  fit.intercept = mean_y - fit.slope * mean_x;
  return fit;
}

ScalingFit error_scaling_probe(const ProtocolBuilder& builder,
                               std::span<const double> taus,
                               const LocalField& field) {
  require(static_cast<bool>(builder), "probe needs a protocol builder");
  require(taus.size() >= 3, "probe needs at least three taus");
  for (std::size_t k = 0; k < taus.size(); ++k) {
    require(std::isfinite(taus[k]) && taus[k] > 0.0, "taus must be positive");
    require(k == 0 || taus[k] > taus[k - 1], "taus must be strictly increasing");
  }

  std::vector<double> periods(taus.size());
  std::vector<double> distances(taus.size());
  for (std::size_t k = 0; k < taus.size(); ++k) {
    const SweepPoint point = builder(taus[k]);
    periods[k] = point.period;
    distances[k] = distance_to_identity(point.unitary);
  }
  return fit_scaling(taus, periods, distances, field);
}

}  // namespace spinstore
