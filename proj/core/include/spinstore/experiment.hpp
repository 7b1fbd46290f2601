#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>

#include "spinstore/protocols.hpp"

// Config-driven experiment runner behind the command line tool.
//
// Configs are line oriented: [section] headers, key = value lines, and '#'
// comments. Sections are [geometry], [protocol], [sweep], and [output]; the
// README lists every key. Reports are deterministic byte for byte given the
// same config and seed.

namespace spinstore {

class ConfigError : public std::runtime_error {
 public:
  ConfigError(int line, const std::string& message);

  int line() const { return line_; }

 private:
  int line_;
};

enum class GeometryKind { Chain, Lattice, Sites };

enum class ExperimentScheme {
  ChainReversal,
  PlanarReversal,
  PulseStorage,
  FrozenSubsystem,
  TransferStore,
  ImpuritySwitch,
};

struct GeometryConfig {
  GeometryKind kind = GeometryKind::Chain;
  int n_sites = 2;
  int rows = 1;
  int cols = 1;
  double spacing = 1.0;
  std::vector<SpinSite> explicit_sites;
  std::vector<double> gammas;  // empty, one broadcast value, or one per site
  Eigen::Vector3d field = Eigen::Vector3d::UnitZ();
  double g = 1.0;
  bool present = false;  // a [geometry] section appeared in the config
};

struct ProtocolConfig {
  ExperimentScheme scheme = ExperimentScheme::ChainReversal;
  double tau = 0.1;
  int cycles = 1;
  PulseModel pulse_model = PulseModel::IdealToggling;
  std::optional<double> storage_time;  // fixed-time mode: cycles = time / period
  std::vector<int> subsystem_a;        // frozen_subsystem
  SchemeTag storage_scheme = SchemeTag::ChainReversal;  // frozen inner cycle
  double t0 = 1.0;                     // free time (frozen) or transfer time
  int sender = 1;                      // transfer_store
  int line = 3;
  int impurity = 1;                    // impurity_switch
  double omega = 0.0;
  double window = 1.0;
  bool secular_hetero = true;
  std::vector<std::string> initial;    // per-site tokens, or the single token "random"
  std::set<std::string> explicit_keys;
};

struct SweepConfig {
  std::string parameter;
  std::vector<double> values;
};

struct OutputConfig {
  std::optional<std::string> csv;
  std::optional<std::string> json;
};

struct ExperimentConfig {
  GeometryConfig geometry;
  ProtocolConfig protocol;
  std::optional<SweepConfig> sweep;
  OutputConfig output;
};

struct PointResult {
  int point_index = 0;
  double param_value = 0.0;
  double period = 0.0;
  double identity_distance = 0.0;
  double fidelity = 1.0;
};

struct RunReport {
  std::string scheme_name;
  std::uint64_t seed = 0;
  std::vector<PointResult> points;
  std::optional<ScalingFit> fit;  // attached for tau sweeps of reversal schemes
};

enum class OutputFormat { Csv, Json };

ExperimentConfig parse_config(const std::string& text);
ExperimentConfig load_config(const std::filesystem::path& path);

Geometry configured_geometry(const GeometryConfig& config);

// Number of spins the configured experiment simulates.
int configured_spin_count(const ExperimentConfig& config);

// Runs the configured experiment. Systems above 13 spins are refused.
RunReport run_experiment(const ExperimentConfig& config, std::uint64_t seed);

// Structural invariant checks on the configured system, one log line each.
// Returns false as soon as any check fails.
bool run_verification(const ExperimentConfig& config, std::ostream& log);

std::string report_to_csv(const RunReport& report);
std::string report_to_json(const RunReport& report);

// Writes the report under out_dir using the configured file names (defaults
// report.csv and report.json). A format restriction keeps only that file.
std::vector<std::filesystem::path> emit_report(
    const RunReport& report, const OutputConfig& output,
    const std::filesystem::path& out_dir,
    std::optional<OutputFormat> only = std::nullopt);

}  // namespace spinstore
