#include "spinstore/experiment.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <map>
#include <numbers>
#include <ostream>
#include <sstream>

#include <nlohmann/json.hpp>

namespace spinstore {

namespace {

constexpr int kMaxSpins = 13;
constexpr std::uint64_t kDefaultSeed = 12345;

[[noreturn]] void fail(int line, const std::string& message) {
  throw ConfigError(line, message);
}

std::string trimmed(const std::string& text) {
  const auto begin = text.find_first_not_of(" \t\r");
  if (begin == std::string::npos) return {};
  const auto end = text.find_last_not_of(" \t\r");
  return text.substr(begin, end - begin + 1);
}

std::vector<std::string> split_words(const std::string& text) {
  std::vector<std::string> words;
  std::istringstream stream(text);
  std::string word;
  while (stream >> word) words.push_back(word);
  return words;
}

double parse_double(const std::string& value, int line, const std::string& key) {
  try {
    std::size_t used = 0;
    const double parsed = std::stod(value, &used);
    if (used != value.size() || !std::isfinite(parsed))
      fail(line, "key '" + key + "' needs a finite number, got '" + value + "'");
    return parsed;
  } catch (const ConfigError&) {
    throw;
  } catch (const std::exception&) {
    fail(line, "key '" + key + "' needs a number, got '" + value + "'");
  }
}

int parse_int(const std::string& value, int line, const std::string& key) {
  try {
    std::size_t used = 0;
    const long parsed = std::stol(value, &used);
    if (used != value.size() || parsed < std::numeric_limits<int>::min() ||
        parsed > std::numeric_limits<int>::max())
      fail(line, "key '" + key + "' needs an integer, got '" + value + "'");
    return static_cast<int>(parsed);
  } catch (const ConfigError&) {
    throw;
  } catch (const std::exception&) {
    fail(line, "key '" + key + "' needs an integer, got '" + value + "'");
  }
}

bool parse_bool(const std::string& value, int line, const std::string& key) {
  if (value == "true" || value == "on" || value == "1") return true;
  if (value == "false" || value == "off" || value == "0") return false;
  fail(line, "key '" + key + "' needs true or false, got '" + value + "'");
}

std::vector<double> parse_doubles(const std::string& value, int line,
                                  const std::string& key) {
  std::vector<double> values;
  for (const auto& word : split_words(value))
    values.push_back(parse_double(word, line, key));
  if (values.empty()) fail(line, "key '" + key + "' needs at least one number");
  return values;
}

std::vector<int> parse_ints(const std::string& value, int line,
                            const std::string& key) {
  std::vector<int> values;
  for (const auto& word : split_words(value))
    values.push_back(parse_int(word, line, key));
  if (values.empty()) fail(line, "key '" + key + "' needs at least one integer");
  return values;
}

Eigen::Vector3d parse_vector3(const std::string& value, int line,
                              const std::string& key) {
  const auto values = parse_doubles(value, line, key);
  if (values.size() != 3) fail(line, "key '" + key + "' needs three numbers");
  return Eigen::Vector3d(values[0], values[1], values[2]);
}

// One number, deterministic textual form. %.12g keeps sweeps readable while
// staying stable across runs; NaN is spelled out explicitly.
std::string format_double(double value) {
  if (std::isnan(value)) return "nan";
  char buffer[48];
  std::snprintf(buffer, sizeof buffer, "%.12g", value);
  return buffer;
}

const std::map<std::string, ExperimentScheme>& scheme_names() {
  static const std::map<std::string, ExperimentScheme> names = {
      {"chain_reversal", ExperimentScheme::ChainReversal},
      {"planar_reversal", ExperimentScheme::PlanarReversal},
      {"pulse_storage", ExperimentScheme::PulseStorage},
      {"frozen_subsystem", ExperimentScheme::FrozenSubsystem},
      {"transfer_store", ExperimentScheme::TransferStore},
      {"impurity_switch", ExperimentScheme::ImpuritySwitch},
  };
  return names;
}

std::string scheme_name(ExperimentScheme scheme) {
  for (const auto& [name, value] : scheme_names())
    if (value == scheme) return name;
  return "unknown";
}

struct ConfigLine {
  std::string section;
  std::string key;
  std::string value;
  int line = 0;
};

std::vector<ConfigLine> tokenize(const std::string& text) {
  std::vector<ConfigLine> lines;
  std::istringstream stream(text);
  std::string raw;
  std::string section;
  int number = 0;
  while (std::getline(stream, raw)) {
    ++number;
    const auto comment = raw.find('#');
    if (comment != std::string::npos) raw.erase(comment);
    const std::string line = trimmed(raw);
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']') fail(number, "unterminated section header");
      section = trimmed(line.substr(1, line.size() - 2));
      if (section != "geometry" && section != "protocol" && section != "sweep" &&
          section != "output")
        fail(number, "unknown section '" + section + "'");
      continue;
    }
    const auto equals = line.find('=');
    if (equals == std::string::npos)
      fail(number, "expected 'key = value', got '" + line + "'");
    if (section.empty()) fail(number, "key outside of any section");
    ConfigLine entry;
    entry.section = section;
    entry.key = trimmed(line.substr(0, equals));
    entry.value = trimmed(line.substr(equals + 1));
    entry.line = number;
    if (entry.key.empty()) fail(number, "empty key");
    if (entry.value.empty()) fail(number, "key '" + entry.key + "' has no value");
    lines.push_back(std::move(entry));
  }
  return lines;
}

void apply_geometry_key(GeometryConfig& geometry, const ConfigLine& entry) {
  const std::string& key = entry.key;
  if (key == "kind") {
    if (entry.value == "chain")
      geometry.kind = GeometryKind::Chain;
    else if (entry.value == "lattice")
      geometry.kind = GeometryKind::Lattice;
    else if (entry.value == "sites")
      geometry.kind = GeometryKind::Sites;
    else
      fail(entry.line, "key 'kind' must be chain, lattice, or sites");
  } else if (key == "n") {
    geometry.n_sites = parse_int(entry.value, entry.line, key);
  } else if (key == "rows") {
    geometry.rows = parse_int(entry.value, entry.line, key);
  } else if (key == "cols") {
    geometry.cols = parse_int(entry.value, entry.line, key);
  } else if (key == "spacing") {
    geometry.spacing = parse_double(entry.value, entry.line, key);
  } else if (key == "site") {
    const auto values = parse_doubles(entry.value, entry.line, key);
    if (values.size() != 3 && values.size() != 4)
      fail(entry.line, "key 'site' needs 'x y z' or 'x y z gamma'");
    SpinSite site;
    site.position = Eigen::Vector3d(values[0], values[1], values[2]);
    if (values.size() == 4) site.gamma = values[3];
    geometry.explicit_sites.push_back(site);
  } else if (key == "gammas") {
    geometry.gammas = parse_doubles(entry.value, entry.line, key);
  } else if (key == "field") {
    geometry.field = parse_vector3(entry.value, entry.line, key);
  } else if (key == "g") {
    geometry.g = parse_double(entry.value, entry.line, key);
  } else {
    fail(entry.line, "unknown key '" + key + "' in [geometry]");
  }
}

void apply_protocol_key(ProtocolConfig& protocol, const ConfigLine& entry) {
  const std::string& key = entry.key;
  if (key == "scheme") {
    const auto found = scheme_names().find(entry.value);
    if (found == scheme_names().end())
      fail(entry.line, "unknown scheme '" + entry.value + "'");
    protocol.scheme = found->second;
  } else if (key == "tau") {
    protocol.tau = parse_double(entry.value, entry.line, key);
  } else if (key == "cycles") {
    protocol.cycles = parse_int(entry.value, entry.line, key);
  } else if (key == "pulse_model") {
    if (entry.value == "ideal")
      protocol.pulse_model = PulseModel::IdealToggling;
    else if (entry.value == "explicit")
      protocol.pulse_model = PulseModel::ExplicitPulses;
    else
      fail(entry.line, "key 'pulse_model' must be ideal or explicit");
  } else if (key == "storage_time") {
    protocol.storage_time = parse_double(entry.value, entry.line, key);
  } else if (key == "subsystem_a") {
    protocol.subsystem_a = parse_ints(entry.value, entry.line, key);
  } else if (key == "storage") {
    if (entry.value == "chain_reversal")
      protocol.storage_scheme = SchemeTag::ChainReversal;
    else if (entry.value == "pulse_storage")
      protocol.storage_scheme = SchemeTag::PulseStorage;
    else
      fail(entry.line, "key 'storage' must be chain_reversal or pulse_storage");
  } else if (key == "t0") {
    protocol.t0 = parse_double(entry.value, entry.line, key);
  } else if (key == "sender") {
    protocol.sender = parse_int(entry.value, entry.line, key);
  } else if (key == "line") {
    protocol.line = parse_int(entry.value, entry.line, key);
  } else if (key == "impurity") {
    protocol.impurity = parse_int(entry.value, entry.line, key);
  } else if (key == "omega") {
    protocol.omega = parse_double(entry.value, entry.line, key);
  } else if (key == "window") {
    protocol.window = parse_double(entry.value, entry.line, key);
  } else if (key == "secular_hetero") {
    protocol.secular_hetero = parse_bool(entry.value, entry.line, key);
  } else if (key == "initial") {
    protocol.initial = split_words(entry.value);
  } else {
    fail(entry.line, "unknown key '" + key + "' in [protocol]");
  }
  protocol.explicit_keys.insert(key);
}

void apply_sweep_key(SweepConfig& sweep, const ConfigLine& entry) {
  const std::string& key = entry.key;
  if (key == "parameter") {
    sweep.parameter = entry.value;
  } else if (key == "values") {
    sweep.values = parse_doubles(entry.value, entry.line, key);
  } else if (key == "logspace") {
    const auto values = parse_doubles(entry.value, entry.line, key);
    if (values.size() != 3)
      fail(entry.line, "key 'logspace' needs 'start stop count'");
    const double start = values[0];
    const double stop = values[1];
    const int count = static_cast<int>(values[2]);
    if (start <= 0.0 || stop <= start || count < 2 || values[2] != count)
      fail(entry.line, "key 'logspace' needs 0 < start < stop and count >= 2");
    sweep.values.clear();
    for (int k = 0; k < count; ++k)
      sweep.values.push_back(
          start * std::pow(stop / start, static_cast<double>(k) / (count - 1)));
  } else {
    fail(entry.line, "unknown key '" + key + "' in [sweep]");
  }
}

void apply_output_key(OutputConfig& output, const ConfigLine& entry) {
  if (entry.key == "csv")
    output.csv = entry.value;
  else if (entry.key == "json")
    output.json = entry.value;
  else
    fail(entry.line, "unknown key '" + entry.key + "' in [output]");
}

// Per-scheme key sets; anything else in [protocol] is rejected up front.
const std::map<ExperimentScheme, std::set<std::string>>& allowed_protocol_keys() {
  static const std::map<ExperimentScheme, std::set<std::string>> allowed = {
      {ExperimentScheme::ChainReversal,
       {"scheme", "tau", "cycles", "storage_time", "initial"}},
      {ExperimentScheme::PlanarReversal,
       {"scheme", "tau", "cycles", "storage_time", "initial"}},
      {ExperimentScheme::PulseStorage,
       {"scheme", "tau", "cycles", "storage_time", "pulse_model", "initial"}},
      {ExperimentScheme::FrozenSubsystem,
       {"scheme", "tau", "cycles", "subsystem_a", "storage", "pulse_model", "t0",
        "initial"}},
      {ExperimentScheme::TransferStore,
       {"scheme", "tau", "cycles", "t0", "sender", "line", "initial"}},
      {ExperimentScheme::ImpuritySwitch,
       {"scheme", "impurity", "omega", "window", "secular_hetero", "initial"}},
  };
  return allowed;
}

const std::map<ExperimentScheme, std::set<std::string>>& sweepable_keys() {
  static const std::map<ExperimentScheme, std::set<std::string>> sweepable = {
      {ExperimentScheme::ChainReversal, {"tau", "cycles", "storage_time"}},
      {ExperimentScheme::PlanarReversal, {"tau", "cycles", "storage_time"}},
      {ExperimentScheme::PulseStorage, {"tau", "cycles", "storage_time"}},
      {ExperimentScheme::FrozenSubsystem, {"tau", "cycles", "t0"}},
      {ExperimentScheme::TransferStore, {"tau", "cycles", "t0"}},
      {ExperimentScheme::ImpuritySwitch, {"omega", "window"}},
  };
  return sweepable;
}

void validate_config(const ExperimentConfig& config,
                     const std::map<std::string, int>& protocol_lines) {
  const auto& protocol = config.protocol;
  const auto line_of = [&](const std::string& key) {
    const auto found = protocol_lines.find(key);
    return found == protocol_lines.end() ? 0 : found->second;
  };

  if (!protocol.explicit_keys.contains("scheme"))
    fail(0, "[protocol] needs a scheme");

  const auto& allowed = allowed_protocol_keys().at(protocol.scheme);
  for (const auto& key : protocol.explicit_keys)
    if (!allowed.contains(key))
      fail(line_of(key), "key '" + key + "' does not apply to scheme '" +
                             scheme_name(protocol.scheme) + "'");

  if (protocol.scheme != ExperimentScheme::TransferStore && !config.geometry.present)
    fail(0, "missing [geometry] section");
  if (protocol.scheme == ExperimentScheme::FrozenSubsystem &&
      protocol.subsystem_a.empty())
    fail(0, "frozen_subsystem needs subsystem_a");

  if (config.sweep) {
    if (config.sweep->parameter.empty()) fail(0, "[sweep] needs a parameter");
    if (config.sweep->values.empty()) fail(0, "[sweep] needs values or logspace");
    const auto& sweepable = sweepable_keys().at(protocol.scheme);
    if (!sweepable.contains(config.sweep->parameter))
      fail(0, "sweep parameter '" + config.sweep->parameter +
                  "' does not apply to scheme '" + scheme_name(protocol.scheme) + "'");
    if (!protocol.explicit_keys.contains(config.sweep->parameter))
      fail(0, "sweep parameter '" + config.sweep->parameter +
                  "' is not set in [protocol]");
  }
}

Eigen::Vector2cd token_state(const std::string& token, int n_spins) {
  const double inv_sqrt2 = 1.0 / std::numbers::sqrt2;
  if (token == "up") return Eigen::Vector2cd(1.0, 0.0);
  if (token == "down") return Eigen::Vector2cd(0.0, 1.0);
  if (token == "+x") return Eigen::Vector2cd(inv_sqrt2, inv_sqrt2);
  if (token == "-x") return Eigen::Vector2cd(inv_sqrt2, -inv_sqrt2);
  if (token == "+y")
    return Eigen::Vector2cd(inv_sqrt2, std::complex<double>(0.0, inv_sqrt2));
  if (token == "-y")
    return Eigen::Vector2cd(inv_sqrt2, std::complex<double>(0.0, -inv_sqrt2));
  (void)n_spins;
  throw std::invalid_argument("unknown initial state token '" + token +
                              "' (expected up, down, +x, -x, +y, -y, or random)");
}

DensityMatrix initial_state(const std::vector<std::string>& tokens, int n_spins,
                            std::mt19937_64& rng) {
  if (tokens.empty() || (tokens.size() == 1 && tokens[0] == "random"))
    return random_pure_density(n_spins, rng);
  if (static_cast<int>(tokens.size()) != n_spins)
    throw std::invalid_argument("initial state needs one token per site (" +
                                std::to_string(n_spins) + ")");
  Eigen::VectorXcd psi = Eigen::VectorXcd::Ones(1);
  for (const auto& token : tokens) {
    const Eigen::Vector2cd local = token_state(token, n_spins);
    Eigen::VectorXcd next(psi.size() * 2);
    for (Eigen::Index k = 0; k < psi.size(); ++k) {
      next[2 * k] = psi[k] * local[0];
      next[2 * k + 1] = psi[k] * local[1];
    }
    psi = std::move(next);
  }
  return pure_density(n_spins, psi);
}

ProtocolConfig with_sweep_value(const ProtocolConfig& base,
                                const std::string& parameter, double value) {
  ProtocolConfig applied = base;
  if (parameter == "tau") {
    applied.tau = value;
  } else if (parameter == "cycles") {
    const long cycles = std::lround(value);
    if (std::abs(value - cycles) > 1e-9 || cycles < 0)
      throw std::invalid_argument("swept cycle counts must be nonnegative integers");
    applied.cycles = static_cast<int>(cycles);
  } else if (parameter == "storage_time") {
    applied.storage_time = value;
  } else if (parameter == "t0") {
    applied.t0 = value;
  } else if (parameter == "omega") {
    applied.omega = value;
  } else if (parameter == "window") {
    applied.window = value;
  } else {
    throw std::invalid_argument("unknown sweep parameter '" + parameter + "'");
  }
  return applied;
}

int cycles_for(const ProtocolConfig& protocol, double period) {
  if (!protocol.storage_time) return protocol.cycles;
  if (*protocol.storage_time <= 0.0)
    throw std::invalid_argument("storage_time must be positive");
  return static_cast<int>(std::max(1L, std::lround(*protocol.storage_time / period)));
}

struct SchemeContext {
  Geometry geometry;
  std::optional<CouplingMatrix> couplings;
  std::optional<OrientationCouplings> orientations;
  DensityMatrix initial;
  double omega_loc = 0.0;
};

PointResult evaluate_point(const ExperimentConfig& config,
                           const ProtocolConfig& protocol, double param_value,
                           const SchemeContext& context) {
  PointResult point;
  point.param_value = param_value;

  switch (protocol.scheme) {
    case ExperimentScheme::ChainReversal:
    case ExperimentScheme::PlanarReversal:
    case ExperimentScheme::PulseStorage: {
      Unitary cycle =
          protocol.scheme == ExperimentScheme::ChainReversal
              ? chain_reversal_unitary(*context.couplings, protocol.tau)
          : protocol.scheme == ExperimentScheme::PlanarReversal
              ? planar_reversal_unitary(*context.orientations, protocol.tau)
              : pulse_storage_unitary(*context.couplings, protocol.tau,
                                      protocol.pulse_model);
      const double period = protocol.scheme == ExperimentScheme::PulseStorage
                                ? 6.0 * protocol.tau
                                : 3.0 * protocol.tau;
      const Unitary total =
          unitary_power(cycle, cycles_for(protocol, period));
      point.period = period;
      point.identity_distance = distance_to_identity(total);
      point.fidelity = fidelity(context.initial,
                                evolve_density(context.initial, total));
      break;
    }
    case ExperimentScheme::FrozenSubsystem: {
      const Partition partition =
          make_partition(context.geometry.size(), protocol.subsystem_a);
      const ReversalScheme scheme{protocol.storage_scheme, protocol.tau,
                                  protocol.cycles, protocol.pulse_model};
      const FrozenSubsystemReport report = run_frozen_subsystem(
          *context.couplings, partition, context.initial, protocol.t0, scheme);
      point.period = report.storage.cycle_period;
      point.identity_distance =
          report.storage.per_cycle_identity_distance.empty()
              ? 0.0
              : report.storage.per_cycle_identity_distance.back();
      point.fidelity = report.storage.per_cycle_fidelity.empty()
                           ? 1.0
                           : report.storage.per_cycle_fidelity.back();
      break;
    }
    case ExperimentScheme::TransferStore: {
      const TransferPlan plan{protocol.sender, protocol.line, protocol.t0};
      const ReversalScheme scheme{SchemeTag::ChainReversal, protocol.tau,
                                  protocol.cycles, PulseModel::IdealToggling};
      const TransferReport report =
          run_transfer_and_store(plan, context.initial, scheme);
      point.period = report.storage.cycle_period;
      point.identity_distance =
          report.storage.per_cycle_identity_distance.empty()
              ? 0.0
              : report.storage.per_cycle_identity_distance.back();
      point.fidelity = report.round_trip_fidelity;
      break;
    }
    case ExperimentScheme::ImpuritySwitch: {
      const ImpuritySwitch impurity{protocol.impurity, protocol.window,
                                    protocol.secular_hetero};
      const double omega = protocol.omega;
      const ImpurityReport report = run_impurity_switch(
          *context.couplings, impurity, context.initial, {&omega, 1});
      point.period = protocol.window;
      point.identity_distance = std::numeric_limits<double>::quiet_NaN();
      point.fidelity = 1.0 - report.leakage.front();
      break;
    }
  }
  (void)config;
  return point;
}

}  // namespace

ConfigError::ConfigError(int line, const std::string& message)
    : std::runtime_error(line > 0 ? "line " + std::to_string(line) + ": " + message
                                  : message),
      line_(line) {}

ExperimentConfig parse_config(const std::string& text) {
  ExperimentConfig config;
  std::map<std::string, int> protocol_lines;
  bool saw_sweep = false;
  SweepConfig sweep;

  for (const auto& entry : tokenize(text)) {
    if (entry.section == "geometry") {
      config.geometry.present = true;
      apply_geometry_key(config.geometry, entry);
    } else if (entry.section == "protocol") {
      apply_protocol_key(config.protocol, entry);
      protocol_lines[entry.key] = entry.line;
    } else if (entry.section == "sweep") {
      saw_sweep = true;
      apply_sweep_key(sweep, entry);
    } else {
      apply_output_key(config.output, entry);
    }
  }
  if (saw_sweep) config.sweep = std::move(sweep);

  validate_config(config, protocol_lines);
  return config;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream stream(path);
  if (!stream) throw std::runtime_error("cannot read config '" + path.string() + "'");
  std::ostringstream buffer;
  buffer << stream.rdbuf();
  return parse_config(buffer.str());
}

Geometry configured_geometry(const GeometryConfig& config) {
  Geometry geometry;
  switch (config.kind) {
    case GeometryKind::Chain:
      geometry = build_chain(config.n_sites, config.spacing);
      break;
    case GeometryKind::Lattice:
      geometry = build_lattice(config.rows, config.cols, config.spacing);
      break;
    case GeometryKind::Sites:
      geometry = make_geometry(config.explicit_sites);
      break;
  }
  if (!config.gammas.empty()) {
    if (config.gammas.size() == 1) {
      for (auto& site : geometry.sites) site.gamma = config.gammas.front();
    } else if (config.gammas.size() == geometry.sites.size()) {
      for (std::size_t k = 0; k < geometry.sites.size(); ++k)
        geometry.sites[k].gamma = config.gammas[k];
    } else {
      throw std::invalid_argument("gammas needs one value or one per site");
    }
    geometry = make_geometry(std::move(geometry.sites));
  }
  return geometry;
}

int configured_spin_count(const ExperimentConfig& config) {
  if (config.protocol.scheme == ExperimentScheme::TransferStore)
    return 2 * config.protocol.sender + config.protocol.line;
  switch (config.geometry.kind) {
    case GeometryKind::Chain:
      return config.geometry.n_sites;
    case GeometryKind::Lattice:
      return config.geometry.rows * config.geometry.cols;
    case GeometryKind::Sites:
    default:
      return static_cast<int>(config.geometry.explicit_sites.size());
  }
}

RunReport run_experiment(const ExperimentConfig& config, std::uint64_t seed) {
  const int n_spins = configured_spin_count(config);
  if (n_spins > kMaxSpins)
    throw std::invalid_argument(
        "refusing to simulate " + std::to_string(n_spins) +
        " spins; dense matrices stop at " + std::to_string(kMaxSpins));
  if (n_spins < 1) throw std::invalid_argument("experiment has no spins");

  const auto& protocol = config.protocol;
  SchemeContext context;
  if (protocol.scheme != ExperimentScheme::TransferStore) {
    context.geometry = configured_geometry(config.geometry);
    if (protocol.scheme == ExperimentScheme::PlanarReversal) {
      context.orientations =
          three_orientation_couplings(context.geometry, config.geometry.g);
      context.omega_loc = local_field(context.orientations->along_e1).omega_loc;
    } else {
      context.couplings = dipolar_couplings(
          context.geometry, field_along(config.geometry.field), config.geometry.g);
      context.omega_loc = local_field(*context.couplings).omega_loc;
    }
  }

  std::mt19937_64 rng(seed == 0 ? kDefaultSeed : seed);
  const int state_spins = protocol.scheme == ExperimentScheme::TransferStore
                              ? protocol.sender
                              : n_spins;
  context.initial = initial_state(protocol.initial, state_spins, rng);

  RunReport report;
  report.scheme_name = scheme_name(protocol.scheme);
  report.seed = seed == 0 ? kDefaultSeed : seed;

  std::vector<double> values;
  if (config.sweep) {
    values = config.sweep->values;
  } else {
    // Single point at the scheme's primary parameter.
    switch (protocol.scheme) {
      case ExperimentScheme::FrozenSubsystem:
      case ExperimentScheme::TransferStore:
        values.push_back(protocol.t0);
        break;
      case ExperimentScheme::ImpuritySwitch:
        values.push_back(protocol.omega);
        break;
      default:
        values.push_back(protocol.tau);
        break;
    }
  }

  for (std::size_t k = 0; k < values.size(); ++k) {
    const ProtocolConfig applied =
        config.sweep ? with_sweep_value(protocol, config.sweep->parameter, values[k])
                     : protocol;
    PointResult point = evaluate_point(config, applied, values[k], context);
    point.point_index = static_cast<int>(k);
    report.points.push_back(point);
  }

  const bool reversal_scheme =
      protocol.scheme == ExperimentScheme::ChainReversal ||
      protocol.scheme == ExperimentScheme::PlanarReversal ||
      protocol.scheme == ExperimentScheme::PulseStorage;
  if (config.sweep && config.sweep->parameter == "tau" && reversal_scheme) {
    std::vector<double> taus;
    std::vector<double> periods;
    std::vector<double> distances;
    for (const auto& point : report.points) {
      taus.push_back(point.param_value);
      periods.push_back(point.period);
      distances.push_back(point.identity_distance);
    }
    report.fit = fit_scaling(taus, periods, distances, LocalField{context.omega_loc});
  }
  return report;
}

bool run_verification(const ExperimentConfig& config, std::ostream& log) {
  bool all_ok = true;
  const auto check = [&](const std::string& label, bool ok,
                         const std::string& detail = {}) {
    log << "verify " << label << ": " << (ok ? "ok" : "FAIL");
    if (!ok && !detail.empty()) log << " (" << detail << ")";
    log << "\n";
    all_ok = all_ok && ok;
    return ok;
  };

  const auto& protocol = config.protocol;
  if (protocol.scheme == ExperimentScheme::TransferStore) {
    const int n = 2 * protocol.sender + protocol.line;
    const double lambda = std::numbers::pi / protocol.t0;
    const HermitianOperator h = transfer_chain_hamiltonian(n, lambda);
    check("exchange chain hermiticity",
          (h.matrix - h.matrix.adjoint()).cwiseAbs().maxCoeff() <= 1e-12);
    check("propagator unitarity",
          unitarity_defect(expm_hermitian(h, protocol.t0).matrix) <= 1e-10);
    check("mirror permutation unitarity",
          unitarity_defect(mirror_permutation(n)) <= 1e-10);
    const HermitianOperator mean =
        zeroth_order(sign_switch_schedule(h, protocol.tau));
    check("storage cycle averages to zero",
          mean.matrix.cwiseAbs().maxCoeff() <=
              1e-12 * std::max(1.0, h.matrix.cwiseAbs().maxCoeff()));
    return all_ok;
  }

  const Geometry geometry = configured_geometry(config.geometry);
  const CouplingMatrix couplings = dipolar_couplings(
      geometry, field_along(config.geometry.field), config.geometry.g);
  const double coupling_scale =
      std::max(1.0, couplings.values.cwiseAbs().maxCoeff());

  check("coupling symmetry",
        (couplings.values - couplings.values.transpose()).cwiseAbs().maxCoeff() <=
                1e-12 * coupling_scale &&
            couplings.values.diagonal().cwiseAbs().maxCoeff() <=
                1e-12 * coupling_scale);

  const int n = geometry.size();
  if (n >= 2 && n <= kMaxSpins) {
    const HermitianOperator h_dz = dipolar_hamiltonian(couplings, HamiltonianKind::Dz);
    const HermitianOperator h_dy = dipolar_hamiltonian(couplings, HamiltonianKind::Dy);
    const HermitianOperator h_dx = dipolar_hamiltonian(couplings, HamiltonianKind::Dx);
    const double h_scale = std::max(1.0, h_dz.matrix.cwiseAbs().maxCoeff());
    check("dipolar forms sum to zero",
          (h_dx.matrix + h_dy.matrix + h_dz.matrix).cwiseAbs().maxCoeff() <=
              1e-12 * h_scale);

    std::vector<int> first_half(static_cast<std::size_t>((n + 1) / 2));
    for (std::size_t k = 0; k < first_half.size(); ++k)
      first_half[k] = static_cast<int>(k);
    const auto parts = partition_hamiltonian(
        couplings, make_partition(n, first_half), HamiltonianKind::Dz);
    check("partition closure",
          (parts.within_a.matrix + parts.within_b.matrix + parts.between.matrix -
           h_dz.matrix)
                  .cwiseAbs()
                  .maxCoeff() <= 1e-12 * h_scale);

    const Unitary rot_x =
        pulse_unitary(n, PulseEvent{Axis::X, std::numbers::pi / 2.0, +1, 0});
    const Unitary rot_y =
        pulse_unitary(n, PulseEvent{Axis::Y, std::numbers::pi / 2.0, +1, 0});
    check("pi/2 rotations toggle the distinguished axis",
          (conjugated(h_dz, rot_x).matrix - h_dy.matrix).cwiseAbs().maxCoeff() <=
                  1e-12 * h_scale &&
              (conjugated(h_dz, rot_y).matrix - h_dx.matrix).cwiseAbs().maxCoeff() <=
                  1e-12 * h_scale);

    check("propagator unitarity",
          unitarity_defect(expm_hermitian(h_dz, 0.37).matrix) <= 1e-10);

    if (geometry.tag == Dimensionality::Chain && n >= 2) {
      const PlaneBasis basis = plane_basis(geometry);
      const CouplingMatrix parallel =
          dipolar_couplings(geometry, FieldOrientation{basis.e1}, config.geometry.g);
      const CouplingMatrix perpendicular =
          dipolar_couplings(geometry, FieldOrientation{basis.e2}, config.geometry.g);
      check("parallel field doubles and flips the couplings",
            (parallel.values + 2.0 * perpendicular.values).cwiseAbs().maxCoeff() <=
                1e-12 * coupling_scale);
    }
    if (geometry.tag != Dimensionality::General) {
      const OrientationCouplings orientations =
          three_orientation_couplings(geometry, config.geometry.g);
      check("orientation couplings sum to zero",
            (orientations.along_e1.values + orientations.along_e2.values +
             orientations.along_normal.values)
                    .cwiseAbs()
                    .maxCoeff() <= 1e-12 * coupling_scale);
    }

    Schedule cycle;
    switch (protocol.scheme) {
      case ExperimentScheme::ChainReversal:
        cycle = chain_reversal_schedule(couplings, protocol.tau);
        break;
      case ExperimentScheme::PlanarReversal:
        cycle = planar_reversal_schedule(
            three_orientation_couplings(geometry, config.geometry.g), protocol.tau);
        break;
      case ExperimentScheme::PulseStorage:
        cycle = pulse_storage_schedule(couplings, protocol.tau, protocol.pulse_model);
        break;
      case ExperimentScheme::FrozenSubsystem: {
        const CouplingMatrix stored =
            subsystem_couplings(couplings,
                                make_partition(n, protocol.subsystem_a).subset_b);
        cycle = protocol.storage_scheme == SchemeTag::PulseStorage
                    ? pulse_storage_schedule(stored, protocol.tau,
                                             PulseModel::IdealToggling)
                    : chain_reversal_schedule(stored, protocol.tau);
        break;
      }
      case ExperimentScheme::ImpuritySwitch:
      default:
        break;
    }
    if (!cycle.segments.empty()) {
      const HermitianOperator mean = zeroth_order(cycle);
      check("storage cycle averages to zero",
            mean.matrix.cwiseAbs().maxCoeff() <= 1e-12 * h_scale);
    }
  }
  return all_ok;
}

std::string report_to_csv(const RunReport& report) {
  std::string csv = "point_index,param_value,period_T,identity_distance,fidelity\n";
  for (const auto& point : report.points) {
    csv += std::to_string(point.point_index);
    csv += ',';
    csv += format_double(point.param_value);
    csv += ',';
    csv += format_double(point.period);
    csv += ',';
    csv += format_double(point.identity_distance);
    csv += ',';
    csv += format_double(point.fidelity);
    csv += '\n';
  }
  return csv;
}

std::string report_to_json(const RunReport& report) {
  nlohmann::ordered_json root;
  root["scheme"] = report.scheme_name;
  root["seed"] = report.seed;
  root["points"] = nlohmann::ordered_json::array();
  for (const auto& point : report.points) {
    nlohmann::ordered_json entry;
    entry["point_index"] = point.point_index;
    entry["param_value"] = point.param_value;
    entry["period_T"] = point.period;
    entry["identity_distance"] = point.identity_distance;
    entry["fidelity"] = point.fidelity;
    root["points"].push_back(std::move(entry));
  }
  if (report.fit) {
    nlohmann::ordered_json fit;
    fit["slope"] = report.fit->slope;
    fit["intercept"] = report.fit->intercept;
    fit["fitted_points"] = report.fit->fitted_points;
    fit["regime_violation"] = report.fit->regime_violation;
    fit["exact_identity"] = report.fit->exact_identity;
    root["fit"] = std::move(fit);
  } else {
    root["fit"] = nullptr;
  }
  return root.dump(2) + "\n";
}

std::vector<std::filesystem::path> emit_report(
    const RunReport& report, const OutputConfig& output,
    const std::filesystem::path& out_dir, std::optional<OutputFormat> only) {
  std::filesystem::create_directories(out_dir);
  std::vector<std::filesystem::path> written;

  const auto write_file = [&](const std::filesystem::path& name,
                              const std::string& content) {
    const std::filesystem::path path = out_dir / name;
    std::ofstream stream(path, std::ios::binary);
    if (!stream) throw std::runtime_error("cannot write '" + path.string() + "'");
    stream << content;
    written.push_back(path);
  };

  if (!only || *only == OutputFormat::Csv)
    write_file(output.csv.value_or("report.csv"), report_to_csv(report));
  if (!only || *only == OutputFormat::Json)
    write_file(output.json.value_or("report.json"), report_to_json(report));
  return written;
}

}  // namespace spinstore
