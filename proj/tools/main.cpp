#include <cstdint>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "spinstore/experiment.hpp"

int main(int argc, char** argv) {
  CLI::App app{"dipolar spin storage simulator"};
  app.require_subcommand(1);

  auto* run = app.add_subcommand("run", "run an experiment described by a config file");
  std::string config_path;
  run->add_option("config", config_path, "experiment config file")->required();
  std::string format;
  run->add_option("--format", format, "restrict output to one format")
      ->check(CLI::IsMember({"csv", "json"}));
  std::string out_dir = ".";
  run->add_option("--out", out_dir, "directory for report files");
  std::uint64_t seed = 12345;
  run->add_option("--seed", seed, "seed for randomized initial states");
  bool verify = false;
  run->add_flag("--verify", verify, "check system invariants before running");

  CLI11_PARSE(app, argc, argv);

  try {
    const spinstore::ExperimentConfig config = spinstore::load_config(config_path);

    if (verify && !spinstore::run_verification(config, std::cout)) {
      std::cerr << "verification failed; not running the experiment\n";
      return 2;
    }

    const spinstore::RunReport report = spinstore::run_experiment(config, seed);

    std::optional<spinstore::OutputFormat> only;
    if (format == "csv") only = spinstore::OutputFormat::Csv;
    if (format == "json") only = spinstore::OutputFormat::Json;
    const auto written =
        spinstore::emit_report(report, config.output, out_dir, only);

    std::cout << "scheme " << report.scheme_name << ", " << report.points.size()
              << (report.points.size() == 1 ? " point" : " points") << ", seed "
              << report.seed << "\n";
    if (report.fit) {
      if (report.fit->exact_identity)
        std::cout << "fit: every point is an exact identity\n";
      else if (report.fit->fitted_points >= 2)
        std::cout << "fit: slope " << report.fit->slope << " over "
                  << report.fit->fitted_points << " points"
                  << (report.fit->regime_violation ? " (regime violation)" : "")
                  << "\n";
    }
    for (const auto& path : written) std::cout << "wrote " << path.string() << "\n";
    return 0;
  } catch (const spinstore::ConfigError& error) {
    std::cerr << config_path << ": " << error.what() << "\n";
    return 1;
  } catch (const std::exception& error) {
    std::cerr << "error: " << error.what() << "\n";
    return 1;
  }
}
