#include "eegfs/error.hpp"
#include "eegfs/experiment.hpp"
#include "eegfs/report.hpp"

#include <CLI11.hpp>

#include <iostream>
#include <optional>

namespace {

enum Exit { ok = 0, config_error = 2, data_error = 3, runtime_abort = 4 };

int cmd_run(const std::string& config_path, std::optional<std::uint64_t> seed, std::optional<double> max_minutes,
            std::optional<std::string> output_dir) {
  eegfs::ExperimentConfig cfg = eegfs::load_config(config_path);
  if (seed) cfg.seed = *seed;
  if (max_minutes) {
    if (!(*max_minutes > 0.0)) throw eegfs::ConfigError("--max-minutes: must be > 0");
    cfg.ga.max_minutes = *max_minutes;
  }
  if (output_dir) cfg.output_dir = std::filesystem::absolute(*output_dir);
  const auto outcome = eegfs::run_experiment(cfg);
  std::cout << outcome.run_dir.string() << "\n";
  return ok;
}

int cmd_validate(const std::string& config_path) {
  const auto v = eegfs::validate_config_file(config_path);
  if (v.ok()) {
    std::cout << config_path << ": ok\n";
    return ok;
  }
  for (const auto& s : v.violations) std::cerr << s << "\n";
  std::cerr << config_path << ": " << v.violations.size() << " violation(s)\n";
  return config_error;
}

int cmd_report(const std::string& run_dir) {
  std::cout << eegfs::report_tables(run_dir);
  return ok;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"EEG feature extraction and genetic feature selection"};
  app.set_version_flag("--version", std::string(EEGFS_VERSION));
  app.require_subcommand(1);

  std::string config_path, run_dir;
  std::optional<std::uint64_t> seed;
  std::optional<double> max_minutes;
  std::optional<std::string> output_dir;

  auto* run = app.add_subcommand("run", "Execute an experiment and write a run directory");
  run->add_option("config", config_path, "Experiment config (JSON)")->required();
  run->add_option("--seed", seed, "Override the config seed");
  run->add_option("--max-minutes", max_minutes, "Override the GA time budget");
  run->add_option("--output-dir", output_dir, "Override the output directory");

  auto* validate = app.add_subcommand("validate", "Check a config and list every violation");
  validate->add_option("config", config_path, "Experiment config (JSON)")->required();

  auto* report = app.add_subcommand("report", "Print the tables of a finished run");
  report->add_option("run_dir", run_dir, "Run directory")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? ok : config_error;
  }

  try {
    if (*run) return cmd_run(config_path, seed, max_minutes, output_dir);
    if (*validate) return cmd_validate(config_path);
    if (*report) return cmd_report(run_dir);
  } catch (const eegfs::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return config_error;
  } catch (const eegfs::DataError& e) {
    std::cerr << "data error: " << e.what() << "\n";
    return data_error;
  } catch (const eegfs::RuntimeAbort& e) {
    std::cerr << "aborted: " << e.what() << "\n";
    return runtime_abort;
  } catch (const std::exception& e) {
    std::cerr << "aborted: " << e.what() << "\n";
    return runtime_abort;
  }
  return ok;
}
