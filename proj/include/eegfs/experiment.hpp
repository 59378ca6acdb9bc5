#pragma once

#include "eegfs/features.hpp"
#include "eegfs/ga.hpp"
#include "eegfs/ingest.hpp"
#include "eegfs/preprocess.hpp"

#include <json.hpp>

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace eegfs {

enum class Strategy { all, pca, gafs };
enum class DatasetFormat { edf, csv, synthetic, features };

std::string to_string(Strategy s);
std::string to_string(DatasetFormat f);

/// A labelled window inside a file; without any, the whole file is one instance.
struct Segment {
  double onset = 0.0;     // s
  double duration = 0.0;  // s
  std::string condition;
};

struct DatasetFile {
  std::filesystem::path path;
  std::string subject;
  std::string condition;
  std::vector<Segment> segments;
};

struct SyntheticClass {
  std::string condition;
  std::vector<ChannelSynth> channels;
};

struct DatasetConfig {
  DatasetFormat format = DatasetFormat::synthetic;
  std::vector<DatasetFile> files;
  double sampling_rate = 0.0;            // csv only
  std::vector<std::string> channels;     // optional channel selection, in order
  std::vector<std::string> exclude_subjects;
  std::vector<std::string> include_subjects;  // empty = all
  int synthetic_subjects = 0;
  double synthetic_duration = 0.0;
  double synthetic_rate = 0.0;
  std::vector<SyntheticClass> synthetic_classes;
  std::filesystem::path feature_matrix;  // features format only
};

struct ExperimentConfig {
  std::string name = "experiment";
  std::uint64_t seed = 0;
  LearnerMode mode = LearnerMode::supervised;
  Strategy strategy = Strategy::all;
  DatasetConfig dataset;

  bool filter_enabled = true;
  FilterSpec filter;
  bool zscore = true;

  std::vector<Band> bands;
  WelchConfig welch;
  MorletConfig morlet;

  int folds = 10;
  int k = 2;
  std::optional<int> sweep_k_max;  // default: number of conditions + 1
  double pca_threshold = 0.95;
  GaConfig ga;

  std::filesystem::path output_dir = "runs";
  std::vector<std::string> formats = {"json", "txt"};

  /// Fully resolved form; accepted back by validate_config.
  nlohmann::json to_json() const;
};

struct ConfigValidation {
  std::optional<ExperimentConfig> config;
  std::vector<std::string> violations;  // "field.path: message"
  bool ok() const { return violations.empty(); }
};

/// Checks the whole document and reports every violation. Relative paths are
/// resolved against `base_dir`. A run manifest is accepted too; its embedded
/// config is used.
ConfigValidation validate_config(const nlohmann::json& doc, const std::filesystem::path& base_dir);
ConfigValidation validate_config_file(const std::filesystem::path& path);

/// validate_config_file, throwing ConfigError with every violation on failure.
ExperimentConfig load_config(const std::filesystem::path& path);

/// Seeds handed to each stochastic stage.
struct StageSeeds {
  std::uint64_t ga, cv, kmeans;
};
StageSeeds stage_seeds(std::uint64_t seed);

/// Loading, preprocessing and normalisation for the recording formats.
InstanceSet load_instances(const ExperimentConfig& cfg);
InstanceSet preprocess_instances(const InstanceSet& in, const ExperimentConfig& cfg);

/// The feature matrix for any dataset format.
FeatureMatrix compute_features(const ExperimentConfig& cfg);

struct RunOutcome {
  std::filesystem::path run_dir;
  nlohmann::json manifest;
};

/// Runs every stage and writes the artifacts under a fresh timestamped
/// directory inside cfg.output_dir. On failure the manifest records the stage
/// and error, partial artifacts stay in place, and the error is rethrown.
RunOutcome run_experiment(const ExperimentConfig& cfg);

}  // namespace eegfs
