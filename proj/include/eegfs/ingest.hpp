#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <filesystem>
#include <set>
#include <string>
#include <vector>

namespace eegfs {

/// A multichannel sampled signal. `samples` is channels x time, one row per
/// entry of `channels`.
struct Recording {
  std::vector<std::string> channels;
  Eigen::MatrixXd samples;
  double sampling_rate = 0.0;
  std::string condition;
  std::string subject;

  Eigen::Index channel_count() const { return samples.rows(); }
  Eigen::Index sample_count() const { return samples.cols(); }
  double duration() const { return static_cast<double>(sample_count()) / sampling_rate; }

  /// Index of a channel label, or -1.
  Eigen::Index find_channel(const std::string& label) const;

  /// Throws InputError/IntegrityError/ConfigError if an invariant is broken:
  /// at least 2 samples, positive rate, unique labels, one row per label.
  void validate() const;
};

/// Recordings that share one channel layout and sampling rate.
struct InstanceSet {
  std::vector<Recording> recordings;

  std::set<std::string> conditions() const;
  /// Identical channel lists and rates, at least two condition labels.
  void validate() const;
};

/// Classic 16-bit EDF. Channels named "EDF Annotations" are skipped. Labels
/// are trimmed of surrounding blanks and trailing dots ("Fc5." -> "Fc5").
Recording load_edf(const std::filesystem::path& path);

/// Header row of channel labels followed by one numeric row per sample.
Recording load_csv(const std::filesystem::path& path, double sampling_rate,
                   const std::string& condition);

/// Parse CSV text already in memory; `source` only decorates messages.
Recording parse_csv(const std::string& text, double sampling_rate, const std::string& condition,
                    const std::string& source = "<memory>");

struct Tone {
  double amplitude = 1.0;
  double frequency = 0.0;  // Hz
  double phase = 0.0;      // rad
};

struct ChannelSynth {
  std::string label;
  std::vector<Tone> tones;
  double noise_std = 0.0;
};

/// Deterministic sum-of-sinusoids plus Gaussian noise, sample t at time t/rate.
Recording synthesize(const std::vector<ChannelSynth>& spec, double duration, double rate,
                     std::uint64_t seed, const std::string& condition = "SYNTH");

/// Cut [onset, onset + length) seconds out of `rec`, relabelled with `condition`.
Recording slice(const Recording& rec, double onset, double length, const std::string& condition);

/// Keep only `labels`, in that order.
Recording select_channels(const Recording& rec, const std::vector<std::string>& labels);

}  // namespace eegfs
