#pragma once

#include "eegfs/error.hpp"
#include "eegfs/ingest.hpp"

#include <Eigen/Dense>

#include <cmath>
#include <optional>
#include <string>
#include <vector>

namespace eegfs {

/// Closed frequency interval [lo, hi] in Hz.
struct Band {
  std::string name;
  double lo = 0.0;
  double hi = 0.0;

  bool contains(double f) const { return f >= lo - 1e-9 && f <= hi + 1e-9; }
  void validate() const;
};

/// Canonical rhythms and sub-bands: delta, theta, alpha, beta, gamma,
/// theta_l, theta_h, beta_l, beta_h. Throws ConfigError on an unknown name.
Band named_band(const std::string& name);
std::vector<std::string> named_band_list();

enum class Taper { hamming, rectangular };

struct WelchConfig {
  Eigen::Index segment_len = 0;  // samples; 0 = one second, clamped to the signal
  double overlap = 0.5;
  Taper window = Taper::hamming;

  void validate() const;
  Eigen::Index resolve_segment(double rate, Eigen::Index signal_len) const;
};

struct MorletConfig {
  double cycles_lo = 3.0;
  double cycles_hi = 7.0;
  double freq_step = 0.5;  // Hz
  /// Frequencies at which the cycle count reaches cycles_lo / cycles_hi. When
  /// unset, the band being analysed supplies them.
  std::optional<double> analysis_lo, analysis_hi;
  /// Use a constant cycle count instead of the lo->hi ramp.
  std::optional<double> fixed_cycles;

  void validate() const;
  double cycles_at(double f, const Band& band) const;
};

enum class FeatureKind { activity, mobility, complexity, psd_welch, psd_morlet, component };

std::string to_string(FeatureKind kind);
FeatureKind feature_kind_from_string(const std::string& s);

struct ColumnMeta {
  std::string name;
  std::string electrode;
  FeatureKind kind = FeatureKind::activity;
  std::optional<std::string> band;
};

struct RowMeta {
  std::string subject;
  std::string condition;
};

/// Instances x features.
struct FeatureMatrix {
  Eigen::MatrixXd values;
  std::vector<ColumnMeta> columns;
  std::vector<RowMeta> rows;

  Eigen::Index row_count() const { return values.rows(); }
  Eigen::Index column_count() const { return values.cols(); }
  std::vector<std::string> column_names() const;
  /// Unique names, sizes consistent, every value finite.
  void validate() const;
  /// Keep the columns whose mask entry is true, in order.
  FeatureMatrix select(const std::vector<bool>& mask) const;
};

/// |electrodes| * (3 + 2 * |bands|).
constexpr Eigen::Index expected_column_count(Eigen::Index electrodes, Eigen::Index bands) {
  return electrodes * (3 + 2 * bands);
}

// ---------------------------------------------------------------------------
// Hjorth parameters.

/// Forward difference scaled by the sampling rate.
template <typename Derived>
Eigen::Matrix<typename Derived::Scalar, Eigen::Dynamic, 1> derivative(const Eigen::MatrixBase<Derived>& x,
                                                                       typename Derived::Scalar rate) {
  const Eigen::Index n = x.size();
  if (n < 2) throw InputError("derivative: need at least 2 samples");
  return (x.tail(n - 1) - x.head(n - 1)) * rate;
}

/// Unbiased variance.
template <typename Derived>
typename Derived::Scalar hjorth_activity(const Eigen::MatrixBase<Derived>& x) {
  using Scalar = typename Derived::Scalar;
  const Eigen::Index n = x.size();
  if (n < 2) throw InputError("activity: need at least 2 samples");
  const Scalar mean = x.mean();
  return (x.array() - mean).square().sum() / static_cast<Scalar>(n - 1);
}

template <typename Derived>
typename Derived::Scalar hjorth_mobility(const Eigen::MatrixBase<Derived>& x, typename Derived::Scalar rate) {
  if (x.size() < 3) throw InputError("mobility: need at least 3 samples");
  const auto act = hjorth_activity(x);
  if (!(act > 0)) throw DegenerateError("mobility: signal has zero activity");
  return std::sqrt(hjorth_activity(derivative(x, rate)) / act);
}

template <typename Derived>
typename Derived::Scalar hjorth_complexity(const Eigen::MatrixBase<Derived>& x, typename Derived::Scalar rate) {
  if (x.size() < 4) throw InputError("complexity: need at least 4 samples");
  const auto mob = hjorth_mobility(x, rate);
  if (!(mob > 0)) throw DegenerateError("complexity: signal has zero mobility");
  return hjorth_mobility(derivative(x, rate), rate) / mob;
}

// ---------------------------------------------------------------------------
// Spectral estimates.

/// One-sided power spectral density (power / Hz) on bins k * rate / M.
struct Spectrum {
  Eigen::VectorXd frequencies;
  Eigen::VectorXd density;
  double bin_width = 0.0;
};

/// Welch average of windowed periodograms over segments of M samples with hop
/// M - floor(M * overlap), each normalised by the window power.
Spectrum welch_spectrum(const Eigen::VectorXd& x, double rate, const WelchConfig& cfg);

/// Sum of density * bin width over bins whose centre lies in the band.
double integrate(const Spectrum& spectrum, const Band& band);

double welch_psd(const Eigen::VectorXd& x, double rate, const Band& band, const WelchConfig& cfg);

/// Analysis frequencies inside a band: lo, lo + step, ... <= hi.
std::vector<double> morlet_grid(const Band& band, double step);

/// Band-summed Morlet power |cx(f, t)|^2 per time sample for the band's grid.
/// `valid_begin`/`valid_end` delimit samples further than 4 sigma (of the widest
/// wavelet) from either edge.
struct MorletPower {
  Eigen::VectorXd power;
  Eigen::Index valid_begin = 0;
  Eigen::Index valid_end = 0;
};

MorletPower morlet_power(const Eigen::VectorXd& x, double rate, const Band& band, const MorletConfig& cfg);

/// Time average of the band-summed Morlet power over the valid samples.
double morlet_psd(const Eigen::VectorXd& x, double rate, const Band& band, const MorletConfig& cfg);

// ---------------------------------------------------------------------------

/// Rows follow the input order, columns are electrode-major: activity,
/// mobility, complexity, then per band psd_welch and psd_morlet.
FeatureMatrix build_matrix(const InstanceSet& instances, const std::vector<Band>& bands,
                           const WelchConfig& wcfg, const MorletConfig& mcfg);

}  // namespace eegfs
