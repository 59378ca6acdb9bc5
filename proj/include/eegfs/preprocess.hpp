#pragma once

#include "eegfs/ingest.hpp"

#include <Eigen/Dense>

namespace eegfs {

struct FilterSpec {
  double high_pass_cutoff = 0.5;  // Hz
  double low_pass_cutoff = 45.0;  // Hz
  double notch_freq = 50.0;       // Hz
  double notch_bandwidth = 1.0;   // Hz, full width of the stop band
  bool notch_enabled = true;
  int fir_order = 0;              // taps (odd); 0 picks the default for the signal

  void validate(double sampling_rate) const;
};

/// Smallest odd integer >= x.
int odd_ceil(double x);

/// Taps used when `fir_order` is 0: odd_ceil(3 * rate / transition_hz), capped
/// at the largest odd count below the sample count.
int default_fir_taps(double sampling_rate, double transition_hz, Eigen::Index sample_count);

/// Hamming-windowed sinc lowpass with unit DC gain.
Eigen::VectorXd design_lowpass(double sampling_rate, double cutoff, int taps);
Eigen::VectorXd design_bandpass(double sampling_rate, double lo, double hi, int taps);
Eigen::VectorXd design_bandstop(double sampling_rate, double lo, double hi, int taps);

/// |H(f)| of an FIR filter.
double fir_gain(const Eigen::VectorXd& taps, double sampling_rate, double frequency);

/// Linear-phase FIR filtering, zero-padded at both ends and shifted by the group
/// delay (taps - 1) / 2 so the output is aligned with and as long as the input.
Eigen::VectorXd apply_fir(const Eigen::VectorXd& x, const Eigen::VectorXd& taps);

/// Per-channel bandpass [high_pass_cutoff, low_pass_cutoff].
Recording fir_bandpass(const Recording& rec, const FilterSpec& spec);

/// Per-channel band-stop centred on notch_freq, width notch_bandwidth. A copy
/// of the input when the notch is disabled.
Recording notch(const Recording& rec, const FilterSpec& spec);

/// Per-channel (x - mean) / std with the n-1 denominator.
Recording zscore(const Recording& rec);

}  // namespace eegfs
