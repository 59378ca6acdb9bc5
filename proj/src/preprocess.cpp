#include "eegfs/preprocess.hpp"

#include "eegfs/error.hpp"
#include "spectral_util.hpp"

#include <algorithm>
#include <cmath>

namespace eegfs {

namespace {
const double kPi = std::acos(-1.0);

double sinc(double x) { return x == 0.0 ? 1.0 : std::sin(kPi * x) / (kPi * x); }

void check_taps(int taps) {
  if (taps < 1 || taps % 2 == 0) throw ConfigError("FIR: tap count must be a positive odd integer");
}

template <typename Op>
Recording map_channels(const Recording& rec, Op op) {
  Recording out = rec;
  for (Eigen::Index c = 0; c < rec.channel_count(); ++c)
    out.samples.row(c) = op(Eigen::VectorXd(rec.samples.row(c).transpose())).transpose();
  return out;
}
}  // namespace

void FilterSpec::validate(double sampling_rate) const {
  const double nyquist = sampling_rate / 2.0;
  if (!(high_pass_cutoff > 0.0)) throw ConfigError("filter: high-pass cutoff must be > 0");
  if (!(high_pass_cutoff < low_pass_cutoff))
    throw ConfigError("filter: high-pass cutoff must be below the low-pass cutoff");
  if (!(low_pass_cutoff < nyquist))
    throw ConfigError("filter: low-pass cutoff " + std::to_string(low_pass_cutoff) +
                      " Hz is not below Nyquist (" + std::to_string(nyquist) + " Hz)");
  if (fir_order != 0) check_taps(fir_order);
  if (!notch_enabled) return;
  if (!(notch_freq > 0.0) || !(notch_freq < nyquist))
    throw ConfigError("filter: notch frequency must lie in (0, Nyquist)");
  if (!(notch_bandwidth > 0.0) || notch_freq - notch_bandwidth / 2.0 <= 0.0 ||
      notch_freq + notch_bandwidth / 2.0 >= nyquist)
    throw ConfigError("filter: notch band must lie inside (0, Nyquist)");
}

int odd_ceil(double x) {
  auto n = static_cast<int>(std::ceil(x));
  if (n < 1) n = 1;
  return n % 2 == 0 ? n + 1 : n;
}

int default_fir_taps(double sampling_rate, double transition_hz, Eigen::Index sample_count) {
  int taps = odd_ceil(3.0 * sampling_rate / transition_hz);
  auto cap = static_cast<int>(sample_count - 1);
  if (cap % 2 == 0) --cap;
  if (cap < 1) cap = 1;
  return std::min(taps, cap);
}

Eigen::VectorXd design_lowpass(double sampling_rate, double cutoff, int taps) {
  check_taps(taps);
  const double fc = cutoff / sampling_rate;
  const Eigen::VectorXd window = detail::hamming(taps);
  const int mid = (taps - 1) / 2;
  Eigen::VectorXd h(taps);
  for (int i = 0; i < taps; ++i) h(i) = 2.0 * fc * sinc(2.0 * fc * (i - mid)) * window(i);
  return h / h.sum();
}

Eigen::VectorXd design_bandpass(double sampling_rate, double lo, double hi, int taps) {
  return design_lowpass(sampling_rate, hi, taps) - design_lowpass(sampling_rate, lo, taps);
}

Eigen::VectorXd design_bandstop(double sampling_rate, double lo, double hi, int taps) {
  Eigen::VectorXd h = -design_bandpass(sampling_rate, lo, hi, taps);
  h((taps - 1) / 2) += 1.0;
  return h;
}

double fir_gain(const Eigen::VectorXd& taps, double sampling_rate, double frequency) {
  std::complex<double> acc{0.0, 0.0};
  const double w = 2.0 * kPi * frequency / sampling_rate;
  for (Eigen::Index i = 0; i < taps.size(); ++i)
    acc += taps(i) * std::polar(1.0, -w * static_cast<double>(i));
  return std::abs(acc);
}

Eigen::VectorXd apply_fir(const Eigen::VectorXd& x, const Eigen::VectorXd& taps) {
  const auto n = static_cast<std::size_t>(x.size());
  const auto m = static_cast<std::size_t>(taps.size());
  const std::size_t size = detail::next_pow2(n + m - 1);
  auto fx = detail::fft_forward(detail::to_complex(x, size));
  const auto fh = detail::fft_forward(detail::to_complex(taps, size));
  for (std::size_t i = 0; i < size; ++i) fx[i] *= fh[i];
  const auto y = detail::fft_inverse(fx);
  const std::size_t delay = (m - 1) / 2;
  Eigen::VectorXd out(x.size());
  for (std::size_t t = 0; t < n; ++t) out(static_cast<Eigen::Index>(t)) = y[t + delay].real();
  return out;
}

Recording fir_bandpass(const Recording& rec, const FilterSpec& spec) {
  spec.validate(rec.sampling_rate);
  const int taps = spec.fir_order != 0
                       ? spec.fir_order
                       : default_fir_taps(rec.sampling_rate, spec.high_pass_cutoff, rec.sample_count());
  const Eigen::VectorXd h =
      design_bandpass(rec.sampling_rate, spec.high_pass_cutoff, spec.low_pass_cutoff, taps);
  return map_channels(rec, [&](const Eigen::VectorXd& x) { return apply_fir(x, h); });
}

Recording notch(const Recording& rec, const FilterSpec& spec) {
  spec.validate(rec.sampling_rate);
  if (!spec.notch_enabled) return rec;
  const double half = spec.notch_bandwidth / 2.0;
  const int taps =
      spec.fir_order != 0 ? spec.fir_order : default_fir_taps(rec.sampling_rate, half, rec.sample_count());
  const Eigen::VectorXd h =
      design_bandstop(rec.sampling_rate, spec.notch_freq - half, spec.notch_freq + half, taps);
  return map_channels(rec, [&](const Eigen::VectorXd& x) { return apply_fir(x, h); });
}

Recording zscore(const Recording& rec) {
  rec.validate();
  Recording out = rec;
  const double n = static_cast<double>(rec.sample_count());
  for (Eigen::Index c = 0; c < rec.channel_count(); ++c) {
    auto row = out.samples.row(c);
    const double mean = row.mean();
    row.array() -= mean;
    const double sd = std::sqrt(row.squaredNorm() / (n - 1.0));
    if (!(sd > 1e-12 * std::max(1.0, std::abs(mean))) || !std::isfinite(sd))
      throw DegenerateError("zscore: channel '" + rec.channels[static_cast<std::size_t>(c)] +
                            "' has zero variance");
    row /= sd;
  }
  return out;
}

}  // namespace eegfs
