#include "eegfs/features.hpp"

#include "spectral_util.hpp"

#include <algorithm>
#include <map>
#include <unordered_set>

namespace eegfs {

namespace {
const double kPi = std::acos(-1.0);
}

void Band::validate() const {
  if (!(lo > 0.0) || !(lo < hi))
    throw ConfigError("band '" + name + "': need 0 < lo < hi, got [" + std::to_string(lo) + ", " +
                      std::to_string(hi) + "]");
}

namespace {
const std::vector<Band>& band_table() {
  static const std::vector<Band> table = {
      {"delta", 0.5, 4.0},    {"theta", 4.0, 8.0},     {"alpha", 8.0, 13.0},
      {"beta", 13.0, 30.0},   {"gamma", 31.0, 45.0},   {"theta_l", 4.1, 5.8},
      {"theta_h", 5.9, 7.4},  {"beta_l", 13.0, 19.9},  {"beta_h", 20.0, 25.0},
  };
  return table;
}
}  // namespace

Band named_band(const std::string& name) {
  for (const auto& b : band_table())
    if (b.name == name) return b;
  throw ConfigError("unknown band name '" + name + "'");
}

std::vector<std::string> named_band_list() {
  std::vector<std::string> out;
  for (const auto& b : band_table()) out.push_back(b.name);
  return out;
}

void WelchConfig::validate() const {
  if (segment_len != 0 && segment_len < 8) throw ConfigError("welch: segment length must be >= 8");
  if (!(overlap >= 0.0 && overlap < 1.0)) throw ConfigError("welch: overlap must lie in [0, 1)");
}

Eigen::Index WelchConfig::resolve_segment(double rate, Eigen::Index signal_len) const {
  validate();
  Eigen::Index m = segment_len;
  if (m == 0) m = std::min<Eigen::Index>(static_cast<Eigen::Index>(std::llround(rate)), signal_len);
  if (m > signal_len)
    throw InputError("welch: segment of " + std::to_string(m) + " samples exceeds the signal (" +
                     std::to_string(signal_len) + ")");
  if (m < 8) throw InputError("welch: fewer than 8 samples per segment");
  return m;
}

void MorletConfig::validate() const {
  if (fixed_cycles) {
    if (!(*fixed_cycles > 0.0)) throw ConfigError("morlet: fixed cycle count must be > 0");
  } else if (!(cycles_lo >= 3.0 && cycles_lo <= cycles_hi)) {
    throw ConfigError("morlet: need 3 <= cycles_lo <= cycles_hi");
  }
  if (!(freq_step > 0.0)) throw ConfigError("morlet: frequency step must be > 0");
}

double MorletConfig::cycles_at(double f, const Band& band) const {
  if (fixed_cycles) return *fixed_cycles;
  const double lo = analysis_lo.value_or(band.lo);
  const double hi = analysis_hi.value_or(band.hi);
  if (!(hi > lo)) return cycles_lo;
  const double t = std::clamp((f - lo) / (hi - lo), 0.0, 1.0);
  return cycles_lo + (cycles_hi - cycles_lo) * t;
}

std::string to_string(FeatureKind kind) {
  switch (kind) {
    case FeatureKind::activity: return "activity";
    case FeatureKind::mobility: return "mobility";
    case FeatureKind::complexity: return "complexity";
    case FeatureKind::psd_welch: return "psd_welch";
    case FeatureKind::psd_morlet: return "psd_morlet";
    case FeatureKind::component: return "component";
  }
  return "unknown";
}

FeatureKind feature_kind_from_string(const std::string& s) {
  for (auto k : {FeatureKind::activity, FeatureKind::mobility, FeatureKind::complexity, FeatureKind::psd_welch,
                 FeatureKind::psd_morlet, FeatureKind::component})
    if (to_string(k) == s) return k;
  throw ParseError("unknown feature kind '" + s + "'");
}

std::vector<std::string> FeatureMatrix::column_names() const {
  std::vector<std::string> out;
  out.reserve(columns.size());
  for (const auto& c : columns) out.push_back(c.name);
  return out;
}

void FeatureMatrix::validate() const {
  if (static_cast<std::size_t>(values.cols()) != columns.size())
    throw IntegrityError("feature matrix: " + std::to_string(columns.size()) + " column descriptors for " +
                         std::to_string(values.cols()) + " columns");
  if (static_cast<std::size_t>(values.rows()) != rows.size())
    throw IntegrityError("feature matrix: " + std::to_string(rows.size()) + " row descriptors for " +
                         std::to_string(values.rows()) + " rows");
  std::unordered_set<std::string> seen;
  for (const auto& c : columns)
    if (!seen.insert(c.name).second) throw IntegrityError("feature matrix: duplicate column '" + c.name + "'");
  if (!values.allFinite()) throw IntegrityError("feature matrix: non-finite value");
}

FeatureMatrix FeatureMatrix::select(const std::vector<bool>& mask) const {
  if (mask.size() != columns.size())
    throw ConfigError("mask length " + std::to_string(mask.size()) + " does not match " +
                      std::to_string(columns.size()) + " columns");
  FeatureMatrix out;
  out.rows = rows;
  std::vector<Eigen::Index> keep;
  for (std::size_t j = 0; j < mask.size(); ++j)
    if (mask[j]) {
      keep.push_back(static_cast<Eigen::Index>(j));
      out.columns.push_back(columns[j]);
    }
  out.values = values(Eigen::all, keep);
  return out;
}

// ---------------------------------------------------------------------------

Spectrum welch_spectrum(const Eigen::VectorXd& x, double rate, const WelchConfig& cfg) {
  const Eigen::Index n = x.size();
  const Eigen::Index m = cfg.resolve_segment(rate, n);
  const Eigen::Index hop = std::max<Eigen::Index>(1, m - static_cast<Eigen::Index>(std::floor(m * cfg.overlap)));
  const Eigen::VectorXd w = cfg.window == Taper::hamming ? detail::hamming(m) : Eigen::VectorXd::Ones(m);
  const double window_energy = w.squaredNorm();
  const Eigen::Index bins = m / 2 + 1;

  Spectrum out;
  out.bin_width = rate / static_cast<double>(m);
  out.frequencies = Eigen::VectorXd::LinSpaced(bins, 0.0, static_cast<double>(bins - 1)) * out.bin_width;
  out.density = Eigen::VectorXd::Zero(bins);

  Eigen::Index segments = 0;
  detail::ComplexVector buf(static_cast<std::size_t>(m));
  for (Eigen::Index start = 0; start + m <= n; start += hop) {
    for (Eigen::Index t = 0; t < m; ++t) buf[static_cast<std::size_t>(t)] = {w(t) * x(start + t), 0.0};
    const auto spec = detail::fft_forward(buf);
    for (Eigen::Index k = 0; k < bins; ++k) {
      double p = std::norm(spec[static_cast<std::size_t>(k)]) / (rate * window_energy);
      const bool edge = k == 0 || (m % 2 == 0 && k == m / 2);
      out.density(k) += edge ? p : 2.0 * p;
    }
    ++segments;
  }
  if (segments == 0) throw InputError("welch: no complete segment");
  out.density /= static_cast<double>(segments);
  return out;
}

double integrate(const Spectrum& spectrum, const Band& band) {
  double acc = 0.0;
  for (Eigen::Index k = 0; k < spectrum.frequencies.size(); ++k)
    if (band.contains(spectrum.frequencies(k))) acc += spectrum.density(k);
  return acc * spectrum.bin_width;
}

double welch_psd(const Eigen::VectorXd& x, double rate, const Band& band, const WelchConfig& cfg) {
  band.validate();
  if (!(band.hi < rate / 2.0))
    throw ConfigError("welch: band '" + band.name + "' reaches Nyquist (" + std::to_string(rate / 2.0) + " Hz)");
  return integrate(welch_spectrum(x, rate, cfg), band);
}

std::vector<double> morlet_grid(const Band& band, double step) {
  std::vector<double> out;
  for (int i = 0;; ++i) {
    const double f = band.lo + step * i;
    if (f > band.hi + 1e-9) break;
    out.push_back(f);
  }
  return out;
}

MorletPower morlet_power(const Eigen::VectorXd& x, double rate, const Band& band, const MorletConfig& cfg) {
  band.validate();
  cfg.validate();
  if (!(band.hi < rate / 2.0))
    throw ConfigError("morlet: band '" + band.name + "' reaches Nyquist (" + std::to_string(rate / 2.0) + " Hz)");
  const auto grid = morlet_grid(band, cfg.freq_step);
  const auto n = static_cast<std::size_t>(x.size());

  std::vector<std::size_t> half(grid.size());
  std::size_t widest = 0;
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const double sigma = cfg.cycles_at(grid[i], band) / (2.0 * kPi * grid[i]);
    half[i] = static_cast<std::size_t>(std::ceil(4.0 * sigma * rate));
    widest = std::max(widest, half[i]);
  }
  if (2 * widest + 1 > n)
    throw InputError("morlet: wavelet support (" + std::to_string(2 * widest + 1) +
                     " samples) is longer than the signal (" + std::to_string(n) + ")");

  const std::size_t size = detail::next_pow2(n + 2 * widest);
  const auto fx = detail::fft_forward(detail::to_complex(x, size));

  MorletPower out;
  out.power = Eigen::VectorXd::Zero(x.size());
  out.valid_begin = static_cast<Eigen::Index>(widest);
  out.valid_end = static_cast<Eigen::Index>(n - widest);

  detail::ComplexVector wavelet(size);
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const double f = grid[i];
    const double sigma = cfg.cycles_at(f, band) / (2.0 * kPi * f);
    std::fill(wavelet.begin(), wavelet.end(), std::complex<double>{0.0, 0.0});
    const auto h = static_cast<long>(half[i]);
    for (long k = -h; k <= h; ++k) {
      const double t = static_cast<double>(k) / rate;
      wavelet[static_cast<std::size_t>(k + h)] =
          std::polar(std::exp(-t * t / (2.0 * sigma * sigma)), 2.0 * kPi * f * t);
    }
    auto fw = detail::fft_forward(wavelet);
    double peak = 0.0;
    for (const auto& v : fw) peak = std::max(peak, std::abs(v));
    for (std::size_t k = 0; k < size; ++k) fw[k] = fx[k] * fw[k] / peak;
    const auto cx = detail::fft_inverse(fw);
    for (std::size_t t = 0; t < n; ++t) out.power(static_cast<Eigen::Index>(t)) += std::norm(cx[t + half[i]]);
  }
  return out;
}

double morlet_psd(const Eigen::VectorXd& x, double rate, const Band& band, const MorletConfig& cfg) {
  const MorletPower p = morlet_power(x, rate, band, cfg);
  if (p.valid_end <= p.valid_begin) throw InputError("morlet: no samples outside the edge zones");
  return p.power.segment(p.valid_begin, p.valid_end - p.valid_begin).mean();
}

// ---------------------------------------------------------------------------

FeatureMatrix build_matrix(const InstanceSet& instances, const std::vector<Band>& bands,
                           const WelchConfig& wcfg, const MorletConfig& mcfg) {
  instances.validate();
  wcfg.validate();
  std::unordered_set<std::string> band_names;
  for (const auto& b : bands) {
    b.validate();
    if (!band_names.insert(b.name).second) throw ConfigError("duplicate band name '" + b.name + "'");
  }

  MorletConfig morlet = mcfg;
  if (!bands.empty()) {
    double lo = bands.front().lo, hi = bands.front().hi;
    for (const auto& b : bands) {
      lo = std::min(lo, b.lo);
      hi = std::max(hi, b.hi);
    }
    if (!morlet.analysis_lo) morlet.analysis_lo = lo;
    if (!morlet.analysis_hi) morlet.analysis_hi = hi;
  }
  morlet.validate();

  const auto& first = instances.recordings.front();
  const auto electrodes = static_cast<Eigen::Index>(first.channels.size());
  const auto nb = static_cast<Eigen::Index>(bands.size());
  const Eigen::Index per_electrode = 3 + 2 * nb;

  FeatureMatrix fm;
  for (const auto& e : first.channels) {
    fm.columns.push_back({e + "_activity", e, FeatureKind::activity, std::nullopt});
    fm.columns.push_back({e + "_mobility", e, FeatureKind::mobility, std::nullopt});
    fm.columns.push_back({e + "_complexity", e, FeatureKind::complexity, std::nullopt});
    for (const auto& b : bands) {
      fm.columns.push_back({e + "_psd_welch_" + b.name, e, FeatureKind::psd_welch, b.name});
      fm.columns.push_back({e + "_psd_morlet_" + b.name, e, FeatureKind::psd_morlet, b.name});
    }
  }
  fm.values.resize(static_cast<Eigen::Index>(instances.recordings.size()), electrodes * per_electrode);

  for (std::size_t r = 0; r < instances.recordings.size(); ++r) {
    const auto& rec = instances.recordings[r];
    const auto row = static_cast<Eigen::Index>(r);
    fm.rows.push_back({rec.subject, rec.condition});
    for (Eigen::Index c = 0; c < electrodes; ++c) {
      const Eigen::VectorXd x = rec.samples.row(c).transpose();
      const double rate = rec.sampling_rate;
      const std::string where = "row " + std::to_string(r) + ", electrode " + first.channels[c];
      Eigen::Index col = c * per_electrode;
      fm.values(row, col++) = with_context(where + ", activity", [&] { return hjorth_activity(x); });
      fm.values(row, col++) = with_context(where + ", mobility", [&] { return hjorth_mobility(x, rate); });
      fm.values(row, col++) = with_context(where + ", complexity", [&] { return hjorth_complexity(x, rate); });
      const Spectrum spectrum = with_context(where + ", psd_welch", [&] { return welch_spectrum(x, rate, wcfg); });
      for (const auto& b : bands) {
        fm.values(row, col++) = with_context(where + ", psd_welch_" + b.name, [&] {
          if (!(b.hi < rate / 2.0)) throw ConfigError("band '" + b.name + "' reaches Nyquist");
          return integrate(spectrum, b);
        });
        fm.values(row, col++) =
            with_context(where + ", psd_morlet_" + b.name, [&] { return morlet_psd(x, rate, b, morlet); });
      }
    }
  }
  if (fm.values.cols() != expected_column_count(electrodes, nb))
    throw IntegrityError("feature matrix: column count does not match the layout");
  fm.validate();
  return fm;
}

}  // namespace eegfs
