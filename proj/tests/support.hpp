// Test-only helpers and independent reference implementations.
#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <limits>
#include <random>
#include <string>
#include <vector>

namespace support {

inline const double pi = std::acos(-1.0);

/// Fresh directory under the system temp dir, removed on destruction.
class TempDir {
 public:
  explicit TempDir(const std::string& tag) {
    static int counter = 0;
    std::random_device rd;
    path_ = std::filesystem::temp_directory_path() /
            ("eegfs-" + tag + "-" + std::to_string(rd()) + "-" + std::to_string(counter++));
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const std::filesystem::path& path() const { return path_; }
  std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

 private:
  std::filesystem::path path_;
};

inline void write_file(const std::filesystem::path& p, const std::string& content) {
  std::ofstream out(p, std::ios::binary);
  out << content;
}

inline std::string read_file(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

inline Eigen::VectorXd sine(Eigen::Index n, double f, double rate, double amplitude = 1.0, double phase = 0.0) {
  Eigen::VectorXd x(n);
  for (Eigen::Index t = 0; t < n; ++t) x(t) = amplitude * std::sin(2.0 * pi * f * static_cast<double>(t) / rate + phase);
  return x;
}

inline Eigen::VectorXd white_noise(Eigen::Index n, std::uint64_t seed, double sd = 1.0) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> g(0.0, sd);
  Eigen::VectorXd x(n);
  for (Eigen::Index t = 0; t < n; ++t) x(t) = g(rng);
  return x;
}

inline double rms(const Eigen::VectorXd& x) { return std::sqrt(x.squaredNorm() / static_cast<double>(x.size())); }

// ---------------------------------------------------------------------------
// Minimal EDF writer, written from the format description only.

struct EdfSignal {
  std::string label;
  std::vector<double> samples;  // physical values
  double physical_min = -500.0, physical_max = 500.0;
  int digital_min = -32768, digital_max = 32767;
};

inline std::string field(const std::string& s, std::size_t width) {
  std::string out = s.substr(0, width);
  out.resize(width, ' ');
  return out;
}

inline std::string num_field(double v, std::size_t width) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%g", v);
  return field(buf, width);
}

/// Signals all have `rate * record_seconds` samples per record.
inline std::string edf_bytes(const std::vector<EdfSignal>& signals, double rate, double record_seconds,
                             int declared_records = -2) {
  const std::size_t ns = signals.size();
  const auto per_record = static_cast<std::size_t>(std::llround(rate * record_seconds));
  const std::size_t total = signals.empty() ? 0 : signals.front().samples.size();
  const std::size_t records = per_record ? total / per_record : 0;
  std::string h;
  h += field("0", 8);
  h += field("X X X X", 80);
  h += field("Startdate X X X X", 80);
  h += field("01.01.01", 8);
  h += field("00.00.00", 8);
  h += num_field(static_cast<double>(256 + 256 * ns), 8);
  h += field("", 44);
  h += num_field(declared_records == -2 ? static_cast<double>(records) : declared_records, 8);
  h += num_field(record_seconds, 8);
  h += num_field(static_cast<double>(ns), 4);
  for (const auto& s : signals) h += field(s.label, 16);
  for (std::size_t i = 0; i < ns; ++i) h += field("AgAgCl electrode", 80);
  for (std::size_t i = 0; i < ns; ++i) h += field("uV", 8);
  for (const auto& s : signals) h += num_field(s.physical_min, 8);
  for (const auto& s : signals) h += num_field(s.physical_max, 8);
  for (const auto& s : signals) h += num_field(s.digital_min, 8);
  for (const auto& s : signals) h += num_field(s.digital_max, 8);
  for (std::size_t i = 0; i < ns; ++i) h += field("HP:0.1Hz", 80);
  for (std::size_t i = 0; i < ns; ++i) h += num_field(static_cast<double>(per_record), 8);
  for (std::size_t i = 0; i < ns; ++i) h += field("", 32);

  for (std::size_t r = 0; r < records; ++r)
    for (const auto& s : signals) {
      const double scale = (s.physical_max - s.physical_min) / (s.digital_max - s.digital_min);
      for (std::size_t k = 0; k < per_record; ++k) {
        const double v = s.samples[r * per_record + k];
        long d = std::lround((v - s.physical_min) / scale + s.digital_min);
        d = std::clamp<long>(d, s.digital_min, s.digital_max);
        const auto u = static_cast<std::uint16_t>(static_cast<std::int16_t>(d));
        h.push_back(static_cast<char>(u & 0xff));
        h.push_back(static_cast<char>(u >> 8));
      }
    }
  return h;
}

// ---------------------------------------------------------------------------
// Reference silhouette: plain loops over a vector-of-vectors.

inline double l1(const std::vector<double>& a, const std::vector<double>& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += std::fabs(a[i] - b[i]);
  return s;
}

inline double brute_silhouette(const std::vector<std::vector<double>>& pts, const std::vector<int>& label) {
  const std::size_t n = pts.size();
  int k = 0;
  for (int l : label) k = std::max(k, l + 1);
  double total = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    std::size_t own_count = 0;
    double own_sum = 0.0;
    for (std::size_t j = 0; j < n; ++j)
      if (j != i && label[j] == label[i]) {
        own_sum += l1(pts[i], pts[j]);
        ++own_count;
      }
    if (own_count == 0) continue;  // singleton: 0
    const double a = own_sum / static_cast<double>(own_count);
    double b = std::numeric_limits<double>::infinity();
    for (int c = 0; c < k; ++c) {
      if (c == label[i]) continue;
      double s = 0.0;
      std::size_t m = 0;
      for (std::size_t j = 0; j < n; ++j)
        if (label[j] == c) {
          s += l1(pts[i], pts[j]);
          ++m;
        }
      if (m > 0) b = std::min(b, s / static_cast<double>(m));
    }
    const double d = std::max(a, b);
    total += d == 0.0 ? 0.0 : (b - a) / d;
  }
  return total / static_cast<double>(n);
}

inline std::vector<std::vector<double>> rows_of(const Eigen::MatrixXd& m) {
  std::vector<std::vector<double>> out(static_cast<std::size_t>(m.rows()));
  for (Eigen::Index r = 0; r < m.rows(); ++r)
    for (Eigen::Index c = 0; c < m.cols(); ++c) out[static_cast<std::size_t>(r)].push_back(m(r, c));
  return out;
}

/// Isotropic Gaussian blobs; row i belongs to blob i % centers.rows().
inline Eigen::MatrixXd blobs(const Eigen::MatrixXd& centers, int per_blob, double sd, std::uint64_t seed,
                             std::vector<int>* labels = nullptr) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> g(0.0, sd);
  const auto k = centers.rows();
  Eigen::MatrixXd out(k * per_blob, centers.cols());
  if (labels) labels->clear();
  for (Eigen::Index i = 0; i < out.rows(); ++i) {
    const Eigen::Index c = i % k;
    for (Eigen::Index d = 0; d < out.cols(); ++d) out(i, d) = centers(c, d) + g(rng);
    if (labels) labels->push_back(static_cast<int>(c));
  }
  return out;
}

}  // namespace support
