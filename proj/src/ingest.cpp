#include "eegfs/ingest.hpp"

#include "eegfs/error.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <iterator>
#include <random>
#include <sstream>
#include <unordered_set>

namespace eegfs {

Eigen::Index Recording::find_channel(const std::string& label) const {
  auto it = std::find(channels.begin(), channels.end(), label);
  return it == channels.end() ? -1 : static_cast<Eigen::Index>(it - channels.begin());
}

void Recording::validate() const {
  if (!(sampling_rate > 0.0) || !std::isfinite(sampling_rate))
    throw ConfigError("recording: sampling rate must be > 0");
  if (static_cast<std::size_t>(samples.rows()) != channels.size())
    throw IntegrityError("recording: " + std::to_string(channels.size()) + " labels for " +
                         std::to_string(samples.rows()) + " sample rows");
  if (channels.empty()) throw IntegrityError("recording: no channels");
  if (samples.cols() < 2)
    throw InputError("recording: need at least 2 samples per channel, got " +
                     std::to_string(samples.cols()));
  std::unordered_set<std::string> seen;
  for (const auto& c : channels)
    if (!seen.insert(c).second) throw IntegrityError("recording: duplicate channel label '" + c + "'");
}

std::set<std::string> InstanceSet::conditions() const {
  std::set<std::string> out;
  for (const auto& r : recordings) out.insert(r.condition);
  return out;
}

void InstanceSet::validate() const {
  if (recordings.empty()) throw InputError("instance set is empty");
  const auto& first = recordings.front();
  for (std::size_t i = 0; i < recordings.size(); ++i) {
    const auto& r = recordings[i];
    r.validate();
    if (r.channels != first.channels)
      throw IntegrityError("instance " + std::to_string(i) + ": channel list differs from instance 0");
    if (r.sampling_rate != first.sampling_rate)
      throw IntegrityError("instance " + std::to_string(i) + ": sampling rate differs from instance 0");
  }
  if (conditions().size() < 2) throw ConfigError("instance set needs at least 2 distinct conditions");
}

namespace {

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open '" + path.string() + "'");
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

std::string trim(std::string_view s) {
  auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string_view::npos) return {};
  auto e = s.find_last_not_of(" \t\r\n");
  return std::string(s.substr(b, e - b + 1));
}

class EdfReader {
 public:
  explicit EdfReader(const std::string& bytes) : bytes_(bytes) {}

  std::string field(std::size_t offset, std::size_t len) const {
    if (offset + len > bytes_.size()) throw ParseError("EDF: truncated header", bytes_.size());
    return trim(std::string_view(bytes_).substr(offset, len));
  }

  double number(std::size_t offset, std::size_t len) const {
    const std::string s = field(offset, len);
    double v = 0.0;
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (s.empty() || ec != std::errc() || ptr != s.data() + s.size())
      throw ParseError("EDF: expected a number, found '" + s + "'", offset);
    return v;
  }

  long integer(std::size_t offset, std::size_t len) const {
    const double v = number(offset, len);
    if (v != std::floor(v)) throw ParseError("EDF: expected an integer", offset);
    return static_cast<long>(v);
  }

  std::size_t size() const { return bytes_.size(); }

  std::int16_t sample(std::size_t offset) const {
    const auto lo = static_cast<unsigned char>(bytes_[offset]);
    const auto hi = static_cast<unsigned char>(bytes_[offset + 1]);
    return static_cast<std::int16_t>(static_cast<std::uint16_t>(lo | (hi << 8)));
  }

 private:
  const std::string& bytes_;
};

std::string normalize_label(const std::string& raw) {
  std::string s = trim(raw);
  while (!s.empty() && s.back() == '.') s.pop_back();
  return s;
}

}  // namespace

Recording load_edf(const std::filesystem::path& path) {
  const std::string bytes = read_file(path);
  const EdfReader edf(bytes);
  if (bytes.size() < 256) throw ParseError("EDF: file shorter than the 256-byte header", bytes.size());

  const long header_bytes = edf.integer(184, 8);
  long n_records = edf.integer(236, 8);
  const double record_duration = edf.number(244, 8);
  const long ns = edf.integer(252, 4);
  if (ns <= 0) throw IntegrityError("EDF: header declares " + std::to_string(ns) + " signals");
  if (header_bytes != 256 + 256 * ns)
    throw IntegrityError("EDF: header size " + std::to_string(header_bytes) + " inconsistent with " +
                         std::to_string(ns) + " signals");
  if (bytes.size() < static_cast<std::size_t>(header_bytes))
    throw ParseError("EDF: truncated signal headers", bytes.size());
  if (!(record_duration > 0.0)) throw IntegrityError("EDF: non-positive data record duration");

  struct Signal {
    std::string label;
    double phys_min, phys_max;
    double dig_min, dig_max;
    long samples_per_record;
    std::size_t record_offset;
  };
  std::vector<Signal> signals(static_cast<std::size_t>(ns));
  const auto u = [&](std::size_t width_before, std::size_t i) {
    return 256 + width_before * static_cast<std::size_t>(ns) + i;
  };
  std::size_t record_bytes = 0;
  for (std::size_t i = 0; i < signals.size(); ++i) {
    auto& s = signals[i];
    s.label = edf.field(u(0, i * 16), 16);
    s.phys_min = edf.number(u(104, i * 8), 8);
    s.phys_max = edf.number(u(112, i * 8), 8);
    s.dig_min = edf.number(u(120, i * 8), 8);
    s.dig_max = edf.number(u(128, i * 8), 8);
    s.samples_per_record = edf.integer(u(216, i * 8), 8);
    if (s.samples_per_record <= 0)
      throw IntegrityError("EDF: signal '" + s.label + "' has no samples per record");
    s.record_offset = record_bytes;
    record_bytes += 2 * static_cast<std::size_t>(s.samples_per_record);
  }

  const std::size_t data_bytes = bytes.size() - static_cast<std::size_t>(header_bytes);
  if (n_records < 0) {
    if (data_bytes % record_bytes != 0)
      throw IntegrityError("EDF: data section is not a whole number of records");
    n_records = static_cast<long>(data_bytes / record_bytes);
  }
  if (static_cast<std::size_t>(n_records) * record_bytes != data_bytes)
    throw IntegrityError("EDF: header declares " + std::to_string(n_records) + " records of " +
                         std::to_string(record_bytes) + " bytes but the data section has " +
                         std::to_string(data_bytes) + " bytes");

  std::vector<const Signal*> data_signals;
  for (const auto& s : signals)
    if (s.label != "EDF Annotations") data_signals.push_back(&s);
  if (data_signals.empty()) throw IntegrityError("EDF: no data signals");
  const long spr = data_signals.front()->samples_per_record;
  for (const auto* s : data_signals)
    if (s->samples_per_record != spr)
      throw IntegrityError("EDF: signals with different sampling rates are not supported");

  Recording rec;
  rec.sampling_rate = static_cast<double>(spr) / record_duration;
  rec.condition = path.stem().string();
  rec.samples.resize(static_cast<Eigen::Index>(data_signals.size()), n_records * spr);
  for (std::size_t c = 0; c < data_signals.size(); ++c) {
    const Signal& s = *data_signals[c];
    rec.channels.push_back(normalize_label(s.label));
    if (s.dig_max == s.dig_min) throw IntegrityError("EDF: signal '" + s.label + "' has zero digital range");
    const double gain = (s.phys_max - s.phys_min) / (s.dig_max - s.dig_min);
    for (long r = 0; r < n_records; ++r) {
      const std::size_t base = static_cast<std::size_t>(header_bytes) +
                               static_cast<std::size_t>(r) * record_bytes + s.record_offset;
      for (long k = 0; k < spr; ++k) {
        const double digital = edf.sample(base + 2 * static_cast<std::size_t>(k));
        rec.samples(static_cast<Eigen::Index>(c), r * spr + k) = (digital - s.dig_min) * gain + s.phys_min;
      }
    }
  }
  rec.validate();
  return rec;
}

Recording parse_csv(const std::string& text, double sampling_rate, const std::string& condition,
                    const std::string& source) {
  std::istringstream in(text);
  std::string line;
  std::vector<std::vector<double>> rows;
  Recording rec;
  std::size_t line_no = 0;
  bool have_header = false;

  const auto split = [](const std::string& l) {
    std::vector<std::string> cells;
    std::size_t start = 0;
    while (true) {
      auto comma = l.find(',', start);
      cells.push_back(trim(std::string_view(l).substr(start, comma - start)));
      if (comma == std::string::npos) break;
      start = comma + 1;
    }
    return cells;
  };

  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    auto cells = split(line);
    if (!have_header) {
      if (line_no == 1 && cells.front().rfind("\xEF\xBB\xBF", 0) == 0) cells.front().erase(0, 3);
      rec.channels = std::move(cells);
      have_header = true;
      continue;
    }
    if (cells.size() != rec.channels.size())
      throw ParseError(source + ": expected " + std::to_string(rec.channels.size()) + " cells, found " +
                           std::to_string(cells.size()),
                       line_no, std::min(cells.size(), rec.channels.size()) + 1);
    std::vector<double> row(cells.size());
    for (std::size_t c = 0; c < cells.size(); ++c) {
      const auto& cell = cells[c];
      auto [ptr, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), row[c]);
      if (cell.empty() || ec != std::errc() || ptr != cell.data() + cell.size() || !std::isfinite(row[c]))
        throw ParseError(source + ": non-numeric cell '" + cell + "'", line_no, c + 1);
    }
    rows.push_back(std::move(row));
  }
  if (!have_header) throw ParseError(source + ": empty CSV", 1, 1);

  rec.samples.resize(static_cast<Eigen::Index>(rec.channels.size()), static_cast<Eigen::Index>(rows.size()));
  for (std::size_t t = 0; t < rows.size(); ++t)
    for (std::size_t c = 0; c < rows[t].size(); ++c)
      rec.samples(static_cast<Eigen::Index>(c), static_cast<Eigen::Index>(t)) = rows[t][c];
  rec.sampling_rate = sampling_rate;
  rec.condition = condition;
  rec.validate();
  return rec;
}

Recording load_csv(const std::filesystem::path& path, double sampling_rate, const std::string& condition) {
  return parse_csv(read_file(path), sampling_rate, condition, path.string());
}

Recording synthesize(const std::vector<ChannelSynth>& spec, double duration, double rate,
                     std::uint64_t seed, const std::string& condition) {
  if (!(rate > 0.0)) throw ConfigError("synthesize: rate must be > 0");
  const auto n = static_cast<Eigen::Index>(std::llround(duration * rate));
  if (n < 2) throw InputError("synthesize: duration * rate must be >= 2");
  if (spec.empty()) throw ConfigError("synthesize: no channels");
  for (const auto& ch : spec)
    for (const auto& tone : ch.tones)
      if (tone.frequency >= rate / 2.0)
        throw NyquistError("synthesize: tone at " + std::to_string(tone.frequency) +
                           " Hz is not below Nyquist (" + std::to_string(rate / 2.0) + " Hz)");

  Recording rec;
  rec.sampling_rate = rate;
  rec.condition = condition;
  rec.samples.setZero(static_cast<Eigen::Index>(spec.size()), n);
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  const double two_pi = 2.0 * std::acos(-1.0);
  for (std::size_t c = 0; c < spec.size(); ++c) {
    rec.channels.push_back(spec[c].label);
    auto row = rec.samples.row(static_cast<Eigen::Index>(c));
    for (Eigen::Index t = 0; t < n; ++t) {
      const double time = static_cast<double>(t) / rate;
      double v = 0.0;
      for (const auto& tone : spec[c].tones)
        v += tone.amplitude * std::sin(two_pi * tone.frequency * time + tone.phase);
      row(t) = v;
    }
    if (spec[c].noise_std > 0.0)
      for (Eigen::Index t = 0; t < n; ++t) row(t) += spec[c].noise_std * gauss(rng);
  }
  rec.validate();
  return rec;
}

Recording slice(const Recording& rec, double onset, double length, const std::string& condition) {
  const auto start = static_cast<Eigen::Index>(std::llround(onset * rec.sampling_rate));
  const auto count = static_cast<Eigen::Index>(std::llround(length * rec.sampling_rate));
  if (start < 0 || count < 2 || start + count > rec.sample_count())
    throw InputError("slice: window [" + std::to_string(onset) + " s, +" + std::to_string(length) +
                     " s) lies outside the recording (" + std::to_string(rec.duration()) + " s)");
  Recording out = rec;
  out.samples = rec.samples.middleCols(start, count);
  out.condition = condition;
  return out;
}

Recording select_channels(const Recording& rec, const std::vector<std::string>& labels) {
  Recording out;
  out.sampling_rate = rec.sampling_rate;
  out.condition = rec.condition;
  out.subject = rec.subject;
  out.channels = labels;
  out.samples.resize(static_cast<Eigen::Index>(labels.size()), rec.sample_count());
  for (std::size_t i = 0; i < labels.size(); ++i) {
    const auto idx = rec.find_channel(labels[i]);
    if (idx < 0) throw InputError("channel '" + labels[i] + "' not present in recording");
    out.samples.row(static_cast<Eigen::Index>(i)) = rec.samples.row(idx);
  }
  return out;
}

}  // namespace eegfs
