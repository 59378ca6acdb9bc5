#include "eegfs/experiment.hpp"

#include "eegfs/error.hpp"
#include "eegfs/feature_io.hpp"
#include "eegfs/learners.hpp"
#include "eegfs/random.hpp"
#include "eegfs/report.hpp"

#include <algorithm>
#include <cctype>
#include <chrono>
#include <cmath>
#include <ctime>
#include <fstream>
#include <initializer_list>
#include <set>
#include <string_view>

namespace eegfs {

using nlohmann::json;
namespace fs = std::filesystem;

std::string to_string(Strategy s) {
  switch (s) {
    case Strategy::all: return "ALL";
    case Strategy::pca: return "PCA";
    case Strategy::gafs: return "GAFS";
  }
  return "ALL";
}

std::string to_string(DatasetFormat f) {
  switch (f) {
    case DatasetFormat::edf: return "edf";
    case DatasetFormat::csv: return "csv";
    case DatasetFormat::synthetic: return "synthetic";
    case DatasetFormat::features: return "features";
  }
  return "synthetic";
}

namespace {

std::string upper(std::string s) {
  for (auto& ch : s) ch = static_cast<char>(std::toupper(static_cast<unsigned char>(ch)));
  return s;
}

std::string lower(std::string s) {
  for (auto& ch : s) ch = static_cast<char>(std::tolower(static_cast<unsigned char>(ch)));
  return s;
}

std::string join_path(const std::string& parent, const std::string& key) {
  return parent.empty() ? key : parent + "." + key;
}

std::string index_path(const std::string& parent, std::size_t i) { return parent + "[" + std::to_string(i) + "]"; }

// Typed field access that records every violation instead of stopping at the first.
class Fields {
 public:
  explicit Fields(std::vector<std::string>& out) : out_(out) {}

  void fail(const std::string& path, const std::string& msg) { out_.push_back(path + ": " + msg); }

  void check(bool ok, const std::string& path, const std::string& msg) {
    if (!ok) fail(path, msg);
  }

  static const json* find(const json& obj, const std::string& key) {
    const auto it = obj.find(key);
    return it == obj.end() || it->is_null() ? nullptr : &*it;
  }

  bool require(const json& obj, const std::string& path, const std::string& key) {
    if (find(obj, key)) return true;
    fail(join_path(path, key), "required");
    return false;
  }

  void unknown(const json& obj, const std::string& path, std::initializer_list<std::string_view> allowed) {
    for (const auto& [key, value] : obj.items()) {
      (void)value;
      if (std::find(allowed.begin(), allowed.end(), std::string_view(key)) == allowed.end())
        fail(join_path(path, key), "unknown field");
    }
  }

  /// Subsection that must be an object when present; nullptr when absent.
  const json* section(const json& obj, const std::string& path, const std::string& key) {
    const json* j = find(obj, key);
    if (j && !j->is_object()) {
      fail(join_path(path, key), "must be an object");
      return nullptr;
    }
    return j;
  }

  bool read(const json& obj, const std::string& path, const std::string& key, double& dst) {
    const json* j = find(obj, key);
    if (!j) return false;
    if (!j->is_number()) return wrong(path, key, "a number");
    dst = j->get<double>();
    return true;
  }

  bool read(const json& obj, const std::string& path, const std::string& key, int& dst) {
    const json* j = find(obj, key);
    if (!j) return false;
    if (!is_integral(*j)) return wrong(path, key, "an integer");
    const double v = j->get<double>();
    if (std::abs(v) > 1e9) return wrong(path, key, "an integer of reasonable size");
    dst = static_cast<int>(v);
    return true;
  }

  bool read(const json& obj, const std::string& path, const std::string& key, std::uint64_t& dst) {
    const json* j = find(obj, key);
    if (!j) return false;
    if (j->is_number_unsigned()) {
      dst = j->get<std::uint64_t>();
      return true;
    }
    if (j->is_number_integer() && j->get<std::int64_t>() >= 0) {
      dst = static_cast<std::uint64_t>(j->get<std::int64_t>());
      return true;
    }
    return wrong(path, key, "a non-negative integer");
  }

  bool read(const json& obj, const std::string& path, const std::string& key, bool& dst) {
    const json* j = find(obj, key);
    if (!j) return false;
    if (!j->is_boolean()) return wrong(path, key, "a boolean");
    dst = j->get<bool>();
    return true;
  }

  bool read(const json& obj, const std::string& path, const std::string& key, std::string& dst) {
    const json* j = find(obj, key);
    if (!j) return false;
    if (!j->is_string()) return wrong(path, key, "a string");
    dst = j->get<std::string>();
    return true;
  }

  bool read(const json& obj, const std::string& path, const std::string& key, std::vector<std::string>& dst) {
    const json* j = find(obj, key);
    if (!j) return false;
    if (!j->is_array() || !std::all_of(j->begin(), j->end(), [](const json& e) { return e.is_string(); }))
      return wrong(path, key, "an array of strings");
    dst = j->get<std::vector<std::string>>();
    return true;
  }

 private:
  static bool is_integral(const json& j) {
    if (j.is_number_integer()) return true;
    return j.is_number_float() && std::floor(j.get<double>()) == j.get<double>();
  }

  bool wrong(const std::string& path, const std::string& key, const std::string& what) {
    fail(join_path(path, key), "must be " + what);
    return false;
  }

  std::vector<std::string>& out_;
};

fs::path resolve(const fs::path& p, const fs::path& base) {
  if (p.empty() || p.is_absolute()) return p;
  return (base / p).lexically_normal();
}

void read_dataset(Fields& f, const json& d, const fs::path& base, DatasetConfig& out) {
  const std::string path = "dataset";
  std::string format;
  if (f.require(d, path, "format") && f.read(d, path, "format", format)) {
    format = lower(format);
    if (format == "edf") out.format = DatasetFormat::edf;
    else if (format == "csv") out.format = DatasetFormat::csv;
    else if (format == "synthetic") out.format = DatasetFormat::synthetic;
    else if (format == "features") out.format = DatasetFormat::features;
    else f.fail("dataset.format", "must be one of edf, csv, synthetic, features");
  }

  f.read(d, path, "channels", out.channels);
  f.read(d, path, "exclude_subjects", out.exclude_subjects);
  f.read(d, path, "include_subjects", out.include_subjects);
  f.read(d, path, "sampling_rate", out.sampling_rate);

  switch (out.format) {
    case DatasetFormat::features: {
      f.unknown(d, path, {"format", "path", "exclude_subjects", "include_subjects"});
      std::string p;
      if (f.require(d, path, "path") && f.read(d, path, "path", p)) {
        out.feature_matrix = resolve(p, base);
        f.check(fs::is_regular_file(out.feature_matrix), "dataset.path",
                "file '" + out.feature_matrix.string() + "' not found");
      }
      return;
    }
    case DatasetFormat::synthetic: {
      f.unknown(d, path,
                {"format", "subjects", "duration", "sampling_rate", "classes", "channels", "exclude_subjects",
                 "include_subjects"});
      if (f.require(d, path, "subjects") && f.read(d, path, "subjects", out.synthetic_subjects))
        f.check(out.synthetic_subjects >= 1, "dataset.subjects", "must be >= 1");
      if (f.require(d, path, "duration") && f.read(d, path, "duration", out.synthetic_duration))
        f.check(out.synthetic_duration > 0.0, "dataset.duration", "must be > 0");
      if (f.require(d, path, "sampling_rate") && f.read(d, path, "sampling_rate", out.synthetic_rate))
        f.check(out.synthetic_rate > 0.0, "dataset.sampling_rate", "must be > 0");
      out.sampling_rate = out.synthetic_rate;
      if (!f.require(d, path, "classes")) return;
      const json& classes = d.at("classes");
      if (!classes.is_array() || classes.size() < 2) {
        f.fail("dataset.classes", "must be an array of at least 2 classes");
        return;
      }
      std::set<std::string> seen;
      for (std::size_t i = 0; i < classes.size(); ++i) {
        const std::string cp = index_path("dataset.classes", i);
        const json& c = classes[i];
        if (!c.is_object()) {
          f.fail(cp, "must be an object");
          continue;
        }
        f.unknown(c, cp, {"condition", "channels"});
        SyntheticClass sc;
        if (f.require(c, cp, "condition") && f.read(c, cp, "condition", sc.condition))
          f.check(seen.insert(sc.condition).second, cp + ".condition", "duplicate condition '" + sc.condition + "'");
        if (f.require(c, cp, "channels")) {
          const json& chans = c.at("channels");
          if (!chans.is_array() || chans.empty()) {
            f.fail(cp + ".channels", "must be a non-empty array");
          } else {
            for (std::size_t j = 0; j < chans.size(); ++j) {
              const std::string hp = index_path(cp + ".channels", j);
              const json& ch = chans[j];
              if (!ch.is_object()) {
                f.fail(hp, "must be an object");
                continue;
              }
              f.unknown(ch, hp, {"label", "noise_std", "tones"});
              ChannelSynth cs;
              f.require(ch, hp, "label") && f.read(ch, hp, "label", cs.label);
              if (f.read(ch, hp, "noise_std", cs.noise_std)) f.check(cs.noise_std >= 0.0, hp + ".noise_std", "must be >= 0");
              if (const json* tones = Fields::find(ch, "tones")) {
                if (!tones->is_array()) {
                  f.fail(hp + ".tones", "must be an array");
                } else {
                  for (std::size_t t = 0; t < tones->size(); ++t) {
                    const std::string tp = index_path(hp + ".tones", t);
                    const json& tj = (*tones)[t];
                    if (!tj.is_object()) {
                      f.fail(tp, "must be an object");
                      continue;
                    }
                    f.unknown(tj, tp, {"amplitude", "frequency", "phase"});
                    Tone tone;
                    f.read(tj, tp, "amplitude", tone.amplitude);
                    if (f.require(tj, tp, "frequency") && f.read(tj, tp, "frequency", tone.frequency)) {
                      f.check(tone.frequency >= 0.0, tp + ".frequency", "must be >= 0");
                      if (out.synthetic_rate > 0.0)
                        f.check(tone.frequency < out.synthetic_rate / 2.0, tp + ".frequency",
                                "must be below Nyquist (" + format_double(out.synthetic_rate / 2.0) + " Hz)");
                    }
                    f.read(tj, tp, "phase", tone.phase);
                    cs.tones.push_back(tone);
                  }
                }
              }
              sc.channels.push_back(cs);
            }
          }
        }
        out.synthetic_classes.push_back(std::move(sc));
      }
      // Every class must describe the same channel layout.
      for (std::size_t i = 1; i < out.synthetic_classes.size(); ++i) {
        auto labels = [](const SyntheticClass& c) {
          std::vector<std::string> l;
          for (const auto& ch : c.channels) l.push_back(ch.label);
          return l;
        };
        f.check(labels(out.synthetic_classes[i]) == labels(out.synthetic_classes[0]),
                index_path("dataset.classes", i) + ".channels", "labels differ from the first class");
      }
      return;
    }
    case DatasetFormat::edf:
    case DatasetFormat::csv: {
      f.unknown(d, path, {"format", "files", "sampling_rate", "channels", "exclude_subjects", "include_subjects"});
      if (out.format == DatasetFormat::csv) {
        if (f.require(d, path, "sampling_rate")) f.check(out.sampling_rate > 0.0, "dataset.sampling_rate", "must be > 0");
      }
      if (!f.require(d, path, "files")) return;
      const json& files = d.at("files");
      if (!files.is_array() || files.empty()) {
        f.fail("dataset.files", "must be a non-empty array");
        return;
      }
      for (std::size_t i = 0; i < files.size(); ++i) {
        const std::string fp = index_path("dataset.files", i);
        const json& fj = files[i];
        if (!fj.is_object()) {
          f.fail(fp, "must be an object");
          continue;
        }
        f.unknown(fj, fp, {"path", "subject", "condition", "segments"});
        DatasetFile df;
        std::string p;
        if (f.require(fj, fp, "path") && f.read(fj, fp, "path", p)) {
          df.path = resolve(p, base);
          f.check(fs::is_regular_file(df.path), fp + ".path", "file '" + df.path.string() + "' not found");
        }
        f.require(fj, fp, "subject") && f.read(fj, fp, "subject", df.subject);
        f.read(fj, fp, "condition", df.condition);
        if (const json* segs = Fields::find(fj, "segments")) {
          if (!segs->is_array()) {
            f.fail(fp + ".segments", "must be an array");
          } else {
            for (std::size_t s = 0; s < segs->size(); ++s) {
              const std::string sp = index_path(fp + ".segments", s);
              const json& sj = (*segs)[s];
              if (!sj.is_object()) {
                f.fail(sp, "must be an object");
                continue;
              }
              f.unknown(sj, sp, {"onset", "duration", "condition"});
              Segment seg;
              if (f.require(sj, sp, "onset") && f.read(sj, sp, "onset", seg.onset))
                f.check(seg.onset >= 0.0, sp + ".onset", "must be >= 0");
              if (f.require(sj, sp, "duration") && f.read(sj, sp, "duration", seg.duration))
                f.check(seg.duration > 0.0, sp + ".duration", "must be > 0");
              f.read(sj, sp, "condition", seg.condition);
              if (seg.condition.empty()) seg.condition = df.condition;
              f.check(!seg.condition.empty(), sp + ".condition", "required (here or on the file)");
              df.segments.push_back(seg);
            }
          }
        } else {
          f.check(!df.condition.empty(), fp + ".condition", "required when the file has no segments");
        }
        out.files.push_back(std::move(df));
      }
      return;
    }
  }
}

// `source[i]` is the array index that out[i] came from, for error paths.
void read_bands(Fields& f, const json& j, std::vector<Band>& out, std::vector<std::size_t>& source) {
  const std::string path = "features.bands";
  if (!j.is_array()) {
    f.fail(path, "must be an array of band names or {name, lo, hi} objects");
    return;
  }
  std::set<std::string> names;
  for (std::size_t i = 0; i < j.size(); ++i) {
    const std::string bp = index_path(path, i);
    Band b;
    if (j[i].is_string()) {
      try {
        b = named_band(j[i].get<std::string>());
      } catch (const Error& e) {
        f.fail(bp, e.what());
        continue;
      }
    } else if (j[i].is_object()) {
      f.unknown(j[i], bp, {"name", "lo", "hi"});
      const bool ok = (f.require(j[i], bp, "name") && f.read(j[i], bp, "name", b.name)) &
                      (f.require(j[i], bp, "lo") && f.read(j[i], bp, "lo", b.lo)) &
                      (f.require(j[i], bp, "hi") && f.read(j[i], bp, "hi", b.hi));
      if (!ok) continue;
      try {
        b.validate();
      } catch (const Error& e) {
        f.fail(bp, e.what());
        continue;
      }
    } else {
      f.fail(bp, "must be a band name or an object");
      continue;
    }
    f.check(names.insert(b.name).second, bp, "duplicate band '" + b.name + "'");
    out.push_back(b);
    source.push_back(i);
  }
}

ExperimentConfig read_config(Fields& f, const json& doc, const fs::path& base) {
  ExperimentConfig cfg;
  std::vector<std::size_t> band_source;
  if (!doc.is_object()) {
    f.fail("<root>", "must be an object");
    return cfg;
  }
  f.unknown(doc, "",
            {"name", "seed", "mode", "strategy", "dataset", "preprocess", "features", "learner", "pca", "ga", "output"});
  f.read(doc, "", "name", cfg.name);
  f.check(!cfg.name.empty() && cfg.name.find_first_of("/\\") == std::string::npos, "name",
          "must be a non-empty name without path separators");
  f.read(doc, "", "seed", cfg.seed);

  std::string mode;
  if (f.read(doc, "", "mode", mode)) {
    try {
      cfg.mode = learner_mode_from_string(lower(mode));
    } catch (const Error&) {
      f.fail("mode", "must be supervised or unsupervised");
    }
  }
  std::string strategy;
  if (f.read(doc, "", "strategy", strategy)) {
    strategy = upper(strategy);
    if (strategy == "ALL") cfg.strategy = Strategy::all;
    else if (strategy == "PCA") cfg.strategy = Strategy::pca;
    else if (strategy == "GAFS") cfg.strategy = Strategy::gafs;
    else f.fail("strategy", "must be ALL, PCA or GAFS");
  }

  if (f.require(doc, "", "dataset")) {
    if (const json* d = f.section(doc, "", "dataset")) read_dataset(f, *d, base, cfg.dataset);
  }
  const bool recordings = cfg.dataset.format != DatasetFormat::features;
  const double rate = cfg.dataset.sampling_rate;  // 0 when only known after loading (EDF)

  if (const json* p = f.section(doc, "", "preprocess")) {
    const std::string pp = "preprocess";
    f.unknown(*p, pp, {"enabled", "high_pass", "low_pass", "notch", "notch_bandwidth", "fir_taps", "zscore"});
    f.read(*p, pp, "enabled", cfg.filter_enabled);
    f.read(*p, pp, "high_pass", cfg.filter.high_pass_cutoff);
    f.read(*p, pp, "low_pass", cfg.filter.low_pass_cutoff);
    if (const json* n = Fields::find(*p, "notch"); n && n->is_boolean()) {
      cfg.filter.notch_enabled = n->get<bool>();
    } else if (n) {
      f.read(*p, pp, "notch", cfg.filter.notch_freq);
    } else if (p->contains("notch")) {
      cfg.filter.notch_enabled = false;  // explicit null
    }
    f.read(*p, pp, "notch_bandwidth", cfg.filter.notch_bandwidth);
    f.read(*p, pp, "fir_taps", cfg.filter.fir_order);
    f.read(*p, pp, "zscore", cfg.zscore);
  }
  if (recordings && cfg.filter_enabled) {
    const auto& fl = cfg.filter;
    f.check(fl.high_pass_cutoff > 0.0, "preprocess.high_pass", "must be > 0");
    f.check(fl.low_pass_cutoff > fl.high_pass_cutoff, "preprocess.low_pass", "must exceed preprocess.high_pass");
    f.check(fl.fir_order == 0 || (fl.fir_order >= 3 && fl.fir_order % 2 == 1), "preprocess.fir_taps",
            "must be 0 (automatic) or an odd count >= 3");
    if (fl.notch_enabled) f.check(fl.notch_bandwidth > 0.0, "preprocess.notch_bandwidth", "must be > 0");
    if (rate > 0.0) {
      try {
        fl.validate(rate);
      } catch (const ConfigError& e) {
        f.fail("preprocess", e.what());
      }
    }
  }

  if (const json* fj = f.section(doc, "", "features")) {
    const std::string fp = "features";
    f.unknown(*fj, fp, {"bands", "welch", "morlet"});
    if (const json* b = Fields::find(*fj, "bands")) read_bands(f, *b, cfg.bands, band_source);
    if (const json* w = f.section(*fj, fp, "welch")) {
      const std::string wp = "features.welch";
      f.unknown(*w, wp, {"segment_length", "overlap", "window"});
      int seg = 0;
      if (f.read(*w, wp, "segment_length", seg)) {
        f.check(seg >= 0, wp + ".segment_length", "must be >= 0 (0 = one second)");
        cfg.welch.segment_len = seg;
      }
      if (f.read(*w, wp, "overlap", cfg.welch.overlap))
        f.check(cfg.welch.overlap >= 0.0 && cfg.welch.overlap < 1.0, wp + ".overlap", "must lie in [0, 1)");
      std::string window;
      if (f.read(*w, wp, "window", window)) {
        window = lower(window);
        if (window == "hamming") cfg.welch.window = Taper::hamming;
        else if (window == "rectangular") cfg.welch.window = Taper::rectangular;
        else f.fail(wp + ".window", "must be hamming or rectangular");
      }
    }
    if (const json* m = f.section(*fj, fp, "morlet")) {
      const std::string mp = "features.morlet";
      f.unknown(*m, mp, {"cycles", "freq_step", "fixed_cycles"});
      if (const json* c = Fields::find(*m, "cycles")) {
        if (c->is_array() && c->size() == 2 && (*c)[0].is_number() && (*c)[1].is_number()) {
          cfg.morlet.cycles_lo = (*c)[0].get<double>();
          cfg.morlet.cycles_hi = (*c)[1].get<double>();
          f.check(cfg.morlet.cycles_lo > 0.0 && cfg.morlet.cycles_hi >= cfg.morlet.cycles_lo, mp + ".cycles",
                  "must satisfy 0 < low <= high");
        } else {
          f.fail(mp + ".cycles", "must be [low, high]");
        }
      }
      if (f.read(*m, mp, "freq_step", cfg.morlet.freq_step))
        f.check(cfg.morlet.freq_step > 0.0, mp + ".freq_step", "must be > 0");
      double fixed_cycles = 0.0;
      if (f.read(*m, mp, "fixed_cycles", fixed_cycles)) {
        f.check(fixed_cycles > 0.0, mp + ".fixed_cycles", "must be > 0");
        cfg.morlet.fixed_cycles = fixed_cycles;
      }
    }
  }
  if (recordings) {
    if (cfg.bands.empty())
      for (const auto& name : {"delta", "theta", "alpha", "beta", "gamma"}) cfg.bands.push_back(named_band(name));
    if (rate > 0.0)
      for (std::size_t i = 0; i < cfg.bands.size(); ++i)
        f.check(cfg.bands[i].hi < rate / 2.0,
                band_source.empty() ? "features.bands" : index_path("features.bands", band_source[i]),
                "band '" + cfg.bands[i].name + "' reaches Nyquist (" + format_double(rate / 2.0) + " Hz)");
  }

  bool k_given = false;
  if (const json* l = f.section(doc, "", "learner")) {
    const std::string lp = "learner";
    f.unknown(*l, lp, {"folds", "k", "sweep_k_max"});
    if (f.read(*l, lp, "folds", cfg.folds)) f.check(cfg.folds >= 2, "learner.folds", "must be >= 2");
    if (f.read(*l, lp, "k", cfg.k)) {
      k_given = true;
      f.check(cfg.k >= 2, "learner.k", "must be >= 2");
    }
    int kmax = 0;
    if (f.read(*l, lp, "sweep_k_max", kmax)) {
      f.check(kmax >= 2, "learner.sweep_k_max", "must be >= 2");
      cfg.sweep_k_max = kmax;
    }
  }
  if (cfg.mode == LearnerMode::unsupervised && !k_given) f.fail("learner.k", "required in unsupervised mode");

  if (const json* p = f.section(doc, "", "pca")) {
    f.unknown(*p, "pca", {"variance"});
    if (f.read(*p, "pca", "variance", cfg.pca_threshold))
      f.check(cfg.pca_threshold > 0.0 && cfg.pca_threshold <= 1.0, "pca.variance", "must lie in (0, 1]");
  }

  if (const json* g = f.section(doc, "", "ga")) {
    const std::string gp = "ga";
    f.unknown(*g, gp,
              {"population_size", "mating_pool", "mutations", "lambda", "max_generations", "max_minutes", "fitness",
               "crossover"});
    f.read(*g, gp, "population_size", cfg.ga.population_size);
    f.read(*g, gp, "mating_pool", cfg.ga.mating_pool);
    if (f.read(*g, gp, "mutations", cfg.ga.mutations)) f.check(cfg.ga.mutations >= 0, "ga.mutations", "must be >= 0");
    if (f.read(*g, gp, "lambda", cfg.ga.lambda))
      f.check(cfg.ga.lambda >= 0.0 && cfg.ga.lambda <= 1.0, "ga.lambda", "must lie in [0, 1]");
    if (f.read(*g, gp, "max_generations", cfg.ga.max_generations))
      f.check(cfg.ga.max_generations >= 1, "ga.max_generations", "must be >= 1");
    if (f.read(*g, gp, "max_minutes", cfg.ga.max_minutes))
      f.check(cfg.ga.max_minutes > 0.0, "ga.max_minutes", "must be > 0");
    std::string family;
    if (f.read(*g, gp, "fitness", family)) {
      try {
        cfg.ga.fitness_family = fitness_family_from_string(family);
      } catch (const Error&) {
        f.fail("ga.fitness", "must be POFF, VMFF or NFF");
      }
    }
    std::string cross;
    if (f.read(*g, gp, "crossover", cross)) {
      try {
        cfg.ga.crossover = crossover_kind_from_string(lower(cross));
      } catch (const Error&) {
        f.fail("ga.crossover", "must be midpoint or uniform");
      }
    }
  }
  {
    const auto& g = cfg.ga;
    f.check(g.mating_pool >= 2 && g.mating_pool % 2 == 0, "ga.mating_pool", "must be even and >= 2");
    f.check(g.population_size == 2 * g.mating_pool, "ga.population_size",
            "must equal twice ga.mating_pool (parents plus offspring)");
  }
  cfg.ga.mode = cfg.mode;
  cfg.ga.k = cfg.k;
  cfg.ga.folds = cfg.folds;
  cfg.ga.seed = stage_seeds(cfg.seed).ga;

  if (const json* o = f.section(doc, "", "output")) {
    f.unknown(*o, "output", {"directory", "formats"});
    std::string dir;
    if (f.read(*o, "output", "directory", dir)) {
      f.check(!dir.empty(), "output.directory", "must not be empty");
      cfg.output_dir = dir;
    }
    if (f.read(*o, "output", "formats", cfg.formats))
      for (std::size_t i = 0; i < cfg.formats.size(); ++i)
        f.check(cfg.formats[i] == "json" || cfg.formats[i] == "txt", index_path("output.formats", i),
                "must be json or txt");
  }
  cfg.output_dir = resolve(cfg.output_dir, base);
  return cfg;
}

json synth_to_json(const SyntheticClass& c) {
  json chans = json::array();
  for (const auto& ch : c.channels) {
    json tones = json::array();
    for (const auto& t : ch.tones) tones.push_back({{"amplitude", t.amplitude}, {"frequency", t.frequency}, {"phase", t.phase}});
    chans.push_back({{"label", ch.label}, {"noise_std", ch.noise_std}, {"tones", tones}});
  }
  return {{"condition", c.condition}, {"channels", chans}};
}

bool subject_kept(const DatasetConfig& d, const std::string& subject) {
  if (std::find(d.exclude_subjects.begin(), d.exclude_subjects.end(), subject) != d.exclude_subjects.end())
    return false;
  return d.include_subjects.empty() ||
         std::find(d.include_subjects.begin(), d.include_subjects.end(), subject) != d.include_subjects.end();
}

std::string synthetic_subject(int s) {
  char buf[16];
  std::snprintf(buf, sizeof buf, "S%02d", s + 1);
  return buf;
}

}  // namespace

json ExperimentConfig::to_json() const {
  json d = {{"format", eegfs::to_string(dataset.format)}};
  if (!dataset.exclude_subjects.empty()) d["exclude_subjects"] = dataset.exclude_subjects;
  if (!dataset.include_subjects.empty()) d["include_subjects"] = dataset.include_subjects;
  switch (dataset.format) {
    case DatasetFormat::features:
      d["path"] = dataset.feature_matrix.string();
      break;
    case DatasetFormat::synthetic: {
      d["subjects"] = dataset.synthetic_subjects;
      d["duration"] = dataset.synthetic_duration;
      d["sampling_rate"] = dataset.synthetic_rate;
      json classes = json::array();
      for (const auto& c : dataset.synthetic_classes) classes.push_back(synth_to_json(c));
      d["classes"] = classes;
      if (!dataset.channels.empty()) d["channels"] = dataset.channels;
      break;
    }
    case DatasetFormat::edf:
    case DatasetFormat::csv: {
      json files = json::array();
      for (const auto& file : dataset.files) {
        json fj = {{"path", file.path.string()}, {"subject", file.subject}};
        if (!file.condition.empty()) fj["condition"] = file.condition;
        if (!file.segments.empty()) {
          json segs = json::array();
          for (const auto& s : file.segments)
            segs.push_back({{"onset", s.onset}, {"duration", s.duration}, {"condition", s.condition}});
          fj["segments"] = segs;
        }
        files.push_back(fj);
      }
      d["files"] = files;
      if (dataset.format == DatasetFormat::csv) d["sampling_rate"] = dataset.sampling_rate;
      if (!dataset.channels.empty()) d["channels"] = dataset.channels;
      break;
    }
  }

  json bands = json::array();
  for (const auto& b : this->bands) bands.push_back({{"name", b.name}, {"lo", b.lo}, {"hi", b.hi}});

  return {
      {"name", name},
      {"seed", seed},
      {"mode", eegfs::to_string(mode)},
      {"strategy", eegfs::to_string(strategy)},
      {"dataset", d},
      {"preprocess",
       {{"enabled", filter_enabled},
        {"high_pass", filter.high_pass_cutoff},
        {"low_pass", filter.low_pass_cutoff},
        {"notch", filter.notch_enabled ? json(filter.notch_freq) : json(false)},
        {"notch_bandwidth", filter.notch_bandwidth},
        {"fir_taps", filter.fir_order},
        {"zscore", zscore}}},
      {"features",
       {{"bands", bands},
        {"welch",
         {{"segment_length", welch.segment_len},
          {"overlap", welch.overlap},
          {"window", welch.window == Taper::hamming ? "hamming" : "rectangular"}}},
        {"morlet",
         {{"cycles", {morlet.cycles_lo, morlet.cycles_hi}},
          {"freq_step", morlet.freq_step},
          {"fixed_cycles", morlet.fixed_cycles ? json(*morlet.fixed_cycles) : json(nullptr)}}}}},
      {"learner", {{"folds", folds}, {"k", k}, {"sweep_k_max", sweep_k_max ? json(*sweep_k_max) : json(nullptr)}}},
      {"pca", {{"variance", pca_threshold}}},
      {"ga",
       {{"population_size", ga.population_size},
        {"mating_pool", ga.mating_pool},
        {"mutations", ga.mutations},
        {"lambda", ga.lambda},
        {"max_generations", ga.max_generations},
        {"max_minutes", std::isfinite(ga.max_minutes) ? json(ga.max_minutes) : json(nullptr)},
        {"fitness", eegfs::to_string(ga.fitness_family)},
        {"crossover", eegfs::to_string(ga.crossover)}}},
      {"output", {{"directory", output_dir.string()}, {"formats", formats}}},
  };
}

ConfigValidation validate_config(const json& doc, const fs::path& base_dir) {
  ConfigValidation result;
  Fields f(result.violations);
  const bool manifest = doc.is_object() && doc.contains("manifest_version") && doc.contains("config");
  ExperimentConfig cfg = read_config(f, manifest ? doc.at("config") : doc, base_dir);
  if (result.ok()) result.config = std::move(cfg);
  return result;
}

ConfigValidation validate_config_file(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw MissingInputError("config file '" + path.string() + "' not found");
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::parse_error& e) {
    throw ConfigError(path.string() + ": invalid JSON: " + e.what());
  }
  return validate_config(doc, fs::absolute(path).parent_path());
}

ExperimentConfig load_config(const fs::path& path) {
  auto v = validate_config_file(path);
  if (!v.ok()) {
    std::string msg = path.string() + ": " + std::to_string(v.violations.size()) + " violation(s)";
    for (const auto& s : v.violations) msg += "\n  " + s;
    throw ConfigError(msg);
  }
  return *v.config;
}

StageSeeds stage_seeds(std::uint64_t seed) {
  return {derive_seed({seed, 0x4741}), derive_seed({seed, 0x4356}), derive_seed({seed, 0x4b4d})};
}

InstanceSet load_instances(const ExperimentConfig& cfg) {
  const auto& d = cfg.dataset;
  InstanceSet set;
  auto add = [&](Recording rec) {
    if (!d.channels.empty()) rec = select_channels(rec, d.channels);
    set.recordings.push_back(std::move(rec));
  };

  switch (d.format) {
    case DatasetFormat::features:
      throw ConfigError("dataset: a feature matrix holds no recordings");
    case DatasetFormat::synthetic:
      for (int s = 0; s < d.synthetic_subjects; ++s) {
        const std::string subject = synthetic_subject(s);
        if (!subject_kept(d, subject)) continue;
        for (std::size_t c = 0; c < d.synthetic_classes.size(); ++c) {
          const auto& cls = d.synthetic_classes[c];
          Recording rec = synthesize(cls.channels, d.synthetic_duration, d.synthetic_rate,
                                     derive_seed({cfg.seed, 0x5359, static_cast<std::uint64_t>(s), c}), cls.condition);
          rec.subject = subject;
          add(std::move(rec));
        }
      }
      break;
    case DatasetFormat::edf:
    case DatasetFormat::csv:
      for (const auto& file : d.files) {
        if (!subject_kept(d, file.subject)) continue;
        Recording rec = with_context(file.path.string(), [&] {
          if (!fs::exists(file.path)) throw MissingInputError("file not found");
          return d.format == DatasetFormat::edf ? load_edf(file.path)
                                                : load_csv(file.path, d.sampling_rate, file.condition);
        });
        rec.subject = file.subject;
        if (file.segments.empty()) {
          rec.condition = file.condition;
          add(std::move(rec));
          continue;
        }
        for (const auto& seg : file.segments) {
          Recording part = with_context(file.path.string(),
                                        [&] { return slice(rec, seg.onset, seg.duration, seg.condition); });
          part.subject = file.subject;
          add(std::move(part));
        }
      }
      break;
  }
  if (set.recordings.empty()) throw InputError("dataset: no instances left after subject filtering");
  set.validate();
  return set;
}

InstanceSet preprocess_instances(const InstanceSet& in, const ExperimentConfig& cfg) {
  InstanceSet out;
  for (const auto& rec : in.recordings) {
    Recording r = rec;
    const std::string where = "subject " + rec.subject + ", condition " + rec.condition;
    if (cfg.filter_enabled) {
      r = with_context(where, [&] { return fir_bandpass(r, cfg.filter); });
      r = with_context(where, [&] { return notch(r, cfg.filter); });
    }
    if (cfg.zscore) r = with_context(where, [&] { return zscore(r); });
    out.recordings.push_back(std::move(r));
  }
  return out;
}

FeatureMatrix compute_features(const ExperimentConfig& cfg) {
  if (cfg.dataset.format == DatasetFormat::features) {
    FeatureMatrix fm = load_feature_matrix(cfg.dataset.feature_matrix);
    const auto& d = cfg.dataset;
    if (d.exclude_subjects.empty() && d.include_subjects.empty()) return fm;
    std::vector<Eigen::Index> keep;
    for (std::size_t r = 0; r < fm.rows.size(); ++r)
      if (subject_kept(d, fm.rows[r].subject)) keep.push_back(static_cast<Eigen::Index>(r));
    if (keep.empty()) throw InputError("dataset: no instances left after subject filtering");
    FeatureMatrix out;
    out.columns = fm.columns;
    out.values = fm.values(keep, Eigen::all);
    for (auto r : keep) out.rows.push_back(fm.rows[static_cast<std::size_t>(r)]);
    return out;
  }
  const InstanceSet raw = load_instances(cfg);
  return build_matrix(preprocess_instances(raw, cfg), cfg.bands, cfg.welch, cfg.morlet);
}

namespace {

std::string utc_stamp() {
  const auto now = std::chrono::system_clock::now();
  const std::time_t t = std::chrono::system_clock::to_time_t(now);
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y%m%dT%H%M%SZ", &tm);
  return buf;
}

std::string utc_iso() {
  const std::time_t t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

fs::path fresh_run_dir(const ExperimentConfig& cfg) {
  fs::create_directories(cfg.output_dir);
  const std::string stem = cfg.name + "-" + utc_stamp();
  fs::path dir = cfg.output_dir / stem;
  for (int i = 1; fs::exists(dir); ++i) dir = cfg.output_dir / (stem + "-" + std::to_string(i));
  fs::create_directory(dir);
  return dir;
}

bool wants(const ExperimentConfig& cfg, const char* format) {
  return std::find(cfg.formats.begin(), cfg.formats.end(), format) != cfg.formats.end();
}

using Clock = std::chrono::steady_clock;

double minutes_since(Clock::time_point t0) {
  return std::chrono::duration<double, std::ratio<60>>(Clock::now() - t0).count();
}

}  // namespace

RunOutcome run_experiment(const ExperimentConfig& cfg) {
  RunOutcome outcome;
  outcome.run_dir = fresh_run_dir(cfg);
  const fs::path& dir = outcome.run_dir;
  const StageSeeds seeds = stage_seeds(cfg.seed);
  const auto t_start = Clock::now();

  json& manifest = outcome.manifest;
  manifest = {
      {"manifest_version", 1},
      {"tool", "eegfs"},
      {"version", EEGFS_VERSION},
      {"experiment", cfg.name},
      {"strategy", to_string(cfg.strategy)},
      {"mode", to_string(cfg.mode)},
      {"started_at", utc_iso()},
      {"config", cfg.to_json()},
      {"seeds", {{"run", cfg.seed}, {"ga", seeds.ga}, {"cv", seeds.cv}, {"kmeans", seeds.kmeans}}},
      {"stages", json::array()},
      {"status", "running"},
      {"cleanup_policy", "artifacts of a failed run are kept in place for inspection"},
      {"artifacts", json::array()},
  };
  auto flush = [&] {
    manifest["total_minutes"] = minutes_since(t_start);
    write_json_file(dir / artifact::manifest, manifest);
  };
  auto record = [&](const char* name) { manifest["artifacts"].push_back(name); };

  std::string stage;
  auto run_stage = [&](const std::string& name, auto&& body) {
    stage = name;
    const auto t0 = Clock::now();
    body();
    manifest["stages"].push_back({{"name", name}, {"minutes", minutes_since(t0)}, {"status", "ok"}});
    flush();
  };

  try {
    flush();
    FeatureMatrix features;
    run_stage("features", [&] {
      features = compute_features(cfg);
      features.validate();
      save_feature_matrix(features, dir / artifact::features_csv, dir / artifact::features_json);
      record(artifact::features_csv);
      record(artifact::features_json);
      manifest["instances"] = features.row_count();
      manifest["feature_count"] = features.column_count();
    });

    FeatureMatrix reduced;
    run_stage("strategy", [&] {
      json s = {{"strategy", to_string(cfg.strategy)}};
      switch (cfg.strategy) {
        case Strategy::all:
          reduced = features;
          break;
        case Strategy::pca: {
          const PcaResult p = pca(features, cfg.pca_threshold);
          reduced = p.scores;
          save_feature_matrix(reduced, dir / artifact::pca_scores_csv, dir / artifact::pca_scores_json);
          record(artifact::pca_scores_csv);
          record(artifact::pca_scores_json);
          s["variance_threshold"] = cfg.pca_threshold;
          s["retained"] = p.retained;
          s["explained_variance"] = std::vector<double>(p.explained_variance.data(),
                                                        p.explained_variance.data() + p.explained_variance.size());
          break;
        }
        case Strategy::gafs: {
          const LabeledData data = LabeledData::from_matrix(features);
          GaConfig ga = cfg.ga;
          ga.seed = seeds.ga;
          const RunReport report = run(data, ga);
          reduced = features.select(report.final_chromosome.genes);
          write_json_file(dir / artifact::ga_report, to_json(report));
          record(artifact::ga_report);
          std::string names;
          for (const auto& n : reduced.column_names()) names += n + "\n";
          write_text_file(dir / artifact::selected_features, names);
          record(artifact::selected_features);
          if (wants(cfg, "txt")) {
            write_text_file(dir / artifact::fitness_summary,
                            format_table(fitness_summary_rows(cfg.name + "-GAFS", report.stats)));
            record(artifact::fitness_summary);
          }
          manifest["generations"] = report.generations_run;
          manifest["max_generation_history"] = report.max_generation_history;
          manifest["stop_reason"] = to_string(report.stop_reason);
          s["fitness"] = to_string(ga.fitness_family);
          s["final_fitness"] = report.stats.final_value;
          break;
        }
      }
      s["columns"] = reduced.column_names();
      write_json_file(dir / artifact::strategy_json, s);
      record(artifact::strategy_json);
      manifest["selected_feature_count"] = reduced.column_count();
    });

    run_stage("learner", [&] {
      const auto selected = static_cast<std::size_t>(reduced.column_count());
      const std::string label = cfg.name + "-" + to_string(cfg.strategy);
      if (cfg.mode == LearnerMode::supervised) {
        const LabeledData data = LabeledData::from_matrix(reduced);
        data.validate(true);
        const ClassMetrics m = classification_report(data, cfg.folds, seeds.cv);
        write_json_file(dir / artifact::metrics_json, to_json(m));
        record(artifact::metrics_json);
        if (wants(cfg, "txt")) {
          write_text_file(dir / artifact::metrics_txt, format_table(class_metrics_rows(label, selected, m)));
          record(artifact::metrics_txt);
        }
      } else {
        const auto rows = static_cast<int>(reduced.row_count());
        const ClusterResult cr = kmeans(reduced.values, cfg.k, seeds.kmeans);
        const int conditions = static_cast<int>(LabeledData::from_matrix(reduced).class_count());
        const int k_max = std::min(cfg.sweep_k_max.value_or(std::max(conditions + 1, 2)), rows);
        const SweepResult sweep = cluster_evaluator_sweep(reduced.values, 2, std::max(k_max, 2), seeds.kmeans);
        const json c = {{"k", cfg.k},
                        {"silhouette", cr.avg_silhouette},
                        {"cost", cr.cost},
                        {"iterations", cr.iterations},
                        {"assignments", cr.assignments},
                        {"sweep", to_json(sweep)}};
        write_json_file(dir / artifact::clustering_json, c);
        record(artifact::clustering_json);
        if (wants(cfg, "txt")) {
          const int generations = manifest.value("generations", 0);
          write_text_file(dir / artifact::clustering_txt,
                          format_table(clustering_rows(label, selected, cr.avg_silhouette, sweep, generations,
                                                       minutes_since(t_start))) +
                              "\n" + format_table(sweep_rows(sweep)));
          record(artifact::clustering_txt);
        }
      }
    });

    manifest["status"] = "ok";
    stage.clear();
    flush();
  } catch (const std::exception& e) {
    manifest["status"] = "failed";
    manifest["failed_stage"] = stage;
    manifest["error"] = e.what();
    manifest["stages"].push_back({{"name", stage}, {"status", "failed"}});
    try {
      flush();
    } catch (...) {
    }
    throw;
  }
  return outcome;
}

}  // namespace eegfs
