#include "eegfs/report.hpp"

#include "eegfs/error.hpp"

#include <cstdio>
#include <fstream>

namespace eegfs {

using nlohmann::json;

json to_json(const TraceStatistics& s) {
  return {{"mean", s.mean}, {"std", s.std}, {"max", s.max}, {"final", s.final_value}, {"final_index", s.final_index}};
}

json to_json(const RunReport& r) {
  json chromosomes = json::array();
  for (const auto& c : r.trace_chromosomes) chromosomes.push_back(c.to_string());
  return {
      {"trace", r.trace},
      {"trace_chromosomes", chromosomes},
      {"global_best", r.global_best.to_string()},
      {"global_best_fitness", r.global_best_fitness},
      {"statistics", to_json(r.stats)},
      {"final_chromosome", r.final_chromosome.to_string()},
      {"stop_reason", to_string(r.stop_reason)},
      {"elapsed_minutes", r.elapsed_minutes},
      {"generations_run", r.generations_run},
      {"max_generation_history", r.max_generation_history},
  };
}

RunReport run_report_from_json(const json& j) {
  try {
    RunReport r;
    r.trace = j.at("trace").get<std::vector<double>>();
    for (const auto& c : j.at("trace_chromosomes")) r.trace_chromosomes.push_back(Chromosome::parse(c.get<std::string>()));
    r.global_best = Chromosome::parse(j.at("global_best").get<std::string>());
    r.global_best_fitness = j.at("global_best_fitness").get<double>();
    const auto& s = j.at("statistics");
    r.stats.mean = s.at("mean").get<double>();
    r.stats.std = s.at("std").get<double>();
    r.stats.max = s.at("max").get<double>();
    r.stats.final_value = s.at("final").get<double>();
    r.stats.final_index = s.at("final_index").get<std::size_t>();
    r.final_chromosome = Chromosome::parse(j.at("final_chromosome").get<std::string>());
    r.stop_reason = stop_reason_from_string(j.at("stop_reason").get<std::string>());
    r.elapsed_minutes = j.at("elapsed_minutes").get<double>();
    r.generations_run = j.at("generations_run").get<int>();
    r.max_generation_history = j.at("max_generation_history").get<std::vector<int>>();
    return r;
  } catch (const json::exception& e) {
    throw ParseError(std::string("run report: ") + e.what());
  }
}

json to_json(const ClassMetrics& m) {
  json confusion = json::array();
  for (Eigen::Index r = 0; r < m.confusion.rows(); ++r) {
    std::vector<int> row(static_cast<std::size_t>(m.confusion.cols()));
    for (Eigen::Index c = 0; c < m.confusion.cols(); ++c) row[static_cast<std::size_t>(c)] = m.confusion(r, c);
    confusion.push_back(row);
  }
  return {{"classes", m.classes},
          {"per_class_accuracy", m.per_class_accuracy},
          {"global_accuracy", m.global_accuracy},
          {"weighted_f1", m.weighted_f1},
          {"confusion", confusion}};
}

ClassMetrics class_metrics_from_json(const json& j) {
  try {
    ClassMetrics m;
    m.classes = j.at("classes").get<std::vector<std::string>>();
    m.per_class_accuracy = j.at("per_class_accuracy").get<std::map<std::string, double>>();
    m.global_accuracy = j.at("global_accuracy").get<double>();
    m.weighted_f1 = j.at("weighted_f1").get<double>();
    const auto& conf = j.at("confusion");
    const auto k = static_cast<Eigen::Index>(m.classes.size());
    m.confusion = Eigen::MatrixXi::Zero(k, k);
    for (Eigen::Index r = 0; r < k; ++r)
      for (Eigen::Index c = 0; c < k; ++c) m.confusion(r, c) = conf.at(static_cast<std::size_t>(r)).at(static_cast<std::size_t>(c)).get<int>();
    return m;
  } catch (const json::exception& e) {
    throw ParseError(std::string("class metrics: ") + e.what());
  }
}

json to_json(const SweepResult& s) {
  json entries = json::array();
  for (const auto& [k, v] : s.entries) entries.push_back({{"k", k}, {"silhouette", v}});
  return {{"entries", entries}, {"best_k", s.best_k}};
}

SweepResult sweep_from_json(const json& j) {
  try {
    SweepResult s;
    for (const auto& e : j.at("entries")) s.entries.emplace_back(e.at("k").get<int>(), e.at("silhouette").get<double>());
    s.best_k = j.at("best_k").get<int>();
    return s;
  } catch (const json::exception& e) {
    throw ParseError(std::string("sweep: ") + e.what());
  }
}

std::string fixed(double v, int digits) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", digits, v);
  return buf;
}

std::string format_table(const std::vector<std::vector<std::string>>& rows) {
  std::vector<std::size_t> width;
  for (const auto& r : rows)
    for (std::size_t c = 0; c < r.size(); ++c) {
      if (width.size() <= c) width.push_back(0);
      width[c] = std::max(width[c], r[c].size());
    }
  std::string out;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    std::string line;
    for (std::size_t c = 0; c < rows[i].size(); ++c) {
      if (c > 0) line += "  ";
      const auto& cell = rows[i][c];
      // Text left-aligned in the first column, numbers right-aligned elsewhere.
      const std::string pad(width[c] - cell.size(), ' ');
      line += c == 0 ? cell + pad : pad + cell;
    }
    while (!line.empty() && line.back() == ' ') line.pop_back();
    out += line + "\n";
    if (i == 0) {
      std::size_t total = 0;
      for (std::size_t c = 0; c < width.size(); ++c) total += width[c] + (c > 0 ? 2 : 0);
      out += std::string(total, '-') + "\n";
    }
  }
  return out;
}

std::vector<std::vector<std::string>> fitness_summary_rows(const std::string& experiment, const TraceStatistics& s) {
  return {{"Experiment", "mean", "std", "max", "final"},
          {experiment, fixed(s.mean, 2), fixed(s.std, 4), fixed(s.max, 2), fixed(s.final_value, 2)}};
}

std::vector<std::vector<std::string>> class_metrics_rows(const std::string& experiment, std::size_t selected,
                                                         const ClassMetrics& m) {
  std::vector<std::string> header = {"Experiment", "N_sf"};
  std::vector<std::string> row = {experiment, std::to_string(selected)};
  for (const auto& c : m.classes) {
    header.push_back("Acc " + c);
    row.push_back(fixed(m.per_class_accuracy.at(c), 2));
  }
  header.insert(header.end(), {"gAcc", "waF1"});
  row.insert(row.end(), {fixed(m.global_accuracy, 2), fixed(m.weighted_f1, 2)});
  return {header, row};
}

std::vector<std::vector<std::string>> clustering_rows(const std::string& experiment, std::size_t selected,
                                                      double silhouette, const SweepResult& sweep, int generations,
                                                      double minutes) {
  return {{"Experiment", "N_sf", "silhouette", "optimal clusters", "generations", "minutes"},
          {experiment, std::to_string(selected), fixed(silhouette, 2), std::to_string(sweep.best_k),
           generations > 0 ? std::to_string(generations) : "-", fixed(minutes, 2)}};
}

std::vector<std::vector<std::string>> sweep_rows(const SweepResult& sweep) {
  std::vector<std::vector<std::string>> rows = {{"k", "silhouette"}};
  for (const auto& [k, v] : sweep.entries) rows.push_back({std::to_string(k), fixed(v, 4)});
  return rows;
}

json read_json_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw MissingInputError("missing artifact '" + path.string() + "'");
  try {
    return json::parse(in);
  } catch (const json::exception& e) {
    throw ParseError(path.string() + ": " + e.what());
  }
}

void write_json_file(const std::filesystem::path& path, const json& j) { write_text_file(path, j.dump(2) + "\n"); }

void write_text_file(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw RuntimeAbort("cannot write '" + path.string() + "'");
  out << text;
}

std::string report_tables(const std::filesystem::path& run_dir) {
  const json manifest = read_json_file(run_dir / artifact::manifest);
  try {
    const auto name = manifest.at("experiment").get<std::string>();
    const auto strategy = manifest.at("strategy").get<std::string>();
    const auto mode = manifest.at("mode").get<std::string>();
    const auto selected = manifest.at("selected_feature_count").get<std::size_t>();
    const std::string label = name + "-" + strategy;

    std::string out;
    int generations = 0;
    double minutes = manifest.value("total_minutes", 0.0);
    if (strategy == "GAFS") {
      const RunReport ga = run_report_from_json(read_json_file(run_dir / artifact::ga_report));
      out += "Fitness summary\n" + format_table(fitness_summary_rows(label, ga.stats)) + "\n";
      generations = ga.generations_run;
      minutes = ga.elapsed_minutes;
    }
    if (mode == "supervised") {
      const ClassMetrics m = class_metrics_from_json(read_json_file(run_dir / artifact::metrics_json));
      out += "Classification performance\n" + format_table(class_metrics_rows(label, selected, m));
    } else {
      const json c = read_json_file(run_dir / artifact::clustering_json);
      const SweepResult sweep = sweep_from_json(c.at("sweep"));
      out += "Clustering performance\n" +
             format_table(clustering_rows(label, selected, c.at("silhouette").get<double>(), sweep, generations, minutes));
      out += "\nEvaluator sweep\n" + format_table(sweep_rows(sweep));
    }
    return out;
  } catch (const json::exception& e) {
    throw ParseError(std::string("manifest: ") + e.what());
  }
}

}  // namespace eegfs
