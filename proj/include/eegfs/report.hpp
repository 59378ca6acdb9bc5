#pragma once

#include "eegfs/ga.hpp"
#include "eegfs/learners.hpp"

#include <json.hpp>

#include <filesystem>
#include <string>
#include <vector>

namespace eegfs {

/// File names inside a run directory.
namespace artifact {
inline constexpr const char* manifest = "manifest.json";
inline constexpr const char* features_csv = "features.csv";
inline constexpr const char* features_json = "features.json";
inline constexpr const char* strategy_json = "strategy.json";
inline constexpr const char* pca_scores_csv = "pca_scores.csv";
inline constexpr const char* pca_scores_json = "pca_scores.json";
inline constexpr const char* ga_report = "ga_report.json";
inline constexpr const char* selected_features = "selected_features.txt";
inline constexpr const char* fitness_summary = "fitness_summary.txt";
inline constexpr const char* metrics_json = "metrics.json";
inline constexpr const char* metrics_txt = "metrics.txt";
inline constexpr const char* clustering_json = "clustering.json";
inline constexpr const char* clustering_txt = "clustering.txt";
}  // namespace artifact

nlohmann::json to_json(const TraceStatistics& s);
nlohmann::json to_json(const RunReport& r);
RunReport run_report_from_json(const nlohmann::json& j);

nlohmann::json to_json(const ClassMetrics& m);
ClassMetrics class_metrics_from_json(const nlohmann::json& j);

nlohmann::json to_json(const SweepResult& s);
SweepResult sweep_from_json(const nlohmann::json& j);

/// Column-aligned plain-text table; the first row is the header.
std::string format_table(const std::vector<std::vector<std::string>>& rows);

/// Fixed-point with `digits` decimals.
std::string fixed(double v, int digits = 2);

/// Header + one row: experiment, mean, std, max, final.
std::vector<std::vector<std::string>> fitness_summary_rows(const std::string& experiment, const TraceStatistics& s);

/// experiment, N_sf, Acc per class, gAcc, waF1.
std::vector<std::vector<std::string>> class_metrics_rows(const std::string& experiment, std::size_t selected,
                                                         const ClassMetrics& m);

/// experiment, N_sf, silhouette, optimal clusters, generations, minutes.
std::vector<std::vector<std::string>> clustering_rows(const std::string& experiment, std::size_t selected,
                                                      double silhouette, const SweepResult& sweep,
                                                      int generations, double minutes);

/// One entry per k of the evaluator sweep.
std::vector<std::vector<std::string>> sweep_rows(const SweepResult& sweep);

/// Tables for a finished run directory: the fitness summary (GA runs only) and
/// the performance table. Throws MissingInputError naming any absent artifact.
std::string report_tables(const std::filesystem::path& run_dir);

nlohmann::json read_json_file(const std::filesystem::path& path);
void write_json_file(const std::filesystem::path& path, const nlohmann::json& j);
void write_text_file(const std::filesystem::path& path, const std::string& text);

}  // namespace eegfs
