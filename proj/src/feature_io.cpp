#include "eegfs/feature_io.hpp"

#include "eegfs/error.hpp"

#include <array>
#include <charconv>
#include <fstream>
#include <iterator>
#include <sstream>

namespace eegfs {

std::string format_double(double v) {
  std::array<char, 32> buf{};
  auto [ptr, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), v);
  if (ec != std::errc()) throw Error("format_double: conversion failed");
  return {buf.data(), ptr};
}

namespace {

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> cells;
  std::string cell;
  std::istringstream in(line);
  while (std::getline(in, cell, ',')) {
    if (!cell.empty() && cell.back() == '\r') cell.pop_back();
    cells.push_back(cell);
  }
  if (!line.empty() && line.back() == ',') cells.emplace_back();
  return cells;
}

ColumnMeta infer_meta(const std::string& name) {
  static const std::vector<std::pair<std::string, FeatureKind>> kinds = {
      {"_activity", FeatureKind::activity},   {"_mobility", FeatureKind::mobility},
      {"_complexity", FeatureKind::complexity}, {"_psd_welch", FeatureKind::psd_welch},
      {"_psd_morlet", FeatureKind::psd_morlet},
  };
  for (const auto& [suffix, kind] : kinds) {
    const auto pos = name.find(suffix);
    if (pos == std::string::npos || pos == 0) continue;
    const std::string rest = name.substr(pos + suffix.size());
    ColumnMeta m{name, name.substr(0, pos), kind, std::nullopt};
    if (kind == FeatureKind::psd_welch || kind == FeatureKind::psd_morlet) {
      if (rest.size() < 2 || rest[0] != '_') continue;
      m.band = rest.substr(1);
    } else if (!rest.empty()) {
      continue;
    }
    return m;
  }
  return {name, "", FeatureKind::component, std::nullopt};
}

}  // namespace

std::string to_csv(const FeatureMatrix& fm) {
  std::string out = "subject,condition";
  for (const auto& c : fm.columns) out += "," + c.name;
  out += "\n";
  for (Eigen::Index r = 0; r < fm.row_count(); ++r) {
    out += fm.rows[static_cast<std::size_t>(r)].subject + "," + fm.rows[static_cast<std::size_t>(r)].condition;
    for (Eigen::Index c = 0; c < fm.column_count(); ++c) out += "," + format_double(fm.values(r, c));
    out += "\n";
  }
  return out;
}

nlohmann::json column_meta_json(const FeatureMatrix& fm) {
  nlohmann::json cols = nlohmann::json::array();
  for (const auto& c : fm.columns) {
    nlohmann::json j = {{"name", c.name}, {"electrode", c.electrode}, {"kind", to_string(c.kind)}};
    j["band"] = c.band ? nlohmann::json(*c.band) : nlohmann::json(nullptr);
    cols.push_back(std::move(j));
  }
  return {{"rows", fm.row_count()}, {"columns", fm.column_count()}, {"column_meta", cols}};
}

FeatureMatrix parse_feature_csv(const std::string& text, const std::optional<nlohmann::json>& sidecar,
                                const std::string& source) {
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line)) throw ParseError(source + ": empty feature CSV", 1, 1);
  const auto header = split_csv_line(line);
  if (header.size() < 3 || header[0] != "subject" || header[1] != "condition")
    throw ParseError(source + ": header must start with subject,condition and name at least one feature", 1, 1);

  FeatureMatrix fm;
  for (std::size_t j = 2; j < header.size(); ++j) fm.columns.push_back(infer_meta(header[j]));
  if (sidecar) {
    const auto& meta = sidecar->at("column_meta");
    if (meta.size() != fm.columns.size())
      throw IntegrityError(source + ": sidecar describes " + std::to_string(meta.size()) + " columns, CSV has " +
                           std::to_string(fm.columns.size()));
    for (std::size_t j = 0; j < meta.size(); ++j) {
      ColumnMeta& c = fm.columns[j];
      if (meta[j].at("name").get<std::string>() != c.name)
        throw IntegrityError(source + ": sidecar column " + std::to_string(j) + " name mismatch");
      c.electrode = meta[j].at("electrode").get<std::string>();
      c.kind = feature_kind_from_string(meta[j].at("kind").get<std::string>());
      c.band = meta[j].at("band").is_null() ? std::nullopt
                                            : std::optional<std::string>(meta[j].at("band").get<std::string>());
    }
  }

  std::vector<std::vector<double>> values;
  std::size_t row_no = 1;
  while (std::getline(in, line)) {
    ++row_no;
    if (line.empty() || line == "\r") continue;
    const auto cells = split_csv_line(line);
    if (cells.size() != header.size())
      throw ParseError(source + ": expected " + std::to_string(header.size()) + " cells, found " +
                           std::to_string(cells.size()),
                       row_no, std::min(cells.size(), header.size()) + 1);
    fm.rows.push_back({cells[0], cells[1]});
    std::vector<double> row(cells.size() - 2);
    for (std::size_t j = 2; j < cells.size(); ++j) {
      const auto& cell = cells[j];
      auto [ptr, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), row[j - 2]);
      if (cell.empty() || ec != std::errc() || ptr != cell.data() + cell.size())
        throw ParseError(source + ": non-numeric cell '" + cell + "'", row_no, j + 1);
    }
    values.push_back(std::move(row));
  }
  fm.values.resize(static_cast<Eigen::Index>(values.size()), static_cast<Eigen::Index>(fm.columns.size()));
  for (std::size_t r = 0; r < values.size(); ++r)
    for (std::size_t c = 0; c < values[r].size(); ++c)
      fm.values(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = values[r][c];
  fm.validate();
  return fm;
}

void save_feature_matrix(const FeatureMatrix& fm, const std::filesystem::path& csv_path,
                         const std::filesystem::path& json_path) {
  std::ofstream csv(csv_path, std::ios::binary);
  if (!csv) throw Error("cannot write '" + csv_path.string() + "'");
  csv << to_csv(fm);
  std::ofstream js(json_path, std::ios::binary);
  if (!js) throw Error("cannot write '" + json_path.string() + "'");
  js << column_meta_json(fm).dump(2) << "\n";
}

FeatureMatrix load_feature_matrix(const std::filesystem::path& csv_path) {
  std::ifstream in(csv_path, std::ios::binary);
  if (!in) throw MissingInputError("cannot open feature matrix '" + csv_path.string() + "'");
  const std::string text{std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
  std::optional<nlohmann::json> sidecar;
  auto json_path = csv_path;
  json_path.replace_extension(".json");
  if (std::filesystem::exists(json_path)) {
    std::ifstream js(json_path);
    try {
      sidecar = nlohmann::json::parse(js);
    } catch (const nlohmann::json::exception& e) {
      throw ParseError(json_path.string() + ": " + e.what());
    }
  }
  return parse_feature_csv(text, sidecar, csv_path.string());
}

}  // namespace eegfs
