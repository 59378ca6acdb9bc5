#pragma once

#include "eegfs/features.hpp"

#include <json.hpp>

#include <filesystem>
#include <optional>
#include <string>

namespace eegfs {

/// Shortest string that parses back to the same double.
std::string format_double(double v);

/// Header "subject,condition,<column names>", one line per instance.
std::string to_csv(const FeatureMatrix& fm);

/// Column descriptors, row count, and column count.
nlohmann::json column_meta_json(const FeatureMatrix& fm);

/// Inverse of to_csv. Without a sidecar, column descriptors are inferred from
/// the "<electrode>_<kind>[_<band>]" naming scheme where possible.
FeatureMatrix parse_feature_csv(const std::string& text, const std::optional<nlohmann::json>& sidecar = {},
                                const std::string& source = "<memory>");

void save_feature_matrix(const FeatureMatrix& fm, const std::filesystem::path& csv_path,
                         const std::filesystem::path& json_path);

/// Reads `csv_path`; `<stem>.json` next to it is used as the sidecar when present.
FeatureMatrix load_feature_matrix(const std::filesystem::path& csv_path);

}  // namespace eegfs
