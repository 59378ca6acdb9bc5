#include "support.hpp"

#include "eegfs/error.hpp"
#include "eegfs/feature_io.hpp"

#include <doctest.h>

using namespace eegfs;

namespace {

FeatureMatrix sample_matrix() {
  FeatureMatrix fm;
  fm.columns = {{"Fz_activity", "Fz", FeatureKind::activity, std::nullopt},
                {"Fz_psd_welch_theta_l", "Fz", FeatureKind::psd_welch, "theta_l"},
                {"Fz_psd_morlet_theta_l", "Fz", FeatureKind::psd_morlet, "theta_l"}};
  fm.values.resize(2, 3);
  fm.values << 0.1, 1.0 / 3.0, 1e-300, -2.5e17, std::nextafter(1.0, 2.0), 42.0;
  fm.rows = {{"S01", "REST"}, {"S02", "MAT"}};
  return fm;
}

}  // namespace

TEST_CASE("shortest round-trip number format") {
  for (double v : {0.1, 1.0 / 3.0, 1e-300, -2.5e17, 5e-324, 123456789.125})
    CHECK(std::strtod(format_double(v).c_str(), nullptr) == v);
  CHECK(format_double(0.5) == "0.5");
}

TEST_CASE("CSV and sidecar round trip bitwise") {
  const FeatureMatrix fm = sample_matrix();
  support::TempDir dir("fio");
  save_feature_matrix(fm, dir / "features.csv", dir / "features.json");
  const FeatureMatrix back = load_feature_matrix(dir / "features.csv");
  CHECK(back.values == fm.values);
  CHECK(back.column_names() == fm.column_names());
  CHECK(back.columns[1].band == std::optional<std::string>("theta_l"));
  CHECK(back.columns[2].kind == FeatureKind::psd_morlet);
  CHECK(back.rows[1].subject == "S02");
  CHECK(back.rows[1].condition == "MAT");
  CHECK(support::read_file(dir / "features.csv").rfind("subject,condition,Fz_activity,", 0) == 0);
  const auto meta = column_meta_json(fm);
  CHECK(meta.at("rows") == 2);
  CHECK(meta.at("column_meta").size() == 3);
}

TEST_CASE("metadata inferred from column names without a sidecar") {
  const FeatureMatrix fm = parse_feature_csv("subject,condition,C3_mobility,C3_psd_welch_alpha\nS1,A,1,2\nS2,B,3,4\n");
  CHECK(fm.columns[0].kind == FeatureKind::mobility);
  CHECK(fm.columns[0].electrode == "C3");
  CHECK(fm.columns[1].band == std::optional<std::string>("alpha"));
  CHECK(fm.values(1, 1) == 4.0);
}

TEST_CASE("feature CSV errors") {
  CHECK_THROWS_AS(parse_feature_csv(""), ParseError);
  CHECK_THROWS_AS(parse_feature_csv("a,b,c\n1,2,3\n"), ParseError);
  CHECK_THROWS_AS(parse_feature_csv("subject,condition,x\nS,A,1,2\n"), ParseError);
  CHECK_THROWS_AS(parse_feature_csv("subject,condition,x\nS,A,nan?\n"), ParseError);
  CHECK_THROWS_AS(load_feature_matrix("/nonexistent/features.csv"), MissingInputError);
}
