#include <gtest/gtest.h>

#include <fstream>

#include "hydroq/scenario.hpp"
#include "support.hpp"

using namespace hydroq;
using nlohmann::json;

namespace {

std::filesystem::path write_config(const std::filesystem::path& dir, const json& j) {
  const auto p = dir / "scenario.json";
  std::ofstream(p) << j.dump();
  return p;
}

} // namespace

TEST(LoadScenario, MinimalConfigUsesCaseStudyDefaults) {
  const auto dir = fixtures::scratch_dir("scenario_min");
  const Scenario sc = load_scenario(write_config(dir, {{"n_households", 1}}));
  EXPECT_EQ(sc.device.p_fc_max, 2.0);
  EXPECT_EQ(sc.device.p_el_max, 2.0);
  EXPECT_EQ(sc.device.h_max, 15.0);
  EXPECT_EQ(sc.device.h_init, 1.0);
  EXPECT_EQ(sc.device.soc_min, 0.2);
  EXPECT_EQ(sc.device.soc_max, 0.9);
  EXPECT_EQ(sc.device.soc_init, 0.6);
  EXPECT_EQ(sc.loads.size(), 1u);
}

TEST(LoadScenario, InvertedSocBounds) {
  const auto dir = fixtures::scratch_dir("scenario_soc");
  try {
    load_scenario(write_config(dir, {{"device", {{"soc_min", 0.9}, {"soc_max", 0.2}}}}));
    FAIL() << "expected ValidationError";
  } catch (const ValidationError& e) {
    EXPECT_NE(e.field().find("soc"), std::string::npos);
  }
}

TEST(LoadScenario, LoadCountMismatch) {
  const auto dir = fixtures::scratch_dir("scenario_loads");
  const json j = {{"n_households", 3}, {"loads", json::array({json{{"synthetic", true}}, json{{"synthetic", true}}})}};
  EXPECT_THROW(load_scenario(write_config(dir, j)), ValidationError);
}

TEST(LoadScenario, MissingFileNamesPath) {
  try {
    load_scenario("/nonexistent/dir/s.json");
    FAIL();
  } catch (const Error& e) {
    EXPECT_NE(std::string(e.what()).find("/nonexistent/dir/s.json"), std::string::npos);
  }
}

TEST(LoadScenario, WrongTypeAndMalformedJson) {
  const auto dir = fixtures::scratch_dir("scenario_bad");
  EXPECT_THROW(load_scenario(write_config(dir, {{"n_households", "two"}})), ParseError);
  std::ofstream(dir / "broken.json") << "{ not json";
  EXPECT_THROW(load_scenario(dir / "broken.json"), ParseError);
}

TEST(LoadScenario, CsvSeriesRelativeToConfig) {
  const auto dir = fixtures::scratch_dir("scenario_csv");
  const Profiles p = synth_profiles(3, 1, 1);
  std::ofstream(dir / "wind.csv") << series_to_csv(p.wind);
  const Scenario sc = load_scenario(write_config(dir, {{"synthetic", {{"seed", 3}, {"days", 1}}}, {"wind_speed", "wind.csv"}}));
  EXPECT_EQ(sc.wind_speed, p.wind);
  EXPECT_THROW(load_scenario(write_config(dir, {{"wind_speed", "nope.csv"}})), MissingSeries);
}

TEST(SeriesCsv, RejectsGapsAndBadHeader) {
  const auto dir = fixtures::scratch_dir("series");
  std::ofstream(dir / "gap.csv") << "timestamp,value\n2024-01-01T00:00:00,1\n2024-01-01T00:15:00,2\n2024-01-01T00:45:00,3\n";
  EXPECT_THROW(read_series_csv(dir / "gap.csv"), ParseError);
  std::ofstream(dir / "hdr.csv") << "time,v\n2024-01-01T00:00:00,1\n";
  EXPECT_THROW(read_series_csv(dir / "hdr.csv"), ParseError);
  std::ofstream(dir / "dec.csv") << "timestamp,value\n2024-01-01T00:15:00,1\n2024-01-01T00:00:00,2\n";
  EXPECT_THROW(read_series_csv(dir / "dec.csv"), ParseError);
}

TEST(SeriesCsv, RoundTrip) {
  const Profiles p = synth_profiles(5, 1, 1);
  const auto dir = fixtures::scratch_dir("series_rt");
  std::ofstream(dir / "l.csv") << series_to_csv(p.loads[0]);
  EXPECT_EQ(read_series_csv(dir / "l.csv"), p.loads[0]);
}

TEST(Timestamps, ParseFormat) {
  const Timestamp t = parse_timestamp("2024-03-01T12:30:00");
  EXPECT_EQ(format_timestamp(t), "2024-03-01T12:30:00");
  EXPECT_EQ(parse_timestamp("1970-01-01T00:00:00"), 0);
  EXPECT_THROW(parse_timestamp("yesterday"), ParseError);
}

TEST(SynthProfiles, Deterministic) {
  const Profiles a = synth_profiles(7, 1, 2), b = synth_profiles(7, 1, 2);
  EXPECT_EQ(a.ambient, b.ambient);
  EXPECT_EQ(a.insolation, b.insolation);
  EXPECT_EQ(a.wind, b.wind);
  EXPECT_EQ(a.loads, b.loads);
}

TEST(SynthProfiles, NoSunAtMidnight) {
  const Profiles p = synth_profiles(7, 3, 1);
  for (int d = 0; d < 3; ++d) EXPECT_EQ(p.insolation.at(p.insolation.start + d * 86400), 0.0);
}

TEST(SynthProfiles, YearOfFourHouseholds) {
  const Profiles p = synth_profiles(7, 365, 4);
  ASSERT_EQ(p.loads.size(), 4u);
  for (std::size_t i = 0; i < 4; ++i) {
    EXPECT_EQ(p.loads[i].values.size(), p.loads[0].values.size());
    for (std::size_t j = i + 1; j < 4; ++j) EXPECT_NE(p.loads[i].values, p.loads[j].values);
  }
  EXPECT_EQ(p.loads[0].values.size(), 365u * kSlotsPerDay);
}

TEST(Scenario, CoverageAndJsonRoundTrip) {
  const Scenario sc = default_scenario(2, 11, 2);
  EXPECT_EQ(covered_slots(sc), 2 * kSlotsPerDay);
  const Scenario back = scenario_from_json(scenario_to_json(sc), ".");
  EXPECT_EQ(back, sc);
}

TEST(Scenario, ExampleConfigLoads) {
  const Scenario sc = load_scenario(std::filesystem::path(HYDROQ_SOURCE_DIR) / "examples/scenarios/one_household_week.json");
  EXPECT_EQ(sc.n_households, 1);
  EXPECT_GE(covered_slots(sc), 7 * kSlotsPerDay);
}
