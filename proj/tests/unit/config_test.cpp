#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "lgiecho/config.hpp"

using namespace lgiecho;

namespace {

std::string field_of(const std::string& text) {
  try {
    parse_config(text);
  } catch (const ConfigError& e) {
    return e.field();
  }
  return "";
}

std::string read_file(const std::filesystem::path& p) {
  std::ifstream in(p);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

}  // namespace

TEST(ParseConfig, EmptyPhysicsTakesPresetDefaults) {
  const auto c = parse_config(R"({"scenario": "lgi_envelope", "physics": {}})");
  EXPECT_EQ(c.physics.detuning, 5e6);
  EXPECT_EQ(c.physics.comb.periodicity_delta, 8e6);
  EXPECT_EQ(c.physics.comb.bandwidth, 100e6);
  EXPECT_EQ(c.source.detector_efficiency, 0.35);
  EXPECT_EQ(c.source.dark_rate, 50.0);
  EXPECT_EQ(c.source.transmission_signal, 0.23);
  EXPECT_EQ(c.source.heralding_efficiency, 0.10);
  EXPECT_EQ(c.source.trials_per_cycle, 25000);
  EXPECT_EQ(c.source.cycle_rate, 40.0);
  EXPECT_EQ(c.source.trial_period, 400e-9);
  EXPECT_EQ(c, parse_config("{}"));
}

TEST(ParseConfig, ValidationNamesTheField) {
  EXPECT_EQ(field_of(R"({"source": {"dark_rate": -5}})"), "SourceParams.dark_rate");
  EXPECT_EQ(field_of(R"({"physics": {"comb": {"tooth_fwhm": 9e6}}})"), "CombSpec.tooth_fwhm");
  EXPECT_EQ(field_of(R"({"statistics": {"alpha": 1.5}})"), "statistics.alpha");
  EXPECT_EQ(field_of(R"({"params": {"markov_times_ns": [0, 10, 5]}})"), "params.markov_times_ns");
  EXPECT_EQ(field_of(R"({"scenario": "nope"})"), "scenario");
  EXPECT_EQ(field_of(R"({"defaults": "lab"})"), "defaults");
}

TEST(ParseConfig, RejectsUnknownKeysAndBadTypes) {
  EXPECT_EQ(field_of(R"({"physics": {"detunning": 5e6}})"), "physics.detunning");
  EXPECT_EQ(field_of(R"({"extra": 1})"), "extra");
  EXPECT_EQ(field_of(R"({"source": {"dark_rate": "high"}})"), "source.dark_rate");
  EXPECT_EQ(field_of(R"({"statistics": {"seed": 1.5}})"), "statistics.seed");
  EXPECT_EQ(field_of(R"({"output": {"format": "xml"}})"), "output.format");
}

TEST(ParseConfig, ParseErrorsReportLineAndColumn) {
  try {
    parse_config("{\n  \"scenario\": \"lgi_envelope\",\n  oops\n}");
    FAIL();
  } catch (const ConfigError& e) {
    EXPECT_EQ(e.field(), "config");
    const std::string what = e.what();
    EXPECT_NE(what.find("line 3"), std::string::npos) << what;
    EXPECT_NE(what.find("column"), std::string::npos) << what;
  }
}

TEST(ParseConfig, DefaultsRoundTrip) {
  for (const char* name : {"paper", "ideal"}) {
    const auto c = preset(name);
    const auto back = parse_config(to_json(c).dump(2));
    EXPECT_EQ(back, c) << name;
    EXPECT_EQ(to_json(back).dump(), to_json(c).dump());
  }
  const auto ideal = parse_config(R"({"defaults": "ideal"})");
  EXPECT_EQ(ideal.source.dark_rate, 0.0);
  EXPECT_TRUE(ideal.params.noiseless);
}

TEST(ParseConfig, OverridesReachTheModels) {
  const auto c = parse_config(R"({
    "physics": {"detuning": 2e6, "channel": {"kind": "loss", "rate": 3e5}},
    "source": {"pair_statistics": "thermal"},
    "statistics": {"counting": "ideal", "seed": 9},
    "params": {"g2_input": "H+iV"}
  })");
  EXPECT_EQ(c.physics.channel.kind, ChannelKind::Loss);
  EXPECT_EQ(c.source.statistics, PairStatistics::Thermal);
  const auto m = c.memory();
  EXPECT_EQ(m.v_comb.center_offset - m.h_comb.center_offset, 2e6);
  EXPECT_EQ(m.excitation.detuning, 2e6);
  const auto cm = c.counting_model();
  EXPECT_EQ(cm.mode, CountingMode::Ideal);
}

TEST(ConfigDigest, StableAndSensitive) {
  const auto a = parse_config(R"({"statistics": {"seed": 42}})");
  const auto b = parse_config(R"({"statistics": {"seed": 42}})");
  EXPECT_EQ(config_digest(a), config_digest(b));
  EXPECT_EQ(config_digest(a).size(), 16u);
  auto c = a;
  c.statistics.workers = 8;
  c.output.directory = "elsewhere";
  EXPECT_EQ(config_digest(a), config_digest(c));
  c.statistics.seed = 43;
  EXPECT_NE(config_digest(a), config_digest(c));
}

TEST(ParsePolarization, KnownNames) {
  EXPECT_NEAR(born_probability(parse_polarization("D", "x"), PolarState::D()), 1.0, 1e-12);
  EXPECT_NEAR(born_probability(parse_polarization("H-V", "x"), PolarState::A()), 1.0, 1e-12);
  EXPECT_NEAR(born_probability(parse_polarization("H+iV", "x"), PolarState::hv(Complex{1}, Complex{0, 1})), 1.0, 1e-12);
  EXPECT_THROW(parse_polarization("Q", "x"), ConfigError);
}

TEST(ShippedConfigs, AllValidate) {
  int n = 0;
  for (const auto& entry : std::filesystem::recursive_directory_iterator(LGIECHO_CONFIG_DIR)) {
    if (entry.path().extension() != ".json") continue;
    EXPECT_NO_THROW(parse_config(read_file(entry.path()))) << entry.path();
    ++n;
  }
  EXPECT_GE(n, 6);
}
