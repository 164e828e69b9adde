#pragma once

// Scenario configuration: JSON document <-> ScenarioConfig, presets,
// validation and the canonical digest.

#include <cstdint>
#include <cstdio>
#include <set>
#include <string>
#include <vector>

#include "json.hpp"

#include "afc.hpp"
#include "errors.hpp"
#include "lgi.hpp"
#include "photon.hpp"
#include "quantum.hpp"
#include "stationarity.hpp"

namespace lgiecho {

using Json = nlohmann::ordered_json;

enum class Scenario { LgiEnvelope, StationarityGrid, Markovianity, G2VsStorage, EchoTrace, TomographyDemo };

inline const std::vector<std::pair<Scenario, std::string>>& scenario_names() {
  static const std::vector<std::pair<Scenario, std::string>> names{
      {Scenario::LgiEnvelope, "lgi_envelope"}, {Scenario::StationarityGrid, "stationarity_grid"},
      {Scenario::Markovianity, "markovianity"}, {Scenario::G2VsStorage, "g2_vs_storage"},
      {Scenario::EchoTrace, "echo_trace"},     {Scenario::TomographyDemo, "tomography_demo"}};
  return names;
}

inline std::string to_string(Scenario s) {
  for (const auto& [k, v] : scenario_names())
    if (k == s) return v;
  return "unknown";
}

inline Scenario parse_scenario(const std::string& name) {
  for (const auto& [k, v] : scenario_names())
    if (v == name) return k;
  std::string list;
  for (const auto& [k, v] : scenario_names()) list += (list.empty() ? "" : ", ") + v;
  throw ConfigError("scenario", "unknown scenario '" + name + "' (expected one of: " + list + ")");
}

enum class OutputFormat { Json, Csv, Both };

inline std::string to_string(OutputFormat f) {
  return f == OutputFormat::Json ? "json" : f == OutputFormat::Csv ? "csv" : "both";
}

inline OutputFormat parse_format(const std::string& s) {
  if (s == "json") return OutputFormat::Json;
  if (s == "csv") return OutputFormat::Csv;
  if (s == "both") return OutputFormat::Both;
  throw ConfigError("output.format", "expected json, csv or both");
}

/// Polarization names accepted in configs: H, V, D (= H+V), A (= H-V),
/// H+V, H-V, H+iV, H-iV.
inline PolarState parse_polarization(const std::string& s, const std::string& field) {
  if (s == "H") return PolarState::H();
  if (s == "V") return PolarState::V();
  if (s == "D" || s == "H+V") return PolarState::D();
  if (s == "A" || s == "H-V") return PolarState::A();
  if (s == "H+iV") return PolarState::hv(Complex{1}, Complex{0, 1});
  if (s == "H-iV") return PolarState::hv(Complex{1}, Complex{0, -1});
  throw ConfigError(field, "unknown polarization '" + s + "'");
}

struct PhysicsConfig {
  CombSpec comb{};  // H comb; the V comb is the same comb shifted by `detuning`
  double detuning = 5e6;
  double phase0 = 0.0;
  Channel channel{ChannelKind::Dephasing, 1e6, Basis::HV};
  EchoOptions echo{};
  double photon_coupling = MemoryConfig{}.photon_coupling;
  double extinction_ratio = 1000.0;
  int max_echo_order = 3;

  bool operator==(const PhysicsConfig&) const = default;
};

struct StatisticsConfig {
  std::uint64_t seed = 1;
  unsigned workers = 1;
  CountingMode counting = CountingMode::Detector;
  double trials_per_setting = 3.6e10;  // LGI / stationarity settings, detector counting
  double clicks_per_setting = 1000;    // ideal counting
  std::int64_t trials_per_run = 100'000'000'000;  // each coincidence histogram
  std::int64_t shots = 100000;                    // tomography, per basis
  int bootstrap = 20;
  double alpha = 0.05;

  bool operator==(const StatisticsConfig&) const = default;
};

struct ScenarioParams {
  bool noiseless = false;
  std::vector<double> lgi_times_ns;  // empty: automatic grid
  double probe_time_ns = 62.5;
  std::vector<double> invariance_times_ns{0, 20, 40, 60, 80, 100};
  std::vector<double> markov_times_ns{0, 200, 400, 600, 800, 1000};
  bool use_tomography = false;
  std::vector<double> storage_times_ns{0, 50, 100, 150, 200, 250};
  std::string g2_input = "V";
  std::string g2_analyzer = "V";
  double echo_t_max_ns = 300;
  double echo_bin_ns = 2;
  std::string echo_input = "H+V";
  std::string echo_analyzer = "H-V";
  double tomography_phi = 1.5707963267948966;

  bool operator==(const ScenarioParams&) const = default;
};

struct OutputConfig {
  std::string directory = "out";
  OutputFormat format = OutputFormat::Both;

  bool operator==(const OutputConfig&) const = default;
};

struct ScenarioConfig {
  std::string defaults = "paper";
  Scenario scenario = Scenario::LgiEnvelope;
  PhysicsConfig physics{};
  SourceParams source{};
  StatisticsConfig statistics{};
  ScenarioParams params{};
  OutputConfig output{};

  bool operator==(const ScenarioConfig&) const = default;

  MemoryConfig memory() const {
    MemoryConfig m;
    m.h_comb = physics.comb;
    m.v_comb = physics.comb;
    m.v_comb.center_offset = physics.comb.center_offset + physics.detuning;
    m.excitation = ExcitationState{physics.detuning, physics.phase0, {"N1", "N2"}};
    m.echo = physics.echo;
    m.photon_coupling = physics.photon_coupling;
    m.extinction_ratio = physics.extinction_ratio;
    m.max_echo_order = physics.max_echo_order;
    return m;
  }

  CountingModel counting_model() const {
    CountingModel c;
    c.mode = statistics.counting;
    c.source = source;
    c.memory = memory();
    c.trials_per_setting = statistics.trials_per_setting;
    c.clicks_per_setting = statistics.clicks_per_setting;
    return c;
  }

  /// Checks every block; throws ConfigError naming the first bad field.
  void validate() const {
    physics.comb.validate();
    physics.channel.validate();
    source.validate();
    memory().validate();
    if (statistics.workers < 1) throw ConfigError("statistics.workers", "must be >= 1");
    if (!(statistics.trials_per_setting >= 1)) throw ConfigError("statistics.trials_per_setting", "must be >= 1");
    if (!(statistics.clicks_per_setting >= 1)) throw ConfigError("statistics.clicks_per_setting", "must be >= 1");
    if (statistics.trials_per_run < 1) throw ConfigError("statistics.trials_per_run", "must be >= 1");
    if (statistics.shots < 1) throw ConfigError("statistics.shots", "must be >= 1");
    if (statistics.bootstrap < 2) throw ConfigError("statistics.bootstrap", "must be >= 2");
    if (!(statistics.alpha > 0 && statistics.alpha < 1)) throw ConfigError("statistics.alpha", "must lie in (0,1)");
    auto positive_list = [](const std::vector<double>& v, const char* field, bool allow_zero, std::size_t min_size) {
      if (v.size() < min_size) throw ConfigError(field, "needs at least " + std::to_string(min_size) + " entries");
      for (std::size_t k = 0; k < v.size(); ++k) {
        if (!std::isfinite(v[k]) || v[k] < 0 || (!allow_zero && v[k] == 0)) throw ConfigError(field, "entries must be positive");
        if (k > 0 && !(v[k] > v[k - 1])) throw ConfigError(field, "entries must be strictly increasing");
      }
    };
    positive_list(params.lgi_times_ns, "params.lgi_times_ns", false, 0);
    positive_list(params.invariance_times_ns, "params.invariance_times_ns", true, 2);
    positive_list(params.markov_times_ns, "params.markov_times_ns", true, 3);
    positive_list(params.storage_times_ns, "params.storage_times_ns", true, 1);
    if (!(params.probe_time_ns > 0)) throw ConfigError("params.probe_time_ns", "must be > 0");
    if (!(params.echo_t_max_ns > 0)) throw ConfigError("params.echo_t_max_ns", "must be > 0");
    if (!(params.echo_bin_ns > 0)) throw ConfigError("params.echo_bin_ns", "must be > 0");
    if (!std::isfinite(params.tomography_phi)) throw ConfigError("params.tomography_phi", "must be finite");
    parse_polarization(params.g2_input, "params.g2_input");
    parse_polarization(params.g2_analyzer, "params.g2_analyzer");
    parse_polarization(params.echo_input, "params.echo_input");
    parse_polarization(params.echo_analyzer, "params.echo_analyzer");
    if (output.directory.empty()) throw ConfigError("output.directory", "must not be empty");
  }
};

/// Noise-free, lossless preset.
inline ScenarioConfig ideal_preset() {
  ScenarioConfig c;
  c.defaults = "ideal";
  c.source.heralding_efficiency = 1;
  c.source.transmission_signal = 1;
  c.source.detector_efficiency = 1;
  c.source.dark_rate = 0;
  c.physics.extinction_ratio = 1e12;
  c.physics.channel = Channel{ChannelKind::Identity, 0, Basis::HV};
  c.statistics.counting = CountingMode::Ideal;
  c.params.noiseless = true;
  return c;
}

inline ScenarioConfig preset(const std::string& name) {
  if (name == "paper") return ScenarioConfig{};
  if (name == "ideal") return ideal_preset();
  throw ConfigError("defaults", "unknown preset '" + name + "' (expected paper or ideal)");
}

// ---------------------------------------------------------------------------
// JSON mapping

namespace detail {

inline const char* kind_name(ChannelKind k) {
  return k == ChannelKind::Identity ? "identity" : k == ChannelKind::Dephasing ? "dephasing" : "loss";
}

/// Reads the members of one JSON object, rejecting unknown keys.
class ObjectReader {
 public:
  ObjectReader(const Json& j, std::string path) : j_(j), path_(std::move(path)) {
    if (!j_.is_object()) throw ConfigError(path_, "expected an object");
  }

  /// Throws on the first key that no accessor asked for.
  void finish() const {
    for (const auto& [k, v] : j_.items())
      if (!seen_.count(k)) throw ConfigError(name(k), "unknown key");
  }

  std::string name(const std::string& key) const { return path_.empty() ? key : path_ + "." + key; }

  const Json* find(const std::string& key) {
    seen_.insert(key);
    auto it = j_.find(key);
    return it == j_.end() ? nullptr : &*it;
  }

  void number(const std::string& key, double& out) {
    if (const Json* v = find(key)) {
      if (!v->is_number()) throw ConfigError(name(key), "expected a number");
      out = v->get<double>();
    }
  }

  template <class Int>
  void integer(const std::string& key, Int& out) {
    if (const Json* v = find(key)) {
      if (v->is_number_integer()) {
        if (v->is_number_unsigned()) {
          out = static_cast<Int>(v->get<std::uint64_t>());
          return;
        }
        const auto x = v->get<std::int64_t>();
        if (std::is_unsigned_v<Int> && x < 0) throw ConfigError(name(key), "must be >= 0");
        out = static_cast<Int>(x);
        return;
      }
      // Accept integral floating literals such as 3.6e10.
      if (v->is_number_float()) {
        const double x = v->get<double>();
        if (std::isfinite(x) && x == std::floor(x) && std::abs(x) < 9.2e18) {
          if (std::is_unsigned_v<Int> && x < 0) throw ConfigError(name(key), "must be >= 0");
          out = static_cast<Int>(x);
          return;
        }
      }
      throw ConfigError(name(key), "expected an integer");
    }
  }

  void boolean(const std::string& key, bool& out) {
    if (const Json* v = find(key)) {
      if (!v->is_boolean()) throw ConfigError(name(key), "expected true or false");
      out = v->get<bool>();
    }
  }

  void string(const std::string& key, std::string& out) {
    if (const Json* v = find(key)) {
      if (!v->is_string()) throw ConfigError(name(key), "expected a string");
      out = v->get<std::string>();
    }
  }

  void numbers(const std::string& key, std::vector<double>& out) {
    if (const Json* v = find(key)) {
      if (!v->is_array()) throw ConfigError(name(key), "expected an array of numbers");
      out.clear();
      for (const auto& x : *v) {
        if (!x.is_number()) throw ConfigError(name(key), "expected an array of numbers");
        out.push_back(x.get<double>());
      }
    }
  }

 private:
  const Json& j_;
  std::string path_;
  std::set<std::string> seen_;
};

inline void read_comb(const Json& j, CombSpec& c) {
  ObjectReader r(j, "physics.comb");
  r.number("periodicity_delta", c.periodicity_delta);
  r.number("tooth_fwhm", c.tooth_fwhm);
  r.number("bandwidth", c.bandwidth);
  r.number("optical_depth", c.optical_depth);
  r.number("background_depth", c.background_depth);
  r.number("center_offset", c.center_offset);
  r.finish();
}

inline void read_physics(const Json& j, PhysicsConfig& p) {
  ObjectReader r(j, "physics");
  if (const Json* c = r.find("comb")) read_comb(*c, p.comb);
  r.number("detuning", p.detuning);
  r.number("phase0", p.phase0);
  if (const Json* c = r.find("channel")) {
    ObjectReader cr(*c, "physics.channel");
    std::string kind = kind_name(p.channel.kind);
    cr.string("kind", kind);
    if (kind == "identity")
      p.channel.kind = ChannelKind::Identity;
    else if (kind == "dephasing")
      p.channel.kind = ChannelKind::Dephasing;
    else if (kind == "loss")
      p.channel.kind = ChannelKind::Loss;
    else
      throw ConfigError("physics.channel.kind", "expected identity, dephasing or loss");
    cr.number("rate", p.channel.rate);
    std::string basis = to_string(p.channel.basis);
    cr.string("basis", basis);
    if (basis == "HV")
      p.channel.basis = Basis::HV;
    else if (basis == "DA")
      p.channel.basis = Basis::DA;
    else
      throw ConfigError("physics.channel.basis", "expected HV or DA");
    cr.finish();
  }
  if (const Json* e = r.find("echo")) {
    ObjectReader er(*e, "physics.echo");
    er.number("prefactor", p.echo.prefactor);
    er.integer("atoms", p.echo.atoms);
    er.integer("seed", p.echo.seed);
    er.finish();
  }
  r.number("photon_coupling", p.photon_coupling);
  r.number("extinction_ratio", p.extinction_ratio);
  r.integer("max_echo_order", p.max_echo_order);
  r.finish();
}

inline void read_source(const Json& j, SourceParams& s) {
  ObjectReader r(j, "source");
  r.number("pair_probability", s.pair_probability);
  r.number("heralding_efficiency", s.heralding_efficiency);
  r.number("transmission_signal", s.transmission_signal);
  r.number("detector_efficiency", s.detector_efficiency);
  r.number("dark_rate", s.dark_rate);
  r.number("trial_period", s.trial_period);
  r.integer("trials_per_cycle", s.trials_per_cycle);
  r.number("cycle_rate", s.cycle_rate);
  std::string stats = to_string(s.statistics);
  r.string("pair_statistics", stats);
  if (stats == "bernoulli")
    s.statistics = PairStatistics::Bernoulli;
  else if (stats == "thermal")
    s.statistics = PairStatistics::Thermal;
  else
    throw ConfigError("source.pair_statistics", "expected bernoulli or thermal");
  r.finish();
}

inline void read_statistics(const Json& j, StatisticsConfig& s) {
  ObjectReader r(j, "statistics");
  r.integer("seed", s.seed);
  r.integer("workers", s.workers);
  std::string counting = to_string(s.counting);
  r.string("counting", counting);
  if (counting == "ideal")
    s.counting = CountingMode::Ideal;
  else if (counting == "detector")
    s.counting = CountingMode::Detector;
  else
    throw ConfigError("statistics.counting", "expected ideal or detector");
  r.number("trials_per_setting", s.trials_per_setting);
  r.number("clicks_per_setting", s.clicks_per_setting);
  r.integer("trials_per_run", s.trials_per_run);
  r.integer("shots", s.shots);
  r.integer("bootstrap", s.bootstrap);
  r.number("alpha", s.alpha);
  r.finish();
}

inline void read_params(const Json& j, ScenarioParams& p) {
  ObjectReader r(j, "params");
  r.boolean("noiseless", p.noiseless);
  r.numbers("lgi_times_ns", p.lgi_times_ns);
  r.number("probe_time_ns", p.probe_time_ns);
  r.numbers("invariance_times_ns", p.invariance_times_ns);
  r.numbers("markov_times_ns", p.markov_times_ns);
  r.boolean("use_tomography", p.use_tomography);
  r.numbers("storage_times_ns", p.storage_times_ns);
  r.string("g2_input", p.g2_input);
  r.string("g2_analyzer", p.g2_analyzer);
  r.number("echo_t_max_ns", p.echo_t_max_ns);
  r.number("echo_bin_ns", p.echo_bin_ns);
  r.string("echo_input", p.echo_input);
  r.string("echo_analyzer", p.echo_analyzer);
  r.number("tomography_phi", p.tomography_phi);
  r.finish();
}

}  // namespace detail

/// Parses and validates a configuration document. Missing fields take the
/// values of the preset named by `defaults` (paper when absent).
inline ScenarioConfig parse_config(const std::string& text) {
  Json j;
  try {
    j = Json::parse(text);
  } catch (const Json::parse_error& e) {
    std::string msg = e.what();
    const auto pos = msg.find("parse error");
    throw ConfigError("config", pos == std::string::npos ? msg : msg.substr(pos));
  }
  if (!j.is_object()) throw ConfigError("config", "top level must be an object");

  ScenarioConfig c;
  {
    detail::ObjectReader r(j, "");
    std::string defaults = "paper";
    r.string("defaults", defaults);
    c = preset(defaults);
    std::string scenario = to_string(c.scenario);
    r.string("scenario", scenario);
    c.scenario = parse_scenario(scenario);
    if (const Json* v = r.find("physics")) detail::read_physics(*v, c.physics);
    if (const Json* v = r.find("source")) detail::read_source(*v, c.source);
    if (const Json* v = r.find("statistics")) detail::read_statistics(*v, c.statistics);
    if (const Json* v = r.find("params")) detail::read_params(*v, c.params);
    if (const Json* v = r.find("output")) {
      detail::ObjectReader o(*v, "output");
      o.string("directory", c.output.directory);
      std::string fmt = to_string(c.output.format);
      o.string("format", fmt);
      c.output.format = parse_format(fmt);
      o.finish();
    }
    r.finish();
  }
  c.validate();
  return c;
}

/// Canonical document: every field, fixed key order.
inline Json to_json(const ScenarioConfig& c) {
  const auto& p = c.physics;
  const auto& s = c.source;
  const auto& st = c.statistics;
  const auto& pr = c.params;
  Json j;
  j["defaults"] = c.defaults;
  j["scenario"] = to_string(c.scenario);
  j["physics"] = {
      {"comb",
       {{"periodicity_delta", p.comb.periodicity_delta},
        {"tooth_fwhm", p.comb.tooth_fwhm},
        {"bandwidth", p.comb.bandwidth},
        {"optical_depth", p.comb.optical_depth},
        {"background_depth", p.comb.background_depth},
        {"center_offset", p.comb.center_offset}}},
      {"detuning", p.detuning},
      {"phase0", p.phase0},
      {"channel", {{"kind", detail::kind_name(p.channel.kind)}, {"rate", p.channel.rate}, {"basis", to_string(p.channel.basis)}}},
      {"echo", {{"prefactor", p.echo.prefactor}, {"atoms", p.echo.atoms}, {"seed", p.echo.seed}}},
      {"photon_coupling", p.photon_coupling},
      {"extinction_ratio", p.extinction_ratio},
      {"max_echo_order", p.max_echo_order}};
  j["source"] = {{"pair_probability", s.pair_probability},
                 {"heralding_efficiency", s.heralding_efficiency},
                 {"transmission_signal", s.transmission_signal},
                 {"detector_efficiency", s.detector_efficiency},
                 {"dark_rate", s.dark_rate},
                 {"trial_period", s.trial_period},
                 {"trials_per_cycle", s.trials_per_cycle},
                 {"cycle_rate", s.cycle_rate},
                 {"pair_statistics", to_string(s.statistics)}};
  j["statistics"] = {{"seed", st.seed},
                     {"workers", st.workers},
                     {"counting", to_string(st.counting)},
                     {"trials_per_setting", st.trials_per_setting},
                     {"clicks_per_setting", st.clicks_per_setting},
                     {"trials_per_run", st.trials_per_run},
                     {"shots", st.shots},
                     {"bootstrap", st.bootstrap},
                     {"alpha", st.alpha}};
  j["params"] = {{"noiseless", pr.noiseless},
                 {"lgi_times_ns", pr.lgi_times_ns},
                 {"probe_time_ns", pr.probe_time_ns},
                 {"invariance_times_ns", pr.invariance_times_ns},
                 {"markov_times_ns", pr.markov_times_ns},
                 {"use_tomography", pr.use_tomography},
                 {"storage_times_ns", pr.storage_times_ns},
                 {"g2_input", pr.g2_input},
                 {"g2_analyzer", pr.g2_analyzer},
                 {"echo_t_max_ns", pr.echo_t_max_ns},
                 {"echo_bin_ns", pr.echo_bin_ns},
                 {"echo_input", pr.echo_input},
                 {"echo_analyzer", pr.echo_analyzer},
                 {"tomography_phi", pr.tomography_phi}};
  j["output"] = {{"directory", c.output.directory}, {"format", to_string(c.output.format)}};
  return j;
}

/// FNV-1a (64 bit) of the canonical document without the output block and
/// the worker count, neither of which affects results.
inline std::string config_digest(const ScenarioConfig& c) {
  Json j = to_json(c);
  j.erase("output");
  j["statistics"].erase("workers");
  const std::string text = j.dump();
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char ch : text) {
    h ^= ch;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

}  // namespace lgiecho
