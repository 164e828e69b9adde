// lgi-echo command-line front end.

#include <fstream>
#include <iostream>
#include <sstream>
#include <string>

#include "CLI11.hpp"
#include "lgiecho/scenarios.hpp"

namespace {

constexpr int kExitConfig = 2;
constexpr int kExitRuntime = 3;

lgiecho::ScenarioConfig load_config(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw lgiecho::ConfigError("config", "cannot read " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return lgiecho::parse_config(ss.str());
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Leggett-Garg tests on a simulated AFC quantum memory"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(lgiecho::kVersion));

  std::string scenario, config_path, out_dir, format, report = "text";
  std::uint64_t seed = 0;
  unsigned workers = 0;

  auto* run = app.add_subcommand("run", "Run a scenario and write its CSV/JSON outputs");
  std::string names;
  for (const auto& [s, n] : lgiecho::scenario_names()) names += (names.empty() ? "" : "|") + n;
  run->add_option("scenario", scenario, names)->required();
  run->add_option("--config", config_path, "Configuration file")->required();
  auto* seed_opt = run->add_option("--seed", seed, "Override statistics.seed");
  run->add_option("--out", out_dir, "Override output.directory");
  run->add_option("--format", format, "Override output.format")->check(CLI::IsMember({"json", "csv", "both"}));
  run->add_option("--workers", workers, "Override statistics.workers")->check(CLI::PositiveNumber);
  run->add_option("--report", report, "Report format on stdout")->check(CLI::IsMember({"text", "json"}));

  auto* validate = app.add_subcommand("validate", "Parse and validate a configuration");
  validate->add_option("--config", config_path, "Configuration file")->required();

  auto* defaults = app.add_subcommand("defaults", "Print the default configuration");
  std::string preset_name = "paper";
  defaults->add_option("--preset", preset_name, "Preset to print")->check(CLI::IsMember({"paper", "ideal"}));

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitConfig;
  }

  try {
    if (*defaults) {
      std::cout << lgiecho::to_json(lgiecho::preset(preset_name)).dump(2) << "\n";
      return 0;
    }
    auto config = load_config(config_path);
    if (*validate) {
      std::cout << "ok " << lgiecho::to_string(config.scenario) << " digest=" << lgiecho::config_digest(config) << "\n";
      return 0;
    }
    config.scenario = lgiecho::parse_scenario(scenario);
    if (*seed_opt) config.statistics.seed = seed;
    if (!out_dir.empty()) config.output.directory = out_dir;
    if (!format.empty()) config.output.format = lgiecho::parse_format(format);
    if (workers) config.statistics.workers = workers;
    config.validate();
    const auto rep = lgiecho::run_scenario(config);
    std::cout << lgiecho::emit_report(rep, report == "json" ? lgiecho::ReportFormat::Json : lgiecho::ReportFormat::Text);
    return 0;
  } catch (const lgiecho::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitRuntime;
  }
}
