#include <CLI11.hpp>

#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include "folioid/errors.hpp"
#include "folioid/runner.hpp"

namespace {

int cmd_run(const std::string& path, const std::string& out_path,
            std::optional<std::uint64_t> seed, std::optional<int> samples) {
  folioid::ScenarioConfig cfg;
  try {
    cfg = folioid::load_config(path);
    if (seed) cfg.numeric.seed = *seed;
    if (samples) {
      if (*samples < 1) throw folioid::ConfigError("--samples must be at least 1");
      cfg.numeric.samples = *samples;
    }
  } catch (const folioid::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  }
  folioid::RunResult res;
  try {
    res = folioid::run_scenario(cfg);
  } catch (const folioid::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  }
  const std::string text = res.report.dump(2) + "\n";
  if (out_path.empty()) {
    std::cout << text;
  } else {
    std::ofstream out(out_path, std::ios::binary);
    if (!out) {
      std::cerr << "cannot write " << out_path << "\n";
      return 2;
    }
    out << text;
  }
  for (const auto& c : res.report["checks"]) {
    std::cerr << (c["pass"].get<bool>() ? "pass  " : "FAIL  ") << c["name"].get<std::string>()
              << "\n";
  }
  if (!res.report["summary"]["short_circuit"].is_null()) {
    std::cerr << "stopped after " << res.report["summary"]["short_circuit"]["check"].get<std::string>()
              << ": hypothesis violated\n";
  }
  return res.exit_code;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Quotients of groupoids by multiplicative foliations"};
  app.require_subcommand(1);

  std::string config_path;
  std::string out_path;
  std::optional<std::uint64_t> seed;
  std::optional<int> samples;
  auto* run = app.add_subcommand("run", "Run the pipeline of a scenario config");
  run->add_option("config", config_path, "Scenario config (JSON)")->required();
  run->add_option("--out", out_path, "Write the report here instead of stdout");
  run->add_option("--seed", seed, "Override numeric.seed");
  run->add_option("--samples", samples, "Override numeric.samples");

  auto* list = app.add_subcommand("list-checks", "List the available checks");

  std::string family;
  auto* describe = app.add_subcommand("describe-family", "Describe a builtin family");
  describe->add_option("name", family, "Family name")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  if (*run) return cmd_run(config_path, out_path, seed, samples);
  if (*list) {
    for (const auto& c : folioid::check_catalog()) {
      std::cout << c.name << "\n    " << c.description << "\n    families:";
      for (const auto& f : c.families) std::cout << " " << f;
      std::cout << "\n";
    }
    return 0;
  }
  if (*describe) {
    try {
      std::cout << folioid::describe_family(family);
    } catch (const folioid::ConfigError& e) {
      std::cerr << e.what() << "\n";
      return 2;
    }
    return 0;
  }
  return 2;
}
