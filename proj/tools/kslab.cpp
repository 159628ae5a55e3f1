// kslab: command-line front end.
//
//   kslab classify --config run.json
//   kslab simulate --config run.json --out results/
//   kslab sweep    --config sweep.json --out results/ --workers 4
//   kslab bounds   --config run.json --out results/
//
// Exit codes: 0 success, 2 configuration error, 3 solver error.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <thread>

#include <CLI11.hpp>
#include <json.hpp>

#include "kslab/runner.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitConfig = 2;
constexpr int kExitSolver = 3;

struct ConfigFailure : std::runtime_error {
  using std::runtime_error::runtime_error;
};

nlohmann::json load_json(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigFailure("cannot open config file '" + path + "'");
  try {
    return nlohmann::json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw ConfigFailure(std::string("malformed JSON: ") + e.what());
  }
}

/// Parses with `parse` and maps every failure to a config error.
template <typename Parse>
auto parse_config(const std::string& path, Parse&& parse) {
  const auto j = load_json(path);
  try {
    return parse(j);
  } catch (const kslab::Error& e) {
    throw ConfigFailure(e.what());
  }
}

void log(bool quiet, const std::string& msg) {
  if (!quiet) std::cerr << msg << '\n';
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Flux-limited Keller-Segel laboratory: simulation, blow-up detection and bounds"};
  app.require_subcommand(1);

  std::string config_path;
  std::string out_dir = "kslab-out";
  std::size_t workers = std::max(1U, std::thread::hardware_concurrency());
  bool quiet = false;
  app.add_option("--config", config_path, "JSON configuration file")->required();
  app.add_option("--out", out_dir, "output directory");
  app.add_option("--workers", workers, "worker threads for sweeps")->check(CLI::PositiveNumber);
  app.add_flag("--quiet", quiet, "suppress progress messages");

  auto* classify = app.add_subcommand("classify", "print the regime verdict as JSON");
  auto* simulate = app.add_subcommand("simulate", "run a simulation and write series, report and plot files");
  auto* sweep = app.add_subcommand("sweep", "run a parameter sweep and write regime_map.csv");
  auto* bounds = app.add_subcommand("bounds", "write bounds.json with the lower and upper bound apparatus");
  for (auto* sub : {classify, simulate, sweep, bounds}) sub->fallthrough();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitConfig;
  }

  try {
    if (classify->parsed()) {
      const auto cfg = parse_config(config_path, [](const auto& j) { return kslab::parse_run_config(j); });
      const auto verdict = [&] {
        try {
          return kslab::classify_json(cfg);
        } catch (const kslab::Error& e) {
          throw ConfigFailure(e.what());
        }
      }();
      std::cout << verdict.dump(2) << '\n';
      if (app.get_option("--out")->count() > 0) {
        std::filesystem::create_directories(out_dir);
        std::ofstream(std::filesystem::path(out_dir) / "verdict.json") << verdict.dump(2) << '\n';
      }
      return kExitOk;
    }

    if (simulate->parsed()) {
      const auto cfg = parse_config(config_path, [](const auto& j) { return kslab::parse_run_config(j); });
      log(quiet, "simulating (" + std::string(kslab::to_string(cfg.solver)) + ") into " + out_dir);
      const auto res = kslab::cmd_simulate(cfg, out_dir);
      log(quiet, "stop reason: " + std::string(kslab::to_string(res.reason())));
      return kExitOk;
    }

    if (sweep->parsed()) {
      const auto sc = parse_config(config_path, [](const auto& j) { return kslab::parse_sweep_config(j); });
      log(quiet, "sweeping " + std::to_string(sc.points()) + " points on " + std::to_string(workers) + " workers");
      kslab::cmd_sweep(sc, out_dir, workers, [&](const kslab::SweepRow& r) {
        log(quiet, "  point " + std::to_string(r.index) + ": " + r.outcome);
      });
      return kExitOk;
    }

    if (bounds->parsed()) {
      const auto cfg = parse_config(config_path, [](const auto& j) { return kslab::parse_run_config(j); });
      std::optional<nlohmann::json> companion;
      const auto report_path = std::filesystem::path(out_dir) / "report.json";
      if (std::filesystem::exists(report_path)) {
        std::ifstream in(report_path);
        try {
          companion = nlohmann::json::parse(in);
        } catch (const nlohmann::json::parse_error&) {
          log(quiet, "ignoring unreadable " + report_path.string());
        }
      }
      nlohmann::json report;
      try {
        report = kslab::cmd_bounds(cfg, companion);
      } catch (const kslab::Error& e) {
        if (e.code() == kslab::ErrorCode::InvalidP) throw ConfigFailure(e.what());
        throw;
      }
      std::filesystem::create_directories(out_dir);
      std::ofstream(std::filesystem::path(out_dir) / "bounds.json") << report.dump(2) << '\n';
      log(quiet, "wrote " + (std::filesystem::path(out_dir) / "bounds.json").string());
      return kExitOk;
    }
  } catch (const ConfigFailure& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const kslab::Error& e) {
    std::cerr << "solver error: " << e.what() << '\n';
    return e.code() == kslab::ErrorCode::ConfigError ? kExitConfig : kExitSolver;
  } catch (const std::exception& e) {
    std::cerr << "solver error: " << e.what() << '\n';
    return kExitSolver;
  }
  return kExitOk;
}
