#include <CLI11.hpp>

#include <cstdio>
#include <iostream>
#include <sstream>

#include "irqm/common.hpp"
#include "irqm/config.hpp"
#include "irqm/runner.hpp"

using namespace irqm;

namespace {

std::vector<std::string> split_values(const std::string& s) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    auto a = item.find_first_not_of(" \t{}");
    auto b = item.find_last_not_of(" \t{}");
    if (a != std::string::npos) out.push_back(item.substr(a, b - a + 1));
  }
  return out;
}

void report(const RunResult& r) {
  for (auto& c : r.checks)
    std::printf("  %-28s %s  value=%.6e limit=%.6e\n", c.name.c_str(), c.pass ? "ok  " : "FAIL", c.value, c.limit);
  for (auto& [k, v] : r.headline) std::printf("  %s = %.12g\n", k.c_str(), v);
  if (!r.error.empty()) std::fprintf(stderr, "error: %s\n", r.error.c_str());
  std::printf("wrote %s (%.2f s)\n", r.out_dir.c_str(), r.wall_time);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"irreversible Friedrichs-model experiments"};
  app.require_subcommand(1);

  std::string cfg_path, out_dir, param, values;
  bool oracle = false;

  auto* run = app.add_subcommand("run", "run one experiment");
  run->add_option("config", cfg_path, "config file")->required();
  run->add_option("--out", out_dir, "output directory (overrides the config's output key)");
  run->add_flag("--oracle", oracle, "also evaluate the discretised oracle");

  auto* sweep = app.add_subcommand("sweep", "run one experiment over a list of parameter values");
  sweep->add_option("config", cfg_path, "config file")->required();
  sweep->add_option("--param", param, "lambda, omega0, beta or N")->required();
  sweep->add_option("--values", values, "comma separated values")->required();
  sweep->add_option("--out", out_dir, "output directory");
  sweep->add_flag("--oracle", oracle, "also evaluate the discretised oracle");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int rc = app.exit(e);
    return rc == 0 ? 0 : 2;
  }

  ExperimentConfig cfg;
  try {
    cfg = load_config(cfg_path);
    if (oracle) cfg.set("numeric.oracle", "true");
    validate(cfg);
  } catch (const Error& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return 2;
  }
  std::string dir = resolve_output(out_dir.empty() ? cfg.str("output") : out_dir);

  if (run->parsed()) {
    auto r = run_experiment(cfg, dir);
    report(r);
    return r.status;
  }

  std::vector<std::string> vals = split_values(values);
  try {
    sweep_key(param);
    if (vals.empty()) throw Error(ErrorKind::config, "empty --values");
  } catch (const Error& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return 2;
  }
  SweepResult s;
  try {
    s = run_sweep(cfg, param, vals, dir);
  } catch (const Error& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return exit_code(e.kind());
  }
  for (size_t i = 0; i < s.runs.size(); ++i) {
    std::printf("%s=%s status %d\n", param.c_str(), vals[i].c_str(), s.runs[i].status);
    if (!s.runs[i].error.empty()) std::fprintf(stderr, "  %s\n", s.runs[i].error.c_str());
  }
  std::printf("wrote %s/sweep.csv\n", dir.c_str());
  return s.status;
}
