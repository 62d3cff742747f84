#pragma once

#include <map>
#include <string>
#include <vector>

#include "irqm/config.hpp"

namespace irqm {

struct CheckResult {
  std::string name;
  bool pass = false;
  double value = 0.0;
  double limit = 0.0;
};

struct Table {
  std::vector<std::string> columns;
  std::vector<std::vector<double>> rows;
};

struct RunResult {
  int status = 0;
  std::string error;
  std::string out_dir;
  double wall_time = 0.0;
  Table table;
  std::vector<CheckResult> checks;
  std::map<std::string, double> headline;
};

// output directory after applying IRQM_OUTPUT_ROOT to relative paths
std::string resolve_output(const std::string& dir);
void write_atomic(const std::string& path, const std::string& content);
std::string format_csv(const Table& t);

// runs one experiment; writes results.csv, manifest.json and plot.gp into out_dir
RunResult run_experiment(const ExperimentConfig& cfg, const std::string& out_dir);

struct SweepResult {
  int status = 0;
  std::vector<RunResult> runs;
  Table table;
};
SweepResult run_sweep(const ExperimentConfig& cfg, const std::string& param, const std::vector<std::string>& values,
                      const std::string& out_dir);

}  // namespace irqm
