#pragma once

#include <map>
#include <string>
#include <vector>

#include "irqm/friedrichs.hpp"

namespace irqm {

// Flat "key = value" text.  Keys are dotted (model.lambda, numeric.samples, ...),
// '#' starts a comment, blank lines are ignored.  Every key has a default and
// unknown keys are rejected.
struct ExperimentConfig {
  std::map<std::string, std::string> values;

  std::string str(const std::string& key) const;
  double num(const std::string& key) const;
  int integer(const std::string& key) const;
  bool flag(const std::string& key) const;
  std::vector<double> list(const std::string& key) const;

  // sets a key after checking it is declared and the value parses
  void set(const std::string& key, const std::string& value);
  std::string experiment() const { return str("experiment"); }
};

const std::map<std::string, std::string>& config_defaults();
const std::vector<std::string>& experiment_names();
// fields that sweep accepts, mapped to config keys
std::string sweep_key(const std::string& param);

ExperimentConfig default_config();
ExperimentConfig parse_config(const std::string& text);
ExperimentConfig load_config(const std::string& path);
// checks ranges and cross-field consistency
void validate(const ExperimentConfig& c);
FriedrichsModel model_from(const ExperimentConfig& c);
// the resolved config in the same text grammar, keys sorted
std::string render(const ExperimentConfig& c);

}  // namespace irqm
