#include "irqm/config.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

namespace irqm {

const std::map<std::string, std::string>& config_defaults() {
  static const std::map<std::string, std::string> d = {
      {"experiment", "poles"},
      {"output", "out"},
      {"model.levels", "1.0"},
      {"model.scales", "1.0"},
      {"model.lambda", "0.1"},
      {"model.form", "lorentz2"},
      {"model.form_params", "1.0"},
      {"model.omega_max", "20"},
      {"model.quad_tol", "1e-10"},
      {"numeric.t_max_gamma", "15"},
      {"numeric.t_max", "100"},
      {"numeric.samples", "200"},
      {"numeric.oracle_n", "4000"},
      {"numeric.panel_nodes", "16"},
      {"numeric.reconstruction_tol", "1e-6"},
      {"numeric.pole_tol", "1e-12"},
      {"numeric.seed", "1"},
      {"numeric.oracle", "false"},
      {"state.initial", "level"},
      {"entropy.projector", "default"},
      {"thermal.beta", "1.0"},
      {"thermal.populations", "0.3,0.2"},
      {"thermal.fine_cells", "4000"},
      {"thermal.coarse_cells", "2000"},
      {"thermal.samples", "16"},
      {"wigner.state", "ground"},
      {"wigner.n", "128"},
      {"wigner.q_max", "8"},
      {"run.workers", "2"},
  };
  return d;
}

const std::vector<std::string>& experiment_names() {
  static const std::vector<std::string> n = {"poles",   "survival", "decoherence", "lyapunov",
                                             "entropy", "wigner",   "thermal",     "oracle-compare"};
  return n;
}

std::string sweep_key(const std::string& param) {
  if (param == "lambda") return "model.lambda";
  if (param == "omega0") return "model.levels";
  if (param == "beta") return "thermal.beta";
  if (param == "N") return "numeric.oracle_n";
  throw Error(ErrorKind::config, "parameter cannot be swept: " + param);
}

namespace {

std::string trim(const std::string& s) {
  size_t a = s.find_first_not_of(" \t\r");
  if (a == std::string::npos) return "";
  size_t b = s.find_last_not_of(" \t\r");
  return s.substr(a, b - a + 1);
}

double parse_double(const std::string& key, const std::string& v) {
  try {
    size_t used = 0;
    double x = std::stod(v, &used);
    if (used != v.size() || !std::isfinite(x)) throw std::invalid_argument(v);
    return x;
  } catch (const std::exception&) {
    throw Error(ErrorKind::config, key + ": not a number: '" + v + "'");
  }
}

bool is_numeric_key(const std::string& key) {
  static const std::vector<std::string> text = {"experiment", "output", "model.form", "state.initial",
                                                "entropy.projector", "wigner.state", "numeric.oracle"};
  return std::find(text.begin(), text.end(), key) == text.end();
}

}  // namespace

std::string ExperimentConfig::str(const std::string& key) const {
  auto it = values.find(key);
  if (it == values.end()) throw Error(ErrorKind::config, "unknown key: " + key);
  return it->second;
}

double ExperimentConfig::num(const std::string& key) const { return parse_double(key, str(key)); }

int ExperimentConfig::integer(const std::string& key) const {
  double x = num(key);
  if (x != std::floor(x) || std::abs(x) > 1e9) throw Error(ErrorKind::config, key + ": not an integer");
  return (int)x;
}

bool ExperimentConfig::flag(const std::string& key) const {
  std::string v = str(key);
  if (v == "true" || v == "1" || v == "yes") return true;
  if (v == "false" || v == "0" || v == "no") return false;
  throw Error(ErrorKind::config, key + ": not a boolean: '" + v + "'");
}

std::vector<double> ExperimentConfig::list(const std::string& key) const {
  std::vector<double> out;
  std::stringstream ss(str(key));
  std::string item;
  while (std::getline(ss, item, ',')) out.push_back(parse_double(key, trim(item)));
  if (out.empty()) throw Error(ErrorKind::config, key + ": empty list");
  return out;
}

void ExperimentConfig::set(const std::string& key, const std::string& value) {
  if (!config_defaults().count(key)) throw Error(ErrorKind::config, "unknown key: " + key);
  std::string v = trim(value);
  if (v.empty()) throw Error(ErrorKind::config, key + ": empty value");
  if (is_numeric_key(key)) {
    std::stringstream ss(v);
    std::string item;
    while (std::getline(ss, item, ',')) parse_double(key, trim(item));
  }
  values[key] = v;
}

ExperimentConfig default_config() {
  ExperimentConfig c;
  c.values = config_defaults();
  return c;
}

ExperimentConfig parse_config(const std::string& text) {
  ExperimentConfig c = default_config();
  std::stringstream ss(text);
  std::string line;
  int no = 0;
  while (std::getline(ss, line)) {
    ++no;
    auto hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    auto eq = line.find('=');
    if (eq == std::string::npos)
      throw Error(ErrorKind::config, "line " + std::to_string(no) + ": expected key = value");
    std::string key = trim(line.substr(0, eq));
    try {
      c.set(key, line.substr(eq + 1));
    } catch (const Error& e) {
      throw Error(ErrorKind::config, "line " + std::to_string(no) + ": " + e.what());
    }
  }
  validate(c);
  return c;
}

ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::config, "cannot read config: " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

void validate(const ExperimentConfig& c) {
  const auto& names = experiment_names();
  if (std::find(names.begin(), names.end(), c.experiment()) == names.end())
    throw Error(ErrorKind::config, "unknown experiment: " + c.experiment());
  for (const char* k : {"model.quad_tol", "numeric.reconstruction_tol", "numeric.pole_tol"})
    if (!(c.num(k) > 0)) throw Error(ErrorKind::config, std::string(k) + " must be positive");
  for (const char* k : {"numeric.t_max_gamma", "numeric.t_max", "model.omega_max", "thermal.beta", "wigner.q_max"})
    if (!(c.num(k) > 0)) throw Error(ErrorKind::config, std::string(k) + " must be positive");
  if (c.integer("numeric.samples") < 2) throw Error(ErrorKind::config, "numeric.samples must be at least 2");
  if (c.integer("thermal.samples") < 1) throw Error(ErrorKind::config, "thermal.samples must be at least 1");
  if (c.integer("numeric.oracle_n") < 256) throw Error(ErrorKind::config, "numeric.oracle_n must be at least 256");
  if (c.integer("numeric.panel_nodes") < 2) throw Error(ErrorKind::config, "numeric.panel_nodes must be at least 2");
  if (c.integer("wigner.n") < 16) throw Error(ErrorKind::config, "wigner.n must be at least 16");
  if (c.integer("run.workers") < 1) throw Error(ErrorKind::config, "run.workers must be at least 1");
  if (c.integer("thermal.fine_cells") < 16 || c.integer("thermal.coarse_cells") < 16)
    throw Error(ErrorKind::config, "thermal cell counts must be at least 16");
  c.flag("numeric.oracle");
  for (const char* k : {"state.initial"}) {
    std::string v = c.str(k);
    if (v != "level" && v != "equilibrium") throw Error(ErrorKind::config, "state.initial must be level or equilibrium");
  }
  std::string p = c.str("entropy.projector");
  if (p != "default" && p != "half" && p != "rank1" && p != "naive")
    throw Error(ErrorKind::config, "unknown entropy.projector: " + p);
  std::string w = c.str("wigner.state");
  if (w != "ground" && w != "excited" && w != "mixture") throw Error(ErrorKind::config, "unknown wigner.state: " + w);
  if (c.list("model.levels").size() != c.list("model.scales").size())
    throw Error(ErrorKind::config, "model.levels and model.scales differ in length");
  try {
    validate(model_from(c));
  } catch (const Error& e) {
    throw Error(ErrorKind::config, std::string("model: ") + e.what());
  }
}

FriedrichsModel model_from(const ExperimentConfig& c) {
  FriedrichsModel m;
  m.levels = c.list("model.levels");
  m.scales = c.list("model.scales");
  m.lambda = c.num("model.lambda");
  m.ff = make_form_factor(c.str("model.form"), c.list("model.form_params"));
  m.omega_max = c.num("model.omega_max");
  m.quad_tol = c.num("model.quad_tol");
  return m;
}

std::string render(const ExperimentConfig& c) {
  std::string out;
  for (auto& [k, v] : c.values) out += k + " = " + v + "\n";
  return out;
}

}  // namespace irqm
