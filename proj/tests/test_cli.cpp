#include <doctest.h>

#include <json.hpp>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <sys/wait.h>
#include <unistd.h>

#include "irqm/config.hpp"
#include "irqm/runner.hpp"
#include "support.hpp"

using namespace irqm;
namespace fs = std::filesystem;

namespace {

fs::path scratch() {
  static fs::path dir = [] {
    fs::path d = fs::temp_directory_path() / ("irqm_cli_test_" + std::to_string(getpid()));
    fs::remove_all(d);
    fs::create_directories(d);
    return d;
  }();
  return dir;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// column of a CSV by name
std::vector<double> column(const std::string& csv, const std::string& name) {
  std::stringstream ss(csv);
  std::string line, cell;
  std::getline(ss, line);
  std::stringstream head(line);
  int idx = -1, i = 0;
  while (std::getline(head, cell, ',')) {
    if (cell == name) idx = i;
    ++i;
  }
  REQUIRE(idx >= 0);
  std::vector<double> out;
  while (std::getline(ss, line)) {
    std::stringstream row(line);
    for (int k = 0; k <= idx; ++k) std::getline(row, cell, ',');
    out.push_back(cell.empty() ? NAN : std::stod(cell));
  }
  return out;
}

fs::path write_cfg(const std::string& name, const std::string& text) {
  fs::path p = scratch() / name;
  std::ofstream(p) << text;
  return p;
}

int run_cli(const std::string& args) {
  std::string cmd = std::string(IRQM_CLI_PATH) + " " + args + " > /dev/null 2>&1";
  int rc = std::system(cmd.c_str());
  return WIFEXITED(rc) ? WEXITSTATUS(rc) : -1;
}

}  // namespace

TEST_CASE("config grammar") {
  auto c = parse_config("# comment\nexperiment = survival   # trailing\n\nmodel.lambda = 0.3\n");
  CHECK(c.experiment() == "survival");
  CHECK(c.num("model.lambda") == 0.3);
  CHECK(c.num("model.omega_max") == 20.0);
  auto again = parse_config(render(c));
  CHECK(again.values == c.values);

  try {
    parse_config("experiment = poles\nmodel.lamda = 0.1\n");
    FAIL("expected an unknown key error");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::config);
    CHECK(std::string(e.what()).find("line 2") != std::string::npos);
  }
  CHECK_THROWS_AS(parse_config("model.lambda = abc\n"), Error);
  CHECK_THROWS_AS(parse_config("model.quad_tol = 0\n"), Error);
  CHECK_THROWS_AS(parse_config("numeric.pole_tol = -1e-3\n"), Error);
  CHECK_THROWS_AS(parse_config("experiment = nothing\n"), Error);
  CHECK_THROWS_AS(parse_config("just words\n"), Error);
  CHECK(sweep_key("lambda") == "model.lambda");
  CHECK(sweep_key("N") == "numeric.oracle_n");
  CHECK_THROWS_AS(sweep_key("gamma"), Error);
}

TEST_CASE("poles run without coupling") {
  auto r = run_experiment(parse_config("experiment = poles\nmodel.lambda = 0\n"), (scratch() / "p0").string());
  CHECK(r.status == 0);
  auto j = nlohmann::json::parse(slurp(scratch() / "p0" / "manifest.json"));
  CHECK(j["headline"]["z0_re"].get<double>() == 1.0);
  CHECK(j["headline"]["z0_im"].get<double>() == 0.0);
  CHECK(j["headline"]["gamma"].get<double>() == 0.0);
  CHECK(j["config"]["model.lambda"] == "0");
  CHECK(fs::exists(scratch() / "p0" / "plot.gp"));
  for (auto& e : fs::directory_iterator(scratch() / "p0")) CHECK(e.path().extension() != ".tmp");
}

TEST_CASE("survival run recovers the golden rule rate") {
  auto r = run_experiment(parse_config("experiment = survival\nmodel.lambda = 0.1\n"), (scratch() / "s").string());
  CHECK(r.status == 0);
  CHECK(std::abs(r.headline.at("fitted_rate") / 0.0157 - 1) < 0.05);
  auto p = column(slurp(scratch() / "s" / "results.csv"), "p");
  CHECK(p.front() == doctest::Approx(1.0));
}

TEST_CASE("entropy at equilibrium is zero") {
  auto r = run_experiment(parse_config("experiment = entropy\nstate.initial = equilibrium\n"),
                          (scratch() / "eq").string());
  CHECK(r.status == 0);
  for (double s : column(slurp(scratch() / "eq" / "results.csv"), "S")) CHECK(s == 0.0);
}

TEST_CASE("identical configs give identical bytes and the manifest reproduces the run") {
  std::string text = "experiment = decoherence\nmodel.lambda = 0.3\nnumeric.samples = 40\n";
  run_experiment(parse_config(text), (scratch() / "d1").string());
  run_experiment(parse_config(text), (scratch() / "d2").string());
  std::string a = slurp(scratch() / "d1" / "results.csv");
  CHECK(!a.empty());
  CHECK(a == slurp(scratch() / "d2" / "results.csv"));
  auto j = nlohmann::json::parse(slurp(scratch() / "d1" / "manifest.json"));
  run_experiment(parse_config(j["config_text"].get<std::string>()), (scratch() / "d3").string());
  CHECK(a == slurp(scratch() / "d3" / "results.csv"));
}

TEST_CASE("sweeps") {
  auto base = parse_config("experiment = poles\n");
  auto zero = run_sweep(base, "lambda", {"0"}, (scratch() / "sw0").string());
  CHECK(zero.table.rows[0][2] == 0.0);

  auto sw = run_sweep(base, "lambda", {"0.02", "0.01", "0.005"}, (scratch() / "sw").string());
  CHECK(sw.status == 0);
  double target = 2 * pi * 0.25;
  std::vector<double> dev;
  for (auto& row : sw.table.rows) dev.push_back(std::abs(row[2] / (row[0] * row[0]) - target));
  CHECK(dev[1] < dev[0]);
  CHECK(dev[2] < dev[1]);
  CHECK(dev[2] / target < 1e-4);
  std::string csv = slurp(scratch() / "sw" / "sweep.csv");
  CHECK(csv.find("lambda,status,gamma,gamma_min,fitted_rate,entropy_slope,oracle_error") == 0);
  CHECK(fs::exists(scratch() / "sw" / "lambda=0.01" / "manifest.json"));

  auto oc = parse_config("experiment = oracle-compare\nmodel.lambda = 0.3\nnumeric.t_max_gamma = 10\nrun.workers = 2\n");
  auto sn = run_sweep(oc, "N", {"1000", "2000", "4000"}, (scratch() / "swn").string());
  CHECK(sn.status == 0);
  CHECK(sn.table.rows[1][6] < sn.table.rows[0][6]);
  CHECK(sn.table.rows[2][6] < sn.table.rows[1][6]);
}

TEST_CASE("output root from the environment") {
  setenv("IRQM_OUTPUT_ROOT", (scratch() / "root").c_str(), 1);
  CHECK(resolve_output("rel") == (scratch() / "root" / "rel").string());
  CHECK(resolve_output("/abs/dir") == "/abs/dir");
  unsetenv("IRQM_OUTPUT_ROOT");
  CHECK(resolve_output("rel") == "rel");
}

TEST_CASE("exit codes of the command line tool") {
  auto ok = write_cfg("ok.cfg", "experiment = poles\n");
  auto bad_key = write_cfg("bad.cfg", "experiment = poles\nmodel.lamda = 0.1\n");
  auto failing = write_cfg("fail.cfg", "experiment = poles\nmodel.form_params = 0.5\n");
  auto numeric = write_cfg("num.cfg", "experiment = survival\nmodel.lambda = 0.02\n");
  std::string out = " --out " + (scratch() / "cli").string();
  CHECK(run_cli("run " + ok.string() + out) == 0);
  CHECK(run_cli("run " + bad_key.string() + out) == 2);
  CHECK(run_cli("run " + (scratch() / "missing.cfg").string() + out) == 2);
  CHECK(run_cli("run " + failing.string() + out) == 1);
  CHECK(run_cli("run " + numeric.string() + out) == 3);
  CHECK(run_cli("sweep " + ok.string() + " --param gamma --values 1" + out) == 2);
  CHECK(run_cli("sweep " + ok.string() + " --param lambda --values 0,0.1" + out) == 0);
  CHECK(run_cli("frobnicate") == 2);
  // the last single run left the manifest of the numeric failure
  auto j = nlohmann::json::parse(slurp(scratch() / "cli" / "manifest.json"));
  CHECK(j["status"] == 3);
  CHECK(j["error"].get<std::string>().find("resolution") == 0);
  CHECK(fs::exists(scratch() / "cli" / "sweep.csv"));
  fs::remove_all(scratch());
}
