#include "irqm/runner.hpp"

#include <json.hpp>

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <thread>

#include "irqm/entropy.hpp"
#include "irqm/liouville.hpp"
#include "irqm/oracle.hpp"
#include "irqm/spectral.hpp"
#include "irqm/thermal.hpp"
#include "irqm/wigner.hpp"

namespace fs = std::filesystem;

namespace irqm {

std::string resolve_output(const std::string& dir) {
  fs::path p(dir);
  const char* root = std::getenv("IRQM_OUTPUT_ROOT");
  if (root && *root && p.is_relative()) p = fs::path(root) / p;
  return p.string();
}

void write_atomic(const std::string& path, const std::string& content) {
  fs::path target(path);
  fs::path tmp = target;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(ErrorKind::config, "cannot write " + tmp.string());
    out << content;
    if (!out) throw Error(ErrorKind::config, "write failed: " + tmp.string());
  }
  fs::rename(tmp, target);
}

namespace {

std::string fmt(double x) {
  if (std::isnan(x)) return "";
  char b[40];
  std::snprintf(b, sizeof b, "%.12e", x);
  return b;
}

}  // namespace

std::string format_csv(const Table& t) {
  std::string s;
  for (size_t i = 0; i < t.columns.size(); ++i) s += (i ? "," : "") + t.columns[i];
  s += "\n";
  for (auto& r : t.rows) {
    for (size_t i = 0; i < r.size(); ++i) s += (i ? "," : "") + fmt(r[i]);
    s += "\n";
  }
  return s;
}

namespace {

struct Output {
  Table table;
  std::vector<CheckResult> checks;
  std::map<std::string, double> headline;
  std::string plot;
};

void check(Output& o, const std::string& name, bool pass, double value, double limit) {
  o.checks.push_back({name, pass, value, limit});
}

FriedrichsModel single(const ExperimentConfig& c) {
  FriedrichsModel m = model_from(c);
  if (m.n_levels() != 1) throw Error(ErrorKind::config, c.experiment() + " needs exactly one discrete level");
  return m;
}

PoleOptions pole_options(const ExperimentConfig& c) {
  PoleOptions o;
  o.tol = c.num("numeric.pole_tol");
  return o;
}

double horizon(const ExperimentConfig& c, double gamma) {
  return gamma > 0 ? c.num("numeric.t_max_gamma") / gamma : c.num("numeric.t_max");
}

std::vector<double> time_grid(const ExperimentConfig& c, double t_max) {
  return linspace(0.0, t_max, c.integer("numeric.samples") + 1);
}

GamowState expand(const ExperimentConfig& c, const FriedrichsModel& m, double t_max, bool real_grid = true) {
  ExpandOptions o;
  o.real_grid = real_grid;
  o.panel_nodes = c.integer("numeric.panel_nodes");
  o.t_max = t_max;
  o.reconstruction_tol = c.num("numeric.reconstruction_tol");
  return expand_in_gamow(m, bare_level(), o);
}

// least-squares decay rate of y over the samples with t in [a, b] and y > 0
double fitted_rate(const std::vector<double>& t, const std::vector<double>& y, double a, double b) {
  std::vector<double> x, ly;
  for (size_t i = 0; i < t.size(); ++i)
    if (t[i] >= a && t[i] <= b && y[i] > 0) {
      x.push_back(t[i]);
      ly.push_back(std::log(y[i]));
    }
  if (x.size() < 3) return NAN;
  return -fit_slope(x, ly);
}

std::string line_plot(const std::string& title, const std::vector<int>& ycols, bool logy) {
  std::string s = "set datafile separator ','\nset key autotitle columnhead\nset title '" + title + "'\n";
  if (logy) s += "set logscale y\n";
  s += "plot ";
  for (size_t i = 0; i < ycols.size(); ++i)
    s += (i ? ", " : "") + std::string("'results.csv' using 1:") + std::to_string(ycols[i]) + " with lines";
  return s + "\n";
}

// ---- experiments -------------------------------------------------------------

Output poles(const ExperimentConfig& c) {
  FriedrichsModel m = model_from(c);
  auto ps = find_all_poles(m, pole_options(c));
  Output o;
  o.table.columns = {"level", "re_z", "im_z", "gamma", "golden_rule", "norm_re", "norm_im", "residual", "iterations"};
  for (auto& p : ps) {
    double s = m.scales[p.level];
    double gr = 2 * pi * m.lambda * m.lambda * s * s * m.ff.f2(m.levels[p.level]);
    o.table.rows.push_back({(double)p.level, p.pole.real(), p.pole.imag(), p.gamma, gr, p.norm.real(), p.norm.imag(),
                            p.residual, (double)p.iterations});
    check(o, "pole_residual_" + std::to_string(p.level), p.residual < 1e-8, p.residual, 1e-8);
    if (m.lambda > 0 && m.lambda <= 0.1) {
      double rel = std::abs(p.gamma / gr - 1);
      check(o, "golden_rule_" + std::to_string(p.level), rel < 0.05, rel, 0.05);
    }
  }
  o.headline["z0_re"] = ps.at(0).pole.real();
  o.headline["z0_im"] = ps.at(0).pole.imag();
  o.headline["gamma"] = ps.at(0).gamma;
  o.plot = "set datafile separator ','\nset key autotitle columnhead\nset xlabel 'Re z'\nset ylabel 'Im z'\n"
           "plot 'results.csv' using 2:3 with points pt 7\n";
  return o;
}

Output survival(const ExperimentConfig& c, bool oracle) {
  FriedrichsModel m = single(c);
  auto pole = find_pole(m, std::nullopt, 0, pole_options(c));
  double gamma = pole.gamma;
  double T = horizon(c, gamma);
  auto g = expand(c, m, T, false);
  auto ts = time_grid(c, T);
  auto curve = survival_probability(g, ts);

  Output o;
  o.table.columns = {"t", "p", "p_pole", "p_background", "one_minus_p"};
  std::vector<double> po;
  if (oracle) {
    o.table.columns.push_back("p_oracle");
    auto h = discretize(m, c.integer("numeric.oracle_n"));
    Eigen::VectorXcd lv = Eigen::VectorXcd::Ones(1);
    auto psi0 = oracle_state(h, lv, [](double) { return 0.0; });
    for (auto a : survival_amplitude(h, psi0, ts)) po.push_back(std::norm(a));
  }
  double sup = 0.0;
  for (size_t i = 0; i < ts.size(); ++i) {
    std::vector<double> r = {ts[i], curve.p[i], curve.p_pole[i], curve.p_background[i], curve.one_minus_p[i]};
    if (oracle) {
      r.push_back(po[i]);
      sup = std::max(sup, std::abs(po[i] - curve.p[i]));
    }
    o.table.rows.push_back(r);
  }
  o.headline["gamma"] = gamma;
  check(o, "initial_probability", std::abs(curve.p[0] - 1) < 1e-10, std::abs(curve.p[0] - 1), 1e-10);
  if (gamma > 0) {
    double fit = fitted_rate(ts, curve.p, 5 / gamma, std::min(15 / gamma, T));
    if (std::isnan(fit)) fit = fitted_rate(ts, curve.p, T / 3, T);
    o.headline["fitted_rate"] = fit;
    double gr = 2 * pi * m.lambda * m.lambda * m.scales[0] * m.scales[0] * m.ff.f2(m.levels[0]);
    o.headline["golden_rule"] = gr;
    check(o, "fitted_rate_vs_pole", std::abs(fit / gamma - 1) < 0.01, std::abs(fit / gamma - 1), 0.01);

    std::vector<double> tz, lz, pz;
    for (int k = 0; k <= 10; ++k) tz.push_back(1e-3 * std::pow(10.0, k / 10.0));
    auto zc = survival_probability(g, tz);
    for (size_t i = 0; i < tz.size(); ++i) {
      pz.push_back(std::log(tz[i]));
      lz.push_back(std::log(zc.one_minus_p[i]));
    }
    double zeno = fit_slope(pz, lz);
    o.headline["zeno_slope"] = zeno;
    check(o, "zeno_slope", std::abs(zeno - 2) < 0.05, zeno, 2.0);

    auto kh = khalfin_crossover(curve);
    o.headline["t_star"] = kh.t_star;
  }
  if (oracle) {
    o.headline["oracle_error"] = sup;
    check(o, "oracle_sup_error", sup < 1e-3, sup, 1e-3);
  }
  o.plot = line_plot("survival probability", oracle ? std::vector<int>{2, 3, 6} : std::vector<int>{2, 3}, true);
  return o;
}

Output oracle_compare(const ExperimentConfig& c) {
  FriedrichsModel m = single(c);
  auto pole = find_pole(m, std::nullopt, 0, pole_options(c));
  double T = horizon(c, pole.gamma);
  auto g = expand(c, m, T, false);
  auto ts = time_grid(c, T);
  auto curve = survival_probability(g, ts);
  auto h = discretize(m, c.integer("numeric.oracle_n"));
  Eigen::VectorXcd lv = Eigen::VectorXcd::Ones(1);
  auto psi0 = oracle_state(h, lv, [](double) { return 0.0; });
  auto amp = survival_amplitude(h, psi0, ts);
  Output o;
  o.table.columns = {"t", "p_rigged", "p_oracle", "diff"};
  double sup = 0.0;
  for (size_t i = 0; i < ts.size(); ++i) {
    double po = std::norm(amp[i]);
    sup = std::max(sup, std::abs(po - curve.p[i]));
    o.table.rows.push_back({ts[i], curve.p[i], po, po - curve.p[i]});
  }
  o.headline["gamma"] = pole.gamma;
  o.headline["oracle_error"] = sup;
  o.headline["eigen_residual"] = h.residual();
  check(o, "oracle_sup_error", sup < 1e-3, sup, 1e-3);
  check(o, "eigen_residual", h.residual() < 1e-10, h.residual(), 1e-10);
  o.plot = line_plot("rigged engine against the discretised oracle", {2, 3}, true);
  return o;
}

// probe observable used by the decoherence run: 1/(1+H^2) plus the projector on the bare level
Observable probe(const LiouvilleState& r, const GamowState& g0) {
  Eigen::VectorXcd cont(r.size());
  for (int k = 0; k < r.size(); ++k) cont(k) = g0.psi_plus[k];
  cplx b = r.has_bound ? g0.raw.alpha : cplx(0.0);
  return sum(spectral_observable(r, [](double e) { return 1.0 / (1.0 + e * e); }), projector_observable(r, b, cont));
}

Output decoherence(const ExperimentConfig& c, bool oracle) {
  FriedrichsModel m = single(c);
  auto pole = find_pole(m, std::nullopt, 0, pole_options(c));
  double T = horizon(c, pole.gamma);
  auto g = expand(c, m, T);
  auto r = from_pure(g);
  auto ts = time_grid(c, T);
  Observable a = probe(r, g);
  auto parts = equilibrium_parts(r, 0.0);
  double astar = expectation(parts.rho_star, a);

  Output o;
  o.table.columns = {"t", "ghost_mass", "block_norm", "probe", "probe_star", "gap"};
  std::vector<double> oracle_probe;
  if (oracle) {
    o.table.columns.push_back("probe_oracle");
    auto h = discretize(m, c.integer("numeric.oracle_n"));
    Eigen::VectorXcd lv = Eigen::VectorXcd::Ones(1);
    auto psi0 = oracle_state(h, lv, [](double) { return 0.0; });
    auto amp = survival_amplitude(h, psi0, ts);
    auto cz = to_eigenbasis(h, psi0);
    double diag = 0.0;
    for (int j = 0; j < h.dim(); ++j) diag += std::norm(cz[j]) / (1.0 + h.energies[j] * h.energies[j]);
    for (auto x : amp) oracle_probe.push_back(diag + std::norm(x));
  }
  std::vector<double> norms;
  auto prof = decoherence_profile(r, ts);
  for (size_t i = 0; i < ts.size(); ++i) {
    auto e = evolve(r, ts[i]);
    double v = expectation(e, a);
    norms.push_back(pole_block_norm(e));
    std::vector<double> row = {ts[i], prof.mass[i], norms.back(), v, astar, std::abs(v - astar)};
    if (oracle) row.push_back(oracle_probe[i]);
    o.table.rows.push_back(row);
  }
  o.headline["gamma"] = pole.gamma;
  o.headline["gamma_min"] = parts.gamma_min;
  if (!parts.no_ghosts) {
    double fit = fitted_rate(ts, norms, 0.0, T);
    o.headline["fitted_rate"] = fit;
    check(o, "block_decay_rate", std::abs(fit / parts.gamma_min - 1) < 0.01, fit, parts.gamma_min);
    if (T >= 20 / pole.gamma * (1 - 1e-12)) {
      double gap = oracle ? std::abs(oracle_probe.back() - astar) : o.table.rows.back()[5];
      o.headline["final_gap"] = gap;
      check(o, oracle ? "oracle_probe_gap" : "probe_gap", gap < 1e-3, gap, 1e-3);
    }
  }
  o.plot = line_plot("decoherence", {2, 3}, true);
  return o;
}

Output lyapunov(const ExperimentConfig& c) {
  FriedrichsModel m = single(c);
  auto pole = find_pole(m, std::nullopt, 0, pole_options(c));
  double T = horizon(c, pole.gamma);
  auto g = expand(c, m, T);
  auto r = from_pure(g);
  auto ts = time_grid(c, T);
  auto H = energy_observable(r);
  auto ly = lyapunov_Y(r, ts);
  Output o;
  o.table.columns = {"t", "trace", "energy", "Y", "Ydot", "Y_linear"};
  double e0 = expectation(r, H), tr_err = 0, e_err = 0;
  bool ydot_pos = true, y_up = true, yl_up = true;
  bool ghosts = r.ghost_block.size() > 0 && !r.ghost_block.isZero(0.0);
  for (size_t i = 0; i < ts.size(); ++i) {
    auto e = evolve(r, ts[i]);
    double tr = generalized_trace(e).real();
    double en = expectation(e, H);
    tr_err = std::max(tr_err, std::abs(tr - 1));
    e_err = std::max(e_err, std::abs(en - e0));
    if (ghosts && !(ly.ydot[i] > 0)) ydot_pos = false;
    if (i > 0 && ly.y[i] < ly.y[i - 1]) y_up = false;
    if (i > 0 && ly.y_linear[i] < ly.y_linear[i - 1]) yl_up = false;
    o.table.rows.push_back({ts[i], tr, en, ly.y[i], ly.ydot[i], ly.y_linear[i]});
  }
  o.headline["gamma"] = pole.gamma;
  o.headline["trace_error"] = tr_err;
  o.headline["energy_drift"] = e_err;
  check(o, "trace_conserved", tr_err < 1e-10, tr_err, 1e-10);
  check(o, "energy_conserved", e_err < 1e-8, e_err, 1e-8);
  check(o, "Ydot_positive", ydot_pos, ghosts ? 1.0 : 0.0, 0.0);
  check(o, "Y_nondecreasing", y_up, 0.0, 0.0);
  check(o, "Y_linear_nondecreasing", yl_up, 0.0, 0.0);
  o.plot = line_plot("Lyapunov variables", {4, 6}, false);
  return o;
}

Output entropy(const ExperimentConfig& c) {
  FriedrichsModel m = single(c);
  auto pole = find_pole(m, std::nullopt, 0, pole_options(c));
  double T = horizon(c, pole.gamma);
  auto g = expand(c, m, T);
  LiouvilleState r = from_pure(g);
  if (c.str("state.initial") == "equilibrium") r = equilibrium_parts(r, 0.0).rho_star;
  auto star = equilibrium_parts(r, 0.0).rho_star;
  auto ts = time_grid(c, T);
  Output o;
  o.table.columns = {"t", "S", "neglected"};
  EntropyCurve curve;
  if (slot_count(r) == 0) {
    curve.t = ts;
    curve.s.assign(ts.size(), 0.0);
    curve.neglected.assign(ts.size(), 0.0);
  } else {
    auto proj = build_projector(slot_count(r), c.str("entropy.projector"));
    curve = conditional_entropy(r, star, proj, ts);
  }
  for (size_t i = 0; i < ts.size(); ++i) o.table.rows.push_back({ts[i], curve.s[i], curve.neglected[i]});
  bool nonpos = std::all_of(curve.s.begin(), curve.s.end(), [](double s) { return s <= 0; });
  check(o, "S_nonpositive", nonpos, 0.0, 0.0);
  o.headline["gamma_min"] = curve.gamma_min;
  if (curve.gamma_min > 0) {
    double a = 3 / curve.gamma_min, b = 10 / curve.gamma_min;
    bool up = true;
    std::vector<double> neg;
    for (size_t i = 0; i < ts.size(); ++i) {
      neg.push_back(-curve.s[i]);
      if (i > 0 && ts[i - 1] >= a && ts[i] <= b && curve.s[i] < curve.s[i - 1]) up = false;
    }
    check(o, "S_nondecreasing", up, 0.0, 0.0);
    double rate = fitted_rate(ts, neg, a, std::min(b, T));
    if (!std::isnan(rate)) {
      o.headline["entropy_slope"] = rate / (2 * curve.gamma_min);
      check(o, "entropy_exponent", std::abs(rate / (2 * curve.gamma_min) - 1) < 0.02, rate, 2 * curve.gamma_min);
    }
  } else {
    double worst = 0;
    for (double s : curve.s) worst = std::max(worst, std::abs(s));
    check(o, "S_identically_zero", worst == 0.0, worst, 0.0);
  }
  o.plot = line_plot("conditional entropy", {2}, false);
  return o;
}

Output wigner(const ExperimentConfig& c) {
  int n = c.integer("wigner.n");
  double L = c.num("wigner.q_max");
  double q0 = -L, dq = 2 * L / (n - 1);
  auto coherent = [&](double qc, double pc, int excited) {
    Eigen::VectorXcd v(n);
    for (int a = 0; a < n; ++a) {
      double q = q0 + a * dq - qc;
      double amp = std::pow(pi, -0.25) * std::exp(-q * q / 2) * (excited ? std::sqrt(2.0) * q : 1.0);
      v(a) = amp * std::exp(I * pc * (q0 + a * dq));
    }
    return v;
  };
  Eigen::MatrixXcd rho = Eigen::MatrixXcd::Zero(n, n);
  std::string st = c.str("wigner.state");
  if (st == "ground" || st == "excited") {
    auto v = coherent(0, 0, st == "excited");
    rho = v * v.adjoint();
  } else {
    const double mix[3][3] = {{-2.0, 0.5, 0.3}, {1.0, -1.0, 0.5}, {2.5, 1.0, 0.2}};
    for (auto& x : mix) {
      auto v = coherent(x[0], x[1], 0);
      rho += x[2] * v * v.adjoint();
    }
  }
  auto w = wigner_transform(rho, q0, dq);
  double tr = rho.trace().real() * dq;
  double terr = std::abs(integrate(w) - tr);
  auto pz = principal_zone(w);
  Output o;
  o.table.columns = {"q", "p", "W"};
  for (int r = 0; r < pz.rows(); ++r)
    for (int k = 0; k < pz.cols(); ++k) o.table.rows.push_back({pz.q(r), pz.p(k), pz.values(r, k).real()});
  o.headline["trace_error"] = terr;
  o.headline["min_w"] = min_real(pz);
  check(o, "trace_correspondence", terr < 1e-8, terr, 1e-8);
  if (st != "excited") check(o, "positivity", min_real(pz) > -1e-6, min_real(pz), -1e-6);
  o.plot = "set datafile separator ','\nset key autotitle columnhead\nset pm3d map\n"
           "splot 'results.csv' using 1:2:3 with pm3d\n";
  return o;
}

Output thermal(const ExperimentConfig& c) {
  FriedrichsModel m = model_from(c);
  auto pops = c.list("thermal.populations");
  if ((int)pops.size() != m.n_levels()) throw Error(ErrorKind::config, "thermal.populations needs one entry per level");
  Eigen::MatrixXcd d = Eigen::MatrixXcd::Zero(m.n_levels(), m.n_levels());
  for (int n = 0; n < m.n_levels(); ++n) d(n, n) = pops[n];
  double beta = c.num("thermal.beta");
  auto bath = make_bath(beta, d, m.omega_max);
  ThermalGrid tg;
  tg.fine_cells = c.integer("thermal.fine_cells");
  tg.coarse_cells = c.integer("thermal.coarse_cells");
  auto h = thermal_oracle(m, tg);
  double gmax = 0;
  for (int n = 0; n < m.n_levels(); ++n)
    gmax = std::max(gmax, 2 * pi * m.lambda * m.lambda * m.scales[n] * m.scales[n] * m.ff.f2(m.levels[n]));
  double T = horizon(c, gmax);
  auto ts = linspace(0.0, T, c.integer("thermal.samples") + 1);
  Output o;
  o.table.columns = {"t"};
  for (int n = 0; n < m.n_levels(); ++n) o.table.columns.push_back("rho_" + std::to_string(n));
  for (int n = 0; n < m.n_levels(); ++n) o.table.columns.push_back("gibbs_" + std::to_string(n));
  Eigen::MatrixXcd last;
  for (double t : ts) {
    last = reduced_oscillator_state(h, bath, t);
    std::vector<double> row = {t};
    for (int n = 0; n < m.n_levels(); ++n) row.push_back(last(n, n).real());
    for (int n = 0; n < m.n_levels(); ++n) row.push_back(bath.z * std::exp(-beta * m.levels[n]));
    o.table.rows.push_back(row);
  }
  double nres = std::abs(bath_normalization_residual(bath));
  check(o, "bath_normalization", nres < 1e-10, nres, 1e-10);
  o.headline["gamma"] = gmax;
  if (m.n_levels() >= 2) {
    double ratio = last(1, 1).real() / last(0, 0).real();
    double target = std::exp(-beta * (m.levels[1] - m.levels[0]));
    double rel = std::abs(ratio / target - 1);
    o.headline["population_ratio"] = ratio;
    o.headline["gibbs_ratio"] = target;
    if (m.lambda > 0 && m.lambda <= 0.05 && T >= 30 / gmax * (1 - 1e-12))
      check(o, "gibbs_ratio", rel < 0.05, rel, 0.05);
  }
  if (m.lambda == 0.0) {
    double drift = std::abs(last.trace().real() - d.trace().real());
    check(o, "discrete_trace_constant", drift < 1e-8, drift, 1e-8);
  }
  std::vector<int> cols;
  for (int n = 0; n < m.n_levels(); ++n) cols.push_back(2 + n);
  o.plot = line_plot("level populations", cols, false);
  return o;
}

Output dispatch(const ExperimentConfig& c) {
  std::string e = c.experiment();
  bool oracle = c.flag("numeric.oracle");
  if (e == "poles") return poles(c);
  if (e == "survival") return survival(c, oracle);
  if (e == "decoherence") return decoherence(c, oracle);
  if (e == "lyapunov") return lyapunov(c);
  if (e == "entropy") return entropy(c);
  if (e == "wigner") return wigner(c);
  if (e == "thermal") return thermal(c);
  if (e == "oracle-compare") return oracle_compare(c);
  throw Error(ErrorKind::config, "unknown experiment: " + e);
}

nlohmann::ordered_json manifest_of(const ExperimentConfig& c, const RunResult& r) {
  nlohmann::ordered_json j;
  j["experiment"] = c.experiment();
  nlohmann::ordered_json cfg;
  for (auto& [k, v] : c.values) cfg[k] = v;
  j["config"] = cfg;
  j["config_text"] = render(c);
  j["tolerances"] = {{"model.quad_tol", c.num("model.quad_tol")},
                     {"numeric.pole_tol", c.num("numeric.pole_tol")},
                     {"numeric.reconstruction_tol", c.num("numeric.reconstruction_tol")}};
  j["status"] = r.status;
  if (!r.error.empty()) j["error"] = r.error;
  nlohmann::ordered_json checks = nlohmann::ordered_json::array();
  for (auto& ch : r.checks)
    checks.push_back({{"name", ch.name}, {"pass", ch.pass}, {"value", ch.value}, {"limit", ch.limit}});
  j["checks"] = checks;
  nlohmann::ordered_json head;
  for (auto& [k, v] : r.headline) head[k] = std::isnan(v) ? nlohmann::ordered_json(nullptr) : nlohmann::ordered_json(v);
  j["headline"] = head;
  j["columns"] = r.table.columns;
  j["files"] = {"results.csv", "plot.gp"};
  j["wall_time_s"] = r.wall_time;
  return j;
}

}  // namespace

RunResult run_experiment(const ExperimentConfig& cfg, const std::string& out_dir) {
  auto t0 = std::chrono::steady_clock::now();
  RunResult r;
  r.out_dir = out_dir;
  Output o;
  try {
    validate(cfg);
    o = dispatch(cfg);
    r.table = o.table;
    r.checks = o.checks;
    r.headline = o.headline;
    for (auto& ch : r.checks)
      if (!ch.pass) {
        r.status = exit_code(ErrorKind::invariant);
        r.error += (r.error.empty() ? "failed check: " : ", ") + ch.name;
      }
  } catch (const Error& e) {
    r.status = exit_code(e.kind());
    r.error = std::string(kind_name(e.kind())) + ": " + e.what();
  } catch (const std::exception& e) {
    r.status = 3;
    r.error = e.what();
  }
  r.wall_time = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

  fs::create_directories(out_dir);
  if (r.status == 0 || !r.table.columns.empty()) {
    write_atomic((fs::path(out_dir) / "results.csv").string(), format_csv(r.table));
    write_atomic((fs::path(out_dir) / "plot.gp").string(), o.plot);
  }
  write_atomic((fs::path(out_dir) / "manifest.json").string(), manifest_of(cfg, r).dump(2) + "\n");
  return r;
}

SweepResult run_sweep(const ExperimentConfig& cfg, const std::string& param, const std::vector<std::string>& values,
                      const std::string& out_dir) {
  std::string key = sweep_key(param);
  if (values.empty()) throw Error(ErrorKind::config, "sweep needs at least one value");
  std::vector<ExperimentConfig> cfgs;
  for (auto& v : values) {
    ExperimentConfig c = cfg;
    if (key == "model.levels") {
      auto lv = c.list(key);
      std::string s = v;
      for (size_t i = 1; i < lv.size(); ++i) s += "," + fmt(lv[i]);
      c.set(key, s);
    } else {
      c.set(key, v);
    }
    validate(c);
    cfgs.push_back(c);
  }

  SweepResult out;
  out.runs.resize(cfgs.size());
  std::atomic<size_t> next{0};
  int workers = std::max(1, std::min<int>(cfg.integer("run.workers"), (int)cfgs.size()));
  auto work = [&] {
    for (size_t i = next++; i < cfgs.size(); i = next++)
      out.runs[i] = run_experiment(cfgs[i], (fs::path(out_dir) / (param + "=" + values[i])).string());
  };
  std::vector<std::thread> pool;
  for (int w = 0; w < workers; ++w) pool.emplace_back(work);
  for (auto& t : pool) t.join();

  const std::vector<std::string> heads = {"gamma", "gamma_min", "fitted_rate", "entropy_slope", "oracle_error"};
  out.table.columns = {param, "status"};
  for (auto& h : heads) out.table.columns.push_back(h);
  for (size_t i = 0; i < cfgs.size(); ++i) {
    const auto& r = out.runs[i];
    std::vector<double> row = {cfgs[i].list(key)[0], (double)r.status};
    for (auto& h : heads) row.push_back(r.headline.count(h) ? r.headline.at(h) : NAN);
    out.table.rows.push_back(row);
    out.status = std::max(out.status, r.status);
  }
  fs::create_directories(out_dir);
  write_atomic((fs::path(out_dir) / "sweep.csv").string(), format_csv(out.table));
  return out;
}

}  // namespace irqm
