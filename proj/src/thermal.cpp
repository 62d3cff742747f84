#include "irqm/thermal.hpp"

#include <algorithm>
#include <cmath>

namespace irqm {

ThermalBathState make_bath(double beta, const Eigen::MatrixXcd& discrete, double omega_max) {
  if (!(beta > 0)) throw Error(ErrorKind::domain, "inverse temperature must be positive");
  if (!(omega_max > 0)) throw Error(ErrorKind::domain, "omega_max must be positive");
  if (discrete.rows() != discrete.cols()) throw Error(ErrorKind::shape, "discrete block must be square");
  if ((discrete - discrete.adjoint()).cwiseAbs().maxCoeff() > 1e-12)
    throw Error(ErrorKind::hermiticity, "discrete block is not Hermitian");
  double tr = discrete.trace().real();
  if (tr > 1.0 + 1e-12 || tr < 0) throw Error(ErrorKind::state, "discrete block trace must lie in [0, 1]");
  ThermalBathState b;
  b.beta = beta;
  b.omega_max = omega_max;
  b.discrete = discrete;
  b.z = (1.0 - tr) * beta / -std::expm1(-beta * omega_max);
  return b;
}

double bath_normalization_residual(const ThermalBathState& b) {
  double bath = b.z * -std::expm1(-b.beta * b.omega_max) / b.beta;
  return b.discrete.trace().real() + bath - 1.0;
}

void thermal_nodes(const FriedrichsModel& m, const ThermalGrid& g, std::vector<double>& nodes,
                   std::vector<double>& weights) {
  // windows, merged where they overlap
  std::vector<std::pair<double, double>> win;
  for (double e : m.levels) win.push_back({std::max(0.0, e - g.half_width), std::min(m.omega_max, e + g.half_width)});
  std::sort(win.begin(), win.end());
  std::vector<std::pair<double, double>> merged;
  for (auto& w : win) {
    if (!merged.empty() && w.first <= merged.back().second)
      merged.back().second = std::max(merged.back().second, w.second);
    else
      merged.push_back(w);
  }
  double fine = 2.0 * g.half_width / g.fine_cells;
  double coarse = m.omega_max / g.coarse_cells;

  // energies of the level combinations that do not couple to the continuum
  std::vector<double> avoid(m.levels.begin(), m.levels.end());
  int nl = m.n_levels();
  if (nl > 1) {
    Eigen::VectorXd sc(nl);
    for (int n = 0; n < nl; ++n) sc[n] = m.scales[n];
    if (sc.norm() > 0) {
      Eigen::HouseholderQR<Eigen::MatrixXd> qr(sc / sc.norm());
      Eigen::MatrixXd q = qr.householderQ();
      Eigen::MatrixXd comp = q.rightCols(nl - 1);
      Eigen::VectorXd lv = Eigen::Map<const Eigen::VectorXd>(m.levels.data(), nl);
      Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(comp.transpose() * lv.asDiagonal() * comp);
      for (int i = 0; i < nl - 1; ++i) avoid.push_back(es.eigenvalues()[i]);
    }
  }
  auto collides = [&](double a, double h, int n) {
    for (double e : avoid) {
      double k = (e - a) / h - 0.5;
      if (k > -1 && k < n && std::abs(k - std::round(k)) < 1e-6) return true;
    }
    return false;
  };

  nodes.clear();
  weights.clear();
  auto cells = [&](double a, double b, double step) {
    if (b <= a) return;
    int n = std::max(1, (int)std::ceil((b - a) / step));
    while (collides(a, (b - a) / n, n)) ++n;
    double h = (b - a) / n;
    for (int k = 0; k < n; ++k) {
      nodes.push_back(a + (k + 0.5) * h);
      weights.push_back(h);
    }
  };
  double x = 0.0;
  for (auto& w : merged) {
    cells(x, w.first, coarse);
    cells(w.first, w.second, fine);
    x = w.second;
  }
  cells(x, m.omega_max, coarse);
}

DiscretizedHamiltonian thermal_oracle(const FriedrichsModel& m, const ThermalGrid& g) {
  std::vector<double> nodes, weights;
  thermal_nodes(m, g, nodes, weights);
  return discretize_grid(m, nodes, weights);
}

Eigen::MatrixXcd reduced_oscillator_state(const DiscretizedHamiltonian& h, const ThermalBathState& bath, double t) {
  if (t < 0) throw Error(ErrorKind::domain, "negative time");
  int nl = h.n_levels(), nn = h.n_nodes(), d = h.dim();
  if (bath.discrete.rows() != nl) throw Error(ErrorKind::shape, "discrete block does not match the levels");

  // amp(n, b) = <n|U(t)|b> for levels n and all basis elements b
  Eigen::MatrixXcd amp = Eigen::MatrixXcd::Zero(nl, d);
  std::vector<double> col(d);
  for (int j = 0; j < d; ++j) {
    cplx ph = std::exp(-I * h.energies[j] * t);
    for (int b = 0; b < d; ++b) col[b] = h.component(j, b);
    for (int n = 0; n < nl; ++n) {
      cplx a = ph * col[n];
      if (a == 0.0) continue;
      for (int b = 0; b < d; ++b) amp(n, b) += a * col[b];
    }
  }
  Eigen::MatrixXcd levels = amp.leftCols(nl);
  Eigen::MatrixXcd out = levels * bath.discrete * levels.adjoint();
  for (int k = 0; k < nn; ++k) {
    double g = bath.z * std::exp(-bath.beta * h.nodes[k]);
    Eigen::VectorXcd v = amp.col(nl + k);
    out += g * v * v.adjoint();
  }
  return out;
}

namespace {

double quantile(const std::vector<double>& e, const std::vector<double>& p, double q) {
  double acc = 0.0;
  for (size_t j = 0; j < e.size(); ++j) {
    if (acc + p[j] >= q) {
      // interpolate inside the step towards the next energy
      double frac = p[j] > 0 ? (q - acc) / p[j] : 0.0;
      double lo = j > 0 ? 0.5 * (e[j - 1] + e[j]) : e[j];
      double hi = j + 1 < e.size() ? 0.5 * (e[j] + e[j + 1]) : e[j];
      return lo + frac * (hi - lo);
    }
    acc += p[j];
  }
  return e.back();
}

}  // namespace

OverlapReport weak_coupling_overlap_check(const FriedrichsModel& base, const std::vector<double>& lambdas,
                                          int level, const ThermalGrid& g) {
  OverlapReport rep;
  for (double lam : lambdas) {
    FriedrichsModel m = base;
    m.lambda = lam;
    auto h = thermal_oracle(m, g);
    int nl = h.n_levels(), d = h.dim();
    double e0 = m.levels[level];

    // eigenvalues sorted, with the level's weight on each
    std::vector<int> order(d);
    for (int j = 0; j < d; ++j) order[j] = j;
    std::sort(order.begin(), order.end(), [&](int a, int b) { return h.energies[a] < h.energies[b]; });
    std::vector<double> e(d), p(d);
    OverlapRow row;
    row.lambda = lam;
    double resid = 0.0;
    for (int i = 0; i < d; ++i) {
      int j = order[i];
      e[i] = h.energies[j];
      p[i] = std::pow(h.component(j, level), 2);
      if (lam == 0.0) {
        // eigenvectors are unit vectors: level-level block identity, nothing else
        for (int n = 0; n < nl; ++n) {
          double c = h.component(j, n);
          bool is_level = std::abs(h.energies[j] - m.levels[n]) == 0.0;
          resid = std::max(resid, std::abs(std::abs(c) - (is_level ? 1.0 : 0.0)));
        }
      }
    }
    row.block_identity_residual = resid;
    double sm = 0.0;
    for (int i = 0; i < d; ++i) sm += p[i] * (e[i] - e0) * (e[i] - e0);
    row.second_moment = sm;
    row.iqr_width = quantile(e, p, 0.75) - quantile(e, p, 0.25);
    double s = m.scales[level];
    row.gamma = 2.0 * pi * lam * lam * s * s * m.ff.f2(e0);
    if (row.gamma > 0) {
      double t = 10.0 / row.gamma;
      cplx a = 0.0;
      for (int j = 0; j < d; ++j) a += std::exp(-I * h.energies[j] * t) * std::pow(h.component(j, level), 2);
      row.survival = std::norm(a);
    } else {
      row.survival = 1.0;
    }
    rep.rows.push_back(row);
  }
  std::vector<double> lx, ly, lm;
  for (size_t i = 0; i < rep.rows.size(); ++i) {
    if (i > 0 && rep.rows[i].second_moment >= rep.rows[i - 1].second_moment) rep.moment_decreasing = false;
    if (rep.rows[i].lambda > 0) {
      lx.push_back(std::log(rep.rows[i].lambda));
      ly.push_back(std::log(rep.rows[i].iqr_width));
      lm.push_back(std::log(rep.rows[i].second_moment));
    }
  }
  if (lx.size() >= 2) {
    rep.width_exponent = fit_slope(lx, ly);
    rep.moment_exponent = fit_slope(lx, lm);
  }
  return rep;
}

}  // namespace irqm
