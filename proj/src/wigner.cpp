#include "irqm/wigner.hpp"

#include <fftw3.h>

#include <algorithm>
#include <cmath>

namespace irqm {

namespace {

// Fourier coefficients c_r(m), m in [-(n-1), n-1], of each row:
// sum over pairs b + c = r of scale * M(b, c) at m = c - b
struct RowSeries {
  int n = 0;
  std::vector<Eigen::VectorXcd> coeff;  // index m + n - 1
};

RowSeries row_series(const Eigen::MatrixXcd& m, double scale) {
  RowSeries s;
  s.n = (int)m.rows();
  int rows = 2 * s.n - 1;
  s.coeff.assign(rows, Eigen::VectorXcd::Zero(2 * s.n - 1));
  for (int b = 0; b < s.n; ++b)
    for (int c = 0; c < s.n; ++c) s.coeff[b + c](c - b + s.n - 1) += scale * m(b, c);
  return s;
}

// odd modes of whole rows and even modes of half rows from the neighbouring rows
void fill_parity(RowSeries& s) {
  int rows = (int)s.coeff.size();
  auto orig = s.coeff;
  for (int r = 0; r < rows; ++r) {
    int want = r % 2 == 0 ? 1 : 0;  // parity of m missing on this row
    for (int k = 0; k < 2 * s.n - 1; ++k) {
      int m = k - (s.n - 1);
      if (std::abs(m) % 2 != want) continue;
      cplx acc = 0.0;
      int cnt = 0;
      if (r > 0) acc += orig[r - 1](k), ++cnt;
      if (r + 1 < rows) acc += orig[r + 1](k), ++cnt;
      s.coeff[r](k) = cnt ? acc / (double)cnt : 0.0;
    }
  }
}

PhaseSpaceFunction evaluate(const RowSeries& s, double q0, double dq) {
  int n = s.n;
  int np = 2 * n;
  PhaseSpaceFunction f;
  f.q0 = q0;
  f.hq = 0.5 * dq;
  f.dq = dq;
  f.dp = 2.0 * pi / (np * dq);
  f.p0 = -0.5 * np * f.dp;
  int rows = (int)s.coeff.size();
  f.values.resize(rows, np);

  fftw_complex* buf = fftw_alloc_complex(np);
  fftw_plan plan;
  {
    std::lock_guard<std::mutex> lock(fftw_planner_mutex());
    plan = fftw_plan_dft_1d(np, buf, buf, FFTW_BACKWARD, FFTW_ESTIMATE);
  }
  for (int r = 0; r < rows; ++r) {
    for (int j = 0; j < np; ++j) buf[j][0] = buf[j][1] = 0.0;
    for (int k = 0; k < 2 * n - 1; ++k) {
      int m = k - (n - 1);
      // exp(i m dq p_j) = (-1)^m exp(2 pi i m j / np)
      cplx c = s.coeff[r](k) * ((m % 2 == 0) ? 1.0 : -1.0);
      int idx = ((m % np) + np) % np;
      buf[idx][0] += c.real();
      buf[idx][1] += c.imag();
    }
    fftw_execute(plan);
    for (int j = 0; j < np; ++j) f.values(r, j) = cplx(buf[j][0], buf[j][1]);
  }
  {
    std::lock_guard<std::mutex> lock(fftw_planner_mutex());
    fftw_destroy_plan(plan);
  }
  fftw_free(buf);
  return f;
}

void check_input(const Eigen::MatrixXcd& m, double dq) {
  if (m.rows() != m.cols() || m.rows() < 2) throw Error(ErrorKind::shape, "phase-space input must be square");
  if (!(dq > 0)) throw Error(ErrorKind::domain, "grid step must be positive");
}

void check_hermitian(const Eigen::MatrixXcd& m) {
  double d = (m - m.adjoint()).cwiseAbs().maxCoeff();
  if (d > 1e-12 * std::max(1.0, m.cwiseAbs().maxCoeff()))
    throw Error(ErrorKind::hermiticity, "input matrix is not Hermitian", d);
}

}  // namespace

PhaseSpaceFunction wigner_transform(const Eigen::MatrixXcd& rho, double q0, double dq) {
  check_input(rho, dq);
  check_hermitian(rho);
  auto s = row_series(rho, dq / pi);
  PhaseSpaceFunction f = evaluate(s, q0, dq);
  double im = max_imag(f);
  if (im > 1e-10 * std::max(1.0, f.values.cwiseAbs().maxCoeff()))
    throw Error(ErrorKind::hermiticity, "Wigner function has an imaginary part", im);
  f.values = f.values.real().cast<cplx>();
  return f;
}

PhaseSpaceFunction weyl_symbol(const Eigen::MatrixXcd& op, double q0, double dq, bool check) {
  check_input(op, dq);
  if (check) check_hermitian(op);
  auto s = row_series(op, 1.0);
  fill_parity(s);
  return evaluate(s, q0, dq);
}

double integrate(const PhaseSpaceFunction& f) { return f.values.real().sum() * f.hq * f.dp; }

cplx pairing_integral(const PhaseSpaceFunction& f, const PhaseSpaceFunction& g) {
  if (f.rows() != g.rows() || f.cols() != g.cols()) throw Error(ErrorKind::shape, "phase-space grids differ");
  return (f.values.array() * g.values.array()).sum() * f.hq * f.dp;
}

PhaseSpaceFunction principal_zone(const PhaseSpaceFunction& f) {
  double lim = 0.5 * pi / f.dq;
  int lo = 0, hi = f.cols();
  while (lo < f.cols() && f.p(lo) < -lim - 1e-12) ++lo;
  while (hi > lo && f.p(hi - 1) >= lim - 1e-12) --hi;
  PhaseSpaceFunction g = f;
  g.p0 = f.p(lo);
  g.values = f.values.middleCols(lo, hi - lo);
  return g;
}

double max_imag(const PhaseSpaceFunction& f) { return f.values.imag().cwiseAbs().maxCoeff(); }
double min_real(const PhaseSpaceFunction& f) { return f.values.real().minCoeff(); }

namespace {

// d^order/dq^order along rows by central differences on spacing h
Eigen::MatrixXcd dq_rows(const Eigen::MatrixXcd& v, double h, int order) {
  Eigen::MatrixXcd out = Eigen::MatrixXcd::Zero(v.rows(), v.cols());
  for (int r = 0; r < v.rows(); ++r) {
    if (order == 0) {
      out.row(r) = v.row(r);
    } else if (r >= 2 && r + 2 < v.rows()) {
      if (order == 1)
        out.row(r) = (-v.row(r + 2) + 8.0 * v.row(r + 1) - 8.0 * v.row(r - 1) + v.row(r - 2)) / (12.0 * h);
      else if (order == 2)
        out.row(r) = (-v.row(r + 2) + 16.0 * v.row(r + 1) - 30.0 * v.row(r) + 16.0 * v.row(r - 1) - v.row(r - 2)) /
                     (12.0 * h * h);
      else
        throw Error(ErrorKind::domain, "derivative order above two is not supported");
    }
  }
  return out;
}

// d^order/dp^order through the row Fourier series
Eigen::MatrixXcd dp_series(const RowSeries& s, double q0, double dq, int order) {
  RowSeries d = s;
  int n = s.n;
  for (auto& c : d.coeff)
    for (int k = 0; k < 2 * n - 1; ++k) c(k) *= std::pow(I * double(k - (n - 1)) * dq, order);
  return evaluate(d, q0, dq).values;
}

double binom(int n, int k) {
  double b = 1;
  for (int i = 1; i <= k; ++i) b = b * (n - k + i) / i;
  return b;
}

double factorial(int n) { return n <= 1 ? 1.0 : n * factorial(n - 1); }

}  // namespace

MoyalReport moyal_product_check(const Eigen::MatrixXcd& op1, const Eigen::MatrixXcd& op2, double q0,
                                double dq, int k_max, int edge) {
  check_input(op1, dq);
  check_input(op2, dq);
  if (op1.rows() != op2.rows()) throw Error(ErrorKind::shape, "operators differ in size");
  if (k_max < 0 || k_max > 2) throw Error(ErrorKind::domain, "truncation order must be 0, 1 or 2");
  int n = (int)op1.rows();
  if (2 * edge + 4 >= n) throw Error(ErrorKind::padding, "grid too small for the requested edge margin");

  auto s1 = row_series(op1, 1.0);
  auto s2 = row_series(op2, 1.0);
  fill_parity(s1);
  fill_parity(s2);
  Eigen::MatrixXcd exact = weyl_symbol(op1 * op2, q0, dq, false).values;
  double h = 0.5 * dq;

  // derivative tables D[a][b] = d_q^a d_p^b
  auto table = [&](const RowSeries& s) {
    std::vector<std::vector<Eigen::MatrixXcd>> t(k_max + 1, std::vector<Eigen::MatrixXcd>(k_max + 1));
    for (int b = 0; b <= k_max; ++b) {
      Eigen::MatrixXcd pb = dp_series(s, q0, dq, b);
      for (int a = 0; a + b <= k_max; ++a) t[a][b] = dq_rows(pb, h, a);
    }
    return t;
  };
  auto t1 = table(s1);
  auto t2 = table(s2);

  MoyalReport rep;
  Eigen::MatrixXcd approx = Eigen::MatrixXcd::Zero(exact.rows(), exact.cols());
  int r_lo = 2 * edge, r_hi = (int)exact.rows() - 2 * edge;
  rep.scale = exact.middleRows(r_lo, r_hi - r_lo).cwiseAbs().maxCoeff();
  for (int k = 0; k <= k_max; ++k) {
    cplx pre = std::pow(I / 2.0, k) / factorial(k);
    for (int l = 0; l <= k; ++l) {
      double sign = (l % 2 == 0) ? 1.0 : -1.0;
      approx += pre * binom(k, l) * sign * (t1[k - l][l].array() * t2[l][k - l].array()).matrix();
    }
    double worst = 0.0;
    // compare on whole rows, away from the edges
    for (int r = r_lo; r < r_hi; r += 2) worst = std::max(worst, (approx.row(r) - exact.row(r)).cwiseAbs().maxCoeff());
    if (!std::isfinite(worst)) throw Error(ErrorKind::padding, "derivatives blow up at the grid edge");
    rep.residual.push_back(worst);
  }
  return rep;
}

Eigen::MatrixXd smooth(const Eigen::MatrixXd& f, double width_cells) {
  if (width_cells < 2.0) throw Error(ErrorKind::domain, "smoothing width must be at least two cells");
  int half = (int)std::ceil(4.0 * width_cells);
  std::vector<double> k(2 * half + 1);
  double sum = 0;
  for (int i = -half; i <= half; ++i) sum += k[i + half] = std::exp(-0.5 * i * i / (width_cells * width_cells));
  for (auto& x : k) x /= sum;
  auto pass = [&](const Eigen::MatrixXd& in, bool along_rows) {
    Eigen::MatrixXd out = Eigen::MatrixXd::Zero(in.rows(), in.cols());
    for (int r = 0; r < in.rows(); ++r)
      for (int c = 0; c < in.cols(); ++c) {
        double v = in(r, c);
        if (v == 0.0) continue;
        for (int i = -half; i <= half; ++i) {
          int rr = along_rows ? r + i : r, cc = along_rows ? c : c + i;
          if (rr >= 0 && rr < in.rows() && cc >= 0 && cc < in.cols()) out(rr, cc) += k[i + half] * v;
        }
      }
    return out;
  };
  return pass(pass(f, true), false);
}

ClassicalEntropyCurve classical_conditional_entropy(const std::vector<PhaseSpaceFunction>& rho_t,
                                                    const std::vector<double>& ts,
                                                    const PhaseSpaceFunction& rho_star, double width_cells) {
  if (rho_t.size() != ts.size()) throw Error(ErrorKind::shape, "one field per time is required");
  PhaseSpaceFunction star_p = principal_zone(rho_star);
  Eigen::MatrixXd star = star_p.values.real();
  double cell = star_p.hq * star_p.dp;
  Eigen::MatrixXd star_s = smooth(star, width_cells);
  double floor = 1e-12 * star_s.maxCoeff();
  ClassicalEntropyCurve out;
  out.fixed_point_residual = (star_s - star).cwiseAbs().maxCoeff() / star.cwiseAbs().maxCoeff();

  for (size_t i = 0; i < ts.size(); ++i) {
    PhaseSpaceFunction f = principal_zone(rho_t[i]);
    if (f.rows() != star_p.rows() || f.cols() != star_p.cols())
      throw Error(ErrorKind::shape, "phase-space grids differ");
    Eigen::MatrixXd sm = smooth(f.values.real(), width_cells);
    double s = 0.0, excluded = 0.0;
    int used = 0;
    for (int r = 0; r < sm.rows(); ++r)
      for (int c = 0; c < sm.cols(); ++c) {
        if (star_s(r, c) <= floor) continue;
        if (sm(r, c) <= 0.0) {
          excluded += std::abs(sm(r, c)) * cell;
          continue;
        }
        double v = std::max(sm(r, c), 1e-300);
        s -= v * std::log(v / star_s(r, c)) * cell;
        ++used;
      }
    if (used == 0) throw Error(ErrorKind::support, "smoothed field has no positive support");
    out.t.push_back(ts[i]);
    out.s.push_back(s);
    out.excluded_mass.push_back(excluded);
  }
  int n = (int)out.t.size();
  out.sdot.assign(n, 0.0);
  for (int i = 0; i < n && n > 1; ++i) {
    int a = std::max(0, i - 1), b = std::min(n - 1, i + 1);
    out.sdot[i] = (out.s[b] - out.s[a]) / (out.t[b] - out.t[a]);
  }
  return out;
}

}  // namespace irqm
