#include <fftw3.h>

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>

#include "irqm/spectral.hpp"

namespace irqm {

const char* verdict_name(HardyReport::Verdict v) {
  switch (v) {
    case HardyReport::lower: return "in-phi-minus";
    case HardyReport::upper: return "in-phi-plus";
    default: return "neither";
  }
}

namespace {

// barycentric rational fit (AAA) of samples f at points x
struct Barycentric {
  std::vector<double> support;
  std::vector<cplx> values, weights;

  cplx operator()(double z) const {
    cplx num = 0.0, den = 0.0;
    for (size_t j = 0; j < support.size(); ++j) {
      double d = z - support[j];
      if (d == 0.0) return values[j];
      num += weights[j] * values[j] / d;
      den += weights[j] / d;
    }
    return num / den;
  }
};

bool aaa_fit(const std::vector<double>& x, const std::vector<cplx>& f, Barycentric& out,
             int max_terms = 80, double tol = 1e-12) {
  int n = (int)x.size();
  double scale = 0.0;
  for (auto& v : f) scale = std::max(scale, std::abs(v));
  if (scale == 0.0) {
    out.support = {x[0]};
    out.values = {0.0};
    out.weights = {1.0};
    return true;
  }
  std::vector<bool> used(n, false);
  Eigen::VectorXcd fv(n);
  for (int i = 0; i < n; ++i) fv[i] = f[i];
  cplx mean = fv.mean();
  Eigen::VectorXcd approx = Eigen::VectorXcd::Constant(n, mean);
  std::vector<int> sup;
  for (int m = 0; m < std::min(max_terms, n - 1); ++m) {
    int pick = 0;
    double worst = -1.0;
    for (int i = 0; i < n; ++i)
      if (!used[i] && std::abs(fv[i] - approx[i]) > worst) {
        worst = std::abs(fv[i] - approx[i]);
        pick = i;
      }
    used[pick] = true;
    sup.push_back(pick);
    std::vector<int> rest;
    for (int i = 0; i < n; ++i)
      if (!used[i]) rest.push_back(i);
    int k = (int)sup.size();
    Eigen::MatrixXcd A(rest.size(), k);
    for (size_t r = 0; r < rest.size(); ++r)
      for (int j = 0; j < k; ++j) A(r, j) = (fv[rest[r]] - fv[sup[j]]) / (x[rest[r]] - x[sup[j]]);
    Eigen::BDCSVD<Eigen::MatrixXcd> svd(A, Eigen::ComputeThinV);
    Eigen::VectorXcd w = svd.matrixV().col(k - 1);
    out.support.clear();
    out.values.clear();
    out.weights.clear();
    for (int j = 0; j < k; ++j) {
      out.support.push_back(x[sup[j]]);
      out.values.push_back(fv[sup[j]]);
      out.weights.push_back(w[j]);
    }
    double err = 0.0;
    for (int i = 0; i < n; ++i) {
      approx[i] = used[i] ? fv[i] : out(x[i]);
      err = std::max(err, std::abs(approx[i] - fv[i]));
    }
    if (err <= tol * scale) return true;
  }
  return false;
}

}  // namespace

HardyReport hardy_check(const std::vector<cplx>& samples, double omega_max) {
  int n = (int)samples.size();
  if (n < 512) throw Error(ErrorKind::resolution, "Hardy test needs at least 512 samples");
  if (!(omega_max > 0)) throw Error(ErrorKind::resolution, "Hardy test needs a positive band");
  double h = omega_max / (n - 1);
  std::vector<double> x(n);
  for (int i = 0; i < n; ++i) x[i] = i * h;

  HardyReport rep;
  Barycentric fit;
  rep.rational_extension = aaa_fit(x, samples, fit);

  const int band = 8;
  int m = 2 * band * (n - 1);
  double e0 = -band * omega_max;
  double taper_start = 0.75 * band * omega_max, taper_end = band * omega_max;
  fftw_complex* buf = fftw_alloc_complex(m);
  for (int k = 0; k < m; ++k) {
    double e = e0 + k * h;
    cplx v;
    int idx = (int)std::lround(e / h);
    if (idx >= 0 && idx < n && std::abs(e - idx * h) < 1e-9 * h)
      v = samples[idx];
    else if (rep.rational_extension)
      v = fit(e);
    else
      v = 0.0;
    double a = std::abs(e);
    if (a > taper_start) {
      double s = std::min(1.0, (a - taper_start) / (taper_end - taper_start));
      double c = std::cos(0.5 * pi * s);
      v *= c * c;
    }
    buf[k][0] = v.real();
    buf[k][1] = v.imag();
  }
  fftw_plan plan;
  {
    std::lock_guard<std::mutex> lock(fftw_planner_mutex());
    plan = fftw_plan_dft_1d(m, buf, buf, FFTW_FORWARD, FFTW_ESTIMATE);
  }
  fftw_execute(plan);
  double past = 0.0, future = 0.0;
  for (int k = 1; k < m; ++k) {
    if (k == m / 2) continue;
    double w = buf[k][0] * buf[k][0] + buf[k][1] * buf[k][1];
    if (k < m / 2)
      future += w;
    else
      past += w;
  }
  double zero = buf[0][0] * buf[0][0] + buf[0][1] * buf[0][1];
  {
    std::lock_guard<std::mutex> lock(fftw_planner_mutex());
    fftw_destroy_plan(plan);
  }
  fftw_free(buf);
  double total = past + future + zero;
  rep.past_fraction = total > 0 ? past / total : 0.0;
  rep.future_fraction = total > 0 ? future / total : 0.0;
  rep.score = rep.past_fraction;
  rep.bandwidth = 2.0 * band * omega_max;
  if (rep.past_fraction < 1e-4)
    rep.verdict = HardyReport::lower;
  else if (rep.future_fraction < 1e-4)
    rep.verdict = HardyReport::upper;
  else
    rep.verdict = HardyReport::neither;
  return rep;
}

}  // namespace irqm
