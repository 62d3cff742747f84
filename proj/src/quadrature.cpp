#include "irqm/quadrature.hpp"

#include <gsl/gsl_integration.h>

#include <algorithm>
#include <cmath>
#include <map>
#include <mutex>

namespace irqm {

void gauss_legendre(int n, std::vector<double>& x, std::vector<double>& w) {
  static std::mutex mtx;
  static std::map<int, std::pair<std::vector<double>, std::vector<double>>> cache;
  std::lock_guard<std::mutex> lock(mtx);
  auto it = cache.find(n);
  if (it == cache.end()) {
    gsl_integration_glfixed_table* t = gsl_integration_glfixed_table_alloc(n);
    std::vector<double> xs(n), ws(n);
    for (int i = 0; i < n; ++i) gsl_integration_glfixed_point(-1.0, 1.0, i, &xs[i], &ws[i], t);
    gsl_integration_glfixed_table_free(t);
    it = cache.emplace(n, std::make_pair(xs, ws)).first;
  }
  x = it->second.first;
  w = it->second.second;
}

std::vector<double> graded_breaks(cplx a, cplx b, const std::vector<cplx>& attractors,
                                  double max_len, bool grade_start) {
  double len = std::abs(b - a);
  std::vector<double> br = {0.0, 1.0};
  if (len == 0) return br;
  cplx dir = (b - a) / len;
  for (cplx p : attractors) {
    double s = std::real((p - a) * std::conj(dir)) / len;
    s = std::clamp(s, 0.0, 1.0);
    double d = std::abs(a + s * len * dir - p) / len;
    if (d <= 0) d = 1e-12;
    if (d > 0.5) continue;
    br.push_back(s);
    for (double h = d; h < 1.0; h *= 2.0) {
      if (s - h > 0) br.push_back(s - h);
      if (s + h < 1) br.push_back(s + h);
    }
  }
  if (grade_start)
    for (int k = 1; k <= 14; ++k) br.push_back(std::ldexp(1.0, -k));
  std::sort(br.begin(), br.end());
  std::vector<double> out;
  for (double s : br)
    if (out.empty() || s - out.back() > 1e-14) out.push_back(s);
  if (out.back() < 1.0) out.back() = 1.0;
  if (max_len > 0) {
    std::vector<double> fine;
    for (size_t i = 0; i + 1 < out.size(); ++i) {
      double span = (out[i + 1] - out[i]) * len;
      int m = std::max(1, (int)std::ceil(span / max_len));
      for (int j = 0; j < m; ++j) fine.push_back(out[i] + (out[i + 1] - out[i]) * j / m);
    }
    fine.push_back(1.0);
    out.swap(fine);
  }
  return out;
}

void segment_rule(cplx a, cplx b, const std::vector<double>& breaks, int n,
                  std::vector<Node>& out) {
  std::vector<double> x, w;
  gauss_legendre(n, x, w);
  cplx d = b - a;
  for (size_t i = 0; i + 1 < breaks.size(); ++i) {
    double s0 = breaks[i], s1 = breaks[i + 1];
    double half = 0.5 * (s1 - s0), mid = 0.5 * (s1 + s0);
    for (int k = 0; k < n; ++k) out.push_back({a + (mid + half * x[k]) * d, half * w[k] * d});
  }
}

void tail_rule(double x0, int n, int levels, std::vector<Node>& out) {
  std::vector<double> x, w;
  gauss_legendre(n, x, w);
  for (int l = 0; l < levels; ++l) {
    double u1 = std::ldexp(1.0, -l), u0 = 0.5 * u1;
    double half = 0.5 * (u1 - u0), mid = 0.5 * (u1 + u0);
    for (int k = 0; k < n; ++k) {
      double u = mid + half * x[k];
      out.push_back({x0 / u, half * w[k] * x0 / (u * u)});
    }
  }
}

void real_rule(double a, double b, const std::vector<cplx>& attractors, double max_len,
               int n, bool grade_start, std::vector<double>& x, std::vector<double>& w) {
  std::vector<Node> nodes;
  segment_rule(a, b, graded_breaks(a, b, attractors, max_len, grade_start), n, nodes);
  x.clear();
  w.clear();
  for (auto& nd : nodes) {
    x.push_back(nd.z.real());
    w.push_back(nd.w.real());
  }
}

}  // namespace irqm
