#include "irqm/common.hpp"

namespace irqm {

const char* kind_name(ErrorKind k) {
  switch (k) {
    case ErrorKind::cut: return "cut-evaluation";
    case ErrorKind::tolerance: return "tolerance";
    case ErrorKind::singularity: return "singularity";
    case ErrorKind::search: return "search";
    case ErrorKind::model: return "model-violation";
    case ErrorKind::contour: return "contour";
    case ErrorKind::resolution: return "resolution";
    case ErrorKind::continuation: return "continuation";
    case ErrorKind::domain: return "domain";
    case ErrorKind::state: return "state";
    case ErrorKind::shape: return "shape";
    case ErrorKind::precondition: return "precondition";
    case ErrorKind::observable: return "observable";
    case ErrorKind::consistency: return "consistency";
    case ErrorKind::singular_equilibrium: return "singular-equilibrium";
    case ErrorKind::hermiticity: return "hermiticity";
    case ErrorKind::padding: return "padding";
    case ErrorKind::support: return "support";
    case ErrorKind::config: return "config";
    case ErrorKind::invariant: return "invariant";
  }
  return "unknown";
}

int exit_code(ErrorKind k) {
  switch (k) {
    case ErrorKind::config: return 2;
    case ErrorKind::invariant: return 1;
    default: return 3;
  }
}

std::vector<double> linspace(double a, double b, int n) {
  std::vector<double> v(n);
  if (n == 1) {
    v[0] = a;
    return v;
  }
  for (int i = 0; i < n; ++i) v[i] = a + (b - a) * i / (n - 1);
  return v;
}

double fit_slope(const std::vector<double>& x, const std::vector<double>& y) {
  size_t n = x.size();
  double mx = 0, my = 0;
  for (size_t i = 0; i < n; ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= n;
  my /= n;
  double sxy = 0, sxx = 0;
  for (size_t i = 0; i < n; ++i) {
    sxy += (x[i] - mx) * (y[i] - my);
    sxx += (x[i] - mx) * (x[i] - mx);
  }
  return sxy / sxx;
}

std::mutex& fftw_planner_mutex() {
  static std::mutex m;
  return m;
}

}  // namespace irqm
