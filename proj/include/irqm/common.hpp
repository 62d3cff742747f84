#pragma once

#include <complex>
#include <mutex>
#include <stdexcept>
#include <string>
#include <vector>

namespace irqm {

using cplx = std::complex<double>;

constexpr double pi = 3.14159265358979323846;
constexpr cplx I(0.0, 1.0);

enum class ErrorKind {
  cut,
  tolerance,
  singularity,
  search,
  model,
  contour,
  resolution,
  continuation,
  domain,
  state,
  shape,
  precondition,
  observable,
  consistency,
  singular_equilibrium,
  hermiticity,
  padding,
  support,
  config,
  invariant
};

const char* kind_name(ErrorKind k);

class Error : public std::runtime_error {
public:
  Error(ErrorKind kind, const std::string& what, double estimate = 0.0)
      : std::runtime_error(what), kind_(kind), estimate_(estimate) {}
  ErrorKind kind() const { return kind_; }
  double estimate() const { return estimate_; }

private:
  ErrorKind kind_;
  double estimate_;
};

// exit status used by the command line tool
int exit_code(ErrorKind k);

// guards FFTW planning, which is not thread safe
std::mutex& fftw_planner_mutex();

std::vector<double> linspace(double a, double b, int n);

// least squares slope of y against x
double fit_slope(const std::vector<double>& x, const std::vector<double>& y);

}  // namespace irqm
