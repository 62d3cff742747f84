#pragma once

#include <vector>

#include "irqm/common.hpp"

namespace irqm {

struct Node {
  cplx z;
  cplx w;
};

// Gauss-Legendre rule on [-1, 1]
void gauss_legendre(int n, std::vector<double>& x, std::vector<double>& w);

// Breakpoints in [0,1] for a segment a->b, refined geometrically towards
// the closest approach of each attractor and capped at max_len panel length.
std::vector<double> graded_breaks(cplx a, cplx b, const std::vector<cplx>& attractors,
                                  double max_len, bool grade_start);

// Composite Gauss-Legendre on the straight segment a->b.
void segment_rule(cplx a, cplx b, const std::vector<double>& breaks, int n,
                  std::vector<Node>& out);

// Real half line [x0, inf) through x = x0 / u, panels dyadic in u.
void tail_rule(double x0, int n, int levels, std::vector<Node>& out);

// Real interval rule with panels graded towards given points.
void real_rule(double a, double b, const std::vector<cplx>& attractors, double max_len,
               int n, bool grade_start, std::vector<double>& x, std::vector<double>& w);

}  // namespace irqm
