#pragma once

#include <string>
#include <vector>

#include "irqm/liouville.hpp"

namespace irqm {

// P acts on the dyad slots of the pole block.  Slot mu maps to
// sum_nu p(nu, mu) |nu bar) + q(nu, mu) |nu tilde); slots without ghosts are left alone.
struct EntropyProjector {
  Eigen::MatrixXcd p, q;
  bool idempotent = true;
  bool naive = false;
  double residual = 0.0;  // worst of |p^2 - p| and |q p - q|
};

// slot layout for a state: ghost-ghost (i, j) at i * n + j, then (n, 0), then (0, n)
int slot_count(const LiouvilleState& r);

// recipes: "default" (p = q = I), "half" (p = I, q = I / 2), "rank1" (p = q = v v^H),
// "naive" (P = I on the whole space)
EntropyProjector build_projector(int n_slots, const std::string& recipe = "default", bool require_idempotent = true);
EntropyProjector build_projector(const Eigen::MatrixXcd& p, const Eigen::MatrixXcd& q, bool require_idempotent = true);

// ghost operator of P rho, including the bound-state diagonal
GhostOperator project(const EntropyProjector& proj, const LiouvilleState& r);

struct EntropyCurve {
  std::vector<double> t, s, neglected;
  double gamma_min = 0.0;
};

EntropyCurve conditional_entropy(const LiouvilleState& rho, const LiouvilleState& rho_star,
                                 const EntropyProjector& proj, const std::vector<double>& ts);

}  // namespace irqm
