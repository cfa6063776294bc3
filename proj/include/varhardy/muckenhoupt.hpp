#pragma once

#include <optional>

#include "varhardy/exponent.hpp"
#include "varhardy/grid.hpp"
#include "varhardy/report.hpp"
#include "varhardy/stability.hpp"
#include "varhardy/weight.hpp"

namespace varhardy {

/// Sup of a cube functional together with where it is attained.
/// Averages m_Q are lattice means over cubes lying inside the window.
struct MuckenhouptReport {
  double constant = 1.0;
  Cube worst_cube;
  Index cube_count = 0;
  std::optional<bool> resolution_stable;
};

/// sup_{|Q|<=1} m_Q(w) exp(-m_Q(log w)) over all shifted grids.
MuckenhouptReport a_loc_infty_constant(const Weight& w, double max_side = 1.0);

/// sup_{|Q|<=1} m_Q(w) m_Q(w^(-1/(p-1)))^(p-1); p > 1.
MuckenhouptReport a_loc_p_constant(const Weight& w, double p, double max_side = 1.0);

/// sup over the lattice of M^loc w / w; the worst cube is the finest cube at the argmax.
MuckenhouptReport a1_loc_constant(const Weight& w);

/// Reverse Hoelder check m_Q(w^q)^(1/q) <= 2 m_Q(w) over every cube with
/// |Q| <= 1 meeting the window. Without an explicit q the openness exponent
/// q = 1 + 1/(4^(n+6) [w]_{A_1^loc}) is used.
Report reverse_holder_check(const Weight& w, std::optional<double> q = std::nullopt);

/// sup_{|Q|<=1} |Q|^-1 ||chi_Q||_{L^p(.)(w)} ||chi_Q||_{L^p'(.)(sigma)}.
MuckenhouptReport a_loc_var_constant(const Weight& w, const VariableExponent& p, double max_side = 1.0);

/// Sup over D_0 cubes inside the window with side <= max_side (default T) of
/// |Q|^(-p_Q) ||w||_{L^1(Q)} ||w^-1||_{L^(p'/p)(Q)}.
MuckenhouptReport tilde_a_constant(const Weight& w, const VariableExponent& p,
                                   std::optional<double> max_side = std::nullopt);

/// Report at level m with resolution_stable filled in from levels m and m + 1.
template <class Eval>
MuckenhouptReport with_stability(const Domain& domain, Eval&& eval, double threshold = kStabilityRatio) {
  MuckenhouptReport coarse;
  const TwoResolution t = two_resolution(
      domain,
      [&](const Domain& d) {
        MuckenhouptReport r = eval(d);
        if (d == domain) coarse = r;
        return r.constant;
      },
      threshold);
  coarse.resolution_stable = t.stable;
  return coarse;
}

/// Growth threshold used by q_w_estimate; stricter than kStabilityRatio because
/// the constant grows slowly just below the critical index.
inline constexpr double kQwStabilityRatio = 1.05;

/// Smallest p in (1, cap] whose A^loc_p constant is resolution-stable, by bisection
/// to `tolerance`. Throws NumericError when p = cap is unstable.
double q_w_estimate(const WeightFactory& w, const Domain& domain, double threshold = kQwStabilityRatio,
                    double cap = 64.0, double tolerance = 1.0 / 32.0);

}  // namespace varhardy
