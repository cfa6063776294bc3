#pragma once

#include <cmath>
#include <functional>

#include "varhardy/grid.hpp"

namespace varhardy {

/// Default growth factor separating "stable" from "blowing up" between two
/// consecutive resolutions.
inline constexpr double kStabilityRatio = 1.5;

/// A quantity evaluated at levels m and m + 1 of the same window.
struct TwoResolution {
  double value_m = 0.0;
  double value_m1 = 0.0;
  double ratio = 1.0;  ///< value_m1 / value_m (1 when both vanish)
  bool stable = true;
};

inline TwoResolution two_resolution(const Domain& domain, const std::function<double(const Domain&)>& eval,
                                    double threshold = kStabilityRatio) {
  TwoResolution t;
  t.value_m = eval(domain);
  t.value_m1 = eval(domain.refined());
  if (t.value_m == 0.0 && t.value_m1 == 0.0)
    t.ratio = 1.0;
  else
    t.ratio = t.value_m1 / t.value_m;
  t.stable = std::isfinite(t.value_m1) && std::isfinite(t.ratio) && t.ratio <= threshold;
  return t;
}

}  // namespace varhardy
