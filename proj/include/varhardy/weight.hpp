#pragma once

#include <functional>
#include <string>

#include "varhardy/exponent.hpp"
#include "varhardy/grid.hpp"

namespace varhardy {

/// Floor applied to clamped singular weights.
inline constexpr double kWeightFloor = 0x1p-52;

/// Strictly positive sampled weight.
class Weight {
 public:
  Weight() = default;
  explicit Weight(GridFunction values);

  static Weight unit(const Domain& domain) { return Weight(GridFunction::constant(domain, 1.0)); }

  const GridFunction& values() const { return values_; }
  const Domain& domain() const { return values_.domain(); }
  double operator[](Index k) const { return values_[k]; }

  /// w of the window.
  double mass() const { return quadrature(values_); }

 private:
  GridFunction values_;
};

using WeightFactory = std::function<Weight(const Domain&)>;

/// sigma = w^(-1/(p(.)-1)); requires p_- > 1.
Weight dual_weight(const Weight& w, const VariableExponent& p);

/// Distance to the origin regularized at the cell scale: max(|x|, h/2).
double clamped_radius(const Point& x, const Domain& domain);

/// Weight presets: "const:<c>", "power:<mu>" = (1+|x|)^mu, "exp:<mu>" = exp(mu x_1),
/// "absp:<alpha>" = |x|^alpha clamped, "ratpow:<a>,<b>" = |x|^a / (1+|x|^b) clamped,
/// "powexp:<a>" = |x|^a exp(|x|) clamped.
WeightFactory weight_preset(const std::string& name);

}  // namespace varhardy
