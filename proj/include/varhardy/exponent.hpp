#pragma once

#include <functional>
#include <optional>
#include <string>

#include "varhardy/grid.hpp"

namespace varhardy {

/// Sentinel standing in for s(x) = infinity where p(x) = p_infinity.
inline constexpr double kInfiniteExponent = 1e30;

/// Variable exponent p(.) with values in (0, infinity).
class VariableExponent {
 public:
  VariableExponent() = default;
  VariableExponent(GridFunction values, std::optional<double> p_infty = std::nullopt);

  const GridFunction& values() const { return values_; }
  const Domain& domain() const { return values_.domain(); }
  double operator[](Index k) const { return values_[k]; }
  double p_minus() const { return p_minus_; }
  double p_plus() const { return p_plus_; }
  /// Declared limit at infinity; the window cannot observe it.
  std::optional<double> p_infty() const { return p_infty_; }

 private:
  GridFunction values_;
  double p_minus_ = 1.0;
  double p_plus_ = 1.0;
  std::optional<double> p_infty_;
};

/// Builds an exponent at a given resolution; used for two-resolution probes.
using ExponentFactory = std::function<VariableExponent(const Domain&)>;

struct ExponentBounds {
  double p_minus;
  double p_plus;
};

ExponentBounds bounds(const VariableExponent& p);

/// Empirical LH0 constant: sup over lattice pairs with |x-y| <= 1/2 of
/// |p(x)-p(y)| log(1/|x-y|).
double lh0_constant(const VariableExponent& p);

/// Empirical LH-infinity constant: sup over the lattice of |p(x)-p_inf| log(e+|x|).
double lhinf_constant(const VariableExponent& p);

/// Pointwise conjugate exponent p/(p-1); requires p_- > 1.
VariableExponent dual_exponent(const VariableExponent& p);

/// Harmonic-type mean p_E with 1/p_E = average of 1/p over lattice points of E.
double mean_exponent(const VariableExponent& p, const Cube& e);

/// s(x) with 1/s(x) = |1/p_inf - 1/p(x)|; kInfiniteExponent where the two agree.
GridFunction s_exponent(const VariableExponent& p);

/// Quadrature of gamma^(s(x)/p_-) w(x) over the window.
double s_integrability(const VariableExponent& p, double gamma, const GridFunction& w);

/// Exponent presets: "const:<v>", "paper91", "lhdecay:<a>", "sin2".
ExponentFactory exponent_preset(const std::string& name);

}  // namespace varhardy
