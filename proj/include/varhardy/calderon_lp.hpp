#pragma once

#include <array>
#include <vector>

#include <Eigen/Core>

#include "varhardy/exponent.hpp"
#include "varhardy/grid.hpp"
#include "varhardy/weight.hpp"

namespace varhardy {

/// Mollifier phi on [-1,1]^n with unit mass and vanishing moments of orders
/// 1..L, together with the scale difference phi* = phi - 2^-n phi(./2).
///
/// phi(x) = b(x_1)...b(x_n) Q(x) with b a steep bump and Q a polynomial of
/// degree <= L fixed by the moment conditions.
class PhiPair {
 public:
  PhiPair(int dim, int moment_order);

  int dim() const { return dim_; }
  int moment_order() const { return order_; }

  double phi(const Point& x) const;
  double phi_star(const Point& x) const { return phi(x) - std::ldexp(phi(0.5 * x), -dim_); }

  /// Lattice samples of t^-n phi(x / t) and t^-n phi*(x / t).
  GridFunction kernel(const Domain& domain, double t) const;
  GridFunction star_kernel(const Domain& domain, double t) const;

  /// Coefficients of Q, ordered as monomial exponents of total degree <= L.
  const Eigen::VectorXd& correction() const { return coeffs_; }

 private:
  int dim_;
  int order_;
  std::vector<std::array<int, 2>> exps_;
  Eigen::VectorXd coeffs_;
};

/// Throws NumericError when the moment system is singular.
PhiPair make_phi_pair(int dim, int moment_order);

/// Deepest admissible level: 2^-J >= 4h.
int max_lp_level(const Domain& domain);

/// (sum_{j=1}^J |phi*_{2^-j} * f|^2)^(1/2).
GridFunction square_function(const GridFunction& f, const PhiPair& pair, int levels);

/// ||phi * f|| + ||S_J f|| in L^p(.)(w).
double lp_norm(const GridFunction& f, const VariableExponent& p, const Weight& w, const PhiPair& pair, int levels);

struct Telescope {
  GridFunction sum;     ///< phi * f + sum_{j=1}^J phi*_{2^-j} * f
  GridFunction target;  ///< phi_{2^-J} * f
  double identity_error = 0.0;  ///< max |sum - target| / max |target|
  double relative_l2_error = 0.0;  ///< ||sum - f||_2 / ||f||_2
};

Telescope telescoping_reconstruct(const GridFunction& f, const PhiPair& pair, int levels);

}  // namespace varhardy
