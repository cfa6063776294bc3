#pragma once

#include <vector>

#include "varhardy/exponent.hpp"
#include "varhardy/grid.hpp"
#include "varhardy/report.hpp"
#include "varhardy/weight.hpp"

namespace varhardy {

/// The scalar equation sum_i c_i (a_i / lambda)^(p_i) = 1 behind every
/// Luxemburg-type norm. Terms are stored as (log a_i, p_i, c_i).
class ModularEquation {
 public:
  void reserve(std::size_t n) { terms_.reserve(n); }
  /// Adds c |a|^p; zero amplitudes and zero weights are dropped.
  void add(double amplitude, double exponent, double weight);
  bool empty() const { return terms_.empty(); }
  std::size_t size() const { return terms_.size(); }

  /// sum_i c_i (|a_i| / lambda)^(p_i)
  double evaluate(double lambda) const;

  /// Smallest lambda with evaluate(lambda) <= 1, by bisection on log lambda.
  /// Returns 0 for an empty equation; throws NumericError("norm overflow")
  /// when no lambda below 1e30 works.
  double solve_bisection(double rel_tol = 1e-13) const;

  /// Same root by monotone Newton iteration on log lambda; falls back to bisection.
  double solve_newton() const;

 private:
  struct Term {
    double log_amp;
    double exponent;
    double weight;
  };
  double log_sum(double log_lambda) const;
  std::vector<Term> terms_;
  double p_min_ = 0.0;
  double p_max_ = 0.0;
};

/// rho^w_p(f) = int |f|^p(x) w(x) dx.
double modular(const GridFunction& f, const VariableExponent& p, const Weight& w);
double modular(const GridFunction& f, const VariableExponent& p);

/// Luxemburg norm of f in L^p(.)(w), by bisection (relative tolerance 1e-13).
double luxemburg_norm(const GridFunction& f, const VariableExponent& p, const Weight& w);
double luxemburg_norm(const GridFunction& f, const VariableExponent& p);

/// ||chi_Q||_{L^p(.)(w)} over lattice points of q.
double indicator_norm(const Cube& q, const VariableExponent& p, const Weight& w);
double indicator_norm(const Cube& q, const VariableExponent& p);

/// r_p = 1 + 1/p_- - 1/p_+.
double holder_constant(const VariableExponent& p);

/// ||f g||_1 <= r_p ||f||_p ||g||_p' with both sides and r_p reported.
Report holder_check(const GridFunction& f, const GridFunction& g, const VariableExponent& p);

/// Modular-versus-norm sandwich over the support of f, the unit-ball
/// equivalence, and modular(f / ||f||) = 1.
Report unit_ball_modular_check(const GridFunction& f, const VariableExponent& p, const Weight& w);

/// Ratios of ||chi_Q|| to |Q|^(1/p_-(Q)), |Q|^(1/p_+(Q)) and |Q|^(1/p_inf);
/// passes when the ratios relevant to the size of Q lie in [1/band, band].
Report indicator_norm_profile(const Cube& q, const VariableExponent& p, double band = 8.0);

/// (sum over level-k0 dyadic cubes of ||chi_Q f||^p_inf)^(1/p_inf).
double localization_norm(const GridFunction& f, const VariableExponent& p, int k0);

}  // namespace varhardy
