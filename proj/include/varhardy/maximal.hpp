#pragma once

#include <functional>
#include <vector>

#include "varhardy/exponent.hpp"
#include "varhardy/grid.hpp"
#include "varhardy/report.hpp"
#include "varhardy/weight.hpp"

namespace varhardy {

/// Operators of the form GridFunction -> GridFunction, as consumed by the probes.
using Operator = std::function<GridFunction(const GridFunction&)>;

/// Largest cube side considered by the uncentered maximal operators; a side
/// of 4T always leaves one shifted cube covering the whole window.
double maximal_top_side(const Domain& domain);

/// Sup of (1/|Q|) int_Q |f| over shifted dyadic cubes of every shift with
/// h <= side <= 4T containing x; f is extended by zero outside the window.
GridFunction hl_maximal(const GridFunction& f);

/// As hl_maximal with side(Q) <= radius, i.e. |Q| <= radius^n.
GridFunction local_maximal(const GridFunction& f, double radius = 1.0);

/// Sup over the single shifted grid D_a.
GridFunction grid_maximal(const GridFunction& f, const Shift& shift);

/// sup_{|Q| <= 1} ((1/w(Q)) int_Q |f|^u w)^(1/u). Outside the window w is
/// continued by its mean over the visible part of Q.
GridFunction powered_weighted_local_maximal(const GridFunction& f, const Weight& w, double u);

/// K_B f(x) = int e^(-B|x-y|) f(y) dy; the kernel is truncated at |x-y| = T.
GridFunction k_b_operator(const GridFunction& f, double decay);

/// 2^(jn) int f(x-y) / ((1 + 2^j |y|)^A e^(B|y|)) dy.
GridFunction peak_majorant_convolution(const GridFunction& f, int j, double power, double decay);

/// Peak majorant together with the smallest C with output <= C (K_B|f| + M^loc f).
struct MajorantDomination {
  GridFunction value;
  double constant = 0.0;
};
MajorantDomination peak_majorant_domination(const GridFunction& f, int j, double power, double decay);

/// Piecewise-constant lattice average over the level-k cubes of D_0.
GridFunction averaging_e_k(const GridFunction& f, int k);

enum class ScaleMode { below, above };

/// Dyadic (shift 0) maximal function restricted to side <= r0 or side >= r0.
GridFunction restricted_dyadic_maximal(const GridFunction& f, double r0, ScaleMode mode);

/// Empirical operator norm sup ||op f|| / ||f|| in L^p(.)(w) over a family.
/// Zero-norm members are skipped and counted in "skipped".
Report boundedness_probe(const Operator& op, const VariableExponent& p, const Weight& w,
                         const std::vector<GridFunction>& family);

/// ||(sum (M^loc f_j)^q)^(1/q)|| / ||(sum |f_j|^q)^(1/q)|| in L^p(.)(w).
Report vector_valued_maximal_ratio(const std::vector<GridFunction>& family, double q, const VariableExponent& p,
                                   const Weight& w);

}  // namespace varhardy
