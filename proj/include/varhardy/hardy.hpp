#pragma once

#include <cstdint>
#include <vector>

#include "varhardy/exponent.hpp"
#include "varhardy/grid.hpp"
#include "varhardy/report.hpp"
#include "varhardy/stability.hpp"
#include "varhardy/weight.hpp"

namespace varhardy {

enum class DictionaryVariant { small, large };

/// Finite family of smooth test functions with |d^alpha phi| <= chi_B(radius)
/// for |alpha| <= order + 1, checked by finite differences at build time.
struct TestDictionary {
  std::vector<GridFunction> members;
  double radius = 1.0;
  int order = 2;
  DictionaryVariant variant = DictionaryVariant::small;
  bool nondegenerate = false;  ///< some member has nonzero integral
  /// Largest finite-difference derivative over all members (<= 0.9 by construction).
  double derivative_bound = 0.0;
  /// Members of the small dictionary the large one was grown from.
  std::size_t core_size = 0;
};

/// Default radius of the large dictionary.
inline constexpr double kLargeRadius = 4.0;

/// Builds `count` members from `seed`: the canonical bump, phase-shifted
/// modulations, translated and dilated copies, and random smooth
/// perturbations. The large variant is the small dictionary plus wider
/// members supported in B(large_radius), so the two are nested.
TestDictionary build_dictionary(const Domain& domain, int order, DictionaryVariant variant, int count = 12,
                                std::uint64_t seed = 42, double large_radius = kLargeRadius);

/// Max over |alpha| <= order of the finite-difference derivative sup of g, and
/// whether every such derivative vanishes outside B(radius).
struct DerivativeScan {
  double sup = 0.0;
  bool supported = true;
};
DerivativeScan derivative_scan(const GridFunction& g, int order, double radius);

enum class GrandMode { m0, mbar0, mn };

/// Dyadic scales t = 2^-j, 0 <= j <= m - 2, used by the grand maximal functions.
std::vector<double> grand_scales(const Domain& domain);

/// M0: sup |phi_t * f(x)| over the small dictionary; Mbar0: same over the large one;
/// MN: sup over |z - x| < t of |phi_t * f(z)| over the large dictionary.
/// `small` is used for M0 and `large` for the other two modes.
GridFunction grand_maximal(const GridFunction& f, const TestDictionary& dict, GrandMode mode);

/// ||M_N f||_{L^p(.)(w)} with the given (large) dictionary.
double hardy_norm(const GridFunction& f, const VariableExponent& p, const Weight& w, const TestDictionary& dict);

/// N = 2 + floor(n (q_w / min(1, p_-) - 1)).
int capital_n(int dim, double q_w, double p_minus);

/// Clamped-midpoint quadrature of |x|^(-n p(x)) w(x) over the unit ball at
/// levels m and m + 1; "finite" means resolution-stable.
Report dirac_membership_check(const ExponentFactory& p, const WeightFactory& w, const Domain& domain,
                              double threshold = kStabilityRatio);

}  // namespace varhardy
