#include "varhardy/lebesgue.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace varhardy {

namespace {

constexpr double kOverflow = 1e30;

template <class Visit>
void for_each_in_cube(const Domain& dom, const Cube& q, Visit&& visit) {
  const AxisRange r0 = q.lattice_range(dom, 0);
  const AxisRange r1 = dom.dim() > 1 ? q.lattice_range(dom, 1) : AxisRange{0, 1};
  for (Index i = r0.lo; i < r0.hi; ++i)
    for (Index j = r1.lo; j < r1.hi; ++j) visit(dom.flat(i, j));
}

ModularEquation equation_for(const GridFunction& f, const VariableExponent& p, const Weight* w) {
  const Domain& dom = f.domain();
  if (p.domain() != dom || (w && w->domain() != dom)) throw std::invalid_argument("domain mismatch");
  ModularEquation eq;
  const double vol = dom.cell_volume();
  for (Index k = 0; k < dom.size(); ++k) eq.add(f[k], p[k], vol * (w ? (*w)[k] : 1.0));
  return eq;
}

}  // namespace

void ModularEquation::add(double amplitude, double exponent, double weight) {
  if (amplitude == 0.0 || weight == 0.0) return;
  if (terms_.empty()) {
    p_min_ = p_max_ = exponent;
  } else {
    p_min_ = std::min(p_min_, exponent);
    p_max_ = std::max(p_max_, exponent);
  }
  terms_.push_back({std::log(std::abs(amplitude)), exponent, weight});
}

double ModularEquation::log_sum(double log_lambda) const {
  double peak = -std::numeric_limits<double>::infinity();
  for (const Term& t : terms_) peak = std::max(peak, std::log(t.weight) + t.exponent * (t.log_amp - log_lambda));
  if (!std::isfinite(peak)) return peak;
  double acc = 0.0;
  for (const Term& t : terms_) acc += std::exp(std::log(t.weight) + t.exponent * (t.log_amp - log_lambda) - peak);
  return peak + std::log(acc);
}

double ModularEquation::evaluate(double lambda) const {
  if (terms_.empty()) return 0.0;
  return std::exp(log_sum(std::log(lambda)));
}

double ModularEquation::solve_bisection(double rel_tol) const {
  if (terms_.empty()) return 0.0;
  // Constant-exponent surrogate for the starting bracket.
  const double log_rho = log_sum(0.0);
  double guess = std::max(log_rho / p_min_, log_rho / p_max_);
  double hi = guess;
  double lo = guess;
  const double log_cap = std::log(kOverflow);
  int steps = 0;
  while (log_sum(hi) > 0.0) {
    hi += std::log(2.0);
    if (hi > log_cap) throw NumericError("norm overflow");
    if (++steps > 4000) throw NumericError("norm overflow");
  }
  while (log_sum(lo) <= 0.0) {
    lo -= std::log(2.0);
    if (++steps > 8000) return 0.0;
  }
  const double tol = std::log1p(rel_tol);
  for (int it = 0; it < 200 && hi - lo > tol; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (log_sum(mid) > 0.0)
      lo = mid;
    else
      hi = mid;
  }
  return std::exp(hi);
}

double ModularEquation::solve_newton() const {
  if (terms_.empty()) return 0.0;
  const double log_rho = log_sum(0.0);
  // F(t) = sum c_i exp(p_i (a_i - t)) - 1 is convex and decreasing; this
  // start has F >= 0 so the iteration increases monotonically to the root.
  double t = std::min(log_rho / p_max_, log_rho / p_min_);
  for (int it = 0; it < 100; ++it) {
    double value = 0.0;
    double slope = 0.0;
    for (const Term& term : terms_) {
      const double e = term.weight * std::exp(term.exponent * (term.log_amp - t));
      value += e;
      slope -= term.exponent * e;
    }
    if (!std::isfinite(value) || !std::isfinite(slope) || slope == 0.0) break;
    const double step = -(value - 1.0) / slope;
    t += step;
    if (std::abs(step) <= 1e-15 * std::max(1.0, std::abs(t))) return std::exp(t);
  }
  return solve_bisection();
}

double modular(const GridFunction& f, const VariableExponent& p, const Weight& w) {
  if (p.domain() != f.domain() || w.domain() != f.domain()) throw std::invalid_argument("domain mismatch");
  const Eigen::ArrayXd& v = f.values();
  const Eigen::ArrayXd powered = (v != 0.0).select((p.values().values() * v.abs().log()).exp(), 0.0);
  return (powered * w.values().values()).sum() * f.domain().cell_volume();
}

double modular(const GridFunction& f, const VariableExponent& p) { return modular(f, p, Weight::unit(f.domain())); }

double luxemburg_norm(const GridFunction& f, const VariableExponent& p, const Weight& w) {
  return equation_for(f, p, &w).solve_bisection();
}

double luxemburg_norm(const GridFunction& f, const VariableExponent& p) {
  return equation_for(f, p, nullptr).solve_bisection();
}

double indicator_norm(const Cube& q, const VariableExponent& p, const Weight& w) {
  const Domain& dom = p.domain();
  ModularEquation eq;
  const double vol = dom.cell_volume();
  for_each_in_cube(dom, q, [&](Index k) { eq.add(1.0, p[k], vol * w[k]); });
  return eq.solve_newton();
}

double indicator_norm(const Cube& q, const VariableExponent& p) {
  const Domain& dom = p.domain();
  ModularEquation eq;
  const double vol = dom.cell_volume();
  for_each_in_cube(dom, q, [&](Index k) { eq.add(1.0, p[k], vol); });
  return eq.solve_newton();
}

double holder_constant(const VariableExponent& p) { return 1.0 + 1.0 / p.p_minus() - 1.0 / p.p_plus(); }

Report holder_check(const GridFunction& f, const GridFunction& g, const VariableExponent& p) {
  Report r;
  r.name = "holder";
  const double lhs = (f.values() * g.values()).abs().sum() * f.domain().cell_volume();
  const double rp = holder_constant(p);
  const double rhs = rp * luxemburg_norm(f, p) * luxemburg_norm(g, dual_exponent(p));
  r.set("lhs", lhs);
  r.set("rhs", rhs);
  r.set("r_p", rp);
  r.require(lhs <= rhs * (1.0 + 1e-6), "Hoelder bound violated");
  r.require(rp <= 2.0, "r_p exceeds 2");
  return r;
}

Report unit_ball_modular_check(const GridFunction& f, const VariableExponent& p, const Weight& w) {
  constexpr double tol = 1e-6;
  Report r;
  r.name = "unit_ball_modular";
  const Eigen::ArrayXd& v = f.values();
  double p_lo = std::numeric_limits<double>::infinity();
  double p_hi = 0.0;
  for (Index k = 0; k < v.size(); ++k) {
    if (v[k] == 0.0) continue;
    p_lo = std::min(p_lo, p[k]);
    p_hi = std::max(p_hi, p[k]);
  }
  const double norm = luxemburg_norm(f, p, w);
  const double rho = modular(f, p, w);
  r.set("norm", norm);
  r.set("modular", rho);
  if (norm == 0.0) {
    r.require(rho == 0.0, "zero norm with nonzero modular");
    return r;
  }
  r.set("p_minus_support", p_lo);
  r.set("p_plus_support", p_hi);
  const double lower = norm <= 1.0 ? std::pow(norm, p_hi) : std::pow(norm, p_lo);
  const double upper = norm <= 1.0 ? std::pow(norm, p_lo) : std::pow(norm, p_hi);
  r.set("lower", lower);
  r.set("upper", upper);
  r.require(lower <= rho * (1.0 + tol) + tol * 1e-300, "modular below the sandwich");
  r.require(rho <= upper * (1.0 + tol), "modular above the sandwich");
  if (std::abs(norm - 1.0) > tol) r.require((norm <= 1.0) == (rho <= 1.0), "unit-ball equivalence broken");
  GridFunction unit = (1.0 / norm) * f;
  const double unit_rho = modular(unit, p, w);
  r.set("unit_modular", unit_rho);
  r.require(std::abs(unit_rho - 1.0) <= tol, "modular at the unit sphere differs from 1");
  return r;
}

Report indicator_norm_profile(const Cube& q, const VariableExponent& p, double band) {
  const Domain& dom = p.domain();
  Report r;
  r.name = "indicator_norm_profile";
  double p_lo = std::numeric_limits<double>::infinity();
  double p_hi = 0.0;
  for_each_in_cube(dom, q, [&](Index k) {
    p_lo = std::min(p_lo, p[k]);
    p_hi = std::max(p_hi, p[k]);
  });
  if (p_hi == 0.0) throw std::invalid_argument("cube does not meet the window");
  const double vol = q.volume();
  const double norm = indicator_norm(q, p);
  r.set("norm", norm);
  r.set("ratio_p_minus", norm / std::pow(vol, 1.0 / p_lo));
  r.set("ratio_p_plus", norm / std::pow(vol, 1.0 / p_hi));
  auto in_band = [band](double x) { return x >= 1.0 / band && x <= band; };
  if (p.p_infty()) r.set("ratio_p_infty", norm / std::pow(vol, 1.0 / *p.p_infty()));
  if (vol <= 1.0) {
    r.require(in_band(r.get("ratio_p_minus")), "small-cube ratio against p_- outside band");
    r.require(in_band(r.get("ratio_p_plus")), "small-cube ratio against p_+ outside band");
  }
  if (vol >= 1.0 && p.p_infty()) r.require(in_band(r.get("ratio_p_infty")), "large-cube ratio outside band");
  return r;
}

double localization_norm(const GridFunction& f, const VariableExponent& p, int k0) {
  if (!p.p_infty()) throw std::invalid_argument("p_infty not declared");
  const Domain& dom = f.domain();
  const double p_inf = *p.p_infty();
  const DyadicPartition part(dom, k0, {0, 0});
  std::vector<ModularEquation> pieces(part.cube_count());
  const double vol = dom.cell_volume();
  for (Index k = 0; k < dom.size(); ++k) pieces[part.cube_of(k)].add(f[k], p[k], vol);
  double acc = 0.0;
  for (const ModularEquation& eq : pieces) acc += std::pow(eq.solve_bisection(), p_inf);
  return std::pow(acc, 1.0 / p_inf);
}

}  // namespace varhardy
