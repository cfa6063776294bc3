#include "varhardy/muckenhoupt.hpp"

#include <algorithm>
#include <cmath>

#include "varhardy/lebesgue.hpp"
#include "varhardy/maximal.hpp"

namespace varhardy {

namespace {

// Runs `value(part, id)` over every cube inside the window of the given
// levels and shifts and keeps the largest value.
template <class Value>
MuckenhouptReport sup_inside_window(const Domain& dom, const std::vector<int>& levels,
                                    const std::vector<Shift>& shifts, Value&& value) {
  MuckenhouptReport r;
  r.constant = -INFINITY;
  for (int k : levels)
    for (const Shift& a : shifts) {
      const DyadicPartition part(dom, k, a);
      const auto per_cube = value(part);
      for (Index id = 0; id < part.cube_count(); ++id) {
        if (!part.inside_window(id)) continue;
        ++r.cube_count;
        if (per_cube[id] > r.constant) {
          r.constant = per_cube[id];
          r.worst_cube = part.cube(id);
        }
      }
    }
  if (r.cube_count == 0) throw std::invalid_argument("no cube fits inside the window");
  return r;
}

std::vector<int> local_levels(const Domain& dom, double max_side) { return levels_between(dom, dom.step(), max_side); }

Eigen::ArrayXd lattice_mean(const DyadicPartition& part, const Eigen::ArrayXd& field) {
  return part.sums(field) / part.counts();
}

template <class Fn>
void for_each_point(const Domain& dom, const Cube& q, Fn&& fn) {
  const AxisRange r0 = q.lattice_range(dom, 0);
  const AxisRange r1 = dom.dim() > 1 ? q.lattice_range(dom, 1) : AxisRange{0, 1};
  for (Index i = r0.lo; i < r0.hi; ++i)
    for (Index j = r1.lo; j < r1.hi; ++j) fn(dom.flat(i, j));
}

}  // namespace

MuckenhouptReport a_loc_infty_constant(const Weight& w, double max_side) {
  const Domain& dom = w.domain();
  const Eigen::ArrayXd& v = w.values().values();
  const Eigen::ArrayXd logs = v.log();
  return sup_inside_window(dom, local_levels(dom, max_side), all_shifts(dom.dim()), [&](const DyadicPartition& part) {
    return Eigen::ArrayXd(lattice_mean(part, v) * (-lattice_mean(part, logs)).exp());
  });
}

MuckenhouptReport a_loc_p_constant(const Weight& w, double p, double max_side) {
  if (!(p > 1.0)) throw std::invalid_argument("A_p constant needs p > 1");
  const Domain& dom = w.domain();
  const Eigen::ArrayXd& v = w.values().values();
  const Eigen::ArrayXd dual = (v.log() * (-1.0 / (p - 1.0))).exp();
  return sup_inside_window(dom, local_levels(dom, max_side), all_shifts(dom.dim()), [&](const DyadicPartition& part) {
    return Eigen::ArrayXd(lattice_mean(part, v) * lattice_mean(part, dual).pow(p - 1.0));
  });
}

MuckenhouptReport a1_loc_constant(const Weight& w) {
  const Domain& dom = w.domain();
  const GridFunction m = local_maximal(w.values());
  const Eigen::ArrayXd ratio = m.values() / w.values().values();
  Index at = 0;
  MuckenhouptReport r;
  r.constant = ratio.maxCoeff(&at);
  r.worst_cube = cube_containing(dom, at, dom.level(), {0, 0});
  r.cube_count = dom.size();
  return r;
}

Report reverse_holder_check(const Weight& w, std::optional<double> q) {
  const Domain& dom = w.domain();
  Report r;
  r.name = "reverse_holder";
  if (!q) {
    const double a1 = a1_loc_constant(w).constant;
    r.set("a1_constant", a1);
    q = 1.0 + 1.0 / (std::pow(4.0, dom.dim() + 6) * a1);
  }
  if (!(*q > 1.0)) throw std::invalid_argument("reverse Hoelder exponent must exceed 1");
  r.set("q", *q);
  const Eigen::ArrayXd& v = w.values().values();
  const Eigen::ArrayXd vq = (v.log() * *q).exp();
  double worst = 0.0;
  Index cubes = 0;
  Index violations = 0;
  for (int k : local_levels(dom, 1.0))
    for (const Shift& a : all_shifts(dom.dim())) {
      const DyadicPartition part(dom, k, a);
      const Eigen::ArrayXd ratio = lattice_mean(part, vq).pow(1.0 / *q) / lattice_mean(part, v);
      cubes += ratio.size();
      violations += (ratio > 2.0).count();
      worst = std::max(worst, ratio.maxCoeff());
    }
  r.set("worst_ratio", worst);
  r.set("cube_count", static_cast<double>(cubes));
  r.set("violations", static_cast<double>(violations));
  r.require(violations == 0, "reverse Hoelder bound 2 violated");
  return r;
}

MuckenhouptReport a_loc_var_constant(const Weight& w, const VariableExponent& p, double max_side) {
  if (!(p.p_minus() > 1.0)) throw std::invalid_argument("A_p(.) constant needs p_- > 1");
  const Domain& dom = w.domain();
  const Weight sigma = dual_weight(w, p);
  const VariableExponent conj = dual_exponent(p);
  return sup_inside_window(dom, local_levels(dom, max_side), all_shifts(dom.dim()), [&](const DyadicPartition& part) {
    Eigen::ArrayXd out(part.cube_count());
    for (Index id = 0; id < part.cube_count(); ++id) {
      const Cube q = part.cube(id);
      if (!q.inside_window(dom)) {
        out[id] = 0.0;
        continue;
      }
      out[id] = indicator_norm(q, p, w) * indicator_norm(q, conj, sigma) / q.volume();
    }
    return out;
  });
}

MuckenhouptReport tilde_a_constant(const Weight& w, const VariableExponent& p, std::optional<double> max_side) {
  if (!(p.p_minus() > 1.0)) throw std::invalid_argument("tilde A constant needs p_- > 1");
  const Domain& dom = w.domain();
  const double vol = dom.cell_volume();
  const Eigen::ArrayXd& v = w.values().values();
  const Eigen::ArrayXd& pv = p.values().values();
  return sup_inside_window(
      dom, levels_between(dom, dom.step(), max_side.value_or(dom.half_width())), {{0, 0}},
      [&](const DyadicPartition& part) {
        Eigen::ArrayXd out(part.cube_count());
        for (Index id = 0; id < part.cube_count(); ++id) {
          const Cube q = part.cube(id);
          if (!q.inside_window(dom)) {
            out[id] = 0.0;
            continue;
          }
          double mass = 0.0;
          ModularEquation inverse;
          for_each_point(dom, q, [&](Index k) {
            mass += v[k] * vol;
            inverse.add(1.0 / v[k], 1.0 / (pv[k] - 1.0), vol);
          });
          const double pq = mean_exponent(p, q);
          out[id] = std::pow(q.volume(), -pq) * mass * inverse.solve_newton();
        }
        return out;
      });
}

double q_w_estimate(const WeightFactory& w, const Domain& domain, double threshold, double cap, double tolerance) {
  auto stable = [&](double p) {
    return two_resolution(domain, [&](const Domain& d) { return a_loc_p_constant(w(d), p).constant; }, threshold)
        .stable;
  };
  if (!stable(cap)) throw NumericError("not in A^loc_infty numerically");
  double lo = 1.0;
  double hi = cap;
  if (stable(lo + tolerance)) return lo + tolerance;
  lo += tolerance;
  while (hi - lo > tolerance) {
    const double mid = 0.5 * (lo + hi);
    (stable(mid) ? hi : lo) = mid;
  }
  return hi;
}

}  // namespace varhardy
