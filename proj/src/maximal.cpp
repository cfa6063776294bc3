#include "varhardy/maximal.hpp"

#include <algorithm>
#include <cmath>

#include "varhardy/lebesgue.hpp"

namespace varhardy {

namespace {

using PerCube = std::function<Eigen::ArrayXd(const DyadicPartition&)>;

// Pointwise max over every (level, shift) pair of a per-cube quantity.
Eigen::ArrayXd sup_over_grids(const Domain& dom, const std::vector<int>& levels, const std::vector<Shift>& shifts,
                              const PerCube& per_cube) {
  Eigen::ArrayXd out = Eigen::ArrayXd::Zero(dom.size());
  for (int k : levels)
    for (const Shift& a : shifts) {
      const DyadicPartition part(dom, k, a);
      out = out.max(part.broadcast(per_cube(part)));
    }
  return out;
}

Eigen::ArrayXd cube_volumes(const DyadicPartition& part) {
  const double side = std::ldexp(1.0, -part.level());
  return Eigen::ArrayXd::Constant(part.cube_count(), std::pow(side, part.domain().dim()));
}

GridFunction zero_extended_sup(const GridFunction& f, const std::vector<int>& levels, const std::vector<Shift>& shifts) {
  const Domain& dom = f.domain();
  const Eigen::ArrayXd mass = f.values().abs() * dom.cell_volume();
  return {dom, sup_over_grids(dom, levels, shifts, [&](const DyadicPartition& part) {
            return Eigen::ArrayXd(part.sums(mass) / cube_volumes(part));
          })};
}

}  // namespace

double maximal_top_side(const Domain& domain) { return 4.0 * domain.half_width(); }

GridFunction hl_maximal(const GridFunction& f) {
  const Domain& dom = f.domain();
  return zero_extended_sup(f, levels_between(dom, dom.step(), maximal_top_side(dom)), all_shifts(dom.dim()));
}

GridFunction local_maximal(const GridFunction& f, double radius) {
  const Domain& dom = f.domain();
  if (radius < dom.step()) throw std::invalid_argument("radius below the grid step");
  return zero_extended_sup(f, levels_between(dom, dom.step(), radius), all_shifts(dom.dim()));
}

GridFunction grid_maximal(const GridFunction& f, const Shift& shift) {
  const Domain& dom = f.domain();
  for (int d = 0; d < dom.dim(); ++d)
    if (shift[d] < 0 || shift[d] > 2) throw std::invalid_argument("shift components must lie in {0,1,2}");
  return zero_extended_sup(f, levels_between(dom, dom.step(), maximal_top_side(dom)), {shift});
}

GridFunction powered_weighted_local_maximal(const GridFunction& f, const Weight& w, double u) {
  if (!(u > 0.0)) throw std::invalid_argument("power u must be positive");
  const Domain& dom = f.domain();
  if (w.domain() != dom) throw std::invalid_argument("domain mismatch");
  const Eigen::ArrayXd& wv = w.values().values();
  const Eigen::ArrayXd powered = (f.values() != 0.0).select((u * f.values().abs().log()).exp(), 0.0) * wv;
  const Eigen::ArrayXd sup = sup_over_grids(
      dom, levels_between(dom, dom.step(), 1.0), all_shifts(dom.dim()), [&](const DyadicPartition& part) {
        const Eigen::ArrayXd wq = part.sums(wv) / part.counts() * cube_volumes(part);
        return Eigen::ArrayXd(part.sums(powered) * dom.cell_volume() / wq);
      });
  return {dom, sup.pow(1.0 / u)};
}

GridFunction k_b_operator(const GridFunction& f, double decay) {
  if (!(decay > 0.0)) throw std::invalid_argument("decay B must be positive");
  const auto kernel = GridFunction::sample(f.domain(), [decay](const Point& y) { return std::exp(-decay * y.norm()); });
  return convolve(f, kernel);
}

GridFunction peak_majorant_convolution(const GridFunction& f, int j, double power, double decay) {
  if (j < 0) throw std::invalid_argument("j must be nonnegative");
  if (!(power > 0.0) || !(decay > 0.0)) throw std::invalid_argument("A and B must be positive");
  const Domain& dom = f.domain();
  const double scale = std::ldexp(1.0, j);
  const double amp = std::pow(scale, dom.dim());
  const auto kernel = GridFunction::sample(dom, [&](const Point& y) {
    const double r = y.norm();
    return amp * std::pow(1.0 + scale * r, -power) * std::exp(-decay * r);
  });
  return convolve(f, kernel);
}

MajorantDomination peak_majorant_domination(const GridFunction& f, int j, double power, double decay) {
  MajorantDomination out{peak_majorant_convolution(f, j, power, decay), 0.0};
  const GridFunction bound = k_b_operator(f.abs(), decay) + local_maximal(f);
  const double floor = 1e-12 * std::max(bound.max_abs(), 1e-300);
  for (Index k = 0; k < f.size(); ++k) {
    if (bound[k] <= floor) continue;
    out.constant = std::max(out.constant, std::abs(out.value[k]) / bound[k]);
  }
  return out;
}

GridFunction averaging_e_k(const GridFunction& f, int k) {
  const Domain& dom = f.domain();
  if (k > dom.level()) throw std::invalid_argument("scale below resolution");
  const DyadicPartition part(dom, k, {0, 0});
  Eigen::ArrayXd mean = part.sums(f.values()) / part.counts();
  // Cubes on which f is already constant keep their value bit for bit.
  Eigen::ArrayXd lo = Eigen::ArrayXd::Constant(part.cube_count(), INFINITY);
  Eigen::ArrayXd hi = Eigen::ArrayXd::Constant(part.cube_count(), -INFINITY);
  for (Index i = 0; i < f.size(); ++i) {
    const Index c = part.cube_of(i);
    lo[c] = std::min(lo[c], f[i]);
    hi[c] = std::max(hi[c], f[i]);
  }
  mean = (lo == hi).select(lo, mean);
  return {dom, part.broadcast(mean)};
}

GridFunction restricted_dyadic_maximal(const GridFunction& f, double r0, ScaleMode mode) {
  const Domain& dom = f.domain();
  const double h = dom.step();
  const double top = maximal_top_side(dom);
  if (r0 < h || r0 > top) throw std::invalid_argument("r0 outside [h, 4T]");
  const auto levels = mode == ScaleMode::below ? levels_between(dom, h, r0) : levels_between(dom, r0, top);
  return zero_extended_sup(f, levels, {{0, 0}});
}

Report boundedness_probe(const Operator& op, const VariableExponent& p, const Weight& w,
                         const std::vector<GridFunction>& family) {
  Report r;
  r.name = "boundedness";
  if (family.empty()) throw std::invalid_argument("empty test family");
  double worst = 0.0;
  int skipped = 0;
  int used = 0;
  for (const GridFunction& f : family) {
    const double base = luxemburg_norm(f, p, w);
    if (base == 0.0) {
      ++skipped;
      continue;
    }
    worst = std::max(worst, luxemburg_norm(op(f), p, w) / base);
    ++used;
  }
  if (skipped > 0) r.notes.push_back("skipped zero-norm members");
  r.set("ratio", worst);
  r.set("members", used);
  r.set("skipped", skipped);
  r.require(used > 0, "no nonzero family member");
  return r;
}

Report vector_valued_maximal_ratio(const std::vector<GridFunction>& family, double q, const VariableExponent& p,
                                   const Weight& w) {
  if (!(q > 1.0)) throw std::invalid_argument("q must exceed 1");
  if (family.empty()) throw std::invalid_argument("empty family");
  const Domain& dom = family.front().domain();
  Eigen::ArrayXd lhs = Eigen::ArrayXd::Zero(dom.size());
  Eigen::ArrayXd rhs = Eigen::ArrayXd::Zero(dom.size());
  for (const GridFunction& f : family) {
    lhs += local_maximal(f).values().pow(q);
    rhs += f.values().abs().pow(q);
  }
  Report r;
  r.name = "vector_valued_maximal";
  const double top = luxemburg_norm(GridFunction(dom, lhs.pow(1.0 / q)), p, w);
  const double bottom = luxemburg_norm(GridFunction(dom, rhs.pow(1.0 / q)), p, w);
  r.set("lhs", top);
  r.set("rhs", bottom);
  r.require(bottom > 0.0, "family has zero norm");
  r.set("ratio", bottom > 0.0 ? top / bottom : 0.0);
  return r;
}

}  // namespace varhardy
