#include "varhardy/exponent.hpp"

#include <algorithm>
#include <cmath>

#include "preset_parse.hpp"

namespace varhardy {

VariableExponent::VariableExponent(GridFunction values, std::optional<double> p_infty)
    : values_(std::move(values)), p_infty_(p_infty) {
  p_minus_ = values_.values().minCoeff();
  p_plus_ = values_.values().maxCoeff();
  if (!(p_minus_ > 0.0)) throw std::invalid_argument("exponent must be positive");
  if (p_infty_ && !(*p_infty_ > 0.0)) throw std::invalid_argument("p_infty must be positive");
}

ExponentBounds bounds(const VariableExponent& p) { return {p.p_minus(), p.p_plus()}; }

double lh0_constant(const VariableExponent& p) {
  const Domain& dom = p.domain();
  const double h = dom.step();
  const Index n = dom.per_axis();
  const Index reach = std::min<Index>(static_cast<Index>(std::floor(0.5 / h)), n - 1);
  double best = 0.0;
  if (dom.dim() == 1) {
    const Eigen::ArrayXd& v = p.values().values();
    for (Index d = 1; d <= reach; ++d) {
      const double diff = (v.tail(n - d) - v.head(n - d)).abs().maxCoeff();
      best = std::max(best, diff * std::log(1.0 / (d * h)));
    }
    return best;
  }
  using RowMat = Eigen::Array<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
  const Eigen::Map<const RowMat> m(p.values().values().data(), n, n);
  for (Index d0 = 0; d0 <= reach; ++d0) {
    for (Index d1 = -reach; d1 <= reach; ++d1) {
      if (d0 == 0 && d1 <= 0) continue;
      const double dist = h * std::hypot(static_cast<double>(d0), static_cast<double>(d1));
      if (dist > 0.5) continue;
      const Index rows = n - d0;
      const Index cols = n - std::abs(d1);
      const Index c_src = d1 >= 0 ? 0 : -d1;
      const Index c_dst = d1 >= 0 ? d1 : 0;
      const double diff = (m.block(d0, c_dst, rows, cols) - m.block(0, c_src, rows, cols)).abs().maxCoeff();
      best = std::max(best, diff * std::log(1.0 / dist));
    }
  }
  return best;
}

double lhinf_constant(const VariableExponent& p) {
  if (!p.p_infty()) throw std::invalid_argument("p_infty not declared");
  const Domain& dom = p.domain();
  double best = 0.0;
  for (Index k = 0; k < dom.size(); ++k) {
    const double r = dom.point(k).norm();
    best = std::max(best, std::abs(p[k] - *p.p_infty()) * std::log(std::exp(1.0) + r));
  }
  return best;
}

VariableExponent dual_exponent(const VariableExponent& p) {
  if (!(p.p_minus() > 1.0)) throw std::invalid_argument("dual exponent needs p_- > 1");
  const Eigen::ArrayXd& v = p.values().values();
  std::optional<double> inf;
  if (p.p_infty() && *p.p_infty() > 1.0) inf = *p.p_infty() / (*p.p_infty() - 1.0);
  return VariableExponent(GridFunction(p.domain(), v / (v - 1.0)), inf);
}

double mean_exponent(const VariableExponent& p, const Cube& e) {
  const Domain& dom = p.domain();
  GridFunction recip(dom, p.values().values().inverse());
  const CubeIntegral part = quadrature(recip, e);
  if (part.empty) throw std::invalid_argument("cube does not meet the window");
  const AxisRange r0 = e.lattice_range(dom, 0);
  const AxisRange r1 = dom.dim() > 1 ? e.lattice_range(dom, 1) : AxisRange{0, 1};
  const double count = static_cast<double>(r0.count() * r1.count());
  return count * dom.cell_volume() / part.value;
}

GridFunction s_exponent(const VariableExponent& p) {
  if (!p.p_infty()) throw std::invalid_argument("p_infty not declared");
  const double inv_inf = 1.0 / *p.p_infty();
  Eigen::ArrayXd recip = (inv_inf - p.values().values().inverse()).abs();
  Eigen::ArrayXd s = (recip > 1.0 / kInfiniteExponent).select(recip.inverse(), kInfiniteExponent);
  return {p.domain(), std::move(s)};
}

double s_integrability(const VariableExponent& p, double gamma, const GridFunction& w) {
  const GridFunction s = s_exponent(p);
  const Eigen::ArrayXd integrand = (s.values() / p.p_minus() * std::log(gamma)).exp() * w.values();
  return integrand.sum() * p.domain().cell_volume();
}

ExponentFactory exponent_preset(const std::string& name) {
  const detail::PresetKey key = detail::split_preset(name);
  if (key.head == "const") {
    const double v = detail::parse_number(key, 0);
    if (!(v > 0.0)) throw PresetError("exponent preset '" + name + "': value must be positive");
    return [v](const Domain& d) { return VariableExponent(GridFunction::constant(d, v), v); };
  }
  if (key.head == "paper91" && key.args.empty()) {
    return [](const Domain& d) {
      return VariableExponent(
          GridFunction::sample(d, [](const Point& x) { return std::max(0.5, std::min(1.0, x.norm())); }), 1.0);
    };
  }
  if (key.head == "lhdecay") {
    const double a = detail::parse_number(key, 0);
    if (!(a > 0.0)) throw PresetError("exponent preset '" + name + "': base must be positive");
    return [a](const Domain& d) {
      return VariableExponent(
          GridFunction::sample(d, [a](const Point& x) { return a + 1.0 / std::log(std::exp(1.0) + x.norm()); }),
          a);
    };
  }
  if (key.head == "sin2" && key.args.empty()) {
    return [](const Domain& d) {
      return VariableExponent(GridFunction::sample(d, [](const Point& x) {
        const double s = std::sin(x.norm());
        return 2.0 + s * s;
      }));
    };
  }
  throw PresetError("unknown exponent preset '" + name + "'");
}

}  // namespace varhardy
