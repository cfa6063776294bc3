#include "varhardy/weight.hpp"

#include <algorithm>
#include <cmath>

#include "preset_parse.hpp"

namespace varhardy {

Weight::Weight(GridFunction values) : values_(std::move(values)) {
  if (!(values_.values() > 0.0).all()) throw std::invalid_argument("weight must be strictly positive");
}

Weight dual_weight(const Weight& w, const VariableExponent& p) {
  if (w.domain() != p.domain()) throw std::invalid_argument("domain mismatch");
  if (!(p.p_minus() > 1.0)) throw std::invalid_argument("dual weight needs p_- > 1");
  const Eigen::ArrayXd expo = -1.0 / (p.values().values() - 1.0);
  return Weight(GridFunction(w.domain(), (expo * w.values().values().log()).exp()));
}

double clamped_radius(const Point& x, const Domain& domain) { return std::max(x.norm(), 0.5 * domain.step()); }

namespace {

WeightFactory clamped(std::function<double(double)> profile) {
  return [profile = std::move(profile)](const Domain& d) {
    return Weight(GridFunction::sample(
        d, [&](const Point& x) { return std::max(kWeightFloor, profile(clamped_radius(x, d))); }));
  };
}

}  // namespace

WeightFactory weight_preset(const std::string& name) {
  const detail::PresetKey key = detail::split_preset(name);
  if (key.head == "const") {
    const double c = detail::parse_number(key, 0);
    if (!(c > 0.0)) throw PresetError("weight preset '" + name + "': constant must be positive");
    return [c](const Domain& d) { return Weight(GridFunction::constant(d, c)); };
  }
  if (key.head == "power") {
    const double mu = detail::parse_number(key, 0);
    return [mu](const Domain& d) {
      return Weight(GridFunction::sample(d, [mu](const Point& x) { return std::pow(1.0 + x.norm(), mu); }));
    };
  }
  if (key.head == "exp") {
    const double mu = detail::parse_number(key, 0);
    return [mu](const Domain& d) {
      return Weight(GridFunction::sample(d, [mu](const Point& x) { return std::exp(mu * x[0]); }));
    };
  }
  if (key.head == "absp") {
    const double alpha = detail::parse_number(key, 0);
    return clamped([alpha](double r) { return std::pow(r, alpha); });
  }
  if (key.head == "ratpow") {
    const double a = detail::parse_number(key, 0);
    const double b = detail::parse_number(key, 1);
    return clamped([a, b](double r) { return std::pow(r, a) / (1.0 + std::pow(r, b)); });
  }
  if (key.head == "powexp") {
    const double a = detail::parse_number(key, 0);
    return clamped([a](double r) { return std::pow(r, a) * std::exp(r); });
  }
  throw PresetError("unknown weight preset '" + name + "'");
}

}  // namespace varhardy
