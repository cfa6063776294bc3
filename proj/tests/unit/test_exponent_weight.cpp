#include <doctest.h>

#include <cmath>
#include <string>

#include "varhardy/exponent.hpp"
#include "varhardy/weight.hpp"

using namespace varhardy;

namespace {

VariableExponent from_profile(const Domain& d, double (*fn)(double), std::optional<double> inf = std::nullopt) {
  return VariableExponent(GridFunction::sample(d, [fn](const Point& x) { return fn(x.norm()); }), inf);
}

}  // namespace

TEST_CASE("exponent bounds") {
  Domain d(1, 8.0, 8);
  auto two = exponent_preset("const:2")(d);
  CHECK(bounds(two).p_minus == 2.0);
  CHECK(bounds(two).p_plus == 2.0);
  auto ex = exponent_preset("paper91")(d);
  CHECK(ex.p_minus() == 0.5);
  CHECK(ex.p_plus() == 1.0);
  auto s2 = exponent_preset("sin2")(d);
  // Dense sampling oracle of 2 + sin^2 on [0, 8*sqrt(1)].
  double lo = 10, hi = 0;
  for (int i = 0; i <= 100000; ++i) {
    const double s = std::sin(8.0 * i / 100000.0);
    lo = std::min(lo, 2 + s * s);
    hi = std::max(hi, 2 + s * s);
  }
  CHECK(std::abs(s2.p_minus() - lo) <= d.step());
  CHECK(std::abs(s2.p_plus() - hi) <= d.step());
  CHECK_THROWS(VariableExponent(GridFunction::constant(d, 0.0)));
}

TEST_CASE("log-Hoelder constants") {
  Domain d(1, 2.0, 6);
  CHECK(lh0_constant(exponent_preset("const:3")(d)) == 0.0);

  auto lip = from_profile(d, [](double r) { return 2.0 + std::min(1.0, r); });
  // Brute force over every lattice pair.
  double oracle = 0.0;
  for (Index i = 0; i < d.per_axis(); ++i)
    for (Index j = i + 1; j < d.per_axis(); ++j) {
      const double dist = d.coord(j) - d.coord(i);
      if (dist > 0.5) break;
      oracle = std::max(oracle, std::abs(lip[i] - lip[j]) * std::log(1.0 / dist));
    }
  CHECK(lh0_constant(lip) == doctest::Approx(oracle).epsilon(1e-12));

  auto step = [](const Domain& dom) {
    return from_profile(dom, [](double r) { return r < 0.3 ? 2.0 : 3.0; });
  };
  CHECK(lh0_constant(step(d.refined())) > lh0_constant(step(d)));

  Domain wide(1, 8.0, 7);
  CHECK(lhinf_constant(exponent_preset("const:2")(wide)) == 0.0);
  CHECK(lhinf_constant(exponent_preset("lhdecay:2")(wide)) == doctest::Approx(1.0).epsilon(1e-12));
  auto decay = from_profile(wide, [](double r) { return 2.0 + std::exp(-r); }, 2.0);
  double dense = 0.0;
  for (int i = 0; i <= 200000; ++i) {
    const double r = 8.0 * i / 200000.0;
    dense = std::max(dense, std::exp(-r) * std::log(std::exp(1.0) + r));
  }
  CHECK(std::abs(lhinf_constant(decay) - dense) <= wide.step());

  // Lipschitz exponents give resolution-stable constants.
  auto smooth = [](const Domain& dom) { return from_profile(dom, [](double r) { return 2.0 + std::sin(r); }); };
  const double ratio = lh0_constant(smooth(d.refined())) / lh0_constant(smooth(d));
  CHECK(ratio >= 0.8);
  CHECK(ratio <= 1.25);
}

TEST_CASE("lh0 in two dimensions matches a pair scan") {
  Domain d(2, 1.0, 3);
  auto p = from_profile(d, [](double r) { return 2.0 + std::min(1.0, r); });
  double oracle = 0.0;
  for (Index a = 0; a < d.size(); ++a)
    for (Index b = 0; b < d.size(); ++b) {
      const double dist = (d.point(a) - d.point(b)).norm();
      if (dist == 0.0 || dist > 0.5) continue;
      oracle = std::max(oracle, std::abs(p[a] - p[b]) * std::log(1.0 / dist));
    }
  CHECK(lh0_constant(p) == doctest::Approx(oracle).epsilon(1e-12));
}

TEST_CASE("dual exponents") {
  Domain d(1, 4.0, 6);
  auto two = exponent_preset("const:2")(d);
  CHECK((dual_exponent(two).values().values() - 2.0).abs().maxCoeff() == 0.0);
  auto four = exponent_preset("const:4")(d);
  CHECK(dual_exponent(four)[5] == doctest::Approx(4.0 / 3.0));
  auto s2 = exponent_preset("sin2")(d);
  auto dd = dual_exponent(dual_exponent(s2));
  CHECK((dd.values().values() - s2.values().values()).abs().maxCoeff() <= 1e-12);
  const auto conj = dual_exponent(s2);
  CHECK((s2.values().values().inverse() + conj.values().values().inverse() - 1.0).abs().maxCoeff() <= 1e-12);
  CHECK(conj.p_minus() == doctest::Approx(s2.p_plus() / (s2.p_plus() - 1.0)).epsilon(1e-12));
  CHECK_THROWS(dual_exponent(exponent_preset("paper91")(d)));
}

TEST_CASE("mean exponent") {
  Domain d(1, 2.0, 5);
  const Cube unit{1, 0, {0, 0}, {0, 0}};
  CHECK(mean_exponent(exponent_preset("const:3")(d), unit) == doctest::Approx(3.0));
  VariableExponent split(GridFunction::sample(d, [](const Point& x) { return x[0] < 0.5 ? 2.0 : 4.0; }));
  CHECK(mean_exponent(split, unit) == doctest::Approx(1.0 / (0.5 * 0.5 + 0.5 * 0.25)));
  auto s2 = exponent_preset("sin2")(d);
  for (const Cube& q : enumerate_cubes(d, 1.0, {{0, 0}})) {
    const double pe = mean_exponent(s2, q);
    CHECK(pe >= s2.p_minus() - 1e-12);
    CHECK(pe <= s2.p_plus() + 1e-12);
  }
}

TEST_CASE("s exponent") {
  Domain d(1, 8.0, 6);
  auto same = exponent_preset("const:4")(d);
  CHECK((s_exponent(same).values() == kInfiniteExponent).all());
  VariableExponent two(GridFunction::constant(d, 2.0), 4.0);
  CHECK(s_exponent(two)[0] == doctest::Approx(4.0));
  auto lh = exponent_preset("lhdecay:2")(d);
  const double integral = s_integrability(lh, 0.1, GridFunction::constant(d, 1.0));
  CHECK(std::isfinite(integral));
  // Quadrature oracle: gamma^(s/p_-) with s = 2 (2 + c) / c, c = 1/log(e + |x|).
  double oracle = 0.0;
  for (Index i = 0; i < d.per_axis(); ++i) {
    const double c = 1.0 / std::log(std::exp(1.0) + std::abs(d.coord(i)));
    const double s = 2.0 * (2.0 + c) / c;
    oracle += std::pow(0.1, s / lh.p_minus()) * d.step();
  }
  CHECK(integral == doctest::Approx(oracle).epsilon(1e-10));
}

TEST_CASE("exponent presets report bad keys") {
  CHECK_THROWS_AS(exponent_preset("const:abc"), PresetError);
  CHECK_THROWS_AS(exponent_preset("nope"), PresetError);
  try {
    exponent_preset("lhdecay:");
  } catch (const PresetError& e) {
    CHECK(std::string(e.what()).find("lhdecay:") != std::string::npos);
  }
}

TEST_CASE("weights") {
  Domain d(1, 4.0, 6);
  CHECK_THROWS(Weight(GridFunction::constant(d, 0.0)));
  auto one = Weight::unit(d);
  CHECK(one.mass() == doctest::Approx(8.0));
  auto p2 = exponent_preset("const:2")(d);
  CHECK((dual_weight(one, p2).values().values() - 1.0).abs().maxCoeff() == 0.0);
  auto w = weight_preset("power:3")(d);
  CHECK((dual_weight(w, p2).values().values() * w.values().values() - 1.0).abs().maxCoeff() <= 1e-12);
  auto s2 = exponent_preset("sin2")(d);
  auto back = dual_weight(dual_weight(w, s2), dual_exponent(s2));
  CHECK(((back.values().values() / w.values().values()) - 1.0).abs().maxCoeff() <= 1e-10);
  CHECK_THROWS(dual_weight(w, exponent_preset("paper91")(d)));
}

TEST_CASE("weight presets") {
  Domain d(1, 4.0, 6);
  const Index origin = d.half_count();
  CHECK(weight_preset("const:2.5")(d)[7] == 2.5);
  CHECK(weight_preset("power:2")(d)[origin + 64] == doctest::Approx(4.0));
  CHECK(weight_preset("exp:1")(d)[origin + 64] == doctest::Approx(std::exp(1.0)));
  auto singular = weight_preset("absp:-0.9")(d);
  CHECK(singular[origin] == doctest::Approx(std::pow(0.5 * d.step(), -0.9)));
  CHECK(weight_preset("ratpow:2,3")(d)[origin + 64] == doctest::Approx(0.5));
  CHECK(weight_preset("powexp:2")(d)[origin + 64] == doctest::Approx(std::exp(1.0)));
  auto tiny = weight_preset("absp:60")(d);
  CHECK(tiny[origin] == kWeightFloor);
  CHECK_THROWS_AS(weight_preset("power:x"), PresetError);
  CHECK_THROWS_AS(weight_preset("const:-1"), PresetError);
  CHECK_THROWS_AS(weight_preset("ratpow:1"), PresetError);
}
