#include <doctest.h>

#include <cmath>
#include <random>

#include "varhardy/hardy.hpp"
#include "varhardy/lebesgue.hpp"

using namespace varhardy;

namespace {

GridFunction smooth_bump(const Domain& d, const Point& c, double r, double amp = 1.0) {
  return GridFunction::sample(d, [=](const Point& x) {
    const double t = (x - c).squaredNorm() / (r * r);
    return t < 1.0 ? amp * std::exp(1.0 - 1.0 / (1.0 - t)) : 0.0;
  });
}

bool pointwise_le(const GridFunction& a, const GridFunction& b, double tol = 1e-10) {
  return ((a.values() - b.values()) <= tol * (1.0 + b.values().abs())).all();
}

// Least-squares slope of log M(x) against log |x| along the positive first axis.
double ray_slope(const GridFunction& m, double lo, double hi) {
  const Domain& d = m.domain();
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  int count = 0;
  for (Index i = d.half_count(); i < d.per_axis(); ++i) {
    const double r = d.coord(i);
    if (r < lo || r > hi) continue;
    const double v = m[d.flat(i, d.dim() > 1 ? d.half_count() : 0)];
    const double lx = std::log(r), ly = std::log(v);
    sx += lx;
    sy += ly;
    sxx += lx * lx;
    sxy += lx * ly;
    ++count;
  }
  return (count * sxy - sx * sy) / (count * sxx - sx * sx);
}

// Independent maximal-function oracle: plain convolutions, then brute-force ball sup.
GridFunction reference_grand(const GridFunction& f, const TestDictionary& dict, GrandMode mode) {
  const Domain& d = f.domain();
  const std::size_t used = mode == GrandMode::m0 ? dict.core_size : dict.members.size();
  Eigen::ArrayXd out = Eigen::ArrayXd::Zero(d.size());
  for (int j = 0; j <= d.level() - 2; ++j) {
    const double t = std::ldexp(1.0, -j);
    Eigen::ArrayXd best = Eigen::ArrayXd::Zero(d.size());
    for (std::size_t i = 0; i < used; ++i)
      best = best.max(convolve(f, rescale_mollifier(dict.members[i], t)).values().abs());
    if (mode == GrandMode::mn) {
      Eigen::ArrayXd ball = Eigen::ArrayXd::Zero(d.size());
      for (Index x = 0; x < d.size(); ++x)
        for (Index z = 0; z < d.size(); ++z)
          if ((d.point(z) - d.point(x)).norm() < t) ball[x] = std::max(ball[x], best[z]);
      best = ball;
    }
    out = out.max(best);
  }
  return {d, out};
}

}  // namespace

TEST_CASE("dictionary construction") {
  const Domain d(1, 8.0, 8);
  const TestDictionary a = build_dictionary(d, 2, DictionaryVariant::small, 12, 42);
  const TestDictionary b = build_dictionary(d, 2, DictionaryVariant::small, 12, 42);
  REQUIRE(a.members.size() == 12);
  CHECK(a.core_size == 12);
  CHECK(a.nondegenerate);
  for (std::size_t i = 0; i < a.members.size(); ++i) CHECK((a.members[i].values() == b.members[i].values()).all());
  const TestDictionary other = build_dictionary(d, 2, DictionaryVariant::small, 12, 7);
  CHECK((other.members.back().values() != a.members.back().values()).any());

  // The first member is the canonical bump, rescaled to meet the derivative bound.
  const GridFunction canonical = smooth_bump(d, Point(0, 0), 1.0);
  const double scale = a.members[0].max_abs() / canonical.max_abs();
  CHECK((a.members[0].values() - scale * canonical.values()).abs().maxCoeff() < 1e-12);

  // Independent forward-difference check of all derivatives up to order N + 1.
  const double h = d.step();
  for (const GridFunction& g : a.members) {
    Eigen::ArrayXd v = g.values();
    for (int k = 0; k <= a.order + 1; ++k) {
      CHECK(v.abs().maxCoeff() <= 1.0);
      for (Index i = 0; i < v.size(); ++i)
        if (std::abs(d.coord(i)) > 1.0 + (k + 1) * h * 1.5) CHECK(v[i] == 0.0);
      Eigen::ArrayXd next = Eigen::ArrayXd::Zero(v.size());
      next.head(v.size() - 1) = (v.tail(v.size() - 1) - v.head(v.size() - 1)) / h;
      v = next;
    }
  }
  CHECK(derivative_scan(a.members[0], 3, 1.0).sup == doctest::Approx(0.9));
  CHECK_THROWS_AS(build_dictionary(d, 2, DictionaryVariant::small, 3), std::invalid_argument);
  CHECK_THROWS_AS(build_dictionary(d, 2, DictionaryVariant::large, 12, 42, 8.0), std::invalid_argument);
}

TEST_CASE("large dictionary extends the small one") {
  const Domain d(2, 2.0, 5);
  const TestDictionary small = build_dictionary(d, 1, DictionaryVariant::small, 8, 42, 1.5);
  const TestDictionary large = build_dictionary(d, 1, DictionaryVariant::large, 8, 42, 1.5);
  REQUIRE(large.core_size == small.members.size());
  CHECK(large.members.size() > small.members.size());
  CHECK(large.radius == 1.5);
  for (std::size_t i = 0; i < small.members.size(); ++i)
    CHECK((large.members[i].values() == small.members[i].values()).all());
  for (std::size_t i = small.members.size(); i < large.members.size(); ++i) {
    const DerivativeScan s = derivative_scan(large.members[i], 2, 1.5);
    CHECK(s.supported);
    CHECK(s.sup <= 0.9 + 1e-12);
  }
}

TEST_CASE("grand maximal functions match a direct evaluation") {
  const Domain d(1, 2.0, 5);
  const TestDictionary dict = build_dictionary(d, 1, DictionaryVariant::large, 5, 3, 1.5);
  std::mt19937_64 rng(1);
  std::normal_distribution<double> z;
  const GridFunction f = GridFunction::sample(d, [&](const Point&) { return z(rng); });
  for (GrandMode mode : {GrandMode::m0, GrandMode::mbar0, GrandMode::mn}) {
    const GridFunction got = grand_maximal(f, dict, mode);
    const GridFunction want = reference_grand(f, dict, mode);
    CHECK((got.values() - want.values()).abs().maxCoeff() < 1e-10 * want.max_abs());
  }
}

TEST_CASE("pointwise chain and sublinearity") {
  const Domain d(2, 2.0, 5);
  const TestDictionary dict = build_dictionary(d, 1, DictionaryVariant::large, 6, 42, 1.5);
  std::mt19937_64 rng(4);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  const GridFunction f = smooth_bump(d, Point(0.3, -0.2), 0.7) - smooth_bump(d, Point(-0.5, 0.4), 0.3, 2.0);
  const GridFunction g = GridFunction::sample(d, [&](const Point& x) { return x.norm() < 1.0 ? u(rng) : 0.0; });
  const GridFunction m0 = grand_maximal(f, dict, GrandMode::m0);
  const GridFunction mbar = grand_maximal(f, dict, GrandMode::mbar0);
  const GridFunction mn = grand_maximal(f, dict, GrandMode::mn);
  CHECK(pointwise_le(m0, mbar));
  CHECK(pointwise_le(mbar, mn));
  CHECK(pointwise_le(grand_maximal(f + g, dict, GrandMode::mn), mn + grand_maximal(g, dict, GrandMode::mn)));
}

TEST_CASE("support propagation") {
  const Domain d(1, 8.0, 7);
  const TestDictionary dict = build_dictionary(d, 2, DictionaryVariant::small);
  const double rho = 0.5;
  const GridFunction f = smooth_bump(d, Point(0, 0), rho);
  const GridFunction m = grand_maximal(f, dict, GrandMode::m0);
  for (Index i = 0; i < d.size(); ++i)
    if (std::abs(d.coord(i)) >= rho + dict.radius + 2 * d.step()) CHECK(m[i] < 1e-12 * m.max_abs());
  CHECK(m.max_abs() > 0.0);
}

TEST_CASE("grand maximal of a bump is comparable to the bump at its peak") {
  const Domain d(1, 8.0, 8);
  const TestDictionary dict = build_dictionary(d, 2, DictionaryVariant::large);
  for (double r : {0.25, 0.5, 1.0, 2.0}) {
    const GridFunction f = smooth_bump(d, Point(0.25, 0), r);
    const GridFunction m = grand_maximal(f, dict, GrandMode::mn);
    Index at = 0;
    f.values().maxCoeff(&at);
    const double ratio = m[at] / f[at];
    CHECK(ratio >= 0.5);
    CHECK(ratio <= 4.0);
  }
}

TEST_CASE("grand maximal of a delta decays like |x|^-n") {
  SUBCASE("line") {
    const Domain d(1, 8.0, 9);
    const TestDictionary dict = build_dictionary(d, 2, DictionaryVariant::small);
    const double slope = ray_slope(grand_maximal(discrete_delta(d), dict, GrandMode::m0), 4 * d.step(), 0.25);
    MESSAGE("slope " << slope);
    CHECK(std::abs(slope + 1.0) <= 0.15);
  }
  SUBCASE("plane") {
    const Domain d(2, 2.0, 6);
    const TestDictionary dict = build_dictionary(d, 2, DictionaryVariant::small, 12, 42, 1.5);
    const double slope = ray_slope(grand_maximal(discrete_delta(d), dict, GrandMode::m0), 4 * d.step(), 0.25);
    MESSAGE("slope " << slope);
    CHECK(std::abs(slope + 2.0) <= 0.15);
  }
}

TEST_CASE("Hardy norm") {
  const Domain d(1, 8.0, 8);
  const TestDictionary dict = build_dictionary(d, 2, DictionaryVariant::large);
  const VariableExponent two = exponent_preset("const:2")(d);
  const Weight one = Weight::unit(d);
  CHECK(hardy_norm(GridFunction::zeros(d), two, one, dict) == 0.0);
  double lo = INFINITY, hi = 0.0;
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> c(-4.0, 4.0), r(0.1, 2.0);
  for (int i = 0; i < 20; ++i) {
    const GridFunction f = smooth_bump(d, Point(c(rng), 0), r(rng));
    const double ratio = hardy_norm(f, two, one, dict) / luxemburg_norm(f, two, one);
    lo = std::min(lo, ratio);
    hi = std::max(hi, ratio);
  }
  MESSAGE("Hardy / L2 ratio band [" << lo << ", " << hi << "]");
  CHECK(lo >= 0.5);
  CHECK(hi / lo <= 4.0);
}

TEST_CASE("grand and radial Hardy norms are equivalent across resolutions") {
  auto worst = [](const Domain& d) {
    const TestDictionary small = build_dictionary(d, 2, DictionaryVariant::small);
    const TestDictionary large = build_dictionary(d, 2, DictionaryVariant::large);
    const VariableExponent p = exponent_preset("lhdecay:2")(d);
    const Weight w = weight_preset("power:1")(d);
    double out = 0.0;
    for (double r : {0.1, 0.5, 1.5}) {
      const GridFunction f = smooth_bump(d, Point(-1.0, 0), r) - smooth_bump(d, Point(1.0, 0), r / 2);
      out = std::max(out, luxemburg_norm(grand_maximal(f, large, GrandMode::mn), p, w) /
                              luxemburg_norm(grand_maximal(f, small, GrandMode::m0), p, w));
    }
    return out;
  };
  const TwoResolution t = two_resolution(Domain(1, 8.0, 7), worst);
  CHECK(t.stable);
  CHECK(t.value_m >= 1.0);
}

TEST_CASE("order of the grand maximal function") {
  CHECK(capital_n(1, 1.0, 1.0) == 2);
  CHECK(capital_n(2, 1.0, 3.0) == 2);
  CHECK(capital_n(1, 1.5, 0.5) == 4);
  CHECK(capital_n(2, 1.5, 0.5) == 6);
  int previous = capital_n(2, 1.3, 0.2);
  for (double pm = 0.25; pm <= 3.0; pm += 0.05) {
    const int n = capital_n(2, 1.3, pm);
    CHECK(n <= previous);
    previous = n;
  }
  CHECK_THROWS_AS(capital_n(1, 0.5, 1.0), std::invalid_argument);
}

TEST_CASE("integrability of |x|^(-n p) w near the origin") {
  const Domain line(1, 8.0, 9);
  CHECK(dirac_membership_check(exponent_preset("paper91"), weight_preset("const:1"), line).pass);
  CHECK(dirac_membership_check(exponent_preset("const:2"), weight_preset("powexp:2"), line).pass);
  CHECK(dirac_membership_check(exponent_preset("const:2"), weight_preset("ratpow:2,3"), line).pass);
  const Report bad = dirac_membership_check(exponent_preset("const:2"), weight_preset("const:1"), line);
  CHECK_FALSE(bad.pass);
  CHECK(bad.get("ratio") >= 2.0);
  const Domain plane(2, 2.0, 6);
  CHECK(dirac_membership_check(exponent_preset("const:2"), weight_preset("powexp:3"), plane).pass);
  CHECK_FALSE(dirac_membership_check(exponent_preset("const:2"), weight_preset("const:1"), plane).pass);
}
