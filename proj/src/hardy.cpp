#include "varhardy/hardy.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <numbers>
#include <random>

#include "varhardy/lebesgue.hpp"

namespace varhardy {

namespace {

using RowMat = Eigen::Array<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

double bump(double r2) { return r2 < 1.0 ? std::exp(1.0 - 1.0 / (1.0 - r2)) : 0.0; }

// Forward difference along one axis divided by h; the last slice is zeroed.
Eigen::ArrayXd forward_difference(const Domain& dom, const Eigen::ArrayXd& v, int axis) {
  const Index n = dom.per_axis();
  const double inv_h = 1.0 / dom.step();
  Eigen::ArrayXd out = Eigen::ArrayXd::Zero(v.size());
  if (dom.dim() == 1) {
    out.head(n - 1) = (v.tail(n - 1) - v.head(n - 1)) * inv_h;
    return out;
  }
  Eigen::Map<const RowMat> src(v.data(), n, n);
  Eigen::Map<RowMat> dst(out.data(), n, n);
  if (axis == 0)
    dst.topRows(n - 1) = (src.bottomRows(n - 1) - src.topRows(n - 1)) * inv_h;
  else
    dst.leftCols(n - 1) = (src.rightCols(n - 1) - src.leftCols(n - 1)) * inv_h;
  return out;
}

// Sliding maximum over the open window |offset| < half + 1 cells along a line.
void sliding_max_line(const double* in, double* out, Index n, Index stride, Index half) {
  std::deque<Index> dq;
  Index next = 0;
  for (Index i = 0; i < n; ++i) {
    const Index hi = std::min(n - 1, i + half);
    for (; next <= hi; ++next) {
      while (!dq.empty() && in[dq.back() * stride] <= in[next * stride]) dq.pop_back();
      dq.push_back(next);
    }
    while (dq.front() < i - half) dq.pop_front();
    out[i * stride] = in[dq.front() * stride];
  }
}

// sup over lattice z with |z - x| < t of g(z).
Eigen::ArrayXd ball_max(const Domain& dom, const Eigen::ArrayXd& g, double t) {
  const double cells = t / dom.step();
  const Index reach = static_cast<Index>(std::ceil(cells)) - 1;
  const Index n = dom.per_axis();
  Eigen::ArrayXd out(g.size());
  if (dom.dim() == 1) {
    sliding_max_line(g.data(), out.data(), n, 1, reach);
    return out;
  }
  // Row-wise maxima for every half-width needed by the disk, then a column sweep.
  std::vector<Index> width(reach + 1);
  for (Index dy = 0; dy <= reach; ++dy) {
    Index w = 0;
    while (static_cast<double>((w + 1) * (w + 1) + dy * dy) < cells * cells) ++w;
    width[dy] = w;
  }
  std::vector<Index> distinct = width;
  std::sort(distinct.begin(), distinct.end());
  distinct.erase(std::unique(distinct.begin(), distinct.end()), distinct.end());
  std::vector<Eigen::ArrayXd> rows(distinct.size(), Eigen::ArrayXd(g.size()));
  for (std::size_t s = 0; s < distinct.size(); ++s)
    for (Index i = 0; i < n; ++i) sliding_max_line(g.data() + i * n, rows[s].data() + i * n, n, 1, distinct[s]);
  auto slot = [&](Index w) { return std::lower_bound(distinct.begin(), distinct.end(), w) - distinct.begin(); };
  out.setConstant(-INFINITY);
  Eigen::Map<RowMat> dst(out.data(), n, n);
  for (Index dy = -reach; dy <= reach; ++dy) {
    const Eigen::Map<const RowMat> src(rows[slot(width[std::abs(dy)])].data(), n, n);
    const Index len = n - std::abs(dy);
    if (dy >= 0)
      dst.topRows(len) = dst.topRows(len).max(src.bottomRows(len));
    else
      dst.bottomRows(len) = dst.bottomRows(len).max(src.topRows(len));
  }
  return out;
}

using Profile = std::function<double(const Point&)>;

}  // namespace

DerivativeScan derivative_scan(const GridFunction& g, int order, double radius) {
  const Domain& dom = g.domain();
  DerivativeScan scan;
  const double slack = radius + (order + 1) * dom.step() * std::sqrt(2.0);
  auto visit = [&](const Eigen::ArrayXd& d) {
    const double s = d.abs().maxCoeff();
    scan.sup = std::max(scan.sup, s);
    for (Index k = 0; k < d.size(); ++k)
      if (d[k] != 0.0 && dom.point(k).norm() > slack) scan.supported = false;
  };
  if (dom.dim() == 1) {
    Eigen::ArrayXd d = g.values();
    for (int k = 0; k <= order; ++k) {
      visit(d);
      d = forward_difference(dom, d, 0);
    }
    return scan;
  }
  Eigen::ArrayXd along0 = g.values();
  for (int a = 0; a <= order; ++a) {
    Eigen::ArrayXd d = along0;
    for (int b = 0; a + b <= order; ++b) {
      visit(d);
      d = forward_difference(dom, d, 1);
    }
    along0 = forward_difference(dom, along0, 0);
  }
  return scan;
}

TestDictionary build_dictionary(const Domain& domain, int order, DictionaryVariant variant, int count,
                                std::uint64_t seed, double large_radius) {
  if (count < 4) throw std::invalid_argument("dictionary needs at least four members");
  if (order < 0) throw std::invalid_argument("order must be nonnegative");
  if (large_radius < 1.0 || large_radius >= domain.half_width())
    throw std::invalid_argument("dictionary radius must lie in [1, T)");
  const double pi = std::numbers::pi;
  const int dim = domain.dim();
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(-1.0, 1.0);

  auto scaled_bump = [](const Point& c, double s) {
    return [c, s](const Point& x) { return bump((x - c).squaredNorm() / (s * s)); };
  };
  auto modulated = [](Profile base, Point freq, double phase) {
    return [base = std::move(base), freq, phase](const Point& x) { return base(x) * std::cos(freq.dot(x) + phase); };
  };
  auto random_point = [&](double r) {
    Point c(unit(rng), dim > 1 ? unit(rng) : 0.0);
    return Point(c * r / std::sqrt(2.0));
  };
  auto perturbed = [&](double r) {
    std::array<double, 3> amp;
    std::array<Point, 3> freq;
    std::array<double, 3> phase;
    for (int i = 0; i < 3; ++i) {
      amp[i] = 0.3 * unit(rng);
      freq[i] = Point(unit(rng), dim > 1 ? unit(rng) : 0.0) * (3.0 * pi / r);
      phase[i] = pi * unit(rng);
    }
    const double s = r * (0.6 + 0.35 * std::abs(unit(rng)));
    const Point c = random_point(r - s);
    return [=](const Point& x) {
      double mod = 1.0;
      for (int i = 0; i < 3; ++i) mod += amp[i] * std::cos(freq[i].dot(x) + phase[i]);
      return bump((x - c).squaredNorm() / (s * s)) * mod;
    };
  };
  auto fixed_family = [&](double r) {
    std::vector<Profile> out;
    const Point origin(0.0, 0.0);
    out.push_back(scaled_bump(origin, r));
    out.push_back(modulated(scaled_bump(origin, r), Point(pi / r, 0.0), 0.0));
    out.push_back(modulated(scaled_bump(origin, r), Point(2.0 * pi / r, dim > 1 ? pi / r : 0.0), pi / 4));
    out.push_back(scaled_bump(Point(0.4 * r, 0.0), 0.5 * r));
    out.push_back(modulated(scaled_bump(Point(-0.3 * r, dim > 1 ? 0.2 * r : 0.0), 0.6 * r), Point(3.0 * pi / r, 0.0),
                            pi / 3));
    return out;
  };

  TestDictionary dict;
  dict.order = order;
  dict.variant = variant;
  dict.radius = 1.0;
  auto admit = [&](const Profile& profile, double r) {
    GridFunction g = GridFunction::sample(domain, profile);
    const double total = std::abs(quadrature(g));
    if (total <= 1e-3 * quadrature(g.abs())) return false;
    const DerivativeScan scan = derivative_scan(g, order + 1, r);
    if (!(scan.sup > 0.0) || !scan.supported) return false;
    g *= 0.9 / scan.sup;
    dict.members.push_back(std::move(g));
    dict.derivative_bound = std::max(dict.derivative_bound, 0.9);
    dict.nondegenerate = true;
    return true;
  };
  auto fill = [&](double r, std::size_t target) {
    for (const Profile& p : fixed_family(r)) {
      if (dict.members.size() >= target) return;
      admit(p, r);
    }
    for (int attempts = 0; dict.members.size() < target && attempts < 1000; ++attempts) admit(perturbed(r), r);
  };

  fill(1.0, static_cast<std::size_t>(count));
  dict.core_size = dict.members.size();
  if (variant == DictionaryVariant::large) {
    dict.radius = large_radius;
    fill(large_radius, dict.members.size() + std::max<std::size_t>(4, count / 3));
  }
  return dict;
}

std::vector<double> grand_scales(const Domain& domain) {
  std::vector<double> out;
  for (int j = 0; j <= domain.level() - 2; ++j) out.push_back(std::ldexp(1.0, -j));
  return out;
}

GridFunction grand_maximal(const GridFunction& f, const TestDictionary& dict, GrandMode mode) {
  const Domain& dom = f.domain();
  if (dict.members.empty()) throw std::invalid_argument("empty dictionary");
  if (dict.members.front().domain() != dom) throw std::invalid_argument("dictionary built on another domain");
  const std::size_t used = mode == GrandMode::m0 ? dict.core_size : dict.members.size();
  const Convolver conv(f);
  Eigen::ArrayXd out = Eigen::ArrayXd::Zero(dom.size());
  for (double t : grand_scales(dom)) {
    Eigen::ArrayXd at_scale = Eigen::ArrayXd::Zero(dom.size());
    for (std::size_t i = 0; i < used; i += 2) {
      const GridFunction a = rescale_mollifier(dict.members[i], t);
      if (i + 1 == used) {
        at_scale = at_scale.max(conv.apply(a).values().abs());
        break;
      }
      const auto both = conv.apply_pair(a, rescale_mollifier(dict.members[i + 1], t));
      at_scale = at_scale.max(both.first.values().abs()).max(both.second.values().abs());
    }
    if (mode == GrandMode::mn) at_scale = ball_max(dom, at_scale, t);
    out = out.max(at_scale);
  }
  return {dom, std::move(out)};
}

double hardy_norm(const GridFunction& f, const VariableExponent& p, const Weight& w, const TestDictionary& dict) {
  return luxemburg_norm(grand_maximal(f, dict, GrandMode::mn), p, w);
}

int capital_n(int dim, double q_w, double p_minus) {
  if (!(p_minus > 0.0) || !(q_w >= 1.0)) throw std::invalid_argument("need p_- > 0 and q_w >= 1");
  return 2 + static_cast<int>(std::floor(dim * (q_w / std::min(1.0, p_minus) - 1.0)));
}

Report dirac_membership_check(const ExponentFactory& p, const WeightFactory& w, const Domain& domain,
                              double threshold) {
  auto integral = [&](const Domain& d) {
    const VariableExponent pe = p(d);
    const Weight we = w(d);
    double acc = 0.0;
    for (Index k = 0; k < d.size(); ++k) {
      const Point x = d.point(k);
      if (x.norm() >= 1.0) continue;
      acc += std::pow(clamped_radius(x, d), -d.dim() * pe[k]) * we[k];
    }
    return acc * d.cell_volume();
  };
  const TwoResolution t = two_resolution(domain, integral, threshold);
  Report r;
  r.name = "dirac_membership";
  r.set("integral_m", t.value_m);
  r.set("integral_m1", t.value_m1);
  r.set("ratio", t.ratio);
  r.require(t.stable, "integral of |x|^(-n p(x)) w over B(1) grows with resolution");
  return r;
}

}  // namespace varhardy
