#include "varhardy/atoms.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <fstream>
#include <map>
#include <json.hpp>

#include <Eigen/SVD>

#include "varhardy/lebesgue.hpp"

namespace varhardy {

// ---------------------------------------------------------------- patches

Patch::Patch(const Domain& domain, const std::array<AxisRange, 2>& range) : domain_(domain), range_(range) {
  if (domain.dim() == 1) range_[1] = {0, 1};
  values_ = Eigen::ArrayXd::Zero(range_[0].count() * range_[1].count());
}

Patch Patch::over(const Domain& domain, const Box& box) {
  return Patch(domain, {box.lattice_range(domain, 0), domain.dim() > 1 ? box.lattice_range(domain, 1) : AxisRange{0, 1}});
}

Index Patch::global(Index local) const {
  const Index width = range_[1].count();
  return domain_.flat(range_[0].lo + local / width, range_[1].lo + local % width);
}

bool Patch::covers(Index flat) const {
  const auto idx = domain_.multi_index(flat);
  for (int d = 0; d < domain_.dim(); ++d)
    if (idx[d] < range_[d].lo || idx[d] >= range_[d].hi) return false;
  return true;
}

double Patch::at(Index flat) const {
  if (!covers(flat)) return 0.0;
  const auto idx = domain_.multi_index(flat);
  const Index i1 = domain_.dim() > 1 ? idx[1] - range_[1].lo : 0;
  return values_[(idx[0] - range_[0].lo) * range_[1].count() + i1];
}

GridFunction Patch::to_grid() const {
  GridFunction g = GridFunction::zeros(domain_);
  add_to(g);
  return g;
}

void Patch::add_to(GridFunction& g, double scale) const {
  if (g.domain() != domain_) throw std::invalid_argument("domain mismatch");
  for (Index l = 0; l < size(); ++l) g[global(l)] += scale * values_[l];
}

std::array<AxisRange, 2> range_union(const std::array<AxisRange, 2>& a, const std::array<AxisRange, 2>& b) {
  return {AxisRange{std::min(a[0].lo, b[0].lo), std::max(a[0].hi, b[0].hi)},
          AxisRange{std::min(a[1].lo, b[1].lo), std::max(a[1].hi, b[1].hi)}};
}

bool ranges_meet(const std::array<AxisRange, 2>& a, const std::array<AxisRange, 2>& b) {
  for (int d = 0; d < 2; ++d)
    if (std::max(a[d].lo, b[d].lo) >= std::min(a[d].hi, b[d].hi)) return false;
  return true;
}

namespace {

// Copies `src` into a patch over the larger block `range`.
Patch widened(const Patch& src, const std::array<AxisRange, 2>& range) {
  Patch out(src.domain(), range);
  for (Index l = 0; l < out.size(); ++l) out.values()[l] = src.at(out.global(l));
  return out;
}

double cube_diameter(const Cube& q) { return q.side() * std::sqrt(static_cast<double>(q.dim)); }

}  // namespace

// ------------------------------------------------------------- polynomials

std::vector<std::array<int, 2>> monomial_exponents(int dim, int degree) {
  std::vector<std::array<int, 2>> out;
  for (int total = 0; total <= degree; ++total) {
    if (dim == 1) {
      out.push_back({total, 0});
      continue;
    }
    for (int a = total; a >= 0; --a) out.push_back({a, total - a});
  }
  return out;
}

double Polynomial::operator()(const Point& x) const {
  if (coeffs.size() == 0) return 0.0;
  const auto exps = monomial_exponents(dim, degree);
  const double u0 = (x[0] - center[0]) / scale;
  const double u1 = dim > 1 ? (x[1] - center[1]) / scale : 0.0;
  double acc = 0.0;
  for (std::size_t i = 0; i < exps.size(); ++i)
    acc += coeffs[static_cast<Index>(i)] * std::pow(u0, exps[i][0]) * (dim > 1 ? std::pow(u1, exps[i][1]) : 1.0);
  return acc;
}

namespace {

template <class Value>
Polynomial project(const Domain& dom, const Value& value, const Patch& eta, int degree) {
  Polynomial poly;
  poly.dim = dom.dim();
  poly.degree = std::max(degree, 0);
  const auto& r = eta.range();
  poly.center = Point(0.5 * (dom.coord(r[0].lo) + dom.coord(r[0].hi - 1)),
                      dom.dim() > 1 ? 0.5 * (dom.coord(r[1].lo) + dom.coord(r[1].hi - 1)) : 0.0);
  double half = 0.0;
  for (int d = 0; d < dom.dim(); ++d) half = std::max(half, 0.5 * (r[d].count() - 1) * dom.step());
  poly.scale = std::max(half, dom.step());
  if (degree < 0) return poly;

  const auto exps = monomial_exponents(dom.dim(), degree);
  const Index m = static_cast<Index>(exps.size());
  Eigen::MatrixXd gram = Eigen::MatrixXd::Zero(m, m);
  Eigen::VectorXd rhs = Eigen::VectorXd::Zero(m);
  Eigen::VectorXd mono(m);
  for (Index l = 0; l < eta.size(); ++l) {
    const double e = eta.values()[l];
    if (e == 0.0) continue;
    const Index flat = eta.global(l);
    const Point x = dom.point(flat);
    const double u0 = (x[0] - poly.center[0]) / poly.scale;
    const double u1 = (x[1] - poly.center[1]) / poly.scale;
    for (Index i = 0; i < m; ++i)
      mono[i] = std::pow(u0, exps[i][0]) * (dom.dim() > 1 ? std::pow(u1, exps[i][1]) : 1.0);
    gram.noalias() += e * mono * mono.transpose();
    rhs += e * value(flat) * mono;
  }
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(gram, Eigen::ComputeFullU | Eigen::ComputeFullV);
  const auto& s = svd.singularValues();
  if (!(s[m - 1] > 0.0) || s[0] / s[m - 1] > 1e10) throw NumericError("degenerate bump");
  poly.coeffs = svd.solve(rhs);
  return poly;
}

}  // namespace

Polynomial moment_projection(const GridFunction& g, const Patch& eta, int degree) {
  if (g.domain() != eta.domain()) throw std::invalid_argument("domain mismatch");
  return project(g.domain(), [&](Index k) { return g[k]; }, eta, degree);
}

Polynomial moment_projection(const Patch& g, const Patch& eta, int degree) {
  if (g.domain() != eta.domain()) throw std::invalid_argument("domain mismatch");
  return project(g.domain(), [&](Index k) { return g.at(k); }, eta, degree);
}

// ----------------------------------------------------------------- Whitney

double whitney_ratio(int dim) { return std::ldexp(1.0, -dim - 6); }
double plateau_inner(int dim) { return 1.0 + std::ldexp(1.0, -dim - 11); }
double plateau_outer(int dim) { return 1.0 + std::ldexp(1.0, -dim - 10); }

namespace {

// Distance from closed boxes to the complement of omega. The nearest
// complement point always has an axis neighbour in omega, so only those
// (together with the ring just outside the window) are stored.
class ComplementDistance {
 public:
  explicit ComplementDistance(const GridFunction& omega) : dom_(omega.domain()) {
    const Index n = dom_.per_axis();
    const int dim = dom_.dim();
    auto inside = [&](Index i, Index j) {
      if (i < 0 || i >= n || (dim > 1 && (j < 0 || j >= n))) return false;
      return omega[dom_.flat(i, dim > 1 ? j : 0)] != 0.0;
    };
    const Index jmax = dim > 1 ? n + 1 : 1;
    const Index jmin = dim > 1 ? -1 : 0;
    for (Index i = -1; i <= n; ++i)
      for (Index j = jmin; j < jmax; ++j) {
        if (inside(i, j)) continue;
        const bool near = inside(i - 1, j) || inside(i + 1, j) || (dim > 1 && (inside(i, j - 1) || inside(i, j + 1)));
        if (near) boundary_.emplace_back(dom_.coord(i), dim > 1 ? dom_.coord(j) : 0.0);
      }
  }

  double operator()(const Box& b) const {
    double best = INFINITY;
    for (const Point& y : boundary_) best = std::min(best, b.distance(y));
    return best;
  }

 private:
  Domain dom_;
  std::vector<Point> boundary_;
};

// Squared distance transform along one line (lower envelope of parabolas).
void parabola_envelope(std::vector<double>& f) {
  const std::size_t n = f.size();
  std::vector<double> out(n);
  std::vector<std::size_t> v(n);
  std::vector<double> z(n + 1);
  std::size_t k = 0;
  std::size_t first = n;
  for (std::size_t q = 0; q < n; ++q)
    if (std::isfinite(f[q])) {
      first = q;
      break;
    }
  if (first == n) return;
  v[0] = first;
  z[0] = -INFINITY;
  z[1] = INFINITY;
  for (std::size_t q = first + 1; q < n; ++q) {
    if (!std::isfinite(f[q])) continue;
    const double dq = static_cast<double>(q);
    double s = 0.0;
    while (true) {
      const double dv = static_cast<double>(v[k]);
      s = ((f[q] + dq * dq) - (f[v[k]] + dv * dv)) / (2.0 * (dq - dv));
      if (s > z[k] || k == 0) break;
      --k;
    }
    if (s <= z[k]) {
      v[k] = q;
    } else {
      ++k;
      v[k] = q;
      z[k] = s;
    }
    z[k + 1] = INFINITY;
  }
  k = 0;
  for (std::size_t q = 0; q < n; ++q) {
    while (z[k + 1] < static_cast<double>(q)) ++k;
    const double diff = static_cast<double>(q) - static_cast<double>(v[k]);
    out[q] = diff * diff + f[v[k]];
  }
  f = std::move(out);
}

// Distance in lattice units from each point of omega to the nearest
// complement point, the ring outside the window included.
Eigen::ArrayXd complement_distance_field(const GridFunction& omega) {
  const Domain& d = omega.domain();
  const Index n = d.per_axis();
  const Index e = n + 2;
  const bool planar = d.dim() > 1;
  const Index rows = planar ? e : 1;
  std::vector<double> field(static_cast<std::size_t>(e * rows), 0.0);
  auto at = [&](Index i, Index j) -> double& { return field[static_cast<std::size_t>(i * rows + j)]; };
  for (Index i = 0; i < n; ++i)
    for (Index j = 0; j < (planar ? n : 1); ++j)
      if (omega[d.flat(i, j)] != 0.0) at(i + 1, planar ? j + 1 : 0) = INFINITY;
  std::vector<double> line(static_cast<std::size_t>(e));
  for (Index j = 0; j < rows; ++j) {
    for (Index i = 0; i < e; ++i) line[i] = at(i, j);
    parabola_envelope(line);
    for (Index i = 0; i < e; ++i) at(i, j) = line[i];
  }
  if (planar)
    for (Index i = 0; i < e; ++i) {
      for (Index j = 0; j < e; ++j) line[j] = at(i, j);
      parabola_envelope(line);
      for (Index j = 0; j < e; ++j) at(i, j) = line[j];
    }
  Eigen::ArrayXd out(d.size());
  for (Index k = 0; k < d.size(); ++k) {
    const auto idx = d.multi_index(k);
    out[k] = std::sqrt(at(idx[0] + 1, planar ? idx[1] + 1 : 0)) * d.step();
  }
  return out;
}

struct CubeScan {
  Index inside = 0;
  Index total = 0;
  double reach = 0.0;  ///< largest distance to the complement over the cube's points
};

CubeScan scan_cube(const GridFunction& omega, const Eigen::ArrayXd& reach, const Cube& q) {
  const Domain& d = omega.domain();
  const AxisRange r0 = q.lattice_range(d, 0);
  const AxisRange r1 = d.dim() > 1 ? q.lattice_range(d, 1) : AxisRange{0, 1};
  CubeScan s;
  s.total = r0.count() * r1.count();
  for (Index i = r0.lo; i < r0.hi; ++i)
    for (Index j = r1.lo; j < r1.hi; ++j) {
      const Index k = d.flat(i, j);
      if (omega[k] == 0.0) continue;
      ++s.inside;
      s.reach = std::max(s.reach, reach[k]);
    }
  return s;
}

}  // namespace

std::vector<Cube> whitney_decompose(const GridFunction& omega, double min_side) {
  const Domain& dom = omega.domain();
  const Index members = (omega.values() != 0.0).count();
  if (members == dom.size()) throw std::invalid_argument("no exterior");
  std::vector<Cube> out;
  if (members == 0) return out;
  const auto root = exact_log2(dom.half_width());
  if (!root) throw std::invalid_argument("window half width must be a power of two");
  const double smallest = std::max(min_side, dom.step());
  const ComplementDistance dist(omega);
  const Eigen::ArrayXd reach = complement_distance_field(omega);
  const double ratio = whitney_ratio(dom.dim());
  const double root_n = std::sqrt(static_cast<double>(dom.dim()));

  std::vector<Cube> stack;
  for (Index i : {-1, 0})
    for (Index j : {-1, 0}) {
      if (dom.dim() == 1 && j == 0) continue;
      stack.push_back(Cube{dom.dim(), -*root, {0, 0}, {i, dom.dim() > 1 ? j : 0}});
    }
  while (!stack.empty()) {
    const Cube q = stack.back();
    stack.pop_back();
    const CubeScan scan = scan_cube(omega, reach, q);
    // Any subcube's distance to the complement is at most `reach`.
    if (scan.inside == 0 || ratio * scan.reach < smallest * root_n) continue;
    const bool candidate = scan.inside == scan.total && cube_diameter(q) <= ratio * scan.reach;
    const double d = candidate ? dist(Box::from_cube(q)) : 0.0;
    if (d > 0.0 && cube_diameter(q) <= ratio * d) {
      out.push_back(q);
      continue;
    }
    if (0.5 * q.side() < smallest) continue;
    for (Index a = 0; a < 2; ++a)
      for (Index b = 0; b < (dom.dim() > 1 ? 2 : 1); ++b)
        stack.push_back(Cube{q.dim, q.level + 1, {0, 0}, {2 * q.index[0] + a, dom.dim() > 1 ? 2 * q.index[1] + b : 0}});
  }
  std::sort(out.begin(), out.end(), [](const Cube& a, const Cube& b) {
    return std::tie(a.level, a.index) < std::tie(b.level, b.index);
  });
  return out;
}

Report whitney_geometry_check(const GridFunction& omega, const std::vector<Cube>& cubes) {
  const Domain& dom = omega.domain();
  Report r;
  r.name = "whitney_geometry";
  const ComplementDistance dist(omega);
  const double ratio = whitney_ratio(dom.dim());
  double lower = INFINITY;
  double upper = 0.0;
  Eigen::ArrayXd overlap = Eigen::ArrayXd::Zero(dom.size());
  Eigen::ArrayXd covered = Eigen::ArrayXd::Zero(dom.size());
  for (const Cube& q : cubes) {
    const double d = dist(Box::from_cube(q));
    lower = std::min(lower, ratio * d / cube_diameter(q));
    upper = std::max(upper, ratio * d / (4.0 * cube_diameter(q)));
    const Patch dil = Patch::over(dom, Box::from_cube(q).dilated(plateau_outer(dom.dim())));
    for (Index l = 0; l < dil.size(); ++l) overlap[dil.global(l)] += 1.0;
    const AxisRange r0 = q.lattice_range(dom, 0);
    const AxisRange r1 = dom.dim() > 1 ? q.lattice_range(dom, 1) : AxisRange{0, 1};
    for (Index i = r0.lo; i < r0.hi; ++i)
      for (Index j = r1.lo; j < r1.hi; ++j) covered[dom.flat(i, j)] += 1.0;
  }
  const Index uncovered = ((omega.values() != 0.0) && (covered == 0.0)).count();
  r.set("cube_count", static_cast<double>(cubes.size()));
  r.set("lower_margin", cubes.empty() ? 1.0 : lower);
  r.set("upper_margin", cubes.empty() ? 0.0 : upper);
  r.set("max_overlap", overlap.maxCoeff());
  r.set("uncovered", static_cast<double>(uncovered));
  r.set("max_multiplicity", covered.maxCoeff());
  r.require(cubes.empty() || lower >= 1.0 - 1e-12, "a cube is too large for its distance to the complement");
  r.require(cubes.empty() || upper <= 1.0 + 1e-12, "a cube is too small for its distance to the complement");
  r.require(covered.maxCoeff() <= 1.0, "Whitney cubes overlap");
  return r;
}

// ------------------------------------------------------- partition of unity

namespace {

double smooth_step(double t) {
  auto psi = [](double s) { return s > 0.0 ? std::exp(-1.0 / s) : 0.0; };
  const double a = psi(1.0 - t);
  const double b = psi(t);
  return a / (a + b);
}

Patch plateau(const Domain& dom, const Cube& q) {
  const double inner = plateau_inner(dom.dim());
  const double outer = plateau_outer(dom.dim());
  Patch xi = Patch::over(dom, Box::from_cube(q).dilated(outer));
  const Point c = q.center();
  const double half = 0.5 * q.side();
  for (Index l = 0; l < xi.size(); ++l) {
    const Point x = dom.point(xi.global(l));
    double v = 1.0;
    for (int d = 0; d < dom.dim(); ++d) {
      const double r = std::abs(x[d] - c[d]) / half;
      if (r >= outer)
        v = 0.0;
      else if (r > inner)
        v *= smooth_step((r - inner) / (outer - inner));
    }
    xi.values()[l] = v;
  }
  return xi;
}

}  // namespace

std::vector<Patch> partition_of_unity(const Domain& domain, const std::vector<Cube>& cubes) {
  std::vector<Patch> out;
  out.reserve(cubes.size());
  Eigen::ArrayXd total = Eigen::ArrayXd::Zero(domain.size());
  for (const Cube& q : cubes) {
    out.push_back(plateau(domain, q));
    const Patch& xi = out.back();
    for (Index l = 0; l < xi.size(); ++l) total[xi.global(l)] += xi.values()[l];
  }
  for (Patch& xi : out)
    for (Index l = 0; l < xi.size(); ++l) {
      const double s = total[xi.global(l)];
      xi.values()[l] = s > 0.0 ? xi.values()[l] / s : 0.0;
    }
  return out;
}

// ---------------------------------------------------------- CZ decomposition

namespace {

double whitney_min_side(const Domain& dom, int degree) {
  // A closed box of side s holds s/h + 1 points per axis; degree L needs L + 1.
  if (degree <= 1) return dom.step();
  return dom.step() * std::ldexp(1.0, static_cast<int>(std::ceil(std::log2(degree))));
}

}  // namespace

CzDecomposition cz_decompose_from_maximal(const GridFunction& f, const GridFunction& maximal, double lambda,
                                          int degree) {
  const Domain& dom = f.domain();
  if (maximal.domain() != dom) throw std::invalid_argument("domain mismatch");
  CzDecomposition out;
  out.lambda = lambda;
  out.good = f;
  const GridFunction omega(dom, (maximal.values() > lambda).cast<double>());
  const std::vector<Cube> cubes = whitney_decompose(omega, whitney_min_side(dom, degree));
  std::vector<Patch> etas = partition_of_unity(dom, cubes);
  out.bad.reserve(cubes.size());
  for (std::size_t k = 0; k < cubes.size(); ++k) {
    BadPart b;
    b.cube = cubes[k];
    b.projection = moment_projection(f, etas[k], degree);
    b.values = Patch(dom, etas[k].range());
    for (Index l = 0; l < b.values.size(); ++l) {
      const Index flat = b.values.global(l);
      b.values.values()[l] = (f[flat] - b.projection(dom.point(flat))) * etas[k].values()[l];
    }
    b.values.add_to(out.good, -1.0);
    b.eta = std::move(etas[k]);
    out.bad.push_back(std::move(b));
  }
  return out;
}

CzDecomposition cz_decompose(const GridFunction& f, double lambda, const TestDictionary& dict, int degree) {
  return cz_decompose_from_maximal(f, grand_maximal(f, dict, GrandMode::mn), lambda, degree);
}

// -------------------------------------------------------------------- atoms

namespace {

// w(B) over the lattice points of a closed box.
double box_weight(const Weight& w, const Box& b) {
  const Patch block = Patch::over(w.domain(), b);
  double acc = 0.0;
  for (Index l = 0; l < block.size(); ++l) acc += w[block.global(l)];
  return acc * w.domain().cell_volume();
}

double lq_norm(const Patch& a, const Weight& w, double q) {
  if (std::isinf(q)) return a.values().abs().maxCoeff();
  double acc = 0.0;
  for (Index l = 0; l < a.size(); ++l) acc += std::pow(std::abs(a.values()[l]), q) * w[a.global(l)];
  return std::pow(acc * w.domain().cell_volume(), 1.0 / q);
}

// ||a||_{L^q(w)} / w(B)^(1/q).
double size_ratio(const Patch& a, const Weight& w, double q, double mass) {
  const double norm = lq_norm(a, w, q);
  return std::isinf(q) ? norm : norm / std::pow(mass, 1.0 / q);
}

Box window_box(const Domain& d) {
  return Box{d.dim(), {-d.half_width(), d.dim() > 1 ? -d.half_width() : 0.0}, 2.0 * d.half_width() - d.step()};
}

}  // namespace

Report validate_atom(const Atom& a, const Weight& w, const VariableExponent& p) {
  const Domain& dom = w.domain();
  if (a.values.domain() != dom || p.domain() != dom) throw std::invalid_argument("domain mismatch");
  Report r;
  r.name = "atom";
  const double tol = 1e-6;
  const Box region = a.kind == AtomKind::single ? window_box(dom) : a.support;
  const Patch block = Patch::over(dom, region);
  double outside = 0.0;
  for (Index l = 0; l < a.values.size(); ++l)
    if (!block.covers(a.values.global(l))) outside = std::max(outside, std::abs(a.values.values()[l]));
  r.set("support_violation", outside);
  r.require(outside == 0.0, "values outside the support cube");

  const double mass = box_weight(w, region);
  const double ratio = size_ratio(a.values, w, a.q, mass);
  r.set("size_ratio", ratio);
  r.set("size_margin", 1.0 + tol - ratio);
  r.require(ratio <= 1.0 + tol, "size condition fails");
  GridFunction indicator = GridFunction::zeros(dom);
  for (Index l = 0; l < block.size(); ++l) indicator[block.global(l)] = 1.0;
  r.set("indicator_norm", luxemburg_norm(indicator, p, w));

  double worst = 0.0;
  if (a.kind == AtomKind::local && a.moment_order >= 0) {
    const double l1 = a.values.values().abs().sum() * dom.cell_volume();
    const Point c = a.support.center();
    for (const auto& beta : monomial_exponents(dom.dim(), a.moment_order)) {
      double moment = 0.0;
      for (Index l = 0; l < a.values.size(); ++l) {
        const Point x = dom.point(a.values.global(l));
        moment += a.values.values()[l] * std::pow(x[0] - c[0], beta[0]) *
                  (dom.dim() > 1 ? std::pow(x[1] - c[1], beta[1]) : 1.0);
      }
      moment *= dom.cell_volume();
      const double allowed = 1e-8 * l1 * std::pow(a.support.side, beta[0] + beta[1]);
      worst = std::max(worst, allowed > 0.0 ? std::abs(moment) / allowed : (moment == 0.0 ? 0.0 : INFINITY));
    }
  }
  r.set("moment_ratio", worst);
  r.require(worst <= 1.0, "moment condition fails");
  return r;
}

double sequence_norm(const std::vector<double>& lambdas, const std::vector<Box>& cubes, const VariableExponent& p,
                     const Weight& w, double v) {
  if (lambdas.size() != cubes.size()) throw std::invalid_argument("lambdas and cubes differ in length");
  if (!(v > 0.0) || v > 1.0 || !(v < p.p_minus())) throw std::invalid_argument("v must lie in (0, p_-) and (0, 1]");
  const Domain& dom = p.domain();
  Eigen::ArrayXd acc = Eigen::ArrayXd::Zero(dom.size());
  for (std::size_t j = 0; j < cubes.size(); ++j) {
    if (lambdas[j] == 0.0) continue;
    const double term = std::pow(std::abs(lambdas[j]), v);
    const Patch block = Patch::over(dom, cubes[j]);
    for (Index l = 0; l < block.size(); ++l) acc[block.global(l)] += term;
  }
  return luxemburg_norm(GridFunction(dom, acc.pow(1.0 / v)), p, w);
}

double sequence_norm_dagger(const std::vector<double>& lambdas, const std::vector<Box>& cubes,
                            const VariableExponent& p, const Weight& w) {
  if (lambdas.size() != cubes.size()) throw std::invalid_argument("lambdas and cubes differ in length");
  const Domain& dom = p.domain();
  ModularEquation eq;
  for (std::size_t j = 0; j < cubes.size(); ++j) {
    if (lambdas[j] == 0.0) continue;
    const Patch block = Patch::over(dom, cubes[j]);
    for (Index l = 0; l < block.size(); ++l) {
      const Index k = block.global(l);
      eq.add(std::abs(lambdas[j]), p[k], w[k] * dom.cell_volume());
    }
  }
  return eq.solve_bisection();
}

std::vector<Box> AtomicDecomposition::cubes() const {
  std::vector<Box> out;
  out.reserve(atoms.size());
  for (const Atom& a : atoms) out.push_back(a.support);
  return out;
}

namespace {

void check_admissible(const VariableExponent& p, const TestDictionary& dict, const AtomicParams& prm, int dim) {
  auto fail = [](const std::string& what) { throw std::invalid_argument("inadmissible parameters: " + what); };
  if (!(prm.q > std::max(prm.q_w, p.p_plus()))) fail("q > max(q_w, p_+) fails");
  if (!(prm.v > 0.0) || prm.v > 1.0 || !(prm.v < p.p_minus())) fail("v in (0, p_-) and (0, 1] fails");
  const int need = static_cast<int>(std::floor(dim * (prm.q_w / prm.v - 1.0)));
  if (prm.moment_order < need) fail("L >= [n (q_w / v - 1)] fails");
  if (dict.order < prm.moment_order) fail("N >= L fails");
  if (prm.depth < 1) fail("depth >= 1 fails");
}

// Splits a level piece into normalized atoms: one local atom on a concentric
// cube when that cube has volume < 1, else unit atoms on l + [0,1)^n.
// Pieces below `noise` are rounding residue (cubes whose projection
// interpolates f) and are dropped rather than blown up by normalization.
void emit_atoms(const Patch& piece, const Cube& whitney, const Weight& w, const AtomicParams& prm, double noise,
                AtomicDecomposition& dec) {
  const Domain& dom = piece.domain();
  if (piece.size() == 0 || piece.values().abs().maxCoeff() <= noise) return;
  const int dim = dom.dim();
  const Point c = whitney.center();
  double reach = 0.0;
  for (Index l = 0; l < piece.size(); ++l) {
    if (piece.values()[l] == 0.0) continue;
    const Point x = dom.point(piece.global(l));
    for (int d = 0; d < dim; ++d) reach = std::max(reach, std::abs(x[d] - c[d]));
  }
  const double side = std::max(whitney.side() * plateau_outer(dim), 2.0 * reach);

  auto push = [&](Patch values, const Box& box, const Cube& cube, AtomKind kind) {
    const double mu = size_ratio(values, w, prm.q, box_weight(w, box));
    if (!(mu > 0.0)) return;
    values.values() /= mu;
    dec.lambdas.push_back(mu);
    dec.atoms.push_back(Atom{box, cube, std::move(values), prm.q, prm.moment_order, kind});
  };

  if (std::pow(side, dim) < 1.0) {
    const Box box{dim, {c[0] - 0.5 * side, dim > 1 ? c[1] - 0.5 * side : 0.0}, side};
    Patch values(dom, range_union(piece.range(), Patch::over(dom, box).range()));
    for (Index l = 0; l < values.size(); ++l) values.values()[l] = piece.at(values.global(l));
    push(std::move(values), box, whitney, AtomKind::local);
    return;
  }
  std::map<std::array<Index, 2>, std::vector<Index>> cells;
  for (Index l = 0; l < piece.size(); ++l) {
    if (piece.values()[l] == 0.0) continue;
    const Point x = dom.point(piece.global(l));
    cells[{static_cast<Index>(std::floor(x[0])), dim > 1 ? static_cast<Index>(std::floor(x[1])) : 0}].push_back(l);
  }
  for (const auto& [cell, locals] : cells) {
    const Box box{dim, {static_cast<double>(cell[0]), static_cast<double>(cell[1])}, 1.0};
    Patch values = Patch::over(dom, box);
    for (Index l : locals) {
      const Index flat = piece.global(l);
      const auto idx = dom.multi_index(flat);
      const Index i1 = dim > 1 ? idx[1] - values.range()[1].lo : 0;
      values.values()[(idx[0] - values.range()[0].lo) * values.range()[1].count() + i1] = piece.values()[l];
    }
    push(std::move(values), box, Cube{dim, 0, {0, 0}, cell}, AtomKind::unit);
  }
}

}  // namespace

AtomicDecomposition atomic_decompose(const GridFunction& f, const VariableExponent& p, const Weight& w,
                                     const TestDictionary& dict, const AtomicParams& prm) {
  const Domain& dom = f.domain();
  if (p.domain() != dom || w.domain() != dom) throw std::invalid_argument("domain mismatch");
  check_admissible(p, dict, prm, dom.dim());
  AtomicDecomposition dec;
  const GridFunction maximal = grand_maximal(f, dict, GrandMode::mn);
  const double top = maximal.values().maxCoeff();
  if (!(top > 0.0)) return dec;

  const int jmax = static_cast<int>(std::ceil(std::log2(top)));
  int jmin = jmax - prm.depth;
  while (jmin < jmax && (maximal.values() > std::ldexp(1.0, jmin)).all()) ++jmin;
  dec.level_min = jmin;
  dec.level_max = jmax;

  std::vector<CzDecomposition> levels;
  for (int j = jmin; j <= jmax; ++j)
    levels.push_back(cz_decompose_from_maximal(f, maximal, std::ldexp(1.0, j), prm.moment_order));

  for (std::size_t s = 0; s + 1 < levels.size(); ++s) {
    const auto& here = levels[s].bad;
    const auto& next = levels[s + 1].bad;
    // sum_k eta_{j,k}, to confirm the next level's supports are covered.
    GridFunction cover = GridFunction::zeros(dom);
    for (const BadPart& b : here) b.eta.add_to(cover);
    for (const BadPart& nl : next)
      for (Index l = 0; l < nl.eta.size(); ++l)
        if (nl.eta.values()[l] != 0.0)
          dec.coverage_defect = std::max(dec.coverage_defect, std::abs(1.0 - cover[nl.eta.global(l)]));

    for (const BadPart& bk : here) {
      std::vector<const BadPart*> touching;
      auto range = bk.values.range();
      for (const BadPart& nl : next)
        if (ranges_meet(bk.eta.range(), nl.eta.range())) {
          touching.push_back(&nl);
          range = range_union(range, nl.eta.range());
        }
      Patch piece = widened(bk.values, range);
      for (const BadPart* nl : touching) {
        // (f - P_{j+1,l}) eta_{j,k}, projected against eta_{j+1,l}.
        Patch local(dom, nl->eta.range());
        for (Index l = 0; l < local.size(); ++l) {
          const Index flat = local.global(l);
          local.values()[l] = (f[flat] - nl->projection(dom.point(flat))) * bk.eta.at(flat);
        }
        const Polynomial corr = moment_projection(local, nl->eta, prm.moment_order);
        for (Index l = 0; l < local.size(); ++l) {
          const Index flat = local.global(l);
          const double term = (local.values()[l] - corr(dom.point(flat))) * nl->eta.values()[l];
          if (term == 0.0) continue;
          const auto idx = dom.multi_index(flat);
          const Index i1 = dom.dim() > 1 ? idx[1] - range[1].lo : 0;
          piece.values()[(idx[0] - range[0].lo) * range[1].count() + i1] -= term;
        }
      }
      emit_atoms(piece, bk.cube, w, prm, 1e-11 * levels[s].lambda, dec);
    }
  }

  const GridFunction& rest = levels.front().good;
  if (rest.max_abs() > 0.0) {
    Patch values = Patch::over(dom, window_box(dom));
    for (Index l = 0; l < values.size(); ++l) values.values()[l] = rest[values.global(l)];
    if (prm.single_atom) {
      const double mu = size_ratio(values, w, prm.q, w.mass());
      values.values() /= mu;
      dec.single_part = std::make_pair(
          mu, Atom{window_box(dom), Cube{dom.dim(), 0, {0, 0}, {0, 0}}, std::move(values), prm.q, -1, AtomKind::single});
    } else {
      dec.dropped_norm = lq_norm(values, w, prm.q);
    }
  }
  return dec;
}

double decomposition_norm(const AtomicDecomposition& dec, const VariableExponent& p, const Weight& w, double v) {
  const double single = dec.single_part ? dec.single_part->first : 0.0;
  return single + sequence_norm(dec.lambdas, dec.cubes(), p, w, v);
}

GridFunction synthesize(const AtomicDecomposition& dec, const Domain& domain) {
  GridFunction out = GridFunction::zeros(domain);
  for (std::size_t j = 0; j < dec.atoms.size(); ++j) dec.atoms[j].values.add_to(out, dec.lambdas[j]);
  if (dec.single_part) dec.single_part->second.values.add_to(out, dec.single_part->first);
  return out;
}

AtomicDecomposition concatenate(const AtomicDecomposition& a, const AtomicDecomposition& b) {
  AtomicDecomposition out = a;
  out.lambdas.insert(out.lambdas.end(), b.lambdas.begin(), b.lambdas.end());
  out.atoms.insert(out.atoms.end(), b.atoms.begin(), b.atoms.end());
  out.level_min = std::min(a.level_min, b.level_min);
  out.level_max = std::max(a.level_max, b.level_max);
  out.dropped_norm = a.dropped_norm + b.dropped_norm;
  out.coverage_defect = std::max(a.coverage_defect, b.coverage_defect);
  if (b.single_part) {
    if (!out.single_part) {
      out.single_part = b.single_part;
    } else {
      // lambda_a a_a + lambda_b a_b as one single atom; the size condition
      // survives by the triangle inequality.
      auto& [la, atom] = *out.single_part;
      const double lb = b.single_part->first;
      const double total = la + lb;
      atom.values.values() = (la * atom.values.values() + lb * b.single_part->second.values.values()) / total;
      la = total;
    }
  }
  return out;
}

// ------------------------------------------------------ majorant of atoms

double box_local_maximal(const Box& q, const Point& x, double radius) {
  if (q.contains(x)) return 1.0;
  const int n = q.dim;
  std::array<double, 2> gap{0.0, 0.0};
  for (int d = 0; d < n; ++d) gap[d] = std::max({q.lower[d] - x[d], 0.0, x[d] - (q.lower[d] + q.side)});
  auto ratio = [&](double s) {
    double v = 1.0;
    for (int d = 0; d < n; ++d) v *= std::min({s, q.side, std::max(0.0, s - gap[d])}) / s;
    return v;
  };
  // Between breakpoints each factor is s - gap, side or s, so the maximum sits
  // at a breakpoint or at s = 2 gap.
  double best = ratio(radius);
  for (int d = 0; d < n; ++d)
    for (double s : {gap[d], gap[d] + q.side, q.side, 2.0 * gap[d]})
      if (s > 0.0 && s <= radius) best = std::max(best, ratio(s));
  return best;
}

Report bad_part_majorant_check(const Atom& a, const TestDictionary& dict, const Weight& w,
                               const VariableExponent& p) {
  const Domain& dom = a.values.domain();
  const GridFunction m0 = grand_maximal(a.values.to_grid(), dict, GrandMode::m0);
  const int n = dom.dim();
  const double power = static_cast<double>(n + std::max(a.moment_order, -1) + 1) / n;
  const Box doubled = a.support.dilated(2.0);
  const double floor = 1e-13 * std::max(m0.max_abs(), 1e-300);
  double constant = 0.0;
  double beyond = 0.0;
  Index unreached = 0;
  for (Index k = 0; k < dom.size(); ++k) {
    const Point x = dom.point(k);
    if (doubled.contains(x)) continue;
    if (a.support.distance(x) > dict.radius + 1.0) beyond = std::max(beyond, m0[k]);
    const double mloc = box_local_maximal(a.support, x);
    if (mloc > 0.0)
      constant = std::max(constant, m0[k] / std::pow(mloc, power));
    else if (m0[k] > floor)
      ++unreached;
  }
  Report r;
  r.name = "bad_part_majorant";
  r.set("constant", constant);
  r.set("exponent", power);
  r.set("unreached", static_cast<double>(unreached));
  r.set("beyond_reach_max", beyond);
  r.set("maximal_norm", luxemburg_norm(m0, p, w));
  r.require(std::isfinite(constant) && unreached == 0, "majorant is not dominated");
  r.set("peak", m0.max_abs());
  // Convolutions are computed by FFT, so "zero" means rounding level.
  r.require(beyond <= 1e-12 * m0.max_abs(), "grand maximal function reaches beyond the dictionary radius");
  return r;
}

// ------------------------------------------------------------ serialization

namespace {

void write_doubles(std::ofstream& out, const Eigen::ArrayXd& v) {
  for (Index i = 0; i < v.size(); ++i) {
    std::uint64_t bits = std::bit_cast<std::uint64_t>(v[i]);
    if constexpr (std::endian::native == std::endian::big) bits = __builtin_bswap64(bits);
    out.write(reinterpret_cast<const char*>(&bits), sizeof bits);
  }
}

nlohmann::json atom_json(const Atom& a, double lambda, Index offset) {
  using nlohmann::json;
  const auto& r = a.values.range();
  json q = std::isinf(a.q) ? json("inf") : json(a.q);
  const char* kind = a.kind == AtomKind::local ? "local" : a.kind == AtomKind::unit ? "unit" : "single";
  return json{{"lambda", lambda},
              {"cube", {{"k", a.cube.level}, {"a", a.cube.shift}, {"m", a.cube.index}}},
              {"support", {{"lower", a.support.lower}, {"side", a.support.side}}},
              {"q", q},
              {"L", a.moment_order},
              {"kind", kind},
              {"values_ref",
               {{"offset", offset},
                {"count", a.values.size()},
                {"range", {{r[0].lo, r[0].hi}, {r[1].lo, r[1].hi}}}}}};
}

Atom atom_from_json(const nlohmann::json& j, const Domain& dom, const std::vector<double>& data, double& lambda) {
  Atom a;
  lambda = j.at("lambda").get<double>();
  a.cube.dim = dom.dim();
  a.cube.level = j.at("cube").at("k").get<int>();
  a.cube.shift = j.at("cube").at("a").get<std::array<int, 2>>();
  a.cube.index = j.at("cube").at("m").get<std::array<Index, 2>>();
  a.support = Box{dom.dim(), j.at("support").at("lower").get<std::array<double, 2>>(),
                  j.at("support").at("side").get<double>()};
  a.q = j.at("q").is_string() ? INFINITY : j.at("q").get<double>();
  a.moment_order = j.at("L").get<int>();
  const std::string kind = j.at("kind").get<std::string>();
  a.kind = kind == "local" ? AtomKind::local : kind == "unit" ? AtomKind::unit : AtomKind::single;
  const auto& ref = j.at("values_ref");
  const auto rr = ref.at("range").get<std::array<std::array<Index, 2>, 2>>();
  a.values = Patch(dom, {AxisRange{rr[0][0], rr[0][1]}, AxisRange{rr[1][0], rr[1][1]}});
  const Index offset = ref.at("offset").get<Index>();
  const Index count = ref.at("count").get<Index>();
  if (count != a.values.size() || offset + count > static_cast<Index>(data.size()))
    throw std::runtime_error("sidecar does not match the decomposition");
  for (Index l = 0; l < count; ++l) a.values.values()[l] = data[offset + l];
  return a;
}

}  // namespace

void save_decomposition(const AtomicDecomposition& dec, const std::string& stem) {
  using nlohmann::json;
  std::ofstream bin(stem + ".bin", std::ios::binary);
  if (!bin) throw std::runtime_error("cannot write " + stem + ".bin");
  json atoms = json::array();
  Index offset = 0;
  for (std::size_t j = 0; j < dec.atoms.size(); ++j) {
    atoms.push_back(atom_json(dec.atoms[j], dec.lambdas[j], offset));
    write_doubles(bin, dec.atoms[j].values.values());
    offset += dec.atoms[j].values.size();
  }
  json doc{{"level_min", dec.level_min},
           {"level_max", dec.level_max},
           {"dropped_norm", dec.dropped_norm},
           {"coverage_defect", dec.coverage_defect},
           {"sidecar", stem + ".bin"},
           {"atoms", atoms}};
  if (dec.single_part) {
    doc["single"] = atom_json(dec.single_part->second, dec.single_part->first, offset);
    write_doubles(bin, dec.single_part->second.values.values());
  }
  std::ofstream js(stem + ".json");
  if (!js) throw std::runtime_error("cannot write " + stem + ".json");
  js << doc.dump(1) << '\n';
}

AtomicDecomposition load_decomposition(const std::string& stem, const Domain& domain) {
  std::ifstream js(stem + ".json");
  std::ifstream bin(stem + ".bin", std::ios::binary);
  if (!js || !bin) throw std::runtime_error("cannot read decomposition " + stem);
  const nlohmann::json doc = nlohmann::json::parse(js);
  std::vector<double> data;
  std::uint64_t bits = 0;
  while (bin.read(reinterpret_cast<char*>(&bits), sizeof bits)) {
    if constexpr (std::endian::native == std::endian::big) bits = __builtin_bswap64(bits);
    data.push_back(std::bit_cast<double>(bits));
  }
  AtomicDecomposition dec;
  dec.level_min = doc.at("level_min").get<int>();
  dec.level_max = doc.at("level_max").get<int>();
  dec.dropped_norm = doc.at("dropped_norm").get<double>();
  dec.coverage_defect = doc.at("coverage_defect").get<double>();
  for (const auto& j : doc.at("atoms")) {
    double lambda = 0.0;
    dec.atoms.push_back(atom_from_json(j, domain, data, lambda));
    dec.lambdas.push_back(lambda);
  }
  if (doc.contains("single")) {
    double lambda = 0.0;
    Atom a = atom_from_json(doc.at("single"), domain, data, lambda);
    dec.single_part = std::make_pair(lambda, std::move(a));
  }
  return dec;
}

}  // namespace varhardy
