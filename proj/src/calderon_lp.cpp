#include "varhardy/calderon_lp.hpp"

#include <cmath>

#include <Eigen/SVD>

#include "varhardy/atoms.hpp"
#include "varhardy/lebesgue.hpp"

namespace varhardy {

namespace {

// Steep bump exp(a - a / (1 - t^2)). With a = 8 it is close to a Gaussian of
// width 1/4, so lattice samples keep their moments down to scale 4h; the
// plain a = 1 bump loses 1e-2 of its mass there.
constexpr double kSteepness = 8.0;
double bump1(double t) {
  return std::abs(t) < 1.0 ? std::exp(kSteepness - kSteepness / (1.0 - t * t)) : 0.0;
}

// int_{-1}^{1} t^k b(t) dt; the trapezoidal rule is spectrally accurate for
// integrands whose derivatives all vanish at the endpoints.
double bump_moment(int k) {
  if (k % 2 == 1) return 0.0;
  constexpr int steps = 1 << 14;
  const double dt = 2.0 / steps;
  double acc = 0.0;
  for (int i = 1; i < steps; ++i) {
    const double t = -1.0 + i * dt;
    acc += std::pow(t, k) * bump1(t);
  }
  return acc * dt;
}

}  // namespace

PhiPair::PhiPair(int dim, int moment_order) : dim_(dim), order_(moment_order) {
  if (dim != 1 && dim != 2) throw std::invalid_argument("dimension must be 1 or 2");
  if (moment_order < 0) throw std::invalid_argument("moment order must be >= 0");
  exps_ = monomial_exponents(dim, moment_order);
  const Index m = static_cast<Index>(exps_.size());
  std::vector<double> mom(2 * moment_order + 1);
  for (int k = 0; k <= 2 * moment_order; ++k) mom[k] = bump_moment(k);
  Eigen::MatrixXd gram(m, m);
  for (Index a = 0; a < m; ++a)
    for (Index c = 0; c < m; ++c) {
      double v = mom[exps_[a][0] + exps_[c][0]];
      if (dim > 1) v *= mom[exps_[a][1] + exps_[c][1]];
      gram(a, c) = v;
    }
  Eigen::VectorXd rhs = Eigen::VectorXd::Zero(m);
  rhs[0] = 1.0;
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(gram, Eigen::ComputeFullU | Eigen::ComputeFullV);
  const auto& s = svd.singularValues();
  if (!(s[m - 1] > 0.0) || s[0] / s[m - 1] > 1e12) throw NumericError("singular moment system");
  coeffs_ = svd.solve(rhs);
}

double PhiPair::phi(const Point& x) const {
  double base = bump1(x[0]);
  if (dim_ > 1) base *= bump1(x[1]);
  if (base == 0.0) return 0.0;
  double q = 0.0;
  for (std::size_t i = 0; i < exps_.size(); ++i)
    q += coeffs_[static_cast<Index>(i)] * std::pow(x[0], exps_[i][0]) * (dim_ > 1 ? std::pow(x[1], exps_[i][1]) : 1.0);
  return base * q;
}

GridFunction PhiPair::kernel(const Domain& domain, double t) const {
  if (domain.dim() != dim_) throw std::invalid_argument("dimension mismatch");
  return sample_dilated(domain, [this](const Point& x) { return phi(x); }, t);
}

GridFunction PhiPair::star_kernel(const Domain& domain, double t) const {
  if (domain.dim() != dim_) throw std::invalid_argument("dimension mismatch");
  return sample_dilated(domain, [this](const Point& x) { return phi_star(x); }, t);
}

PhiPair make_phi_pair(int dim, int moment_order) { return PhiPair(dim, moment_order); }

int max_lp_level(const Domain& domain) { return domain.level() - 2; }

namespace {

void check_levels(const Domain& d, int levels) {
  if (levels < 0) throw std::invalid_argument("level count must be >= 0");
  if (levels > max_lp_level(d)) throw std::invalid_argument("J too deep: 2^-J must be >= 4h");
}

}  // namespace

GridFunction square_function(const GridFunction& f, const PhiPair& pair, int levels) {
  const Domain& d = f.domain();
  check_levels(d, levels);
  const Convolver conv(f);
  Eigen::ArrayXd acc = Eigen::ArrayXd::Zero(d.size());
  int j = 1;
  for (; j + 1 <= levels; j += 2) {
    const auto [a, b] = conv.apply_pair(pair.star_kernel(d, std::ldexp(1.0, -j)), pair.star_kernel(d, std::ldexp(1.0, -j - 1)));
    acc += a.values().square() + b.values().square();
  }
  if (j == levels) acc += conv.apply(pair.star_kernel(d, std::ldexp(1.0, -j))).values().square();
  return {d, acc.sqrt()};
}

double lp_norm(const GridFunction& f, const VariableExponent& p, const Weight& w, const PhiPair& pair, int levels) {
  const GridFunction low = convolve(f, pair.kernel(f.domain(), 1.0));
  return luxemburg_norm(low, p, w) + luxemburg_norm(square_function(f, pair, levels), p, w);
}

Telescope telescoping_reconstruct(const GridFunction& f, const PhiPair& pair, int levels) {
  const Domain& d = f.domain();
  check_levels(d, levels);
  const Convolver conv(f);
  Telescope out;
  out.sum = conv.apply(pair.kernel(d, 1.0));
  for (int j = 1; j <= levels; ++j) out.sum += conv.apply(pair.star_kernel(d, std::ldexp(1.0, -j)));
  out.target = conv.apply(pair.kernel(d, std::ldexp(1.0, -levels)));
  const double scale = out.target.max_abs();
  out.identity_error = scale > 0.0 ? (out.sum - out.target).max_abs() / scale : (out.sum - out.target).max_abs();
  const double norm = std::sqrt(f.values().square().sum());
  const double diff = std::sqrt((out.sum - f).values().square().sum());
  out.relative_l2_error = norm > 0.0 ? diff / norm : diff;
  return out;
}

}  // namespace varhardy
