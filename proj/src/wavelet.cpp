#include "varhardy/wavelet.hpp"

#include <cmath>
#include <complex>
#include <fstream>
#include <stdexcept>

#include <json.hpp>
#include <unsupported/Eigen/Polynomials>

#include "varhardy/lebesgue.hpp"

namespace varhardy {

namespace {

using cplx = std::complex<double>;
using RowMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

double binomial(int n, int k) {
  double r = 1.0;
  for (int i = 1; i <= k; ++i) r = r * (n - k + i) / i;
  return r;
}

// Roots of P(y) = sum_{k<N} C(N-1+k, k) y^k, the Daubechies polynomial in
// y = sin^2(w/2). Working in y keeps the root problem of degree N-1.
std::vector<cplx> daubechies_roots(int order) {
  const int deg = order - 1;
  if (deg == 0) return {};
  Eigen::VectorXd coeffs(deg + 1);
  for (int k = 0; k <= deg; ++k) coeffs[k] = binomial(order - 1 + k, k);
  if (deg == 1) return {cplx(-coeffs[0] / coeffs[1], 0.0)};
  Eigen::PolynomialSolver<double, Eigen::Dynamic> solver(coeffs);
  std::vector<cplx> roots(solver.roots().data(), solver.roots().data() + deg);
  // A few Newton steps against the original coefficients.
  for (cplx& r : roots)
    for (int it = 0; it < 3; ++it) {
      cplx p = 0.0, dp = 0.0;
      for (int k = deg; k >= 0; --k) {
        dp = dp * r + p;
        p = p * r + coeffs[k];
      }
      if (std::abs(dp) > 0.0) r -= p / dp;
    }
  return roots;
}

}  // namespace

WaveletSystem build_wavelet_system(int order) {
  if (order < 2 || order > 10) throw std::invalid_argument("unsupported wavelet order " + std::to_string(order) + " (need 2..10)");
  // Each y root gives z^2 - (2 - 4y) z + 1 = 0; keep the root inside the unit
  // circle. H(z) ~ (1 + z)^N prod (z - z_r), coefficients reversed so the
  // large taps come first (the usual orientation).
  std::vector<cplx> poly{1.0};
  auto multiply = [&](cplx root) {
    std::vector<cplx> next(poly.size() + 1, 0.0);
    for (std::size_t i = 0; i < poly.size(); ++i) {
      next[i + 1] += poly[i];
      next[i] -= root * poly[i];
    }
    poly = std::move(next);
  };
  for (int i = 0; i < order; ++i) multiply(-1.0);
  for (const cplx& y : daubechies_roots(order)) {
    const cplx b = 2.0 - 4.0 * y;
    const cplx disc = std::sqrt(b * b - 4.0);
    cplx z = 0.5 * (b + disc);
    if (std::abs(z) > 1.0) z = 0.5 * (b - disc);
    multiply(z);
  }
  const Index taps = 2 * order;
  WaveletSystem sys;
  sys.order = order;
  sys.vanishing_moments = order;
  sys.scaling_filter.resize(taps);
  for (Index k = 0; k < taps; ++k) sys.scaling_filter[k] = poly[static_cast<std::size_t>(taps - 1 - k)].real();
  sys.scaling_filter *= std::sqrt(2.0) / sys.scaling_filter.sum();
  sys.wavelet_filter.resize(taps);
  for (Index k = 0; k < taps; ++k) sys.wavelet_filter[k] = (k % 2 ? -1.0 : 1.0) * sys.scaling_filter[taps - 1 - k];
  return sys;
}

double qmf_defect(const WaveletSystem& sys) {
  const Eigen::VectorXd& h = sys.scaling_filter;
  const Eigen::VectorXd& g = sys.wavelet_filter;
  const Index n = h.size();
  double worst = 0.0;
  for (Index m = 0; 2 * m < n; ++m) {
    double hh = 0.0, gh = 0.0, gg = 0.0;
    for (Index k = 0; k + 2 * m < n; ++k) {
      hh += h[k] * h[k + 2 * m];
      gh += g[k] * h[k + 2 * m] + (m > 0 ? h[k] * g[k + 2 * m] : 0.0);
      gg += g[k] * g[k + 2 * m];
    }
    const double delta = m == 0 ? 1.0 : 0.0;
    worst = std::max({worst, std::abs(hh - delta), std::abs(gh), std::abs(gg - delta)});
  }
  return worst;
}

namespace {

// One periodized analysis step: lo[k] = sum_i h_i c[2k+i], hi[k] = sum_i g_i c[2k+i].
void split(const double* in, Index n, const WaveletSystem& sys, double* lo, double* hi) {
  const Index half = n / 2, taps = sys.taps();
  for (Index k = 0; k < half; ++k) {
    double a = 0.0, d = 0.0;
    for (Index i = 0; i < taps; ++i) {
      const double v = in[(2 * k + i) % n];
      a += sys.scaling_filter[i] * v;
      d += sys.wavelet_filter[i] * v;
    }
    lo[k] = a;
    hi[k] = d;
  }
}

void merge(const double* lo, const double* hi, Index n, const WaveletSystem& sys, double* out) {
  const Index half = n / 2, taps = sys.taps();
  std::fill(out, out + n, 0.0);
  for (Index k = 0; k < half; ++k)
    for (Index i = 0; i < taps; ++i)
      out[(2 * k + i) % n] += sys.scaling_filter[i] * lo[k] + sys.wavelet_filter[i] * hi[k];
}

// Applies `split` along one axis of a row-major n0 x n1 block.
void split_axis(const RowMatrix& in, int axis, const WaveletSystem& sys, RowMatrix& lo, RowMatrix& hi) {
  const Index n0 = in.rows(), n1 = in.cols();
  if (axis == 1) {
    lo.resize(n0, n1 / 2);
    hi.resize(n0, n1 / 2);
    for (Index r = 0; r < n0; ++r) split(in.row(r).data(), n1, sys, lo.row(r).data(), hi.row(r).data());
    return;
  }
  lo.resize(n0 / 2, n1);
  hi.resize(n0 / 2, n1);
  Eigen::VectorXd col(n0), a(n0 / 2), d(n0 / 2);
  for (Index c = 0; c < n1; ++c) {
    col = in.col(c);
    split(col.data(), n0, sys, a.data(), d.data());
    lo.col(c) = a;
    hi.col(c) = d;
  }
}

void merge_axis(const RowMatrix& lo, const RowMatrix& hi, int axis, const WaveletSystem& sys, RowMatrix& out) {
  if (axis == 1) {
    out.resize(lo.rows(), 2 * lo.cols());
    for (Index r = 0; r < lo.rows(); ++r) merge(lo.row(r).data(), hi.row(r).data(), out.cols(), sys, out.row(r).data());
    return;
  }
  out.resize(2 * lo.rows(), lo.cols());
  Eigen::VectorXd a(lo.rows()), d(lo.rows()), col(out.rows());
  for (Index c = 0; c < lo.cols(); ++c) {
    a = lo.col(c);
    d = hi.col(c);
    merge(a.data(), d.data(), out.rows(), sys, col.data());
    out.col(c) = col;
  }
}

Eigen::ArrayXd flatten(const RowMatrix& m) { return Eigen::Map<const Eigen::ArrayXd>(m.data(), m.size()); }
RowMatrix unflatten(const Eigen::ArrayXd& a, Index rows, Index cols) {
  return Eigen::Map<const RowMatrix>(a.data(), rows, cols);
}

Index positions_at(double half_width, int level) {
  const double p = std::ldexp(2.0 * half_width, level);
  return static_cast<Index>(std::llround(p));
}

void check_levels(const Domain& d, int coarse, int fine) {
  const double t_scaled = std::ldexp(d.half_width(), coarse);
  if (t_scaled < 1.0 || t_scaled != std::floor(t_scaled))
    throw std::invalid_argument("wavelet level overflow: coarse level " + std::to_string(coarse) +
                                " leaves fewer than two cubes on the window");
  if (fine > d.level() - 1)
    throw std::invalid_argument("wavelet level overflow: Jmax " + std::to_string(fine) + " exceeds m - 1 = " +
                                std::to_string(d.level() - 1));
  if (fine < coarse) throw std::invalid_argument("wavelet level overflow: Jmax < J");
}

}  // namespace

Index WaveletCoefficients::positions(int level) const { return positions_at(half_width, level); }

Index WaveletCoefficients::count() const {
  Index total = scaling.size();
  for (const auto& lv : detail)
    for (const auto& ch : lv) total += ch.size();
  return total;
}

double WaveletCoefficients::energy() const {
  double e = scaling.square().sum();
  for (const auto& lv : detail)
    for (const auto& ch : lv) e += ch.square().sum();
  return e;
}

Index WaveletCoefficients::translate(int level, Index position) const {
  return position - positions(level) / 2;
}

WaveletCoefficients analyze(const GridFunction& f, const WaveletSystem& sys, int coarse, int fine) {
  const Domain& d = f.domain();
  check_levels(d, coarse, fine);
  const int dim = d.dim();
  WaveletCoefficients out;
  out.dim = dim;
  out.half_width = d.half_width();
  out.coarse = coarse;
  out.fine = fine;
  out.detail.resize(static_cast<std::size_t>(fine - coarse + 1));

  const double scale = std::pow(d.step(), 0.5 * dim);
  const Index n = d.per_axis();
  RowMatrix c = dim == 1 ? RowMatrix(unflatten(scale * f.values(), 1, n)) : RowMatrix(unflatten(scale * f.values(), n, n));
  RowMatrix lo, hi, ll, lh, hl, hh;
  for (int j = d.level() - 1; j >= coarse; --j) {
    std::vector<Eigen::ArrayXd> bands;
    if (dim == 1) {
      split_axis(c, 1, sys, lo, hi);
      bands.push_back(flatten(hi));
      c = lo;
    } else {
      split_axis(c, 1, sys, lo, hi);
      split_axis(lo, 0, sys, ll, hl);
      split_axis(hi, 0, sys, lh, hh);
      bands = {flatten(hl), flatten(lh), flatten(hh)};
      c = ll;
    }
    if (j <= fine) out.detail[static_cast<std::size_t>(j - coarse)] = std::move(bands);
  }
  out.scaling = flatten(c);
  return out;
}

WaveletCoefficients analyze(const GridFunction& f, const WaveletSystem& sys) {
  return analyze(f, sys, 0, f.domain().level() - 1);
}

GridFunction synthesize(const WaveletCoefficients& c, const WaveletSystem& sys, const Domain& domain) {
  if (domain.dim() != c.dim || domain.half_width() != c.half_width)
    throw std::invalid_argument("coefficients do not match the domain");
  check_levels(domain, c.coarse, c.fine);
  const int dim = c.dim;
  Index p = c.positions(c.coarse);
  RowMatrix acc = dim == 1 ? unflatten(c.scaling, 1, p) : unflatten(c.scaling, p, p);
  RowMatrix lo, hi, zero;
  for (int j = c.coarse; j <= domain.level() - 1; ++j) {
    const bool stored = j <= c.fine;
    const auto* bands = stored ? &c.detail[static_cast<std::size_t>(j - c.coarse)] : nullptr;
    if (dim == 1) {
      const RowMatrix d = stored ? unflatten((*bands)[0], 1, p) : RowMatrix::Zero(1, p);
      merge_axis(acc, d, 1, sys, lo);
      acc = lo;
    } else {
      zero = RowMatrix::Zero(p, p);
      const RowMatrix b0 = stored ? unflatten((*bands)[0], p, p) : zero;
      const RowMatrix b1 = stored ? unflatten((*bands)[1], p, p) : zero;
      const RowMatrix b2 = stored ? unflatten((*bands)[2], p, p) : zero;
      merge_axis(acc, b0, 0, sys, lo);
      merge_axis(b1, b2, 0, sys, hi);
      merge_axis(lo, hi, 1, sys, acc);
    }
    p *= 2;
  }
  const double scale = std::pow(domain.step(), -0.5 * dim);
  return {domain, scale * flatten(acc)};
}

namespace {

// Adds |value|^2 2^{jn} on the lattice points of each level-j cube.
void accumulate_level(const Eigen::ArrayXd& band, int level, const Domain& d, Eigen::ArrayXd& acc) {
  const int shift = d.level() - level;
  const double height = std::ldexp(1.0, level * d.dim());
  const Index n = d.per_axis();
  const Index p = n >> shift;
  if (d.dim() == 1) {
    for (Index i = 0; i < n; ++i) acc[i] += band[i >> shift] * band[i >> shift] * height;
    return;
  }
  for (Index i0 = 0; i0 < n; ++i0)
    for (Index i1 = 0; i1 < n; ++i1) {
      const double v = band[(i0 >> shift) * p + (i1 >> shift)];
      acc[i0 * n + i1] += v * v * height;
    }
}

}  // namespace

GridFunction v_function(const WaveletCoefficients& c, const Domain& domain) {
  check_levels(domain, c.coarse, c.fine);
  Eigen::ArrayXd acc = Eigen::ArrayXd::Zero(domain.size());
  accumulate_level(c.scaling, c.coarse, domain, acc);
  return {domain, acc.sqrt()};
}

GridFunction w_function(const WaveletCoefficients& c, const Domain& domain) {
  check_levels(domain, c.coarse, c.fine);
  Eigen::ArrayXd acc = Eigen::ArrayXd::Zero(domain.size());
  for (int j = c.coarse; j <= c.fine; ++j)
    for (const auto& band : c.detail[static_cast<std::size_t>(j - c.coarse)]) accumulate_level(band, j, domain, acc);
  return {domain, acc.sqrt()};
}

GridFunction v_function(const GridFunction& f, const WaveletSystem& sys, int coarse) {
  return v_function(analyze(f, sys, coarse, coarse), f.domain());
}

GridFunction w_function(const GridFunction& f, const WaveletSystem& sys, int coarse, int fine) {
  return w_function(analyze(f, sys, coarse, fine), f.domain());
}

int required_wavelet_moment_order(int dim, double q_w, double p_minus) {
  const double v = dim * (q_w / std::min(1.0, p_minus) - 1.0);
  return std::max(-1, static_cast<int>(std::floor(v + 1e-12)));
}

double wavelet_norm(const GridFunction& f, const VariableExponent& p, const Weight& w, const WaveletSystem& sys,
                    int coarse, int fine, double q_w) {
  const int need = required_wavelet_moment_order(f.domain().dim(), q_w, p.p_minus());
  if (sys.moment_order() < need)
    throw std::invalid_argument("wavelet moment condition fails: need L >= " + std::to_string(need) + ", order " +
                                std::to_string(sys.order) + " gives L = " + std::to_string(sys.moment_order()));
  const WaveletCoefficients c = analyze(f, sys, coarse, fine);
  return luxemburg_norm(v_function(c, f.domain()), p, w) + luxemburg_norm(w_function(c, f.domain()), p, w);
}

Box expanded_cube(int level, const std::array<Index, 2>& translate, int dim, const WaveletSystem& sys) {
  const double side = std::ldexp(1.0, -level);
  return Box{dim, {side * translate[0], dim > 1 ? side * translate[1] : 0.0}, side * (2 * sys.order - 1)};
}

Box standard_cube(int level, const std::array<Index, 2>& translate, int dim) {
  const double side = std::ldexp(1.0, -level);
  return Box{dim, {side * translate[0], dim > 1 ? side * translate[1] : 0.0}, side};
}

void save_coefficients(const WaveletCoefficients& c, const std::string& stem, double threshold) {
  using nlohmann::json;
  json doc;
  doc["dim"] = c.dim;
  doc["half_width"] = c.half_width;
  doc["J"] = c.coarse;
  doc["Jmax"] = c.fine;
  json records = json::array();
  json blocks = json::array();
  std::ofstream bin(stem + ".bin", std::ios::binary);
  if (!bin) throw std::runtime_error("cannot write " + stem + ".bin");
  Index offset = 0;
  auto emit = [&](const Eigen::ArrayXd& band, int l, int j) {
    const Index p = c.positions(j);
    for (Index a = 0; a < band.size(); ++a) {
      if (!(std::abs(band[a]) > threshold) && threshold > 0.0) continue;
      json rec{{"l", l}, {"j", j}, {"value", band[a]}};
      if (c.dim == 1)
        rec["k"] = c.translate(j, a);
      else
        rec["k"] = {c.translate(j, a / p), c.translate(j, a % p)};
      records.push_back(std::move(rec));
    }
    bin.write(reinterpret_cast<const char*>(band.data()), static_cast<std::streamsize>(band.size() * sizeof(double)));
    blocks.push_back({{"l", l}, {"j", j}, {"offset", offset}, {"count", band.size()}});
    offset += band.size();
  };
  emit(c.scaling, -1, c.coarse);
  for (int j = c.coarse; j <= c.fine; ++j) {
    const auto& lv = c.detail[static_cast<std::size_t>(j - c.coarse)];
    for (std::size_t l = 0; l < lv.size(); ++l) emit(lv[l], static_cast<int>(l), j);
  }
  doc["blocks"] = std::move(blocks);
  doc["coefficients"] = std::move(records);
  std::ofstream js(stem + ".json");
  if (!js) throw std::runtime_error("cannot write " + stem + ".json");
  js << doc.dump(1) << '\n';
}

WaveletCoefficients load_coefficients(const std::string& stem) {
  using nlohmann::json;
  std::ifstream js(stem + ".json");
  if (!js) throw std::runtime_error("cannot read " + stem + ".json");
  const json doc = json::parse(js);
  WaveletCoefficients c;
  c.dim = doc.at("dim").get<int>();
  c.half_width = doc.at("half_width").get<double>();
  c.coarse = doc.at("J").get<int>();
  c.fine = doc.at("Jmax").get<int>();
  c.detail.assign(static_cast<std::size_t>(c.fine - c.coarse + 1), {});
  std::ifstream bin(stem + ".bin", std::ios::binary);
  if (!bin) throw std::runtime_error("cannot read " + stem + ".bin");
  for (const json& b : doc.at("blocks")) {
    Eigen::ArrayXd band(b.at("count").get<Index>());
    bin.seekg(static_cast<std::streamoff>(b.at("offset").get<Index>() * sizeof(double)));
    bin.read(reinterpret_cast<char*>(band.data()), static_cast<std::streamsize>(band.size() * sizeof(double)));
    if (!bin) throw std::runtime_error("truncated coefficient sidecar " + stem + ".bin");
    const int l = b.at("l").get<int>();
    if (l < 0)
      c.scaling = std::move(band);
    else
      c.detail[static_cast<std::size_t>(b.at("j").get<int>() - c.coarse)].push_back(std::move(band));
  }
  return c;
}

}  // namespace varhardy
