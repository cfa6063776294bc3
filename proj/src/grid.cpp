#include "varhardy/grid.hpp"

#include <algorithm>
#include <cmath>
#include <complex>

#include <unsupported/Eigen/FFT>

namespace varhardy {

namespace {

Index floor_div(Index a, Index b) {
  Index q = a / b;
  if ((a % b != 0) && ((a < 0) != (b < 0))) --q;
  return q;
}

Index ceil_div(Index a, Index b) { return -floor_div(-a, b); }

bool is_power_of_two(Index v) { return v > 0 && (v & (v - 1)) == 0; }

// Side of a level-k cube in lattice steps of a level-M domain.
Index side_in_steps(const Domain& domain, int level) {
  if (level > domain.level()) throw std::invalid_argument("cube finer than the lattice");
  const int shift = domain.level() - level;
  if (shift > 60) throw std::invalid_argument("cube too coarse for integer arithmetic");
  return Index{1} << shift;
}

void require_same_domain(const Domain& a, const Domain& b) {
  if (a != b) throw std::invalid_argument("domain mismatch");
}

// In-place n-dimensional FFT on a P^dim complex buffer (row-major).
void fft_nd(Eigen::ArrayXcd& data, Index padded, int dim, bool forward) {
  Eigen::FFT<double> fft;
  std::vector<std::complex<double>> in(padded), out(padded);
  auto run = [&](Index offset, Index stride) {
    for (Index t = 0; t < padded; ++t) in[t] = data[offset + t * stride];
    if (forward)
      fft.fwd(out, in);
    else
      fft.inv(out, in);
    for (Index t = 0; t < padded; ++t) data[offset + t * stride] = out[t];
  };
  if (dim == 1) {
    run(0, 1);
    return;
  }
  for (Index r = 0; r < padded; ++r) run(r * padded, 1);
  for (Index c = 0; c < padded; ++c) run(c, padded);
}

}  // namespace

Domain::Domain(int dim, double half_width, int level) : dim_(dim), half_width_(half_width), level_(level) {
  if (dim != 1 && dim != 2) throw std::invalid_argument("dimension must be 1 or 2");
  if (!(half_width > 0.0)) throw std::invalid_argument("half width must be positive");
  if (level < 0 || level > 30) throw std::invalid_argument("level out of range");
  step_ = std::ldexp(1.0, -level);
  const double count = 2.0 * half_width / step_;
  if (count != std::floor(count) || count < 2.0) throw std::invalid_argument("step must divide the window");
  per_axis_ = static_cast<Index>(count);
  if (!is_power_of_two(per_axis_)) throw std::invalid_argument("samples per axis must be a power of two");
}

Point Domain::point(Index flat) const {
  const auto idx = multi_index(flat);
  return Point(coord(idx[0]), dim_ == 1 ? 0.0 : coord(idx[1]));
}

GridFunction::GridFunction(Domain domain, Eigen::ArrayXd samples)
    : domain_(std::move(domain)), values_(std::move(samples)) {
  if (values_.size() != domain_.size()) throw std::invalid_argument("sample count does not match domain");
  if (!values_.allFinite()) throw std::invalid_argument("grid function samples must be finite");
}

GridFunction GridFunction::zeros(const Domain& domain) { return {domain, Eigen::ArrayXd::Zero(domain.size())}; }

GridFunction GridFunction::constant(const Domain& domain, double value) {
  return {domain, Eigen::ArrayXd::Constant(domain.size(), value)};
}

GridFunction& GridFunction::operator+=(const GridFunction& other) {
  require_same_domain(domain_, other.domain_);
  values_ += other.values_;
  return *this;
}

GridFunction& GridFunction::operator-=(const GridFunction& other) {
  require_same_domain(domain_, other.domain_);
  values_ -= other.values_;
  return *this;
}

GridFunction operator+(GridFunction a, const GridFunction& b) { return a += b; }
GridFunction operator-(GridFunction a, const GridFunction& b) { return a -= b; }
GridFunction operator*(double c, GridFunction a) { return a *= c; }

double Cube::side() const { return std::ldexp(1.0, -level); }

double Cube::corner(int axis) const {
  return std::ldexp(static_cast<double>(index[axis]) + shift[axis] / 3.0, -level);
}

double Cube::volume() const { return std::pow(side(), dim); }

Point Cube::center() const {
  const double half = 0.5 * side();
  return Point(corner(0) + half, dim > 1 ? corner(1) + half : 0.0);
}

bool Cube::contains(const Point& x) const {
  for (int d = 0; d < dim; ++d) {
    const double c = corner(d);
    if (x[d] < c || x[d] >= c + side()) return false;
  }
  return true;
}

AxisRange Cube::lattice_range(const Domain& domain, int axis) const {
  const Index s = side_in_steps(domain, level);
  const Index lower = index[axis] * 3 * s + shift[axis] * s;  // units of h/3
  const Index upper = lower + 3 * s;
  const Index half = domain.half_count();
  AxisRange r{ceil_div(lower, 3) + half, ceil_div(upper, 3) + half};
  r.lo = std::clamp<Index>(r.lo, 0, domain.per_axis());
  r.hi = std::clamp<Index>(r.hi, 0, domain.per_axis());
  return r;
}

bool Cube::inside_window(const Domain& domain) const {
  const double t = domain.half_width();
  for (int d = 0; d < dim; ++d) {
    if (corner(d) < -t || corner(d) + side() > t) return false;
  }
  return true;
}

Box Box::dilated(double factor) const {
  Box b = *this;
  const double grow = 0.5 * (factor - 1.0) * side;
  for (int d = 0; d < dim; ++d) b.lower[d] -= grow;
  b.side = factor * side;
  return b;
}

Point Box::center() const { return Point(lower[0] + 0.5 * side, dim > 1 ? lower[1] + 0.5 * side : 0.0); }

double Box::volume() const { return std::pow(side, dim); }

bool Box::contains(const Point& x) const {
  for (int d = 0; d < dim; ++d) {
    if (x[d] < lower[d] || x[d] > lower[d] + side) return false;
  }
  return true;
}

AxisRange Box::lattice_range(const Domain& domain, int axis) const {
  const double h = domain.step();
  const double eps = 1e-9 * h;
  const double t = domain.half_width();
  AxisRange r{static_cast<Index>(std::ceil((lower[axis] - eps + t) / h)),
              static_cast<Index>(std::floor((lower[axis] + side + eps + t) / h)) + 1};
  r.lo = std::clamp<Index>(r.lo, 0, domain.per_axis());
  r.hi = std::clamp<Index>(r.hi, 0, domain.per_axis());
  return r;
}

double Box::distance(const Point& x) const {
  double sq = 0.0;
  for (int d = 0; d < dim; ++d) {
    const double gap = std::max({lower[d] - x[d], 0.0, x[d] - (lower[d] + side)});
    sq += gap * gap;
  }
  return std::sqrt(sq);
}

std::vector<Shift> all_shifts(int dim) {
  std::vector<Shift> out;
  for (int a = 0; a < 3; ++a) {
    if (dim == 1) {
      out.push_back({a, 0});
      continue;
    }
    for (int b = 0; b < 3; ++b) out.push_back({a, b});
  }
  return out;
}

Cube cube_containing(const Domain& domain, Index flat, int level, const Shift& shift) {
  const Index s = side_in_steps(domain, level);
  const auto idx = domain.multi_index(flat);
  Cube q{domain.dim(), level, shift, {0, 0}};
  for (int d = 0; d < domain.dim(); ++d) {
    const Index u = 3 * (idx[d] - domain.half_count());
    q.index[d] = floor_div(u - shift[d] * s, 3 * s);
  }
  return q;
}

DyadicPartition::DyadicPartition(const Domain& domain, int level, const Shift& shift)
    : domain_(domain), level_(level), shift_(shift) {
  const Index s = side_in_steps(domain, level);
  const Index n = domain.per_axis();
  for (int d = 0; d < domain.dim(); ++d) {
    auto id = [&](Index i) { return floor_div(3 * (i - domain.half_count()) - shift[d] * s, 3 * s); };
    first_[d] = id(0);
    count_[d] = id(n - 1) - first_[d] + 1;
    axis_id_[d].resize(n);
    for (Index i = 0; i < n; ++i) axis_id_[d][i] = id(i) - first_[d];
  }
}

Cube DyadicPartition::cube(Index id) const {
  Cube q{domain_.dim(), level_, shift_, {0, 0}};
  q.index[0] = first_[0] + id / count_[1];
  if (domain_.dim() > 1) q.index[1] = first_[1] + id % count_[1];
  return q;
}

Eigen::ArrayXd DyadicPartition::sums(const Eigen::ArrayXd& field) const {
  Eigen::ArrayXd out = Eigen::ArrayXd::Zero(cube_count());
  for (Index k = 0; k < field.size(); ++k) out[cube_of(k)] += field[k];
  return out;
}

Eigen::ArrayXd DyadicPartition::counts() const {
  return sums(Eigen::ArrayXd::Ones(domain_.size()));
}

Eigen::ArrayXd DyadicPartition::broadcast(const Eigen::ArrayXd& per_cube) const {
  Eigen::ArrayXd out(domain_.size());
  for (Index k = 0; k < out.size(); ++k) out[k] = per_cube[cube_of(k)];
  return out;
}

double quadrature(const GridFunction& f) { return f.values().sum() * f.domain().cell_volume(); }

CubeIntegral quadrature(const GridFunction& f, const Cube& q) {
  const Domain& dom = f.domain();
  const AxisRange r0 = q.lattice_range(dom, 0);
  const AxisRange r1 = dom.dim() > 1 ? q.lattice_range(dom, 1) : AxisRange{0, 1};
  CubeIntegral out;
  if (r0.empty() || r1.empty()) return out;
  out.empty = false;
  double sum = 0.0;
  for (Index i = r0.lo; i < r0.hi; ++i)
    for (Index j = r1.lo; j < r1.hi; ++j) sum += f[dom.flat(i, j)];
  out.value = sum * dom.cell_volume();
  return out;
}

std::optional<int> exact_log2(double t) {
  if (!(t > 0.0) || !std::isfinite(t)) return std::nullopt;
  int e = 0;
  const double mant = std::frexp(t, &e);
  if (mant != 0.5) return std::nullopt;
  return e - 1;
}

std::vector<int> levels_between(const Domain& domain, double min_side, double max_side) {
  std::vector<int> out;
  const int k_lo = static_cast<int>(std::ceil(-std::log2(max_side) - 1e-12));
  const int k_hi = std::min(domain.level(), static_cast<int>(std::floor(-std::log2(min_side) + 1e-12)));
  for (int k = k_lo; k <= k_hi; ++k) out.push_back(k);
  return out;
}

std::vector<Cube> enumerate_cubes(const Domain& domain, double max_side, const std::vector<Shift>& shifts,
                                  std::optional<double> min_side) {
  const double h = domain.step();
  if (max_side < h) throw std::invalid_argument("max_side below the grid step");
  std::vector<int> levels = levels_between(domain, min_side.value_or(h), max_side);
  std::reverse(levels.begin(), levels.end());
  std::vector<Shift> sorted_shifts = shifts;
  std::sort(sorted_shifts.begin(), sorted_shifts.end());
  sorted_shifts.erase(std::unique(sorted_shifts.begin(), sorted_shifts.end()), sorted_shifts.end());

  std::vector<Cube> out;
  const Index half3 = 3 * domain.half_count();
  for (int k : levels) {
    const Index s = side_in_steps(domain, k);
    for (const Shift& a : sorted_shifts) {
      std::array<Index, 2> lo{0, 0}, hi{0, 0};
      for (int d = 0; d < domain.dim(); ++d) {
        lo[d] = floor_div(-half3 - a[d] * s, 3 * s);
        hi[d] = ceil_div(half3 - a[d] * s, 3 * s);  // exclusive
      }
      if (domain.dim() == 1) {
        for (Index m = lo[0]; m < hi[0]; ++m) out.push_back(Cube{1, k, {a[0], 0}, {m, 0}});
      } else {
        for (Index m0 = lo[0]; m0 < hi[0]; ++m0)
          for (Index m1 = lo[1]; m1 < hi[1]; ++m1) out.push_back(Cube{2, k, a, {m0, m1}});
      }
    }
  }
  return out;
}

Convolver::Convolver(const GridFunction& f) : domain_(f.domain()) {
  const Index n = domain_.per_axis();
  padded_ = 2 * n;
  const int dim = domain_.dim();
  spectrum_ = Eigen::ArrayXcd::Zero(dim == 1 ? padded_ : padded_ * padded_);
  if (dim == 1) {
    for (Index i = 0; i < n; ++i) spectrum_[i] = f[i];
  } else {
    for (Index i = 0; i < n; ++i)
      for (Index j = 0; j < n; ++j) spectrum_[i * padded_ + j] = f[domain_.flat(i, j)];
  }
  fft_nd(spectrum_, padded_, dim, true);
}

namespace {

// Convolves the cached spectrum with first + i second and returns both real results.
std::pair<Eigen::ArrayXd, Eigen::ArrayXd> convolve_packed(const Domain& dom, Index padded,
                                                          const Eigen::ArrayXcd& spectrum, const GridFunction& first,
                                                          const GridFunction* second) {
  const Index n = dom.per_axis();
  const Index half = dom.half_count();
  const int dim = dom.dim();
  Eigen::ArrayXcd buf = Eigen::ArrayXcd::Zero(spectrum.size());
  // Kernel sample l sits at displacement l - half; store it circularly.
  auto wrap = [&](Index l) { return ((l - half) % padded + padded) % padded; };
  auto packed = [&](Index k) { return std::complex<double>(first[k], second ? (*second)[k] : 0.0); };
  if (dim == 1) {
    for (Index l = 0; l < n; ++l) buf[wrap(l)] = packed(l);
  } else {
    for (Index i = 0; i < n; ++i)
      for (Index j = 0; j < n; ++j) buf[wrap(i) * padded + wrap(j)] = packed(dom.flat(i, j));
  }
  fft_nd(buf, padded, dim, true);
  buf *= spectrum;
  fft_nd(buf, padded, dim, false);
  Eigen::ArrayXd re(dom.size()), im(second ? dom.size() : 0);
  const double vol = dom.cell_volume();
  for (Index k = 0; k < dom.size(); ++k) {
    const auto idx = dom.multi_index(k);
    const std::complex<double> v = buf[dim == 1 ? idx[0] : idx[0] * padded + idx[1]] * vol;
    re[k] = v.real();
    if (second) im[k] = v.imag();
  }
  return {std::move(re), std::move(im)};
}

}  // namespace

GridFunction Convolver::apply(const GridFunction& kernel) const {
  require_same_domain(domain_, kernel.domain());
  return {domain_, convolve_packed(domain_, padded_, spectrum_, kernel, nullptr).first};
}

std::pair<GridFunction, GridFunction> Convolver::apply_pair(const GridFunction& first,
                                                            const GridFunction& second) const {
  require_same_domain(domain_, first.domain());
  require_same_domain(domain_, second.domain());
  auto out = convolve_packed(domain_, padded_, spectrum_, first, &second);
  return {GridFunction(domain_, std::move(out.first)), GridFunction(domain_, std::move(out.second))};
}

GridFunction convolve(const GridFunction& f, const GridFunction& g) {
  require_same_domain(f.domain(), g.domain());
  return Convolver(f).apply(g);
}

GridFunction rescale_mollifier(const GridFunction& phi, double t) {
  const Domain& dom = phi.domain();
  const auto e = exact_log2(t);
  if (!e) throw std::invalid_argument("scale must be a power of two");
  if (t < dom.step()) throw std::invalid_argument("scale below resolution");
  if (*e > 0) throw std::invalid_argument("lattice rescaling needs t <= 1");
  const Index factor = Index{1} << (-*e);
  const Index n = dom.per_axis();
  const Index half = dom.half_count();
  const double amp = std::pow(t, -dom.dim());
  Eigen::ArrayXd out = Eigen::ArrayXd::Zero(dom.size());
  auto source = [&](Index i) -> Index { return (i - half) * factor + half; };
  for (Index k = 0; k < dom.size(); ++k) {
    const auto idx = dom.multi_index(k);
    const Index s0 = source(idx[0]);
    const Index s1 = dom.dim() > 1 ? source(idx[1]) : 0;
    if (s0 < 0 || s0 >= n || s1 < 0 || s1 >= n) continue;
    out[k] = amp * phi[dom.flat(s0, s1)];
  }
  return {dom, std::move(out)};
}

GridFunction sample_dilated(const Domain& domain, const std::function<double(const Point&)>& fn, double t) {
  if (!(t > 0.0)) throw std::invalid_argument("scale must be positive");
  const double amp = std::pow(t, -domain.dim());
  return GridFunction::sample(domain, [&](const Point& x) { return amp * fn(x / t); });
}

GridFunction discrete_delta(const Domain& domain) {
  GridFunction d = GridFunction::zeros(domain);
  d[domain.flat(domain.half_count(), domain.half_count())] = 1.0 / domain.cell_volume();
  return d;
}

}  // namespace varhardy
