#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Core>

namespace varhardy {

using Index = std::int64_t;

/// Points of R^n for n <= 2. In dimension one the second coordinate is zero.
using Point = Eigen::Vector2d;

/// Raised when a numerical procedure cannot produce a meaningful value
/// (bracket overflow, singular moment systems, and the like).
class NumericError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Raised when a named preset cannot be parsed; the message names the key.
class PresetError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Uniform lattice on the window [-T, T)^n with step h = 2^-level.
///
/// Lattice points are x_i = -T + i h, i = 0..2T/h - 1, so the origin is a
/// lattice point and differences of lattice points are lattice
/// displacements. Each point stands for the cell [x_i, x_i + h).
class Domain {
 public:
  Domain() = default;
  Domain(int dim, double half_width, int level);

  int dim() const { return dim_; }
  double half_width() const { return half_width_; }
  int level() const { return level_; }
  double step() const { return step_; }
  Index per_axis() const { return per_axis_; }
  Index half_count() const { return per_axis_ / 2; }
  Index size() const { return dim_ == 1 ? per_axis_ : per_axis_ * per_axis_; }
  double cell_volume() const { return dim_ == 1 ? step_ : step_ * step_; }

  double coord(Index i) const { return -half_width_ + static_cast<double>(i) * step_; }
  std::array<Index, 2> multi_index(Index flat) const {
    if (dim_ == 1) return {flat, 0};
    return {flat / per_axis_, flat % per_axis_};
  }
  Index flat(Index i0, Index i1 = 0) const { return dim_ == 1 ? i0 : i0 * per_axis_ + i1; }
  Point point(Index flat) const;

  /// Same window, one level finer.
  Domain refined() const { return Domain(dim_, half_width_, level_ + 1); }

  bool operator==(const Domain& other) const {
    return dim_ == other.dim_ && half_width_ == other.half_width_ && level_ == other.level_;
  }
  bool operator!=(const Domain& other) const { return !(*this == other); }

 private:
  int dim_ = 1;
  double half_width_ = 1.0;
  int level_ = 0;
  double step_ = 1.0;
  Index per_axis_ = 2;
};

/// Sampled real-valued function on a Domain; zero outside the window.
class GridFunction {
 public:
  GridFunction() = default;
  GridFunction(Domain domain, Eigen::ArrayXd samples);

  static GridFunction zeros(const Domain& domain);
  static GridFunction constant(const Domain& domain, double value);

  template <class F>
  static GridFunction sample(const Domain& domain, F&& fn) {
    Eigen::ArrayXd v(domain.size());
    for (Index k = 0; k < domain.size(); ++k) v[k] = fn(domain.point(k));
    return GridFunction(domain, std::move(v));
  }

  const Domain& domain() const { return domain_; }
  const Eigen::ArrayXd& values() const { return values_; }
  Eigen::ArrayXd& values() { return values_; }
  Index size() const { return values_.size(); }
  double operator[](Index k) const { return values_[k]; }
  double& operator[](Index k) { return values_[k]; }

  GridFunction abs() const { return {domain_, values_.abs()}; }
  double max_abs() const { return values_.abs().maxCoeff(); }

  GridFunction& operator+=(const GridFunction& other);
  GridFunction& operator-=(const GridFunction& other);
  GridFunction& operator*=(double c) {
    values_ *= c;
    return *this;
  }

 private:
  Domain domain_;
  Eigen::ArrayXd values_;
};

GridFunction operator+(GridFunction a, const GridFunction& b);
GridFunction operator-(GridFunction a, const GridFunction& b);
GridFunction operator*(double c, GridFunction a);

/// Lattice index interval [lo, hi) along one axis; empty when lo >= hi.
struct AxisRange {
  Index lo = 0;
  Index hi = 0;
  bool empty() const { return hi <= lo; }
  Index count() const { return empty() ? 0 : hi - lo; }
};

/// Half-open cube 2^-k [m + a/3, m + a/3 + 1)^n of the shifted dyadic grid D_a.
struct Cube {
  int dim = 1;
  int level = 0;
  std::array<int, 2> shift{0, 0};
  std::array<Index, 2> index{0, 0};

  double side() const;
  double corner(int axis) const;
  double volume() const;
  Point center() const;
  bool contains(const Point& x) const;

  /// Lattice points of `domain` inside the cube along `axis` (exact integer test).
  AxisRange lattice_range(const Domain& domain, int axis) const;
  /// True when the cube lies inside the window [-T, T)^n.
  bool inside_window(const Domain& domain) const;

  bool operator==(const Cube& o) const {
    return dim == o.dim && level == o.level && shift == o.shift && index == o.index;
  }
};

/// Closed axis-parallel cube [lower, lower + side]^n, used for dilated
/// Whitney cubes and atom supports.
struct Box {
  int dim = 1;
  std::array<double, 2> lower{0.0, 0.0};
  double side = 0.0;

  static Box from_cube(const Cube& q) { return Box{q.dim, {q.corner(0), q.dim > 1 ? q.corner(1) : 0.0}, q.side()}; }
  /// Concentric dilation by `factor` (factor 2 gives 2Q).
  Box dilated(double factor) const;
  Point center() const;
  double volume() const;
  bool contains(const Point& x) const;
  AxisRange lattice_range(const Domain& domain, int axis) const;
  /// Euclidean distance from the closed box to x (0 when inside).
  double distance(const Point& x) const;
};

using Shift = std::array<int, 2>;

/// All shift vectors {0,1,2}^n.
std::vector<Shift> all_shifts(int dim);

/// Cube of level `level` and shift `shift` containing lattice point `flat`.
Cube cube_containing(const Domain& domain, Index flat, int level, const Shift& shift);

/// Assignment of lattice points to the cubes of one level of one shifted grid.
/// Cube ids run over the cubes that contain at least one lattice point.
class DyadicPartition {
 public:
  DyadicPartition(const Domain& domain, int level, const Shift& shift);

  const Domain& domain() const { return domain_; }
  int level() const { return level_; }
  Index cube_count() const { return count_[0] * count_[1]; }
  Index cube_of(Index flat) const {
    const auto idx = domain_.multi_index(flat);
    return axis_id_[0][idx[0]] * count_[1] + (domain_.dim() > 1 ? axis_id_[1][idx[1]] : 0);
  }
  Cube cube(Index id) const;
  bool inside_window(Index id) const { return cube(id).inside_window(domain_); }
  /// Per-cube sums of a lattice field.
  Eigen::ArrayXd sums(const Eigen::ArrayXd& field) const;
  /// Per-cube lattice point counts.
  Eigen::ArrayXd counts() const;
  /// Broadcast per-cube values back to the lattice.
  Eigen::ArrayXd broadcast(const Eigen::ArrayXd& per_cube) const;

 private:
  Domain domain_;
  int level_;
  Shift shift_;
  std::array<Index, 2> first_{0, 0};
  std::array<Index, 2> count_{1, 1};
  std::array<std::vector<Index>, 2> axis_id_;
};

/// Value of a Riemann sum over a cube together with an emptiness flag.
struct CubeIntegral {
  double value = 0.0;
  bool empty = true;
};

/// h^n times the sum of samples over the whole window.
double quadrature(const GridFunction& f);
/// h^n times the sum of samples over lattice points inside `q`.
CubeIntegral quadrature(const GridFunction& f, const Cube& q);

/// Shifted dyadic cubes with min_side <= side <= max_side meeting the window.
/// Ordered by level descending, then shift, then index lexicographically.
std::vector<Cube> enumerate_cubes(const Domain& domain, double max_side, const std::vector<Shift>& shifts,
                                  std::optional<double> min_side = std::nullopt);

/// Dyadic levels k with min_side <= 2^-k <= max_side, clipped to k <= domain level.
std::vector<int> levels_between(const Domain& domain, double min_side, double max_side);

/// Linear convolution h^n sum_j f(x_j) g(x_i - x_j) with zero extension.
GridFunction convolve(const GridFunction& f, const GridFunction& g);

/// Caches the transform of one operand for repeated convolutions.
class Convolver {
 public:
  explicit Convolver(const GridFunction& f);
  GridFunction apply(const GridFunction& kernel) const;
  /// Two real kernels for the price of one complex transform.
  std::pair<GridFunction, GridFunction> apply_pair(const GridFunction& first, const GridFunction& second) const;
  const Domain& domain() const { return domain_; }

 private:
  Domain domain_;
  Index padded_ = 0;
  Eigen::ArrayXcd spectrum_;
};

/// Samples t^-n phi(x / t) from lattice samples of phi, for t = 2^-j with h <= t <= 1.
GridFunction rescale_mollifier(const GridFunction& phi, double t);

/// Samples t^-n fn(x / t) directly from an analytic profile.
GridFunction sample_dilated(const Domain& domain, const std::function<double(const Point&)>& fn, double t);

/// Discrete delta of unit mass at the origin (value h^-n).
GridFunction discrete_delta(const Domain& domain);

/// Exact base-2 exponent of t when t is an integer power of two.
std::optional<int> exact_log2(double t);

}  // namespace varhardy
