#pragma once

#include <array>
#include <optional>
#include <string>
#include <vector>

#include "varhardy/exponent.hpp"
#include "varhardy/grid.hpp"
#include "varhardy/hardy.hpp"
#include "varhardy/report.hpp"
#include "varhardy/weight.hpp"

namespace varhardy {

/// Lattice function stored on a rectangular block of indices and zero elsewhere.
/// Atoms and partition functions are local, so a full-window array per piece
/// would dominate memory.
class Patch {
 public:
  Patch() = default;
  /// Zero patch on the block range[0] x range[1] (range[1] ignored in 1D).
  Patch(const Domain& domain, const std::array<AxisRange, 2>& range);
  /// Block of lattice points of a closed box.
  static Patch over(const Domain& domain, const Box& box);

  const Domain& domain() const { return domain_; }
  const std::array<AxisRange, 2>& range() const { return range_; }
  Index size() const { return values_.size(); }
  const Eigen::ArrayXd& values() const { return values_; }
  Eigen::ArrayXd& values() { return values_; }

  /// Global flat index of local position `local`.
  Index global(Index local) const;
  /// Value at a global flat index (zero outside the block).
  double at(Index flat) const;
  bool covers(Index flat) const;

  GridFunction to_grid() const;
  /// g += scale * this.
  void add_to(GridFunction& g, double scale = 1.0) const;

 private:
  Domain domain_;
  std::array<AxisRange, 2> range_{};
  Eigen::ArrayXd values_;
};

/// Smallest block containing both ranges.
std::array<AxisRange, 2> range_union(const std::array<AxisRange, 2>& a, const std::array<AxisRange, 2>& b);
bool ranges_meet(const std::array<AxisRange, 2>& a, const std::array<AxisRange, 2>& b);

/// Polynomial of total degree <= degree in the scaled variable (x - center) / scale.
struct Polynomial {
  int dim = 1;
  int degree = 0;
  Point center = Point::Zero();
  double scale = 1.0;
  Eigen::VectorXd coeffs;  ///< ordered as monomial_exponents(dim, degree)
  double operator()(const Point& x) const;
};

/// Multi-indices with |beta| <= degree, graded then lexicographic.
std::vector<std::array<int, 2>> monomial_exponents(int dim, int degree);

/// Whitney ratio 2^(-n-6) and the dilations 1 + 2^(-n-11), 1 + 2^(-n-10).
double whitney_ratio(int dim);
double plateau_inner(int dim);
double plateau_outer(int dim);

/// Maximal shift-0 dyadic cubes Q with side >= min_side inside the open set
/// {omega != 0} satisfying diam(Q) <= 2^(-n-6) dist(Q, complement). Everything
/// outside the window counts as complement. Throws "no exterior" when omega is
/// the whole window.
std::vector<Cube> whitney_decompose(const GridFunction& omega, double min_side = 0.0);

/// Geometry of a Whitney family: worst two-sided margins, overlap of the
/// (1 + 2^(-n-10)) dilations and the number of uncovered points of omega.
Report whitney_geometry_check(const GridFunction& omega, const std::vector<Cube>& cubes);

/// eta_k = xi_k / sum_l xi_l with xi_k a smooth plateau equal to 1 on
/// (1 + 2^(-n-11))Q_k and supported in (1 + 2^(-n-10))Q_k.
std::vector<Patch> partition_of_unity(const Domain& domain, const std::vector<Cube>& cubes);

/// P in P_L with sum (g - P) x^beta eta = 0 for |beta| <= L, monomials centred
/// at the centre of eta's block. Throws NumericError("degenerate bump") when the
/// Gram matrix condition number exceeds 1e10.
Polynomial moment_projection(const GridFunction& g, const Patch& eta, int degree);
Polynomial moment_projection(const Patch& g, const Patch& eta, int degree);

struct BadPart {
  Cube cube;
  Patch eta;
  Polynomial projection;
  Patch values;  ///< b = (f - P) eta
};

struct CzDecomposition {
  double lambda = 0.0;
  GridFunction good;
  std::vector<BadPart> bad;
};

/// Calderon-Zygmund split f = g + sum b_k over the Whitney cubes of
/// {M_N f > lambda}, with M_N taken over `dict`.
CzDecomposition cz_decompose(const GridFunction& f, double lambda, const TestDictionary& dict, int degree);
/// Same with a precomputed grand maximal function.
CzDecomposition cz_decompose_from_maximal(const GridFunction& f, const GridFunction& maximal, double lambda,
                                          int degree);

enum class AtomKind { local, unit, single };

struct Atom {
  Box support;
  Cube cube;  ///< generating Whitney or unit cube
  Patch values;
  double q = INFINITY;
  int moment_order = -1;
  AtomKind kind = AtomKind::local;
};

/// Size, support and moment conditions of an atom, each with its margin.
Report validate_atom(const Atom& a, const Weight& w, const VariableExponent& p);

/// || (sum |lambda_j|^v chi_{Q_j})^(1/v) ||_{L^p(.)(w)}; v in (0, p_-) and (0, 1].
double sequence_norm(const std::vector<double>& lambdas, const std::vector<Box>& cubes, const VariableExponent& p,
                     const Weight& w, double v);

/// inf{lambda : sum_j int_{Q_j} (|lambda_j| / lambda)^p(x) w <= 1}.
double sequence_norm_dagger(const std::vector<double>& lambdas, const std::vector<Box>& cubes,
                            const VariableExponent& p, const Weight& w);

struct AtomicParams {
  double q = INFINITY;
  int moment_order = 0;
  double v = 1.0;
  double q_w = 1.0;         ///< critical index of w, e.g. from q_w_estimate
  bool single_atom = true;  ///< treat w as integrable and keep the bottom level as a single atom
  int depth = 30;           ///< number of dyadic levels below the top of M_N f
};

struct AtomicDecomposition {
  std::vector<double> lambdas;
  std::vector<Atom> atoms;
  std::optional<std::pair<double, Atom>> single_part;
  int level_min = 0;
  int level_max = 0;
  /// L^q(w) norm of the bottom remainder when it is not kept as a single atom.
  double dropped_norm = 0.0;
  /// Largest deviation of sum_k eta_k from 1 on the supports of the next level.
  double coverage_defect = 0.0;

  std::vector<Box> cubes() const;
};

/// Multi-level decomposition f = g_{j0} + sum_j sum_k lambda_{j,k} a_{j,k} with
/// lambda levels 2^j. Throws std::invalid_argument naming the failed
/// admissibility inequality.
AtomicDecomposition atomic_decompose(const GridFunction& f, const VariableExponent& p, const Weight& w,
                                     const TestDictionary& dict, const AtomicParams& params = {});

/// lambda_0 + A_{p(.),w,v} of a decomposition.
double decomposition_norm(const AtomicDecomposition& dec, const VariableExponent& p, const Weight& w, double v);

/// sum lambda_j a_j plus the single part; `domain` is used when dec is empty.
GridFunction synthesize(const AtomicDecomposition& dec, const Domain& domain);

/// Concatenation of two decompositions on the same domain.
AtomicDecomposition concatenate(const AtomicDecomposition& a, const AtomicDecomposition& b);

/// sup over x outside 2Q of M^0_N a(x) / (M^loc chi_Q(x))^((n + L + 1) / n), with
/// M^loc chi_Q evaluated exactly for cubes of side <= 1.
Report bad_part_majorant_check(const Atom& a, const TestDictionary& dict, const Weight& w,
                               const VariableExponent& p);

/// Exact sup over cubes R of side <= radius containing x of |R cap Q| / |R|.
double box_local_maximal(const Box& q, const Point& x, double radius = 1.0);

/// Writes `stem`.json and the sidecar `stem`.bin (little-endian doubles).
void save_decomposition(const AtomicDecomposition& dec, const std::string& stem);
AtomicDecomposition load_decomposition(const std::string& stem, const Domain& domain);

}  // namespace varhardy
