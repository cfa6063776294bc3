#pragma once

#include <string>
#include <vector>

#include <Eigen/Core>

#include "varhardy/exponent.hpp"
#include "varhardy/grid.hpp"
#include "varhardy/weight.hpp"

namespace varhardy {

/// Daubechies orthonormal filter bank of order N: phi and psi are supported
/// on [0, 2N-1] and psi has N vanishing moments (orders 0..N-1).
struct WaveletSystem {
  int order = 2;  ///< N
  Eigen::VectorXd scaling_filter;  ///< h_0..h_{2N-1}, sum sqrt(2)
  Eigen::VectorXd wavelet_filter;  ///< g_k = (-1)^k h_{2N-1-k}
  int vanishing_moments = 2;

  /// Largest L with psi orthogonal to polynomials of degree <= L.
  int moment_order() const { return vanishing_moments - 1; }
  Index taps() const { return scaling_filter.size(); }
  /// Wavelet channels in dimension n: 2^n - 1.
  static int channels(int dim) { return dim == 1 ? 1 : 3; }
};

/// Spectral factorization with the minimum-phase root choice. N in 2..10.
WaveletSystem build_wavelet_system(int order);

/// Largest deviation from the quadrature-mirror relations
/// sum_k h_k h_{k+2m} = delta_m, sum_k g_k h_{k+2m} = 0, sum_k g_k g_{k+2m} = delta_m.
double qmf_defect(const WaveletSystem& sys);

/// Periodized coefficients on the window [-T, T)^n. Level j has
/// 2T 2^j positions per axis; array position a stands for the translate
/// k = a - T 2^j, i.e. the cube [2^-j k, 2^-j (k + 1)).
struct WaveletCoefficients {
  int dim = 1;
  double half_width = 1.0;
  int coarse = 0;  ///< J
  int fine = 0;    ///< Jmax
  Eigen::ArrayXd scaling;  ///< <f, phi_{J,k}>, row-major over positions
  /// detail[j - J][l] holds <f, psi^l_{j,k}>; one channel in 1D, three in 2D
  /// (l = 0: high pass along axis 0, 1: along axis 1, 2: both).
  std::vector<std::vector<Eigen::ArrayXd>> detail;

  Index positions(int level) const;
  Index count() const;
  double energy() const;
  Index translate(int level, Index position) const;
};

/// <f, phi_{J,k}>, <f, psi^l_{j,k}> for J <= j <= Jmax. Finest-level scaling
/// coefficients are h^{n/2} f(x_i), so the transform is orthonormal for the
/// lattice L^2 inner product. Requires 2T 2^J >= 1 and Jmax <= m - 1.
WaveletCoefficients analyze(const GridFunction& f, const WaveletSystem& sys, int coarse, int fine);
/// J = 0, Jmax = m - 1.
WaveletCoefficients analyze(const GridFunction& f, const WaveletSystem& sys);

/// Inverse transform; levels above Jmax are taken as zero.
GridFunction synthesize(const WaveletCoefficients& c, const WaveletSystem& sys, const Domain& domain);

/// (sum_k |<f, phi_{J,k}>|^2 2^{Jn} chi_{Q_{J,k}})^{1/2}.
GridFunction v_function(const GridFunction& f, const WaveletSystem& sys, int coarse);
GridFunction v_function(const WaveletCoefficients& c, const Domain& domain);

/// (sum_l sum_{J<=j<=Jmax} sum_k |<f, psi^l_{j,k}>|^2 2^{jn} chi_{Q_{j,k}})^{1/2}.
GridFunction w_function(const GridFunction& f, const WaveletSystem& sys, int coarse, int fine);
GridFunction w_function(const WaveletCoefficients& c, const Domain& domain);

/// max(-1, floor(n (q_w / min(1, p_-) - 1))).
int required_wavelet_moment_order(int dim, double q_w, double p_minus);

/// ||Vf||_{L^p(.)(w)} + ||Wf||_{L^p(.)(w)}. Throws std::invalid_argument naming
/// the required L when psi has too few vanishing moments.
double wavelet_norm(const GridFunction& f, const VariableExponent& p, const Weight& w, const WaveletSystem& sys,
                    int coarse, int fine, double q_w = 1.0);

/// Q*_{j,k} = prod [2^-j k_m, 2^-j (k_m + 2N - 1)], the support of psi^l_{j,k}.
Box expanded_cube(int level, const std::array<Index, 2>& translate, int dim, const WaveletSystem& sys);
/// Q_{j,k} = prod [2^-j k_m, 2^-j (k_m + 1)].
Box standard_cube(int level, const std::array<Index, 2>& translate, int dim);

/// Writes `stem`.json with records {l, j, k, value} for coefficients with
/// |value| > threshold (l = -1 marks scaling coefficients) and `stem`.bin with
/// every coefficient as little-endian doubles, scaling block first, then
/// detail blocks by level and channel.
void save_coefficients(const WaveletCoefficients& c, const std::string& stem, double threshold = 0.0);
WaveletCoefficients load_coefficients(const std::string& stem);

}  // namespace varhardy
