// Truncated Fourier model of the loop space of 2pi-periodic curves in R^{2N}.
//
//   u(t) = a_0 + sum_{k=1..M} (a_k cos kt + b_k sin kt),   a_k, b_k in R^{2N}
//
// Coefficients are stored as a 2N x (2M+1) matrix with columns
// [a_0, a_1, b_1, ..., a_M, b_M]. Flattening that matrix column-major gives
// the mode-major, component-minor ordering used by the solver's matrices.
//
// Inner products:
//   <u, v>_L2 = int_0^{2pi} u.v dt
//   <u, v>_H1 = int_0^{2pi} (u.v + u'.v') dt

#ifndef VORB_LOOPS_HPP
#define VORB_LOOPS_HPP

#include <vector>

#include "vorb/core.hpp"
#include "vorb/equilibria.hpp"

namespace vorb {

class Loop {
 public:
  Loop() = default;
  Loop(int n, int modes);
  /// Takes ownership of a 2N x (2M+1) coefficient matrix.
  explicit Loop(Mat coeffs);

  static Loop zero(int n, int modes) { return Loop(n, modes); }
  static Loop constant(const Vec& value, int modes);
  /// Z(t) for a relative equilibrium with |omega| = 1 (a pure mode-1 loop).
  static Loop from_equilibrium(const RelativeEquilibrium& eq, int modes);

  int n() const { return n_; }
  int dim() const { return 2 * n_; }
  int modes() const { return modes_; }
  int columns() const { return 2 * modes_ + 1; }
  /// Length of the flattened coefficient vector.
  int size() const { return dim() * columns(); }

  const Mat& coeffs() const { return coeffs_; }
  Mat& coeffs() { return coeffs_; }
  Vec flat() const;
  static Loop from_flat(const Vec& flat, int n, int modes);

  Vec mean() const { return coeffs_.col(0); }
  Vec cos_coeff(int k) const { return coeffs_.col(2 * k - 1); }
  Vec sin_coeff(int k) const { return coeffs_.col(2 * k); }

  Vec eval(double t) const;
  /// Zero-pads or truncates to `modes`.
  Loop with_modes(int modes) const;

  Loop& operator+=(const Loop& other);
  Loop& operator-=(const Loop& other);
  Loop& operator*=(double s);

 private:
  int n_ = 0;
  int modes_ = 0;
  Mat coeffs_;
};

Loop operator+(Loop a, const Loop& b);
Loop operator-(Loop a, const Loop& b);
Loop operator*(double s, Loop a);

/// Mode number of coefficient column `col` (0 for the mean).
inline int mode_of_column(int col) { return (col + 1) / 2; }

double l2_inner(const Loop& u, const Loop& v);
double h1_inner(const Loop& u, const Loop& v);
double h1_norm(const Loop& u);

/// Diagonal of the H1 Gram matrix in the flattened coefficient basis.
Vec h1_weights(int n, int modes);
/// Diagonal of the L2 Gram matrix in the flattened coefficient basis.
Vec l2_weights(int n, int modes);

Loop differentiate(const Loop& u);
/// w -> w - w''.
Loop id_minus_laplace(const Loop& u);
/// Inverse of id - Laplace: scales mode k by 1/(1 + k^2).
Loop inv_id_minus_laplace(const Loop& u);
/// (theta * u)(t) = u(t + theta).
Loop time_shift(double theta, const Loop& u);

/// Z, its derivative and the translation directions for the splitting
/// X = N_Z (+) D of the orthogonal complement of Zdot.
struct LoopFrame {
  Loop Z;
  Loop Zdot;
  double zdot_norm2 = 0.0;
  Loop e1;  // constant loop (1,0,1,0,...)
  Loop e2;  // constant loop (0,1,0,1,...)

  int n() const { return Z.n(); }
  int modes() const { return Z.modes(); }
};

LoopFrame make_frame(const Loop& Z);
LoopFrame make_frame(const RelativeEquilibrium& normalized, int modes);
/// Frame of theta * Z.
LoopFrame shifted_frame(const LoopFrame& frame, double theta);

Loop project_D(const Loop& u);
Loop project_phase(const Loop& u, const LoopFrame& frame);
Loop project_X(const Loop& u, const LoopFrame& frame);
Loop project_NZ(const Loop& u, const LoopFrame& frame);

/// sigma * u, with (sigma * u)_i(t) = u_{sigma^-1(i)}(t + 2pi/k), k = ord(sigma).
/// `sigma` is zero-based: sigma[i] is the image of i.
Loop sigma_apply(const VortexSystem& sys, const std::vector<int>& sigma, const Loop& u);
/// Average of sigma^i * u over one period of the group action.
Loop sigma_project(const VortexSystem& sys, const std::vector<int>& sigma, const Loop& u);
int permutation_order(const std::vector<int>& sigma);

/// (2M+1) x m table of 1, cos t, sin t, ..., sin Mt at the nodes t_j.
const Mat& fourier_table(int modes, int m);

/// Sample nodes t_j = 2 pi j / m.
std::vector<double> nodes(int m);
/// 2N x m matrix of u(t_j).
Mat sample(const Loop& u, int m);
/// Discrete Fourier projection of samples onto modes 0..M (needs m >= 2M+1).
Loop from_samples(const Mat& values, int modes);
/// Throws AliasWarning unless m >= 2(2M)+1, the bound for quadratic
/// nonlinearities to be evaluated without aliasing into retained modes.
void require_dealiased(int m, int modes);

/// Fraction of the H1 norm carried by modes k > (1 - fraction) M.
double spectral_tail(const Loop& u, double fraction = 0.25);

}  // namespace vorb

#endif  // VORB_LOOPS_HPP
