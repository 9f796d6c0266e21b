// Relative equilibria of the plane vortex system and their Floquet analysis.

#ifndef VORB_EQUILIBRIA_HPP
#define VORB_EQUILIBRIA_HPP

#include <complex>
#include <vector>

#include "vorb/core.hpp"

namespace vorb {

/// Rigidly rotating solution Z(t) = exp(-omega J t) z of the plane system.
struct RelativeEquilibrium {
  VortexSystem sys;
  Vec z;
  double omega = 0.0;

  double period() const { return kTwoPi / std::abs(omega); }
  /// Z(t), each block rotated counterclockwise by omega * t.
  Vec at(double t) const;
  /// dZ/dt = -omega J_N Z(t).
  Vec velocity(double t) const;
};

Vec2 center_of_vorticity_sum(const VortexSystem& sys, const Vec& z);

RelativeEquilibrium make_pair(double gamma1, double gamma2, double separation);
RelativeEquilibrium make_triangle(double gamma1, double gamma2, double gamma3, double side);
RelativeEquilibrium make_thomson(int n, double gamma, double radius);

/// sqrt(|omega|) Z(t / |omega|): same shape, period 2pi.
RelativeEquilibrium normalize_period(const RelativeEquilibrium& eq);

/// max_k |G_k Zdot_k(0) - J grad_k H0(z)|.
double residual_HS0(const RelativeEquilibrium& eq);

struct MonodromyReport {
  Mat matrix;
  std::vector<std::complex<double>> multipliers;
  Vec singular_values;       // of (monodromy - I), descending
  int kernel_dim = 0;        // independent periodic solutions
  bool nondegenerate = false;
  int steps = 0;             // RK4 steps of the accepted integration
  double richardson_delta = 0.0;
  int multipliers_near_one = 0;  // |mu - 1| < 1e-2, counts Jordan partners too
  bool rotating_frame_count = false;  // kernel_dim taken from the co-rotating generator
};

/// Fundamental matrix of M_G wdot = J_N H0''(Z(t)) w over one period 2pi.
///
/// Fixed-step RK4; the step count is doubled until two successive
/// integrations differ by less than 1e-8 (max-abs), starting from `steps`.
/// kernel_dim counts singular values of (monodromy - I) below
/// kernel_tol * largest; when that largest value exceeds 1 / kernel_tol or the
/// step doubling does not settle, the count comes from the eigenvalues i k of
/// the co-rotating linearization instead.
MonodromyReport monodromy(const RelativeEquilibrium& eq, int steps = 2000,
                          double kernel_tol = 1e-6);

struct TriangleConditions {
  double total = 0.0;
  double angular_momentum = 0.0;  // L = G1 G2 + G1 G3 + G2 G3
  double sum_squares = 0.0;
  bool gamma_ok = false;
  bool L_ok = false;
  bool L_neq_sumsq = false;
  bool predicted_nondegenerate = false;
};

TriangleConditions triangle_conditions(double gamma1, double gamma2, double gamma3);

}  // namespace vorb

#endif  // VORB_EQUILIBRIA_HPP
