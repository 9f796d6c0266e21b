// Blow-up reduction: periodic orbits of the bounded-domain vortex system that
// shrink onto a critical point a0 of the Robin function.
//
// With z(t) = a0 + r u(t / r^2), z solves the physical system iff u is a
// 2pi-periodic solution of the blow-up system driven by H_r, i.e. a critical
// point of the action
//
//   A_r(u) = 1/2 int M_G u'.J_N u dt - int H_r(u) dt
//
// on the loop space. Starting from a nondegenerate relative equilibrium Z,
// the correction v in X = Zdot^perp solves P_X grad A_r(Z + v) = 0 by the
// chord iteration v <- v - L_r^{-1} P_X grad A_r(Z + v), where L_r is the
// Hessian at Z restricted to X. The component of the gradient along Zdot
// then vanishes on its own (S^1 invariance of the action).
//
// Linear algebra is carried out in "scaled" coefficient coordinates
// c_hat = sqrt(W1) c, where W1 is the diagonal H1 Gram matrix, so that the H1
// inner product becomes the Euclidean one.

#ifndef VORB_REDUCTION_HPP
#define VORB_REDUCTION_HPP

#include <optional>
#include <string>
#include <vector>

#include "vorb/core.hpp"
#include "vorb/loops.hpp"

namespace vorb {

enum class SolveMode { FixedPoint, Newton };

const char* to_string(SolveMode mode);
SolveMode parse_solve_mode(const std::string& text);

/// Geometric sequence from r_max down to r_min.
struct RGrid {
  double r_max = 0.2;
  double r_min = 1e-3;
  int steps = 30;

  std::vector<double> values() const;
};

struct SolverParams {
  int modes = 32;
  int nodes = 0;  // quadrature nodes; 0 selects 4 (2M + 1)
  double fp_tol = 1e-11;
  double newton_tol = 1e-11;
  int max_iter = 200;
  double contraction_guard = 0.9;
  SolveMode mode = SolveMode::FixedPoint;
  RGrid grid;
  double tail_tol = 1e-8;
  int upward_probes = 4;
  double upward_factor = 1.25;
  /// Optional spatio-temporal symmetry imposed after every update.
  std::optional<std::vector<int>> symmetry;

  int node_count() const { return nodes > 0 ? nodes : 4 * (2 * modes + 1); }
  double tolerance() const { return mode == SolveMode::Newton ? newton_tol : fp_tol; }
  /// Throws InvalidArgument on a bad combination.
  void validate() const;
};

/// Orthonormal basis of X = Zdot^perp in scaled coordinates; the first two
/// columns span the translations D, the rest N_Z.
struct XBasis {
  Mat columns;  // size x (size - 1)
  Vec sqrt_w;   // sqrt of the H1 Gram diagonal

  int d_dim() const { return 2; }
  int dim() const { return static_cast<int>(columns.cols()); }
  /// Coordinates of P_X u in this basis.
  Vec coordinates(const Loop& u) const;
  /// Loop with the given X coordinates.
  Loop loop(const Vec& coords, int n, int modes) const;
};

XBasis build_x_basis(const LoopFrame& frame);

struct ReducedProblem {
  VortexSystem sys;
  Domain domain;
  Vec2 anchor;
  LoopFrame frame;
  int nodes = 0;
  XBasis basis;
  double epsilon = 0.0;  // radius of the admissible ball around Z (H1 norm)
};

ReducedProblem make_problem(const VortexSystem& sys, const Domain& domain, const Vec2& anchor,
                            const LoopFrame& frame, int nodes = 0);

/// 1/2 int M_G u'.J_N u dt, from the Fourier coefficients.
double symplectic_action(const VortexSystem& sys, const Loop& u);

/// A_r(u); r = 0 selects the plane action A_0 (H0 only).
double action_J_r(const VortexSystem& sys, const Domain& domain, const Vec2& anchor, double r,
                  const Loop& u, int nodes);

/// H1 gradient of A_r: (id - Laplace)^{-1} (-J_N M_G u' - grad H_r(u)).
Loop grad_J_r(const VortexSystem& sys, const Domain& domain, const Vec2& anchor, double r,
              const Loop& u, int nodes);

/// Derivative of grad_J_r at u in scaled coordinates (symmetric).
Mat scaled_hessian(const VortexSystem& sys, const Domain& domain, const Vec2& anchor, double r,
                   const Loop& u, int nodes);

/// (id - Laplace)^{-1} of the pointwise product C u(t) with a constant matrix.
Loop apply_constant_operator(const Mat& C, const Loop& u);

struct OperatorBlocks {
  Mat matrix;          // L_r in the XBasis
  double r = 0.0;
  // Blocks of L_r over X = D (+) N_Z. A = L_NN; B, C, D are L_ND, L_DN, L_DD
  // divided by r^2 (they tend to the F''-limits below as r -> 0).
  double norm_A = 0.0, norm_B = 0.0, norm_C = 0.0, norm_D = 0.0;
  Mat D_block;         // L_DD / r^2
  double cond_A = 0.0, cond_D = 0.0;
  // Limits built from F''(a0): P (id - Laplace)^{-1} F''(a0) restricted.
  Mat D0;
  double norm_B0 = 0.0, norm_C0 = 0.0;
};

/// Hessian of the action at Z restricted to X. With `check`, throws
/// SingularOperator when the A- or D-block condition number exceeds 1e12.
OperatorBlocks assemble_L_r(const ReducedProblem& problem, double r, bool check = true);

/// Matrix of v -> (id - Laplace)^{-1} F''(a0) v in the XBasis.
Mat limit_operator(const ReducedProblem& problem);

struct ReducedSolution {
  double r = 0.0;
  Loop v;
  Loop u;
  double residual_grad = 0.0;       // |grad A_r(u)|_H1
  double projected_residual = 0.0;  // |P_X grad A_r(u)|_H1
  double phase_defect = 0.0;        // |<grad A_r(u), Zdot>_H1|
  double vnorm = 0.0;
  int iterations = 0;
  double spectral_tail = 0.0;
  double contraction_estimate = 0.0;  // largest observed ratio of successive steps
  double vdot_zdot = 0.0;             // <v', Zdot>_H1, diagnostic only
  SolveMode mode = SolveMode::FixedPoint;
};

ReducedSolution solve_reduced(const ReducedProblem& problem, double r, const SolverParams& params,
                              const std::optional<Loop>& warm_start = std::nullopt);

struct PathFailure {
  double r = 0.0;
  std::string reason;
};

struct ContinuationPath {
  std::vector<double> grid;
  std::vector<ReducedSolution> entries;  // converged grid points, r decreasing
  std::vector<PathFailure> failures;
  std::vector<ReducedSolution> probes;   // converged points above r_max
  double empirical_r0 = 0.0;

  double converged_fraction() const;
};

/// Sweeps the r-grid downward with warm starts, then probes upward from r_max.
ContinuationPath continue_path(const VortexSystem& sys, const Domain& domain, const Vec2& anchor,
                               const LoopFrame& frame, const SolverParams& params);

struct PhysicalOrbit {
  Vec2 anchor = Vec2::Zero();
  double r = 0.0;
  double period = 0.0;
  std::vector<double> times;
  std::vector<Vec> samples;
  Loop u;
};

/// z(t) = a0 + r u(t / r^2) sampled at m equispaced times over one period.
PhysicalOrbit unrescale(const Domain& domain, const Vec2& anchor, double r, const Loop& u, int m = 64);

struct UniquenessReport {
  std::vector<double> thetas;
  std::vector<double> mismatch;  // |v_theta - theta * v|_H1
  double max_mismatch = 0.0;
};

/// Re-solves with the shifted seed theta * Z and compares with theta * v.
UniquenessReport local_uniqueness_probe(const ReducedProblem& problem, const ReducedSolution& solution,
                                        const std::vector<double>& thetas, const SolverParams& params);

/// Least-squares slope of log y against log x.
double loglog_slope(const std::vector<double>& x, const std::vector<double>& y);

}  // namespace vorb

#endif  // VORB_REDUCTION_HPP
