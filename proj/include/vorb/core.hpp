// N-vortex Hamiltonians in a planar domain.
//
// Configurations are flat vectors in R^{2N}; block k (entries 2k, 2k+1) is the
// position of vortex k. The Hamiltonian is
//
//   H(z) = H0(z) - F(z),
//   H0(z) = -(1/2pi) sum_{j != k} G_j G_k log|z_j - z_k|     (ordered pairs)
//   F(z)  =  sum_{j,k} G_j G_k g(z_j, z_k)                    (diagonal included)
//
// where g is the regular part of the domain's Green's function. The blow-up
// Hamiltonian around an anchor a0 is H_r(u) = H0(u) - F(a0 + r u) + F(a0).

#ifndef VORB_CORE_HPP
#define VORB_CORE_HPP

#include <string>
#include <vector>

#include <Eigen/Dense>

#include "vorb/error.hpp"

namespace vorb {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;
using Vec2 = Eigen::Vector2d;
using Mat2 = Eigen::Matrix2d;

inline constexpr double kPi = 3.14159265358979323846;
inline constexpr double kTwoPi = 2.0 * kPi;

// Default numeric guards.
inline constexpr double kCollisionTol = 1e-12;
inline constexpr double kBoundaryTol = 1e-14;

/// The standard symplectic matrix J = [[0, 1], [-1, 0]].
Mat2 symplectic2();

inline Vec2 block(const Vec& z, int k) { return z.segment<2>(2 * k); }

class VortexSystem {
 public:
  explicit VortexSystem(std::vector<double> gammas);

  int n() const { return static_cast<int>(gammas_.size()); }
  int dim() const { return 2 * n(); }
  double gamma(int k) const { return gammas_[static_cast<std::size_t>(k)]; }
  const std::vector<double>& gammas() const { return gammas_; }
  double total() const { return total_; }

  /// M_Gamma: diag(G_1, G_1, ..., G_N, G_N).
  Mat weight_matrix() const;
  /// J_N: block diagonal with N copies of J.
  Mat symplectic() const;

 private:
  std::vector<double> gammas_;
  double total_ = 0.0;
};

enum class DomainKind { Plane, UnitDisk, HalfPlane, SyntheticQuadratic };

/// Regular part g of a Green's function together with its derivatives.
///
/// Derivative conventions: grad_g is the gradient in the first argument,
/// hess_ww the Hessian in the first argument, and hess_wz(w, z)(i, l) the mixed
/// derivative d^2 g / dw_i dz_l. By symmetry of g, hess_wz(w, z) equals
/// hess_wz(z, w) transposed.
class Domain {
 public:
  static Domain plane();
  static Domain unit_disk();
  static Domain half_plane();
  /// g(w, z) = w^T A z on the whole plane; A must be symmetric.
  static Domain synthetic(const Mat2& A);

  DomainKind kind() const { return kind_; }
  const Mat2& quadratic() const { return A_; }
  std::string name() const;

  bool contains(const Vec2& p) const;
  /// Euclidean distance to the boundary (infinity for unbounded-free domains).
  double boundary_distance(const Vec2& p) const;

  double g(const Vec2& w, const Vec2& z) const;
  Vec2 grad_g(const Vec2& w, const Vec2& z) const;
  Mat2 hess_ww(const Vec2& w, const Vec2& z) const;
  Mat2 hess_wz(const Vec2& w, const Vec2& z) const;

  // Robin function h(p) = g(p, p).
  double h(const Vec2& p) const;
  Vec2 grad_h(const Vec2& p) const;
  Mat2 hess_h(const Vec2& p) const;

 private:
  Domain(DomainKind kind, Mat2 A) : kind_(kind), A_(std::move(A)) {}
  void require_inside(const Vec2& p) const;

  DomainKind kind_;
  Mat2 A_;
};

double min_separation(const Vec& z);

/// Throws CollisionError when two points are within `tol` of each other.
void check_distinct(const Vec& z, double tol = kCollisionTol);

/// Membership in O_r: pairwise distinct and a0 + r u_k inside the domain.
bool in_rescaled_space(const Domain& domain, const Vec2& anchor, double r,
                       const Vec& u, double tol = kCollisionTol);

// Kirchhoff-Onsager part.
double eval_H0(const VortexSystem& sys, const Vec& z, double tol = kCollisionTol);
Vec grad_H0(const VortexSystem& sys, const Vec& z, double tol = kCollisionTol);
Mat hess_H0(const VortexSystem& sys, const Vec& z, double tol = kCollisionTol);

// Boundary part.
double eval_F(const VortexSystem& sys, const Domain& domain, const Vec& z);
Vec grad_F(const VortexSystem& sys, const Domain& domain, const Vec& z);
Mat hess_F(const VortexSystem& sys, const Domain& domain, const Vec& z);

// Full Hamiltonian H = H0 - F of the physical system.
double eval_H(const VortexSystem& sys, const Domain& domain, const Vec& z);
Vec grad_H(const VortexSystem& sys, const Domain& domain, const Vec& z);

/// Configuration with every vortex at p.
Vec lifted(int n, const Vec2& p);

// Blow-up Hamiltonian H_r(u) = H0(u) - F(a0 + r u) + F(a0), r > 0.
double eval_Hr(const VortexSystem& sys, const Domain& domain, double r,
               const Vec& u, const Vec2& anchor = Vec2::Zero());
Vec grad_Hr(const VortexSystem& sys, const Domain& domain, double r,
            const Vec& u, const Vec2& anchor = Vec2::Zero());
Mat hess_Hr(const VortexSystem& sys, const Domain& domain, double r,
            const Vec& u, const Vec2& anchor = Vec2::Zero());

/// Selects which Hamiltonian drives the vector field.
struct Flow {
  enum class Kind { Plane, Rescaled, Physical };
  Kind kind = Kind::Plane;
  double r = 0.0;
  Vec2 anchor = Vec2::Zero();

  static Flow plane() { return {}; }
  static Flow rescaled(double r, const Vec2& anchor = Vec2::Zero()) {
    return {Kind::Rescaled, r, anchor};
  }
  static Flow physical() { return {Kind::Physical, 0.0, Vec2::Zero()}; }
};

/// Gradient of the Hamiltonian selected by `flow`.
Vec flow_gradient(const VortexSystem& sys, const Domain& domain,
                  const Flow& flow, const Vec& z);
double flow_energy(const VortexSystem& sys, const Domain& domain,
                   const Flow& flow, const Vec& z);

/// Right-hand side of G_k zdot_k = J grad_{z_k} H, solved for zdot.
Vec vortex_rhs(const VortexSystem& sys, const Domain& domain, const Flow& flow,
               const Vec& z);

/// True when every point of `z` lies in the domain the flow lives on.
bool flow_state_valid(const Domain& domain, const Flow& flow, const Vec& z);

struct CriticalPoint {
  Vec2 point = Vec2::Zero();
  Mat2 hessian = Mat2::Zero();
  bool nondegenerate = false;
  int iterations = 0;
};

/// Newton iteration on grad h with step halving to stay inside the domain.
CriticalPoint find_critical_point_h(const Domain& domain, const Vec2& guess,
                                    double tol = 1e-12, int max_iter = 50,
                                    double degeneracy_tol = 1e-10);

}  // namespace vorb

#endif  // VORB_CORE_HPP
