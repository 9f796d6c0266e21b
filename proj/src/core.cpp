#include "vorb/core.hpp"

#include <cmath>
#include <limits>
#include <sstream>

namespace vorb {

Mat2 symplectic2() {
  Mat2 J;
  J << 0.0, 1.0, -1.0, 0.0;
  return J;
}

VortexSystem::VortexSystem(std::vector<double> gammas) : gammas_(std::move(gammas)) {
  if (gammas_.empty()) throw InvalidArgument("a vortex system needs at least one vortex");
  for (std::size_t k = 0; k < gammas_.size(); ++k) {
    if (!(gammas_[k] != 0.0) || !std::isfinite(gammas_[k])) {
      std::ostringstream msg;
      msg << "vorticity " << k + 1 << " must be a nonzero finite number";
      throw InvalidArgument(msg.str());
    }
    total_ += gammas_[k];
  }
}

Mat VortexSystem::weight_matrix() const {
  Mat M = Mat::Zero(dim(), dim());
  for (int k = 0; k < n(); ++k) M(2 * k, 2 * k) = M(2 * k + 1, 2 * k + 1) = gamma(k);
  return M;
}

Mat VortexSystem::symplectic() const {
  Mat JN = Mat::Zero(dim(), dim());
  for (int k = 0; k < n(); ++k) JN.block<2, 2>(2 * k, 2 * k) = symplectic2();
  return JN;
}

// ---------------------------------------------------------------------------
// Domains

Domain Domain::plane() { return {DomainKind::Plane, Mat2::Zero()}; }
Domain Domain::unit_disk() { return {DomainKind::UnitDisk, Mat2::Zero()}; }
Domain Domain::half_plane() { return {DomainKind::HalfPlane, Mat2::Zero()}; }

Domain Domain::synthetic(const Mat2& A) {
  if (std::abs(A(0, 1) - A(1, 0)) > 1e-14 * (1.0 + A.norm())) {
    throw InvalidArgument("synthetic quadratic g needs a symmetric matrix");
  }
  return {DomainKind::SyntheticQuadratic, A};
}

std::string Domain::name() const {
  switch (kind_) {
    case DomainKind::Plane: return "plane";
    case DomainKind::UnitDisk: return "disk";
    case DomainKind::HalfPlane: return "halfplane";
    case DomainKind::SyntheticQuadratic: return "synthetic";
  }
  return "unknown";
}

bool Domain::contains(const Vec2& p) const {
  if (!p.allFinite()) return false;
  switch (kind_) {
    case DomainKind::UnitDisk: return p.squaredNorm() < 1.0;
    case DomainKind::HalfPlane: return p.y() > 0.0;
    default: return true;
  }
}

double Domain::boundary_distance(const Vec2& p) const {
  switch (kind_) {
    case DomainKind::UnitDisk: return 1.0 - p.norm();
    case DomainKind::HalfPlane: return p.y();
    default: return std::numeric_limits<double>::infinity();
  }
}

void Domain::require_inside(const Vec2& p) const {
  if (!contains(p)) {
    std::ostringstream msg;
    msg << "point (" << p.x() << ", " << p.y() << ") is outside the " << name();
    throw DomainError(msg.str());
  }
}

namespace {

// Unit disk: g = -(1/4pi) log Q,  Q(w, z) = |w|^2 |z|^2 - 2 w.z + 1.
double disk_q(const Vec2& w, const Vec2& z) {
  return w.squaredNorm() * z.squaredNorm() - 2.0 * w.dot(z) + 1.0;
}

// Upper half-plane: g = -(1/4pi) log P,  P(w, z) = |w - conj(z)|^2.
double half_p(const Vec2& w, const Vec2& z) {
  const double dx = w.x() - z.x();
  const double dy = w.y() + z.y();
  return dx * dx + dy * dy;
}

constexpr double kQuarterInvPi = 1.0 / (4.0 * kPi);

}  // namespace

double Domain::g(const Vec2& w, const Vec2& z) const {
  require_inside(w);
  require_inside(z);
  switch (kind_) {
    case DomainKind::Plane: return 0.0;
    case DomainKind::UnitDisk: return -kQuarterInvPi * std::log(disk_q(w, z));
    case DomainKind::HalfPlane: return -kQuarterInvPi * std::log(half_p(w, z));
    case DomainKind::SyntheticQuadratic: return w.dot(A_ * z);
  }
  return 0.0;
}

Vec2 Domain::grad_g(const Vec2& w, const Vec2& z) const {
  require_inside(w);
  require_inside(z);
  switch (kind_) {
    case DomainKind::Plane: return Vec2::Zero();
    case DomainKind::UnitDisk: {
      const Vec2 dq = 2.0 * z.squaredNorm() * w - 2.0 * z;
      return -kQuarterInvPi * dq / disk_q(w, z);
    }
    case DomainKind::HalfPlane: {
      const Vec2 dp(2.0 * (w.x() - z.x()), 2.0 * (w.y() + z.y()));
      return -kQuarterInvPi * dp / half_p(w, z);
    }
    case DomainKind::SyntheticQuadratic: return A_ * z;
  }
  return Vec2::Zero();
}

Mat2 Domain::hess_ww(const Vec2& w, const Vec2& z) const {
  require_inside(w);
  require_inside(z);
  switch (kind_) {
    case DomainKind::UnitDisk: {
      const double q = disk_q(w, z);
      const Vec2 dq = 2.0 * z.squaredNorm() * w - 2.0 * z;
      return -kQuarterInvPi *
             (2.0 * z.squaredNorm() * Mat2::Identity() / q - dq * dq.transpose() / (q * q));
    }
    case DomainKind::HalfPlane: {
      const double p = half_p(w, z);
      const Vec2 dp(2.0 * (w.x() - z.x()), 2.0 * (w.y() + z.y()));
      return -kQuarterInvPi * (2.0 * Mat2::Identity() / p - dp * dp.transpose() / (p * p));
    }
    default: return Mat2::Zero();
  }
}

Mat2 Domain::hess_wz(const Vec2& w, const Vec2& z) const {
  require_inside(w);
  require_inside(z);
  switch (kind_) {
    case DomainKind::UnitDisk: {
      const double q = disk_q(w, z);
      const Vec2 dqw = 2.0 * z.squaredNorm() * w - 2.0 * z;
      const Vec2 dqz = 2.0 * w.squaredNorm() * z - 2.0 * w;
      const Mat2 d2 = 4.0 * w * z.transpose() - 2.0 * Mat2::Identity();
      return -kQuarterInvPi * (d2 / q - dqw * dqz.transpose() / (q * q));
    }
    case DomainKind::HalfPlane: {
      const double p = half_p(w, z);
      const Vec2 dpw(2.0 * (w.x() - z.x()), 2.0 * (w.y() + z.y()));
      const Vec2 dpz(2.0 * (z.x() - w.x()), 2.0 * (w.y() + z.y()));
      Mat2 d2;
      d2 << -2.0, 0.0, 0.0, 2.0;
      return -kQuarterInvPi * (d2 / p - dpw * dpz.transpose() / (p * p));
    }
    case DomainKind::SyntheticQuadratic: return A_;
    default: return Mat2::Zero();
  }
}

double Domain::h(const Vec2& p) const {
  require_inside(p);
  switch (kind_) {
    case DomainKind::Plane: return 0.0;
    case DomainKind::UnitDisk: {
      const double gap = 1.0 - p.squaredNorm();
      if (gap < kBoundaryTol) throw BoundaryError("Robin function evaluated at the disk boundary");
      return -std::log(gap) / kTwoPi;
    }
    case DomainKind::HalfPlane: return -std::log(2.0 * p.y()) / kTwoPi;
    case DomainKind::SyntheticQuadratic: return p.dot(A_ * p);
  }
  return 0.0;
}

Vec2 Domain::grad_h(const Vec2& p) const {
  require_inside(p);
  switch (kind_) {
    case DomainKind::Plane: return Vec2::Zero();
    case DomainKind::UnitDisk: {
      const double gap = 1.0 - p.squaredNorm();
      if (gap < kBoundaryTol) throw BoundaryError("Robin function evaluated at the disk boundary");
      return p / (kPi * gap);
    }
    case DomainKind::HalfPlane: return Vec2(0.0, -1.0 / (kTwoPi * p.y()));
    case DomainKind::SyntheticQuadratic: return 2.0 * A_ * p;
  }
  return Vec2::Zero();
}

Mat2 Domain::hess_h(const Vec2& p) const {
  require_inside(p);
  switch (kind_) {
    case DomainKind::Plane: return Mat2::Zero();
    case DomainKind::UnitDisk: {
      const double gap = 1.0 - p.squaredNorm();
      if (gap < kBoundaryTol) throw BoundaryError("Robin function evaluated at the disk boundary");
      return (Mat2::Identity() / gap + 2.0 * p * p.transpose() / (gap * gap)) / kPi;
    }
    case DomainKind::HalfPlane: {
      Mat2 H = Mat2::Zero();
      H(1, 1) = 1.0 / (kTwoPi * p.y() * p.y());
      return H;
    }
    case DomainKind::SyntheticQuadratic: return 2.0 * A_;
  }
  return Mat2::Zero();
}

// ---------------------------------------------------------------------------
// Configurations

double min_separation(const Vec& z) {
  const int n = static_cast<int>(z.size() / 2);
  double best = std::numeric_limits<double>::infinity();
  for (int j = 0; j < n; ++j)
    for (int k = j + 1; k < n; ++k) best = std::min(best, (block(z, j) - block(z, k)).norm());
  return best;
}

void check_distinct(const Vec& z, double tol) {
  const int n = static_cast<int>(z.size() / 2);
  for (int j = 0; j < n; ++j) {
    for (int k = j + 1; k < n; ++k) {
      if (!((block(z, j) - block(z, k)).norm() > tol)) {
        std::ostringstream msg;
        msg << "vortices " << j + 1 << " and " << k + 1 << " collide";
        throw CollisionError(msg.str());
      }
    }
  }
}

bool in_rescaled_space(const Domain& domain, const Vec2& anchor, double r, const Vec& u,
                       double tol) {
  const int n = static_cast<int>(u.size() / 2);
  for (int k = 0; k < n; ++k)
    if (!domain.contains(anchor + r * block(u, k))) return false;
  return min_separation(u) > tol;
}

Vec lifted(int n, const Vec2& p) {
  Vec z(2 * n);
  for (int k = 0; k < n; ++k) z.segment<2>(2 * k) = p;
  return z;
}

namespace {

void check_size(const VortexSystem& sys, const Vec& z) {
  if (z.size() != sys.dim()) {
    std::ostringstream msg;
    msg << "configuration has " << z.size() << " entries, expected " << sys.dim();
    throw DimensionMismatch(msg.str());
  }
}

}  // namespace

double eval_H0(const VortexSystem& sys, const Vec& z, double tol) {
  check_size(sys, z);
  check_distinct(z, tol);
  double sum = 0.0;
  for (int j = 0; j < sys.n(); ++j)
    for (int k = j + 1; k < sys.n(); ++k)
      sum += sys.gamma(j) * sys.gamma(k) * std::log((block(z, j) - block(z, k)).norm());
  // Ordered double sum: every unordered pair appears twice.
  return -2.0 * sum / kTwoPi;
}

Vec grad_H0(const VortexSystem& sys, const Vec& z, double tol) {
  check_size(sys, z);
  check_distinct(z, tol);
  Vec grad = Vec::Zero(sys.dim());
  for (int k = 0; k < sys.n(); ++k) {
    for (int j = 0; j < sys.n(); ++j) {
      if (j == k) continue;
      const Vec2 d = block(z, k) - block(z, j);
      grad.segment<2>(2 * k) -= (sys.gamma(k) * sys.gamma(j) / kPi) * d / d.squaredNorm();
    }
  }
  return grad;
}

Mat hess_H0(const VortexSystem& sys, const Vec& z, double tol) {
  check_size(sys, z);
  check_distinct(z, tol);
  Mat H = Mat::Zero(sys.dim(), sys.dim());
  for (int k = 0; k < sys.n(); ++k) {
    for (int j = 0; j < sys.n(); ++j) {
      if (j == k) continue;
      const Vec2 d = block(z, k) - block(z, j);
      const double r2 = d.squaredNorm();
      const Mat2 B = -(sys.gamma(k) * sys.gamma(j) / kPi) *
                     (Mat2::Identity() / r2 - 2.0 * d * d.transpose() / (r2 * r2));
      H.block<2, 2>(2 * k, 2 * k) += B;
      H.block<2, 2>(2 * k, 2 * j) -= B;
    }
  }
  return 0.5 * (H + H.transpose());
}

double eval_F(const VortexSystem& sys, const Domain& domain, const Vec& z) {
  check_size(sys, z);
  double sum = 0.0;
  for (int j = 0; j < sys.n(); ++j)
    for (int k = 0; k < sys.n(); ++k)
      sum += sys.gamma(j) * sys.gamma(k) * domain.g(block(z, j), block(z, k));
  return sum;
}

Vec grad_F(const VortexSystem& sys, const Domain& domain, const Vec& z) {
  check_size(sys, z);
  Vec grad = Vec::Zero(sys.dim());
  for (int m = 0; m < sys.n(); ++m) {
    Vec2 acc = Vec2::Zero();
    for (int k = 0; k < sys.n(); ++k) acc += sys.gamma(k) * domain.grad_g(block(z, m), block(z, k));
    grad.segment<2>(2 * m) = 2.0 * sys.gamma(m) * acc;
  }
  return grad;
}

Mat hess_F(const VortexSystem& sys, const Domain& domain, const Vec& z) {
  check_size(sys, z);
  Mat H = Mat::Zero(sys.dim(), sys.dim());
  for (int m = 0; m < sys.n(); ++m) {
    const Vec2 zm = block(z, m);
    Mat2 diag = Mat2::Zero();
    for (int k = 0; k < sys.n(); ++k) diag += sys.gamma(k) * domain.hess_ww(zm, block(z, k));
    H.block<2, 2>(2 * m, 2 * m) += 2.0 * sys.gamma(m) * diag;
    for (int n = 0; n < sys.n(); ++n) {
      H.block<2, 2>(2 * m, 2 * n) +=
          2.0 * sys.gamma(m) * sys.gamma(n) * domain.hess_wz(zm, block(z, n));
    }
  }
  return 0.5 * (H + H.transpose());
}

double eval_H(const VortexSystem& sys, const Domain& domain, const Vec& z) {
  return eval_H0(sys, z) - eval_F(sys, domain, z);
}

Vec grad_H(const VortexSystem& sys, const Domain& domain, const Vec& z) {
  return grad_H0(sys, z) - grad_F(sys, domain, z);
}

namespace {

void require_rescaled(const VortexSystem& sys, const Domain& domain, double r, const Vec& u,
                      const Vec2& anchor) {
  check_size(sys, u);
  if (!(r > 0.0)) throw InvalidArgument("the blow-up scale r must be positive");
  for (int k = 0; k < sys.n(); ++k) {
    if (!domain.contains(anchor + r * block(u, k))) {
      std::ostringstream msg;
      msg << "vortex " << k + 1 << " leaves the " << domain.name() << " at scale r = " << r;
      throw DomainError(msg.str());
    }
  }
}

}  // namespace

double eval_Hr(const VortexSystem& sys, const Domain& domain, double r, const Vec& u,
               const Vec2& anchor) {
  require_rescaled(sys, domain, r, u, anchor);
  const Vec shifted = lifted(sys.n(), anchor) + r * u;
  return eval_H0(sys, u) - eval_F(sys, domain, shifted) + eval_F(sys, domain, lifted(sys.n(), anchor));
}

Vec grad_Hr(const VortexSystem& sys, const Domain& domain, double r, const Vec& u,
            const Vec2& anchor) {
  require_rescaled(sys, domain, r, u, anchor);
  const Vec shifted = lifted(sys.n(), anchor) + r * u;
  return grad_H0(sys, u) - r * grad_F(sys, domain, shifted);
}

Mat hess_Hr(const VortexSystem& sys, const Domain& domain, double r, const Vec& u,
            const Vec2& anchor) {
  require_rescaled(sys, domain, r, u, anchor);
  const Vec shifted = lifted(sys.n(), anchor) + r * u;
  return hess_H0(sys, u) - (r * r) * hess_F(sys, domain, shifted);
}

Vec flow_gradient(const VortexSystem& sys, const Domain& domain, const Flow& flow, const Vec& z) {
  switch (flow.kind) {
    case Flow::Kind::Plane: return grad_H0(sys, z);
    case Flow::Kind::Rescaled: return grad_Hr(sys, domain, flow.r, z, flow.anchor);
    case Flow::Kind::Physical: return grad_H(sys, domain, z);
  }
  return {};
}

double flow_energy(const VortexSystem& sys, const Domain& domain, const Flow& flow, const Vec& z) {
  switch (flow.kind) {
    case Flow::Kind::Plane: return eval_H0(sys, z);
    case Flow::Kind::Rescaled: return eval_Hr(sys, domain, flow.r, z, flow.anchor);
    case Flow::Kind::Physical: return eval_H(sys, domain, z);
  }
  return 0.0;
}

Vec vortex_rhs(const VortexSystem& sys, const Domain& domain, const Flow& flow, const Vec& z) {
  const Vec grad = flow_gradient(sys, domain, flow, z);
  const Mat2 J = symplectic2();
  Vec rhs(sys.dim());
  for (int k = 0; k < sys.n(); ++k) rhs.segment<2>(2 * k) = J * block(grad, k) / sys.gamma(k);
  return rhs;
}

bool flow_state_valid(const Domain& domain, const Flow& flow, const Vec& z) {
  const int n = static_cast<int>(z.size() / 2);
  for (int k = 0; k < n; ++k) {
    const Vec2 p = block(z, k);
    switch (flow.kind) {
      case Flow::Kind::Plane:
        if (!p.allFinite()) return false;
        break;
      case Flow::Kind::Rescaled:
        if (!domain.contains(flow.anchor + flow.r * p)) return false;
        break;
      case Flow::Kind::Physical:
        if (!domain.contains(p)) return false;
        break;
    }
  }
  return true;
}

// ---------------------------------------------------------------------------

CriticalPoint find_critical_point_h(const Domain& domain, const Vec2& guess, double tol,
                                    int max_iter, double degeneracy_tol) {
  if (!domain.contains(guess)) throw DomainError("initial guess lies outside the domain");
  Vec2 p = guess;
  for (int it = 0; it <= max_iter; ++it) {
    const Vec2 grad = domain.grad_h(p);
    const Mat2 hess = domain.hess_h(p);
    // Minimum-norm Newton step; tolerates a singular Hessian (half-plane).
    const Vec2 step = -hess.completeOrthogonalDecomposition().solve(grad);
    // A small gradient alone is not enough: on the half-plane |grad h| -> 0 as
    // y -> infinity while the Newton step keeps growing.
    if (grad.norm() <= tol && step.norm() <= 1e-8 * std::max(1.0, p.norm())) {
      CriticalPoint out;
      out.point = p;
      out.hessian = hess;
      out.nondegenerate = std::abs(hess.determinant()) > degeneracy_tol;
      out.iterations = it;
      return out;
    }
    if (it == max_iter) break;
    double scale = 1.0;
    Vec2 next = p + step;
    int halvings = 0;
    while (!domain.contains(next) && halvings < 20) {
      scale *= 0.5;
      next = p + scale * step;
      ++halvings;
    }
    if (!domain.contains(next)) throw LeftDomain("Newton iterate for grad h left the domain");
    p = next;
  }
  std::ostringstream msg;
  msg << "grad h did not vanish after " << max_iter << " Newton steps (last point "
      << p.x() << ", " << p.y() << ")";
  throw NoConvergence(msg.str());
}

}  // namespace vorb
