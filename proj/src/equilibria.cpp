#include "vorb/equilibria.hpp"

#include <cmath>
#include <sstream>

namespace vorb {

namespace {

// exp(-omega J t) = cos(omega t) I - sin(omega t) J, a counterclockwise rotation.
Mat2 rotation(double angle) {
  Mat2 R;
  R << std::cos(angle), -std::sin(angle), std::sin(angle), std::cos(angle);
  return R;
}

void require_positive(double value, const char* what) {
  if (!(value > 0.0) || !std::isfinite(value)) {
    throw InvalidArgument(std::string(what) + " must be positive");
  }
}

}  // namespace

Vec RelativeEquilibrium::at(double t) const {
  const Mat2 R = rotation(omega * t);
  Vec out(z.size());
  for (int k = 0; k < sys.n(); ++k) out.segment<2>(2 * k) = R * block(z, k);
  return out;
}

Vec RelativeEquilibrium::velocity(double t) const {
  const Vec Z = at(t);
  const Mat2 J = symplectic2();
  Vec out(z.size());
  for (int k = 0; k < sys.n(); ++k) out.segment<2>(2 * k) = -omega * (J * block(Z, k));
  return out;
}

Vec2 center_of_vorticity_sum(const VortexSystem& sys, const Vec& z) {
  Vec2 c = Vec2::Zero();
  for (int k = 0; k < sys.n(); ++k) c += sys.gamma(k) * block(z, k);
  return c;
}

RelativeEquilibrium make_pair(double gamma1, double gamma2, double separation) {
  VortexSystem sys({gamma1, gamma2});
  require_positive(separation, "pair separation");
  if (sys.total() == 0.0) {
    throw ZeroTotalVorticity("G1 + G2 = 0 gives a translating pair, not a rotating one");
  }
  Vec z(4);
  z << gamma2 * separation / sys.total(), 0.0, -gamma1 * separation / sys.total(), 0.0;
  const double omega = sys.total() / (kPi * separation * separation);
  return {sys, z, omega};
}

RelativeEquilibrium make_triangle(double gamma1, double gamma2, double gamma3, double side) {
  VortexSystem sys({gamma1, gamma2, gamma3});
  require_positive(side, "triangle side");
  if (sys.total() == 0.0) throw ZeroTotalVorticity("G1 + G2 + G3 = 0");
  Vec z(6);
  const double radius = side / std::sqrt(3.0);
  for (int k = 0; k < 3; ++k) {
    const double angle = kTwoPi * k / 3.0;
    z.segment<2>(2 * k) = radius * Vec2(std::cos(angle), std::sin(angle));
  }
  const Vec2 c = center_of_vorticity_sum(sys, z) / sys.total();
  for (int k = 0; k < 3; ++k) z.segment<2>(2 * k) -= c;
  // omega = (G1 + G2 + G3) / (pi s^2), as obtained by substituting into the
  // plane equations.
  const double omega = sys.total() / (kPi * side * side);
  return {sys, z, omega};
}

RelativeEquilibrium make_thomson(int n, double gamma, double radius) {
  if (n < 2) throw InvalidArgument("a Thomson polygon needs at least two vortices");
  require_positive(radius, "Thomson radius");
  VortexSystem sys(std::vector<double>(static_cast<std::size_t>(n), gamma));
  Vec z(2 * n);
  for (int k = 0; k < n; ++k) {
    const double angle = kTwoPi * k / n;
    z.segment<2>(2 * k) = radius * Vec2(std::cos(angle), std::sin(angle));
  }
  const double omega = gamma * (n - 1) / (kTwoPi * radius * radius);
  return {sys, z, omega};
}

RelativeEquilibrium normalize_period(const RelativeEquilibrium& eq) {
  if (eq.omega == 0.0) throw InvalidArgument("angular velocity must be nonzero");
  const double speed = std::abs(eq.omega);
  if (speed == 1.0) return eq;
  return {eq.sys, std::sqrt(speed) * eq.z, eq.omega > 0.0 ? 1.0 : -1.0};
}

double residual_HS0(const RelativeEquilibrium& eq) {
  const Vec grad = grad_H0(eq.sys, eq.z);
  const Vec zdot = eq.velocity(0.0);
  const Mat2 J = symplectic2();
  double worst = 0.0;
  for (int k = 0; k < eq.sys.n(); ++k) {
    const Vec2 defect = eq.sys.gamma(k) * block(zdot, k) - J * block(grad, k);
    worst = std::max(worst, defect.norm());
  }
  return worst;
}

namespace {

Mat integrate_fundamental(const RelativeEquilibrium& eq, int steps) {
  const int d = eq.sys.dim();
  Mat Minv_J = eq.sys.symplectic();
  for (int k = 0; k < eq.sys.n(); ++k) Minv_J.block<2, 2>(2 * k, 2 * k) /= eq.sys.gamma(k);
  auto coefficient = [&](double t) -> Mat { return Minv_J * hess_H0(eq.sys, eq.at(t)); };

  Mat W = Mat::Identity(d, d);
  const double h = kTwoPi / steps;
  for (int i = 0; i < steps; ++i) {
    const double t = i * h;
    const Mat A0 = coefficient(t);
    const Mat Ah = coefficient(t + 0.5 * h);
    const Mat A1 = coefficient(t + h);
    const Mat k1 = A0 * W;
    const Mat k2 = Ah * (W + 0.5 * h * k1);
    const Mat k3 = Ah * (W + 0.5 * h * k2);
    const Mat k4 = A1 * (W + h * k3);
    W += (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
  }
  return W;
}

// Generator of the linearization in the co-rotating frame: with
// w = e^{-omega J t} xi the system becomes xi' = B xi, and the monodromy is
// exp(2 pi B). Periodic solutions come from the eigenvalues i k of B.
int rotating_frame_kernel(const RelativeEquilibrium& eq) {
  const int d = eq.sys.dim();
  Mat B = eq.sys.symplectic();
  for (int k = 0; k < eq.sys.n(); ++k) B.block<2, 2>(2 * k, 2 * k) /= eq.sys.gamma(k);
  B = B * hess_H0(eq.sys, eq.z) + eq.omega * eq.sys.symplectic();
  const double scale = std::max(1.0, B.norm());
  const int K = static_cast<int>(std::ceil(B.norm())) + 1;
  using CMat = Eigen::MatrixXcd;
  int count = 0;
  for (int k = -K; k <= K; ++k) {
    CMat shifted = B.cast<std::complex<double>>();
    shifted.diagonal().array() -= std::complex<double>(0.0, k);
    Eigen::JacobiSVD<CMat> svd(shifted);
    const Vec sv = svd.singularValues();
    for (int i = 0; i < d; ++i) count += sv(i) <= 1e-8 * scale ? 1 : 0;
  }
  return count;
}

}  // namespace

MonodromyReport monodromy(const RelativeEquilibrium& eq, int steps, double kernel_tol) {
  if (std::abs(std::abs(eq.omega) - 1.0) > 1e-12) {
    throw InvalidArgument("monodromy expects a 2pi-periodic equilibrium; call normalize_period");
  }
  if (steps < 1) throw InvalidArgument("monodromy needs at least one step");

  MonodromyReport report;
  Mat coarse = integrate_fundamental(eq, steps);
  Mat fine = integrate_fundamental(eq, 2 * steps);
  int used = 2 * steps;
  double delta = (fine - coarse).cwiseAbs().maxCoeff();
  while (delta >= 1e-8 && used < 64 * steps) {
    coarse = std::move(fine);
    used *= 2;
    fine = integrate_fundamental(eq, used);
    delta = (fine - coarse).cwiseAbs().maxCoeff();
  }
  report.matrix = fine;
  report.steps = used;
  report.richardson_delta = delta;

  const int d = eq.sys.dim();
  Eigen::EigenSolver<Mat> eig(report.matrix);
  for (int i = 0; i < d; ++i) {
    const std::complex<double> mu = eig.eigenvalues()(i);
    report.multipliers.push_back(mu);
    if (std::abs(mu - 1.0) < 1e-2) ++report.multipliers_near_one;
  }

  Eigen::JacobiSVD<Mat> svd(report.matrix - Mat::Identity(d, d));
  report.singular_values = svd.singularValues();
  const double largest = report.singular_values(0);
  for (int i = 0; i < d; ++i) {
    if (report.singular_values(i) <= kernel_tol * largest) ++report.kernel_dim;
  }
  if (largest == 0.0) report.kernel_dim = d;
  // Exponentially unstable equilibria blow up the largest singular value, so
  // the relative threshold no longer separates the kernel; fall back to the
  // generator of the co-rotating linearization.
  if (delta >= 1e-8 || largest * kernel_tol > 1.0) {
    report.kernel_dim = rotating_frame_kernel(eq);
    report.rotating_frame_count = true;
  }
  report.nondegenerate = report.kernel_dim == 3;
  return report;
}

TriangleConditions triangle_conditions(double gamma1, double gamma2, double gamma3) {
  TriangleConditions c;
  c.total = gamma1 + gamma2 + gamma3;
  c.angular_momentum = gamma1 * gamma2 + gamma1 * gamma3 + gamma2 * gamma3;
  c.sum_squares = gamma1 * gamma1 + gamma2 * gamma2 + gamma3 * gamma3;
  c.gamma_ok = c.total != 0.0;
  c.L_ok = c.angular_momentum != 0.0;
  c.L_neq_sumsq = c.angular_momentum != c.sum_squares;
  c.predicted_nondegenerate = c.gamma_ok && c.L_ok && c.L_neq_sumsq;
  return c;
}

}  // namespace vorb
