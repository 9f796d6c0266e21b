// Shared helpers for the unit tests: seeded random inputs and central
// finite differences.

#ifndef VORB_TESTS_SUPPORT_HPP
#define VORB_TESTS_SUPPORT_HPP

#include <functional>
#include <random>

#include "vorb/core.hpp"
#include "vorb/loops.hpp"

namespace vorb::testing {

inline std::mt19937_64& rng() {
  static std::mt19937_64 gen(20240611);
  return gen;
}

inline double uniform(double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(rng()); }

inline Vec random_vec(int n, double scale = 1.0) {
  Vec v(n);
  for (int i = 0; i < n; ++i) v(i) = uniform(-scale, scale);
  return v;
}

/// Random point strictly inside the unit disk, |p| <= radius.
inline Vec2 random_in_disk(double radius) {
  const double rho = radius * std::sqrt(uniform(0.0, 1.0));
  const double phi = uniform(0.0, kTwoPi);
  return {rho * std::cos(phi), rho * std::sin(phi)};
}

/// Configuration of n points in the disk of radius `radius`, pairwise at
/// least `gap` apart.
inline Vec random_config(int n, double radius, double gap) {
  for (;;) {
    Vec z(2 * n);
    for (int k = 0; k < n; ++k) z.segment<2>(2 * k) = random_in_disk(radius);
    if (min_separation(z) >= gap) return z;
  }
}

inline Loop random_loop(int n, int modes, double scale = 1.0, double decay = 0.5) {
  Loop u(n, modes);
  for (int c = 0; c < u.columns(); ++c) {
    u.coeffs().col(c) = random_vec(2 * n, scale * std::pow(decay, mode_of_column(c)));
  }
  return u;
}

inline Vec fd_gradient(const std::function<double(const Vec&)>& f, const Vec& x, double h = 1e-5) {
  Vec g(x.size());
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    Vec xp = x, xm = x;
    xp(i) += h;
    xm(i) -= h;
    g(i) = (f(xp) - f(xm)) / (2 * h);
  }
  return g;
}

inline Mat fd_jacobian(const std::function<Vec(const Vec&)>& f, const Vec& x, double h = 1e-5) {
  const Vec f0 = f(x);
  Mat J(f0.size(), x.size());
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    Vec xp = x, xm = x;
    xp(i) += h;
    xm(i) -= h;
    J.col(i) = (f(xp) - f(xm)) / (2 * h);
  }
  return J;
}

/// ||a - b|| / max(||b||, floor).
inline double rel_err(const Mat& a, const Mat& b, double floor = 1e-12) {
  return (a - b).norm() / std::max(b.norm(), floor);
}

}  // namespace vorb::testing

#endif  // VORB_TESTS_SUPPORT_HPP
