#include "doctest.h"

#include "support.hpp"
#include "vorb/loops.hpp"

using namespace vorb;
using namespace vorb::testing;

namespace {

// Trapezoidal quadrature of int (|u|^2 + |u'|^2) and int u.v.
double h1_by_quadrature(const Loop& u, int m) {
  const Mat U = sample(u, m);
  const Mat D = sample(differentiate(u), m);
  return 2 * M_PI / m * (U.squaredNorm() + D.squaredNorm());
}

double l2_by_quadrature(const Loop& u, const Loop& v, int m) {
  const Mat U = sample(u, m), V = sample(v, m);
  return 2 * M_PI / m * U.cwiseProduct(V).sum();
}

LoopFrame pair_frame(int modes) { return make_frame(normalize_period(make_pair(1, 1, 2)), modes); }

}  // namespace

TEST_SUITE("loops") {

TEST_CASE("evaluation is periodic and matches the series") {
  const Loop u = random_loop(2, 5);
  for (double t : {0.0, 0.3, 2.1, 5.9}) {
    CHECK((u.eval(t) - u.eval(t + 2 * M_PI)).norm() < 1e-13);
    Vec direct = u.mean();
    for (int k = 1; k <= 5; ++k) direct += std::cos(k * t) * u.cos_coeff(k) + std::sin(k * t) * u.sin_coeff(k);
    CHECK((u.eval(t) - direct).norm() < 1e-14);
  }
  CHECK((Loop::from_flat(u.flat(), 2, 5).coeffs() - u.coeffs()).norm() == 0.0);
  CHECK_THROWS_AS(u + random_loop(2, 4), DimensionMismatch);
}

TEST_CASE("inner products and parseval") {
  const LoopFrame frame = pair_frame(4);
  CHECK(h1_inner(frame.e1, frame.e1) == doctest::Approx(2 * M_PI * 2).epsilon(1e-15));
  CHECK(h1_inner(frame.e1, frame.e2) == 0.0);

  Loop c(2, 3);
  c.coeffs()(0, 1) = 1.0;
  CHECK(h1_inner(c, c) == doctest::Approx(2 * M_PI).epsilon(1e-15));
  CHECK(l2_inner(c, c) == doctest::Approx(M_PI).epsilon(1e-15));

  for (int trial = 0; trial < 10; ++trial) {
    const int M = 3 + trial;
    const Loop u = random_loop(3, M);
    const Loop v = random_loop(3, M);
    const double exact = h1_inner(u, u);
    CHECK(std::abs(h1_by_quadrature(u, 8 * M) - exact) <= 1e-10 * exact);
    CHECK(std::abs(l2_by_quadrature(u, v, 8 * M) - l2_inner(u, v)) <= 1e-10 * (1 + std::abs(l2_inner(u, v))));
    CHECK(h1_inner(u, v) == doctest::Approx(h1_inner(v, u)).epsilon(1e-15));
    CHECK(h1_inner(u, v) == doctest::Approx(l2_inner(u, v) + l2_inner(differentiate(u), differentiate(v))).epsilon(1e-12));
  }
  // Zero padding: a shorter loop pairs with a longer one on the common modes.
  const Loop shortu = random_loop(2, 2), longu = random_loop(2, 6);
  CHECK(h1_inner(shortu, longu) == doctest::Approx(h1_inner(shortu.with_modes(6), longu)).epsilon(1e-14));
  CHECK_THROWS_AS(h1_inner(random_loop(2, 2), random_loop(3, 2)), DimensionMismatch);
}

TEST_CASE("gram diagonals") {
  const Loop u = random_loop(2, 4);
  const Vec x = u.flat();
  CHECK(x.dot(h1_weights(2, 4).cwiseProduct(x)) == doctest::Approx(h1_inner(u, u)).epsilon(1e-14));
  CHECK(x.dot(l2_weights(2, 4).cwiseProduct(x)) == doctest::Approx(l2_inner(u, u)).epsilon(1e-14));
}

TEST_CASE("differentiation and the inverse of id minus laplace") {
  const Loop cst = Loop::constant(random_vec(4), 3);
  CHECK(differentiate(cst).coeffs().norm() == 0.0);
  CHECK((inv_id_minus_laplace(cst).coeffs() - cst.coeffs()).norm() == 0.0);

  Loop c(2, 3);
  c.coeffs().col(1) = random_vec(4);
  CHECK((inv_id_minus_laplace(c).coeffs() - 0.5 * c.coeffs()).norm() < 1e-16);

  const Loop u = random_loop(2, 6);
  CHECK((inv_id_minus_laplace(id_minus_laplace(u)).coeffs() - u.coeffs()).norm() < 1e-13 * u.coeffs().norm());

  const double h = 1e-6;
  const Loop du = differentiate(u);
  for (double t : {0.2, 1.7, 4.0}) CHECK((du.eval(t) - (u.eval(t + h) - u.eval(t - h)) / (2 * h)).norm() < 1e-7);

  for (int trial = 0; trial < 10; ++trial) {
    const Loop a = random_loop(3, 5), b = random_loop(3, 5);
    CHECK(h1_inner(inv_id_minus_laplace(a), b) == doctest::Approx(l2_inner(a, b)).epsilon(1e-10));
  }
}

TEST_CASE("time shift") {
  const Loop u = random_loop(2, 5);
  CHECK((time_shift(0.0, u).coeffs() - u.coeffs()).norm() == 0.0);
  Loop c(2, 2);
  c.coeffs().col(1) = random_vec(4);
  CHECK((time_shift(M_PI, c).coeffs() + c.coeffs()).norm() < 1e-15);
  for (double theta : {0.4, 1.9, 5.5}) {
    const Loop s = time_shift(theta, u);
    for (double t : {0.0, 1.3, 3.3}) CHECK((s.eval(t) - u.eval(t + theta)).norm() < 1e-13);
    CHECK(h1_by_quadrature(s, 64) == doctest::Approx(h1_inner(u, u)).epsilon(1e-12));
    CHECK(l2_inner(s, s) == doctest::Approx(l2_inner(u, u)).epsilon(1e-13));
    CHECK((time_shift(theta, differentiate(u)).coeffs() - differentiate(s).coeffs()).norm() < 1e-12);
    CHECK((time_shift(theta, inv_id_minus_laplace(u)).coeffs() - inv_id_minus_laplace(s).coeffs()).norm() < 1e-12);
  }
}

TEST_CASE("frame of a relative equilibrium") {
  const LoopFrame frame = pair_frame(5);
  const RelativeEquilibrium eq = normalize_period(make_pair(1, 1, 2));
  for (double t : {0.0, 0.7, 3.0}) {
    CHECK((frame.Z.eval(t) - eq.at(t)).norm() < 1e-15);
    CHECK((frame.Zdot.eval(t) - eq.velocity(t)).norm() < 1e-15);
  }
  CHECK(std::abs(h1_inner(frame.Zdot, frame.e1)) < 1e-15);
  CHECK(std::abs(h1_inner(frame.Zdot, frame.e2)) < 1e-15);
  CHECK_THROWS_AS(make_frame(Loop::constant(random_vec(4), 3)), DegenerateFrame);
}

TEST_CASE("projections") {
  const LoopFrame frame = pair_frame(6);
  CHECK((project_D(frame.e1).coeffs() - frame.e1.coeffs()).norm() < 1e-15);
  CHECK(h1_norm(project_X(frame.Zdot, frame)) < 1e-14);

  for (int trial = 0; trial < 10; ++trial) {
    const Loop u = random_loop(2, 6), w = random_loop(2, 6);
    const Loop pd = project_D(u), pp = project_phase(u, frame), pn = project_NZ(u, frame);
    CHECK(h1_norm(pd + pp + pn - u) <= 1e-10 * h1_norm(u));
    CHECK(std::abs(h1_inner(pn, frame.e1)) < 1e-10);
    CHECK(std::abs(h1_inner(pn, frame.e2)) < 1e-10);
    CHECK(std::abs(h1_inner(pn, frame.Zdot)) < 1e-10);
    CHECK(std::abs(h1_inner(pd, pp)) < 1e-10);
    CHECK(std::abs(h1_inner(pd, pn)) < 1e-10);
    CHECK(std::abs(h1_inner(pp, pn)) < 1e-10);
    CHECK(h1_norm(project_D(pd) - pd) < 1e-12);
    CHECK(h1_norm(project_X(project_X(u, frame), frame) - project_X(u, frame)) < 1e-12);
    CHECK(h1_norm(project_NZ(pn, frame) - pn) < 1e-12);
    CHECK(h1_inner(project_X(u, frame), w) == doctest::Approx(h1_inner(u, project_X(w, frame))).epsilon(1e-12));
    CHECK(h1_inner(project_NZ(u, frame), w) == doctest::Approx(h1_inner(u, project_NZ(w, frame))).epsilon(1e-12));
    CHECK(h1_inner(project_D(u), w) == doctest::Approx(h1_inner(u, project_D(w))).epsilon(1e-12));
  }
}

TEST_CASE("projections are equivariant under shifts of the frame") {
  const LoopFrame frame = pair_frame(5);
  const Loop u = random_loop(2, 5);
  for (double theta : {0.5, 2.0, 4.4}) {
    const LoopFrame shifted = shifted_frame(frame, theta);
    CHECK(h1_norm(time_shift(theta, project_X(u, frame)) - project_X(time_shift(theta, u), shifted)) < 1e-10);
    CHECK(h1_norm(time_shift(theta, project_NZ(u, frame)) - project_NZ(time_shift(theta, u), shifted)) < 1e-10);
    CHECK(h1_norm(time_shift(theta, project_D(u)) - project_D(time_shift(theta, u))) < 1e-10);
  }
}

TEST_CASE("symmetry projector") {
  const RelativeEquilibrium eq = normalize_period(make_thomson(3, 1, 1));
  const Loop Z = Loop::from_equilibrium(eq, 4);
  const std::vector<int> cycle{1, 2, 0};
  CHECK(permutation_order(cycle) == 3);
  CHECK(h1_norm(sigma_apply(eq.sys, cycle, Z) - Z) < 1e-14);
  CHECK(h1_norm(sigma_project(eq.sys, cycle, Z) - Z) < 1e-14);

  const Loop u = random_loop(3, 4);
  CHECK(h1_norm(sigma_project(eq.sys, {0, 1, 2}, u) - u) == 0.0);
  const Loop p = sigma_project(eq.sys, cycle, u);
  CHECK(h1_norm(sigma_apply(eq.sys, cycle, p) - p) < 1e-12);
  CHECK(h1_norm(sigma_project(eq.sys, cycle, p) - p) < 1e-12);
  const double step = 2 * M_PI / 3;
  CHECK(h1_norm(sigma_project(eq.sys, cycle, time_shift(step, u)) - time_shift(step, p)) < 1e-12);

  CHECK_THROWS_AS(sigma_project(VortexSystem({1, 2, 1}), cycle, u), VorticityMismatch);
  CHECK_THROWS_AS(permutation_order({0, 0, 1}), InvalidArgument);
}

TEST_CASE("sampling round trip") {
  for (int M : {1, 4, 9}) {
    const Loop u = random_loop(2, M);
    for (int m : {2 * M + 1, 4 * (2 * M + 1)}) {
      CHECK((from_samples(sample(u, m), M).coeffs() - u.coeffs()).norm() < 1e-12 * u.coeffs().norm());
    }
  }
  const Vec c = random_vec(4);
  const Mat S = sample(Loop::constant(c, 3), 10);
  for (int j = 0; j < 10; ++j) CHECK((S.col(j) - c).norm() < 1e-15);

  Loop cosine(1, 2);
  cosine.coeffs()(0, 1) = 1.0;
  const Mat C = sample(cosine, 8);
  for (int j = 0; j < 8; ++j) CHECK(C(0, j) == doctest::Approx(std::cos(2 * M_PI * j / 8)).epsilon(1e-15));
  CHECK(nodes(4)[1] == doctest::Approx(M_PI / 2));

  CHECK_THROWS_AS(from_samples(Mat::Zero(2, 6), 3), DimensionMismatch);
  CHECK_THROWS_AS(require_dealiased(16, 4), AliasWarning);
  CHECK_NOTHROW(require_dealiased(17, 4));
}

TEST_CASE("spectral tail") {
  Loop u(1, 8);
  u.coeffs()(0, 1) = 1.0;
  CHECK(spectral_tail(u) == 0.0);
  u.coeffs()(0, 15) = 1.0;  // cos 8t
  const double w1 = 2 * M_PI, w8 = M_PI * 65;
  CHECK(spectral_tail(u) == doctest::Approx(std::sqrt(w8 / (w1 + w8))).epsilon(1e-14));
  CHECK(spectral_tail(Loop(1, 8)) == 0.0);
}

}  // TEST_SUITE
