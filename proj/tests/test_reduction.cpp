#include "doctest.h"

#include "support.hpp"
#include "vorb/reduction.hpp"

using namespace vorb;
using namespace vorb::testing;

namespace {

RelativeEquilibrium seed_pair() { return normalize_period(make_pair(1, 1, 2)); }

ReducedProblem disk_problem(int modes) {
  const RelativeEquilibrium eq = seed_pair();
  return make_problem(eq.sys, Domain::unit_disk(), Vec2::Zero(), make_frame(eq, modes));
}

SolverParams params(int modes) {
  SolverParams p;
  p.modes = modes;
  return p;
}

// Residual of G_k u_k' = J grad_k H_r(u) at sample times.
double ode_defect(const VortexSystem& sys, const Domain& dom, double r, const Loop& u) {
  const Loop du = differentiate(u);
  double worst = 0.0;
  for (int j = 0; j < 50; ++j) {
    const double t = 2 * M_PI * j / 50;
    const Vec rhs = vortex_rhs(sys, dom, Flow::rescaled(r), u.eval(t));
    worst = std::max(worst, (du.eval(t) - rhs).norm());
  }
  return worst;
}

}  // namespace

TEST_SUITE("reduction") {

TEST_CASE("parameters") {
  const std::vector<double> grid = RGrid{}.values();
  REQUIRE(grid.size() == 30);
  CHECK(grid.front() == 0.2);
  CHECK(grid.back() == 1e-3);
  for (std::size_t i = 1; i < grid.size(); ++i) {
    CHECK(grid[i] < grid[i - 1]);
    if (i + 1 < grid.size()) CHECK(grid[i] / grid[i - 1] == doctest::Approx(grid[1] / grid[0]).epsilon(1e-12));
  }
  CHECK_THROWS_AS((RGrid{1e-3, 0.2, 30}.values()), InvalidArgument);
  SolverParams p;
  CHECK(p.node_count() == 4 * 65);
  CHECK_NOTHROW(p.validate());
  p.contraction_guard = 1.5;
  CHECK_THROWS_AS(p.validate(), InvalidArgument);
  CHECK(parse_solve_mode("newton") == SolveMode::Newton);
  CHECK(std::string(to_string(SolveMode::FixedPoint)) == "fixedpoint");
  CHECK_THROWS_AS(parse_solve_mode("secant"), InvalidArgument);
}

TEST_CASE("basis of the complement of the phase direction") {
  const ReducedProblem pb = disk_problem(5);
  const XBasis& X = pb.basis;
  const int size = pb.frame.Z.size();
  REQUIRE(X.dim() == size - 1);
  CHECK((X.columns.transpose() * X.columns - Mat::Identity(size - 1, size - 1)).norm() < 1e-12);
  const Vec zhat = X.sqrt_w.cwiseProduct(pb.frame.Zdot.flat());
  CHECK((X.columns.transpose() * zhat).norm() < 1e-12 * zhat.norm());
  // The first two columns are the normalized translations.
  for (int i = 0; i < 2; ++i) {
    const Loop col = Loop::from_flat(X.columns.col(i).cwiseQuotient(X.sqrt_w), 2, 5);
    CHECK(h1_norm(project_D(col) - col) < 1e-12);
    CHECK(h1_norm(col) == doctest::Approx(1.0).epsilon(1e-12));
  }
  const Loop u = random_loop(2, 5);
  const Loop back = X.loop(X.coordinates(u), 2, 5);
  CHECK(h1_norm(back - project_X(u, pb.frame)) < 1e-12);
  CHECK(pb.epsilon == doctest::Approx(0.5 * 2 / std::sqrt(2 * M_PI)).epsilon(1e-12));
}

TEST_CASE("symplectic action from coefficients matches quadrature") {
  const VortexSystem sys({1.0, -0.4, 2.0});
  for (int trial = 0; trial < 5; ++trial) {
    const Loop u = random_loop(3, 6);
    const int m = 64;
    const Mat U = sample(u, m), D = sample(differentiate(u), m);
    const Mat MJ = sys.weight_matrix() * sys.symplectic();
    double quad = 0.0;
    for (int j = 0; j < m; ++j) quad += D.col(j).dot(MJ * U.col(j));
    quad *= 0.5 * 2 * M_PI / m;
    CHECK(symplectic_action(sys, u) == doctest::Approx(quad).epsilon(1e-12));
  }
}

TEST_CASE("plane action at the seed and at constants") {
  const RelativeEquilibrium eq = seed_pair();
  const LoopFrame frame = make_frame(eq, 4);
  const Domain plane = Domain::plane();
  const int m = 4 * 9;
  // Rigid rotation: the integrand is constant in t.
  const double by_hand = 0.5 * 2 * M_PI * eq.velocity(0).dot(eq.sys.weight_matrix() * eq.sys.symplectic() * eq.z) -
                         2 * M_PI * eval_H0(eq.sys, eq.z);
  CHECK(action_J_r(eq.sys, plane, Vec2::Zero(), 0.0, frame.Z, m) == doctest::Approx(by_hand).epsilon(1e-12));
  CHECK(action_J_r(eq.sys, plane, Vec2::Zero(), 0.3, frame.Z, m) ==
        doctest::Approx(action_J_r(eq.sys, plane, Vec2::Zero(), 0.0, frame.Z, m)).epsilon(1e-14));

  Vec c(4);
  c << 0.3, 0.1, -0.2, 0.4;
  CHECK(action_J_r(eq.sys, plane, Vec2::Zero(), 0.0, Loop::constant(c, 4), m) ==
        doctest::Approx(-2 * M_PI * eval_H0(eq.sys, c)).epsilon(1e-13));
}

TEST_CASE("action tends to the plane action linearly or faster") {
  const RelativeEquilibrium eq = seed_pair();
  const LoopFrame frame = make_frame(eq, 4);
  const Loop u = frame.Z + 0.05 * random_loop(2, 4);
  const double a0 = action_J_r(eq.sys, Domain::unit_disk(), Vec2::Zero(), 0.0, u, 36);
  double prev = std::abs(action_J_r(eq.sys, Domain::unit_disk(), Vec2::Zero(), 0.2, u, 36) - a0);
  for (double r : {0.1, 0.05, 0.025}) {
    const double gap = std::abs(action_J_r(eq.sys, Domain::unit_disk(), Vec2::Zero(), r, u, 36) - a0);
    CHECK(gap <= 0.5 * prev);
    prev = gap;
  }
}

TEST_CASE("gradient of the action") {
  const RelativeEquilibrium eq = seed_pair();
  const LoopFrame frame = make_frame(eq, 6);
  const int m = 4 * 13;
  CHECK(h1_norm(grad_J_r(eq.sys, Domain::plane(), Vec2::Zero(), 0.4, frame.Z, m)) < 1e-10);

  // Directional derivatives against central differences of the action.
  for (const Domain& dom : {Domain::plane(), Domain::unit_disk(), Domain::synthetic(Mat2::Identity())}) {
    for (int trial = 0; trial < 5; ++trial) {
      const Loop u = frame.Z + 0.05 * random_loop(2, 6);
      const Loop w = random_loop(2, 6);
      const double r = 0.3;
      const double eps = 1e-6;
      const double fd = (action_J_r(eq.sys, dom, Vec2::Zero(), r, u + eps * w, m) -
                         action_J_r(eq.sys, dom, Vec2::Zero(), r, u - eps * w, m)) /
                        (2 * eps);
      const double exact = h1_inner(grad_J_r(eq.sys, dom, Vec2::Zero(), r, u, m), w);
      CHECK(std::abs(fd - exact) <= 1e-5 * std::max(1.0, std::abs(exact)));
    }
  }
}

TEST_CASE("gradient at the seed is the boundary force and is small in r") {
  const RelativeEquilibrium eq = seed_pair();
  const int M = 8, m = 4 * 17;
  const LoopFrame frame = make_frame(eq, M);
  const Domain disk = Domain::unit_disk();
  std::vector<double> rs, norms;
  for (double r : {0.2, 0.1, 0.05, 0.025}) {
    const Loop g = grad_J_r(eq.sys, disk, Vec2::Zero(), r, frame.Z, m);
    // Independent assembly: (id - Laplace)^{-1} of r grad F(r Z(t)).
    const Mat Zs = sample(frame.Z, m);
    Mat forcing(4, m);
    for (int j = 0; j < m; ++j) forcing.col(j) = r * grad_F(eq.sys, disk, r * Vec(Zs.col(j)));
    const Loop oracle = inv_id_minus_laplace(from_samples(forcing, M));
    CHECK(h1_norm(g - oracle) <= 1e-12 + 1e-10 * h1_norm(oracle));
    CHECK(h1_norm(g) <= r);
    rs.push_back(r);
    norms.push_back(h1_norm(g));
  }
  // With the center of vorticity at a0 the leading terms of grad F(rZ)
  // cancel; the first surviving term is cubic, so the gradient scales as r^4.
  CHECK(loglog_slope(rs, norms) == doctest::Approx(4.0).epsilon(0.05));
}

TEST_CASE("scaled hessian matches finite differences of the gradient") {
  const RelativeEquilibrium eq = seed_pair();
  const int M = 4, m = 4 * 9;
  const LoopFrame frame = make_frame(eq, M);
  const Vec s = h1_weights(2, M).cwiseSqrt();
  for (const Domain& dom : {Domain::plane(), Domain::unit_disk()}) {
    const Loop u = frame.Z + 0.03 * random_loop(2, M);
    const double r = 0.25;
    const Mat K = scaled_hessian(eq.sys, dom, Vec2::Zero(), r, u, m);
    CHECK((K - K.transpose()).norm() < 1e-12 * K.norm());
    const Mat J = fd_jacobian(
        [&](const Vec& c) { return grad_J_r(eq.sys, dom, Vec2::Zero(), r, Loop::from_flat(c, 2, M), m).flat(); },
        u.flat(), 1e-6);
    const Mat Kfd = s.asDiagonal() * J * s.cwiseInverse().asDiagonal();
    CHECK(rel_err(K, Kfd) < 1e-5);
  }
}

TEST_CASE("restricted operator matches finite differences of the projected gradient") {
  const ReducedProblem pb = disk_problem(4);
  const double r = 0.2;
  const OperatorBlocks L = assemble_L_r(pb, r);
  const Mat Lfd = fd_jacobian(
      [&](const Vec& x) {
        const Loop v = pb.basis.loop(x, 2, 4);
        return pb.basis.coordinates(grad_J_r(pb.sys, pb.domain, pb.anchor, r, pb.frame.Z + v, pb.nodes));
      },
      Vec::Zero(pb.basis.dim()), 1e-6);
  CHECK(rel_err(L.matrix, Lfd) < 1e-5);
  CHECK((L.matrix - L.matrix.transpose()).norm() < 1e-12 * L.matrix.norm());
}

TEST_CASE("translation block on the disk") {
  const ReducedProblem pb = disk_problem(6);
  const OperatorBlocks L = assemble_L_r(pb, 0.05);
  // For a in R^2, the normalized translation has blocks a / sqrt(2 pi N); its
  // image under F''(0) averages to G^2 h''(0) a / N.
  const Mat2 expected = 2.0 * 2.0 / 2.0 * Domain::unit_disk().hess_h(Vec2::Zero());
  CHECK(rel_err(L.D0, expected) < 1e-12);
  CHECK(rel_err(L.D_block, L.D0) < 0.02);
  const OperatorBlocks Ls = assemble_L_r(pb, 0.005);
  CHECK(rel_err(Ls.D_block, L.D0) < rel_err(L.D_block, L.D0));
  CHECK(Ls.norm_B == doctest::Approx(Ls.norm_B0).epsilon(1e-3));
  CHECK(Ls.norm_C == doctest::Approx(Ls.norm_C0).epsilon(1e-3));
  CHECK(L.cond_A < 1e6);
  CHECK(L.cond_D < 1e6);
}

TEST_CASE("center of vorticity kills the translation component of F''(0)[Z]") {
  for (const RelativeEquilibrium& eq : {seed_pair(), normalize_period(make_triangle(1, 2, 3, 1.0))}) {
    const Loop Z = Loop::from_equilibrium(eq, 3);
    const Mat Fpp = hess_F(eq.sys, Domain::unit_disk(), Vec::Zero(eq.sys.dim()));
    CHECK(h1_norm(project_D(apply_constant_operator(Fpp, Z))) < 1e-10);
  }
}

TEST_CASE("plane operator has a vanishing translation block") {
  const RelativeEquilibrium eq = seed_pair();
  const ReducedProblem pb = make_problem(eq.sys, Domain::plane(), Vec2::Zero(), make_frame(eq, 4));
  CHECK_THROWS_AS(assemble_L_r(pb, 0.1), SingularOperator);
  const OperatorBlocks L = assemble_L_r(pb, 0.1, false);
  CHECK(L.D_block.norm() == 0.0);
  CHECK(L.cond_A < 1e6);  // nondegenerate seed: no kernel on N_Z
}

TEST_CASE("solver on the plane returns the seed") {
  const RelativeEquilibrium eq = seed_pair();
  const ReducedProblem pb = make_problem(eq.sys, Domain::plane(), Vec2::Zero(), make_frame(eq, 8));
  for (SolveMode mode : {SolveMode::FixedPoint, SolveMode::Newton}) {
    SolverParams p = params(8);
    p.mode = mode;
    const ReducedSolution s = solve_reduced(pb, 0.1, p);
    CHECK(s.vnorm == 0.0);
    CHECK(s.iterations == 0);
    CHECK(s.residual_grad < 1e-12);
  }
}

TEST_CASE("solver on the disk") {
  const ReducedProblem pb = disk_problem(16);
  SolverParams fp = params(16);
  SolverParams nt = fp;
  nt.mode = SolveMode::Newton;
  for (double r : {0.2, 0.05, 0.01}) {
    const ReducedSolution a = solve_reduced(pb, r, fp);
    const ReducedSolution b = solve_reduced(pb, r, nt);
    CHECK(a.residual_grad <= 10 * fp.fp_tol);
    CHECK(a.phase_defect <= 10 * fp.fp_tol);
    CHECK(std::abs(h1_inner(a.v, pb.frame.Zdot)) < 1e-10);
    CHECK(h1_norm(a.v - b.v) <= 1e-9);
    CHECK(a.contraction_estimate <= fp.contraction_guard);
    CHECK(a.spectral_tail < 1e-8);
    CHECK(h1_norm(a.u - pb.frame.Z - a.v) < 1e-14);
    CHECK(ode_defect(pb.sys, pb.domain, r, a.u) < 1e-9);
    CHECK(a.vnorm > 0.0);
    CHECK(a.vnorm <= r);
  }
  // The uncorrected seed does not solve the blow-up system; its defect is
  // O(r^4) since the center of vorticity sits at a0.
  CHECK(ode_defect(pb.sys, pb.domain, 0.2, pb.frame.Z) > 1e-5);
}

TEST_CASE("solver guards") {
  const ReducedProblem pb = disk_problem(8);
  SolverParams p = params(8);
  p.contraction_guard = 1e-9;
  CHECK_THROWS_AS(solve_reduced(pb, 0.2, p), ContractionFailure);
  CHECK_THROWS_AS(solve_reduced(pb, 3.0, params(8)), DomainExit);
  CHECK_THROWS_AS(solve_reduced(pb, 0.0, params(8)), InvalidArgument);
  const RelativeEquilibrium eq = seed_pair();
  const ReducedProblem aliased = make_problem(eq.sys, Domain::unit_disk(), Vec2::Zero(), make_frame(eq, 8), 20);
  CHECK_THROWS_AS(solve_reduced(aliased, 0.1, params(8)), AliasWarning);
  p = params(8);
  p.max_iter = 1;
  CHECK_THROWS_AS(solve_reduced(pb, 0.2, p), NoConvergence);
}

TEST_CASE("symmetry filter keeps the symmetric solution") {
  const ReducedProblem pb = disk_problem(8);
  SolverParams p = params(8);
  const ReducedSolution plain = solve_reduced(pb, 0.15, p);
  p.symmetry = std::vector<int>{1, 0};
  const ReducedSolution sym = solve_reduced(pb, 0.15, p);
  CHECK(h1_norm(plain.v - sym.v) < 1e-12);
  CHECK(h1_norm(sigma_apply(pb.sys, {1, 0}, sym.u) - sym.u) < 1e-12);
}

TEST_CASE("continuation") {
  const RelativeEquilibrium eq = seed_pair();
  SolverParams p = params(12);
  p.grid = RGrid{0.2, 1e-3, 12};
  const ContinuationPath path = continue_path(eq.sys, Domain::unit_disk(), Vec2::Zero(), make_frame(eq, 12), p);
  CHECK(path.entries.size() == 12);
  CHECK(path.failures.empty());
  CHECK(path.converged_fraction() == 1.0);
  CHECK(path.empirical_r0 >= 0.2);
  for (std::size_t i = 1; i < path.entries.size(); ++i) CHECK(path.entries[i].r < path.entries[i - 1].r);
  for (std::size_t i = 1; i < path.probes.size(); ++i) CHECK(path.probes[i].r > path.probes[i - 1].r);
  for (std::size_t i = 1; i < path.entries.size(); ++i) {
    if (path.entries[i - 1].r <= 0.05) CHECK(path.entries[i].vnorm <= path.entries[i - 1].vnorm);
  }

  CHECK_THROWS_AS(continue_path(VortexSystem({1, -1}), Domain::unit_disk(), Vec2::Zero(), make_frame(eq, 12), p),
                  ZeroTotalVorticity);
  CHECK_THROWS_AS(continue_path(eq.sys, Domain::unit_disk(), Vec2(0.3, 0), make_frame(eq, 12), p), InvalidArgument);

  const ContinuationPath flat = continue_path(eq.sys, Domain::plane(), Vec2::Zero(), make_frame(eq, 12), p);
  for (const ReducedSolution& s : flat.entries) CHECK(s.vnorm == 0.0);
}

TEST_CASE("physical orbits") {
  const RelativeEquilibrium eq = seed_pair();
  const Loop Z = Loop::from_equilibrium(eq, 4);
  const Vec2 a0(0.1, -0.2);
  const double r = 0.1;
  const PhysicalOrbit orbit = unrescale(Domain::unit_disk(), a0, r, Z, 32);
  CHECK(orbit.period == doctest::Approx(2 * M_PI * 0.01).epsilon(1e-15));
  REQUIRE(orbit.samples.size() == 32);
  for (std::size_t j = 0; j < orbit.samples.size(); ++j) {
    CHECK(orbit.times[j] == doctest::Approx(j * orbit.period / 32).epsilon(1e-14));
    const Vec back = (orbit.samples[j] - lifted(2, a0)) / r;
    CHECK((back - Z.eval(orbit.times[j] / (r * r))).norm() < 1e-10);
    CHECK((orbit.samples[j].segment<2>(0) - a0).norm() == doctest::Approx(r * eq.z.segment<2>(0).norm()).epsilon(1e-12));
  }
  const PhysicalOrbit tiny = unrescale(Domain::unit_disk(), a0, 1e-6, Z, 8);
  for (const Vec& z : tiny.samples) CHECK((z - lifted(2, a0)).norm() < 1e-6);
  CHECK_THROWS_AS(unrescale(Domain::unit_disk(), a0, 3.0, Z), DomainExit);
}

TEST_CASE("uniqueness up to time shifts") {
  const ReducedProblem pb = disk_problem(12);
  const SolverParams p = params(12);
  const ReducedSolution s = solve_reduced(pb, 0.1, p);
  const UniquenessReport rep = local_uniqueness_probe(pb, s, {0.0, M_PI / 2}, p);
  CHECK(rep.mismatch[0] < 1e-14);
  CHECK(rep.mismatch[1] < 1e-8);
}

TEST_CASE("log-log slope") {
  std::vector<double> x, y;
  for (double v : {0.1, 0.2, 0.4, 0.8}) {
    x.push_back(v);
    y.push_back(3.0 * std::pow(v, 1.7));
  }
  CHECK(loglog_slope(x, y) == doctest::Approx(1.7).epsilon(1e-12));
  CHECK_THROWS_AS(loglog_slope({1.0}, {1.0}), InvalidArgument);
  CHECK_THROWS_AS(loglog_slope({1.0, 2.0}, {1.0, 0.0}), InvalidArgument);
}

}  // TEST_SUITE
