#include "vorb/reduction.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

namespace vorb {

const char* to_string(SolveMode mode) {
  return mode == SolveMode::Newton ? "newton" : "fixedpoint";
}

SolveMode parse_solve_mode(const std::string& text) {
  if (text == "fixedpoint" || text == "fixed-point" || text == "FixedPoint") return SolveMode::FixedPoint;
  if (text == "newton" || text == "Newton") return SolveMode::Newton;
  throw InvalidArgument("unknown solver mode '" + text + "' (expected fixedpoint or newton)");
}

std::vector<double> RGrid::values() const {
  if (!(r_max > 0.0) || !(r_min > 0.0) || !(r_min < r_max) || steps < 2) {
    throw InvalidArgument("r-grid needs 0 < r_min < r_max and at least two steps");
  }
  std::vector<double> out(static_cast<std::size_t>(steps));
  const double ratio = std::log(r_min / r_max);
  for (int i = 0; i < steps; ++i) out[i] = r_max * std::exp(ratio * i / (steps - 1));
  out.back() = r_min;
  return out;
}

void SolverParams::validate() const {
  if (modes < 1) throw InvalidArgument("modes must be at least 1");
  if (!(fp_tol > 0.0) || !(newton_tol > 0.0)) throw InvalidArgument("tolerances must be positive");
  if (max_iter < 1) throw InvalidArgument("max_iter must be positive");
  if (!(contraction_guard > 0.0) || !(contraction_guard < 1.0)) {
    throw InvalidArgument("contraction_guard must lie in (0, 1)");
  }
  if (!(tail_tol > 0.0)) throw InvalidArgument("tail_tol must be positive");
  if (upward_probes < 0 || !(upward_factor > 1.0)) throw InvalidArgument("upward probing needs factor > 1");
  grid.values();
}

// ---------------------------------------------------------------------------
// X basis

Vec XBasis::coordinates(const Loop& u) const {
  return columns.transpose() * sqrt_w.cwiseProduct(u.flat());
}

Loop XBasis::loop(const Vec& coords, int n, int modes) const {
  return Loop::from_flat((columns * coords).cwiseQuotient(sqrt_w), n, modes);
}

XBasis build_x_basis(const LoopFrame& frame) {
  const int n = frame.n();
  const int modes = frame.modes();
  XBasis basis;
  basis.sqrt_w = h1_weights(n, modes).cwiseSqrt();
  const int size = static_cast<int>(basis.sqrt_w.size());

  // Gram-Schmidt in scaled coordinates: Zdot first (then dropped), the two
  // translations, then the coordinate vectors in mode-major order.
  Mat Q(size, size);
  int kept = 0;
  auto push = [&](Vec x) -> bool {
    for (int pass = 0; pass < 2; ++pass) {
      if (kept > 0) x -= Q.leftCols(kept) * (Q.leftCols(kept).transpose() * x);
    }
    const double norm = x.norm();
    if (norm < 1e-8) return false;
    Q.col(kept++) = x / norm;
    return true;
  };
  auto scaled = [&](const Loop& u) -> Vec {
    const Vec x = basis.sqrt_w.cwiseProduct(u.flat());
    return x / x.norm();
  };
  push(scaled(frame.Zdot));
  if (!push(scaled(frame.e1)) || !push(scaled(frame.e2))) {
    throw DegenerateFrame("translations are not independent of Zdot");
  }
  for (int i = 0; i < size && kept < size; ++i) push(Vec::Unit(size, i));
  if (kept != size) throw DegenerateFrame("could not complete an orthonormal basis of X");
  basis.columns = Q.rightCols(size - 1);
  return basis;
}

ReducedProblem make_problem(const VortexSystem& sys, const Domain& domain, const Vec2& anchor,
                            const LoopFrame& frame, int nodes) {
  if (frame.n() != sys.n()) throw DimensionMismatch("frame and system disagree on N");
  ReducedProblem problem{sys, domain, anchor, frame, nodes > 0 ? nodes : 4 * (2 * frame.modes() + 1),
                         build_x_basis(frame), 0.0};
  const Mat values = sample(frame.Z, problem.nodes);
  double sep = std::numeric_limits<double>::infinity();
  for (int j = 0; j < values.cols(); ++j) sep = std::min(sep, min_separation(values.col(j)));
  problem.epsilon = 0.5 * sep;
  return problem;
}

// ---------------------------------------------------------------------------
// Action and its derivatives

namespace {

// -J_N M_G (blockwise -G_k J).
Mat minus_JM(const VortexSystem& sys) { return -sys.symplectic() * sys.weight_matrix(); }

void rethrow_at_node(const Error& e, int node, int m, bool collision) {
  std::ostringstream msg;
  msg << e.what() << " [quadrature node " << node << " of " << m << ", t = " << kTwoPi * node / m << "]";
  if (collision) throw CollisionError(msg.str());
  throw DomainError(msg.str());
}

template <typename F>
auto at_node(int node, int m, F&& f) -> decltype(f()) {
  try {
    return f();
  } catch (const CollisionError& e) {
    rethrow_at_node(e, node, m, true);
  } catch (const DomainError& e) {
    rethrow_at_node(e, node, m, false);
  }
  throw Error("unreachable");
}

double energy_r(const VortexSystem& sys, const Domain& domain, const Vec2& anchor, double r,
                const Vec& u) {
  return r == 0.0 ? eval_H0(sys, u) : eval_Hr(sys, domain, r, u, anchor);
}

Vec gradient_r(const VortexSystem& sys, const Domain& domain, const Vec2& anchor, double r,
               const Vec& u) {
  return r == 0.0 ? grad_H0(sys, u) : grad_Hr(sys, domain, r, u, anchor);
}

Mat hessian_r(const VortexSystem& sys, const Domain& domain, const Vec2& anchor, double r,
              const Vec& u) {
  return r == 0.0 ? hess_H0(sys, u) : hess_Hr(sys, domain, r, u, anchor);
}

void require_loop(const VortexSystem& sys, const Loop& u) {
  if (u.n() != sys.n()) throw DimensionMismatch("loop and system disagree on N");
}

}  // namespace

double symplectic_action(const VortexSystem& sys, const Loop& u) {
  const Mat MJ = sys.weight_matrix() * sys.symplectic();
  double sum = 0.0;
  for (int k = 1; k <= u.modes(); ++k) sum += kPi * k * u.sin_coeff(k).dot(MJ * u.cos_coeff(k));
  return sum;
}

double action_J_r(const VortexSystem& sys, const Domain& domain, const Vec2& anchor, double r,
                  const Loop& u, int nodes) {
  require_loop(sys, u);
  const Mat values = sample(u, nodes);
  double quad = 0.0;
  for (int j = 0; j < nodes; ++j) {
    quad += at_node(j, nodes, [&] { return energy_r(sys, domain, anchor, r, values.col(j)); });
  }
  return symplectic_action(sys, u) - kTwoPi * quad / nodes;
}

Loop grad_J_r(const VortexSystem& sys, const Domain& domain, const Vec2& anchor, double r,
              const Loop& u, int nodes) {
  require_loop(sys, u);
  const Mat values = sample(u, nodes);
  Mat field(u.dim(), nodes);
  for (int j = 0; j < nodes; ++j) {
    field.col(j) = -at_node(j, nodes, [&] { return gradient_r(sys, domain, anchor, r, values.col(j)); });
  }
  Loop euler_lagrange = from_samples(field, u.modes());
  euler_lagrange.coeffs() += minus_JM(sys) * differentiate(u).coeffs();
  return inv_id_minus_laplace(euler_lagrange);
}

Mat scaled_hessian(const VortexSystem& sys, const Domain& domain, const Vec2& anchor, double r,
                   const Loop& u, int nodes) {
  require_loop(sys, u);
  const int d = u.dim();
  const int cols = u.columns();
  const int size = u.size();
  const Mat& table = fourier_table(u.modes(), nodes);
  const Mat values = sample(u, nodes);

  // Pointwise -H_r''(u(t_j)), one 2N x 2N block per node.
  std::vector<Mat> blocks(static_cast<std::size_t>(nodes));
  for (int j = 0; j < nodes; ++j) {
    blocks[j] = -at_node(j, nodes, [&] { return hessian_r(sys, domain, anchor, r, values.col(j)); });
  }

  // Galerkin matrix G[(p,i),(q,l)] = int phi_p phi_q (-H'')_{il} dt.
  Mat G(size, size);
  const double w = kTwoPi / nodes;
  Vec weights(nodes);
  for (int i = 0; i < d; ++i) {
    for (int l = 0; l < d; ++l) {
      for (int j = 0; j < nodes; ++j) weights(j) = w * blocks[j](i, l);
      const Mat Gil = table * weights.asDiagonal() * table.transpose();
      for (int p = 0; p < cols; ++p)
        for (int q = 0; q < cols; ++q) G(p * d + i, q * d + l) = Gil(p, q);
    }
  }

  // L2-weighted symplectic part: pi k (-J_N M_G) couples a_k rows with b_k columns.
  const Mat C = minus_JM(sys);
  for (int k = 1; k <= u.modes(); ++k) {
    const int a = (2 * k - 1) * d;
    const int b = 2 * k * d;
    G.block(a, b, d, d) += kPi * k * C;
    G.block(b, a, d, d) -= kPi * k * C;
  }

  const Vec inv_sqrt_w = h1_weights(u.n(), u.modes()).cwiseSqrt().cwiseInverse();
  const Mat K = inv_sqrt_w.asDiagonal() * G * inv_sqrt_w.asDiagonal();
  return 0.5 * (K + K.transpose());
}

Loop apply_constant_operator(const Mat& C, const Loop& u) {
  if (C.rows() != u.dim() || C.cols() != u.dim()) throw DimensionMismatch("operator size does not match loop");
  return inv_id_minus_laplace(Loop(Mat(C * u.coeffs())));
}

namespace {

double block_condition(const Mat& block) {
  if (block.size() == 0) return 1.0;
  Eigen::SelfAdjointEigenSolver<Mat> eig(0.5 * (block + block.transpose()), Eigen::EigenvaluesOnly);
  const Vec abs = eig.eigenvalues().cwiseAbs();
  const double lo = abs.minCoeff();
  if (lo == 0.0) return std::numeric_limits<double>::infinity();
  return abs.maxCoeff() / lo;
}

double spectral_norm(const Mat& m) {
  if (m.size() == 0) return 0.0;
  return Eigen::JacobiSVD<Mat>(m).singularValues()(0);
}

}  // namespace

Mat limit_operator(const ReducedProblem& problem) {
  const int n = problem.sys.n();
  const int modes = problem.frame.modes();
  const Mat Fc = hess_F(problem.sys, problem.domain, lifted(n, problem.anchor));
  // Constant-coefficient multiplication and (id - Laplace)^{-1} both act
  // within a mode, so they commute with the diagonal scaling.
  const int d = 2 * n;
  const int size = d * (2 * modes + 1);
  Mat op = Mat::Zero(size, size);
  for (int c = 0; c < 2 * modes + 1; ++c) {
    const double k = mode_of_column(c);
    op.block(c * d, c * d, d, d) = Fc / (1.0 + k * k);
  }
  const Mat& Q = problem.basis.columns;
  return Q.transpose() * op * Q;
}

OperatorBlocks assemble_L_r(const ReducedProblem& problem, double r, bool check) {
  if (!(r >= 0.0)) throw InvalidArgument("r must be nonnegative");
  const Mat K = scaled_hessian(problem.sys, problem.domain, problem.anchor, r, problem.frame.Z, problem.nodes);
  const Mat& Q = problem.basis.columns;
  OperatorBlocks out;
  out.r = r;
  out.matrix = Q.transpose() * K * Q;
  out.matrix = 0.5 * (out.matrix + out.matrix.transpose());

  const int dd = problem.basis.d_dim();
  const int nn = problem.basis.dim() - dd;
  const Mat A = out.matrix.bottomRightCorner(nn, nn);
  const Mat D = out.matrix.topLeftCorner(dd, dd);
  const double r2 = r * r;
  const double scale = r2 > 0.0 ? 1.0 / r2 : 0.0;
  out.norm_A = spectral_norm(A);
  out.norm_B = scale * spectral_norm(out.matrix.bottomLeftCorner(nn, dd));
  out.norm_C = scale * spectral_norm(out.matrix.topRightCorner(dd, nn));
  out.D_block = scale * D;
  out.norm_D = spectral_norm(out.D_block);
  out.cond_A = block_condition(A);
  out.cond_D = block_condition(D);

  const Mat limit = limit_operator(problem);
  out.D0 = limit.topLeftCorner(dd, dd);
  out.norm_B0 = spectral_norm(limit.bottomLeftCorner(nn, dd));
  out.norm_C0 = spectral_norm(limit.topRightCorner(dd, nn));

  if (check && (!(out.cond_A <= 1e12) || !(out.cond_D <= 1e12))) {
    std::ostringstream msg;
    msg << "L_r is numerically singular at r = " << r << " (cond A = " << out.cond_A
        << ", cond D = " << out.cond_D << ")";
    throw SingularOperator(msg.str());
  }
  return out;
}

// ---------------------------------------------------------------------------
// Solver

namespace {

struct GradientEval {
  Loop grad;
  Vec projected;  // P_X coordinates
  double full = 0.0;
  double phase = 0.0;
};

GradientEval evaluate(const ReducedProblem& p, double r, const Loop& v) {
  GradientEval out;
  try {
    out.grad = grad_J_r(p.sys, p.domain, p.anchor, r, p.frame.Z + v, p.nodes);
  } catch (const CollisionError& e) {
    throw DomainExit(std::string("iterate left Lambda_r: ") + e.what());
  } catch (const DomainError& e) {
    throw DomainExit(std::string("iterate left Lambda_r: ") + e.what());
  }
  out.projected = p.basis.coordinates(out.grad);
  out.full = h1_norm(out.grad);
  out.phase = std::abs(h1_inner(out.grad, p.frame.Zdot));
  return out;
}

Eigen::PartialPivLU<Mat> factor_jacobian(const ReducedProblem& p, double r, const Loop& v, bool check) {
  if (v.coeffs().isZero(0.0)) return Eigen::PartialPivLU<Mat>(assemble_L_r(p, r, check).matrix);
  const Mat K = scaled_hessian(p.sys, p.domain, p.anchor, r, p.frame.Z + v, p.nodes);
  const Mat& Q = p.basis.columns;
  const Mat L = Q.transpose() * K * Q;
  if (check) {
    const double cond = block_condition(L);
    if (!(cond <= 1e12)) throw SingularOperator("Newton Jacobian is numerically singular");
  }
  return Eigen::PartialPivLU<Mat>(L);
}

void finish(const ReducedProblem& p, double r, const GradientEval& g, ReducedSolution& s, double tol) {
  s.u = p.frame.Z + s.v;
  s.residual_grad = g.full;
  s.projected_residual = g.projected.norm();
  s.phase_defect = g.phase;
  s.vnorm = h1_norm(s.v);
  s.spectral_tail = spectral_tail(s.u);
  s.vdot_zdot = h1_inner(differentiate(s.v), p.frame.Zdot);
  s.r = r;
  if (s.residual_grad > 10.0 * std::max(s.projected_residual, tol)) {
    std::ostringstream msg;
    msg << "gradient along Zdot did not vanish (full " << s.residual_grad << ", projected "
        << s.projected_residual << ")";
    throw PhaseDefect(msg.str());
  }
  if (s.residual_grad > 10.0 * tol) {
    std::ostringstream msg;
    msg << "full gradient residual " << s.residual_grad << " above " << 10.0 * tol;
    throw NoConvergence(msg.str());
  }
}

}  // namespace

ReducedSolution solve_reduced(const ReducedProblem& problem, double r, const SolverParams& params,
                              const std::optional<Loop>& warm_start) {
  params.validate();
  if (!(r > 0.0)) throw InvalidArgument("solve_reduced needs r > 0");
  require_dealiased(problem.nodes, problem.frame.modes());

  const int n = problem.sys.n();
  const int modes = problem.frame.modes();
  const double tol = params.tolerance();

  ReducedSolution sol;
  sol.mode = params.mode;
  sol.v = warm_start ? project_X(warm_start->with_modes(modes), problem.frame) : Loop::zero(n, modes);
  if (params.symmetry) sol.v = project_X(sigma_project(problem.sys, *params.symmetry, sol.v), problem.frame);

  GradientEval g = evaluate(problem, r, sol.v);

  std::optional<Eigen::PartialPivLU<Mat>> chord;
  if (params.mode == SolveMode::FixedPoint) {
    try {
      chord = factor_jacobian(problem, r, Loop::zero(n, modes), true);
    } catch (const SingularOperator&) {
      // Nothing to correct (e.g. the plane, where F vanishes identically).
      if (g.full <= tol) {
        finish(problem, r, g, sol, tol);
        return sol;
      }
      throw;
    }
  }

  double previous_step = 0.0;
  for (int it = 1; it <= params.max_iter; ++it) {
    Vec delta;
    if (params.mode == SolveMode::FixedPoint) {
      delta = -chord->solve(g.projected);
    } else {
      std::optional<Eigen::PartialPivLU<Mat>> lu;
      try {
        lu = factor_jacobian(problem, r, sol.v, true);
      } catch (const SingularOperator&) {
        if (g.full <= tol) {
          finish(problem, r, g, sol, tol);
          return sol;
        }
        throw;
      }
      delta = -lu->solve(g.projected);
    }

    Loop candidate = sol.v + problem.basis.loop(delta, n, modes);
    if (params.symmetry) {
      candidate = project_X(sigma_project(problem.sys, *params.symmetry, candidate), problem.frame);
    }
    double step = h1_norm(candidate - sol.v);

    if (params.mode == SolveMode::Newton) {
      // Damped Newton: halve while the projected residual grows.
      GradientEval trial = evaluate(problem, r, candidate);
      double damping = 1.0;
      for (int h = 0; h < 10 && trial.projected.norm() > g.projected.norm() && step > tol; ++h) {
        damping *= 0.5;
        candidate = sol.v + damping * problem.basis.loop(delta, n, modes);
        trial = evaluate(problem, r, candidate);
      }
      step = h1_norm(candidate - sol.v);
      sol.v = candidate;
      g = trial;
    } else {
      sol.v = candidate;
      if (it >= 2 && previous_step > 100.0 * tol) {
        const double factor = step / previous_step;
        sol.contraction_estimate = std::max(sol.contraction_estimate, factor);
        if (factor > params.contraction_guard) {
          std::ostringstream msg;
          msg << "successive steps shrink by only " << factor << " at r = " << r;
          throw ContractionFailure(msg.str());
        }
      }
      g = evaluate(problem, r, sol.v);
    }
    if (h1_norm(sol.v) > problem.epsilon) {
      std::ostringstream msg;
      msg << "|v|_H1 = " << h1_norm(sol.v) << " left the ball of radius " << problem.epsilon;
      throw DomainExit(msg.str());
    }

    sol.iterations = it;
    previous_step = step;
    if (step <= tol) {
      finish(problem, r, g, sol, tol);
      return sol;
    }
  }
  std::ostringstream msg;
  msg << "no convergence after " << params.max_iter << " iterations at r = " << r
      << " (last step " << previous_step << ")";
  throw NoConvergence(msg.str());
}

// ---------------------------------------------------------------------------

double ContinuationPath::converged_fraction() const {
  return grid.empty() ? 0.0 : static_cast<double>(entries.size()) / grid.size();
}

ContinuationPath continue_path(const VortexSystem& sys, const Domain& domain, const Vec2& anchor,
                               const LoopFrame& frame, const SolverParams& params) {
  params.validate();
  if (sys.total() == 0.0) {
    throw ZeroTotalVorticity("the continuation needs G_1 + ... + G_N != 0");
  }
  if (domain.kind() != DomainKind::Plane) {
    // On the plane h vanishes identically and the correction is trivially zero.
    if (domain.grad_h(anchor).norm() > 1e-8) throw InvalidArgument("anchor is not a critical point of h");
    if (!(std::abs(domain.hess_h(anchor).determinant()) > 1e-10)) {
      throw InvalidArgument("anchor is a degenerate critical point of h");
    }
  }
  const ReducedProblem problem = make_problem(sys, domain, anchor, frame.Z.modes() == params.modes
                                                                      ? frame
                                                                      : make_frame(frame.Z.with_modes(params.modes)),
                                              params.nodes);
  ContinuationPath path;
  path.grid = params.grid.values();

  std::optional<Loop> warm;
  for (double r : path.grid) {
    try {
      ReducedSolution s = solve_reduced(problem, r, params, warm);
      if (s.spectral_tail >= params.tail_tol) {
        std::ostringstream msg;
        msg << "spectral tail " << s.spectral_tail << " not below " << params.tail_tol;
        path.failures.push_back({r, msg.str()});
        continue;
      }
      warm = s.v;
      path.entries.push_back(std::move(s));
    } catch (const Error& e) {
      path.failures.push_back({r, e.what()});
    }
  }
  if (path.entries.empty()) throw EmptyPath("no grid point converged");
  path.empirical_r0 = path.entries.front().r;

  if (path.entries.front().r == path.grid.front()) {
    std::optional<Loop> up = path.entries.front().v;
    double r = path.grid.front();
    for (int i = 0; i < params.upward_probes; ++i) {
      r *= params.upward_factor;
      try {
        ReducedSolution s = solve_reduced(problem, r, params, up);
        if (s.spectral_tail >= params.tail_tol) break;
        up = s.v;
        path.empirical_r0 = r;
        path.probes.push_back(std::move(s));
      } catch (const Error&) {
        break;
      }
    }
  }
  return path;
}

PhysicalOrbit unrescale(const Domain& domain, const Vec2& anchor, double r, const Loop& u, int m) {
  if (!(r > 0.0)) throw InvalidArgument("unrescale needs r > 0");
  if (m < 2) throw InvalidArgument("unrescale needs at least two samples");
  PhysicalOrbit orbit;
  orbit.anchor = anchor;
  orbit.r = r;
  orbit.period = kTwoPi * r * r;
  orbit.u = u;
  const Vec base = lifted(u.n(), anchor);
  for (int j = 0; j < m; ++j) {
    const double s = kTwoPi * j / m;
    const Vec z = base + r * u.eval(s);
    for (int k = 0; k < u.n(); ++k) {
      if (!domain.contains(block(z, k))) {
        std::ostringstream msg;
        msg << "vortex " << k + 1 << " leaves the " << domain.name() << " at sample " << j;
        throw DomainExit(msg.str());
      }
    }
    if (!(min_separation(z) > 0.0)) throw DomainExit("orbit sample has colliding vortices");
    orbit.times.push_back(r * r * s);
    orbit.samples.push_back(z);
  }
  return orbit;
}

UniquenessReport local_uniqueness_probe(const ReducedProblem& problem, const ReducedSolution& solution,
                                        const std::vector<double>& thetas, const SolverParams& params) {
  UniquenessReport report;
  for (double theta : thetas) {
    const ReducedProblem shifted = make_problem(problem.sys, problem.domain, problem.anchor,
                                                shifted_frame(problem.frame, theta), problem.nodes);
    const ReducedSolution s = solve_reduced(shifted, solution.r, params);
    const double mismatch = h1_norm(s.v - time_shift(theta, solution.v));
    report.thetas.push_back(theta);
    report.mismatch.push_back(mismatch);
    report.max_mismatch = std::max(report.max_mismatch, mismatch);
  }
  return report;
}

double loglog_slope(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size() || x.size() < 2) throw InvalidArgument("slope fit needs two or more points");
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  const double n = static_cast<double>(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (!(x[i] > 0.0) || !(y[i] > 0.0)) throw InvalidArgument("slope fit needs positive data");
    const double lx = std::log(x[i]);
    const double ly = std::log(y[i]);
    sx += lx;
    sy += ly;
    sxx += lx * lx;
    sxy += lx * ly;
  }
  return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

}  // namespace vorb
