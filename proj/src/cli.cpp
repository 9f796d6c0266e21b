#include "vorb/cli.hpp"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <iomanip>
#include <optional>
#include <ostream>
#include <sstream>

#include "CLI11.hpp"

#include "vorb/dynamics.hpp"
#include "vorb/equilibria.hpp"
#include "vorb/io.hpp"
#include "vorb/reduction.hpp"

namespace vorb {

namespace {

void print_config(std::ostream& out, const VortexSystem& sys, const Vec& z) {
  for (int k = 0; k < sys.n(); ++k) {
    out << "  z" << k + 1 << " = (" << z(2 * k) << ", " << z(2 * k + 1) << ")  gamma = " << sys.gamma(k) << "\n";
  }
}

Vec2 parse_point(const std::string& text) {
  const std::vector<double> v = parse_list(text);
  if (v.size() != 2) throw InvalidArgument("expected a point x,y but got '" + text + "'");
  return {v[0], v[1]};
}

// --------------------------------------------------------------------------

struct EquilibriumArgs {
  std::string type;
  std::string gamma;
  int n = 0;
  std::optional<double> sep, side, radius;
  bool check = false;
};

int cmd_equilibrium(const EquilibriumArgs& a, std::ostream& out) {
  const std::vector<double> gammas = parse_list(a.gamma);
  RelativeEquilibrium eq{VortexSystem({1.0}), Vec::Zero(2), 0.0};
  const SeedKind kind = parse_seed_kind(a.type);
  switch (kind) {
    case SeedKind::Pair:
      if (gammas.size() != 2) throw InvalidArgument("--type pair needs --gamma g1,g2");
      eq = make_pair(gammas[0], gammas[1], a.sep.value_or(1.0));
      break;
    case SeedKind::Triangle:
      if (gammas.size() != 3) throw InvalidArgument("--type triangle needs --gamma g1,g2,g3");
      eq = make_triangle(gammas[0], gammas[1], gammas[2], a.side.value_or(1.0));
      break;
    case SeedKind::Thomson:
      if (gammas.size() != 1) throw InvalidArgument("--type thomson needs a single --gamma value");
      if (a.n < 2) throw InvalidArgument("--type thomson needs --n >= 2");
      eq = make_thomson(a.n, gammas[0], a.radius.value_or(1.0));
      break;
  }

  const double residual = residual_HS0(eq);
  out << std::setprecision(15);
  out << "equilibrium: " << a.type << "\n";
  print_config(out, eq.sys, eq.z);
  out << "omega = " << eq.omega << "\n"
      << "period = " << eq.period() << "\n"
      << "residual = " << residual << "\n";
  bool ok = residual <= 1e-10;

  if (a.check) {
    const RelativeEquilibrium normalized = normalize_period(eq);
    const MonodromyReport mono = monodromy(normalized);
    out << std::setprecision(10) << "Floquet multipliers:\n";
    for (const auto& mu : mono.multipliers) {
      out << "  " << mu.real() << (mu.imag() < 0 ? " - " : " + ") << std::abs(mu.imag()) << "i  (|mu - 1| = "
          << std::abs(mu - 1.0) << ")\n";
    }
    out << "singular values of (monodromy - I):";
    for (Eigen::Index i = 0; i < mono.singular_values.size(); ++i) out << " " << mono.singular_values(i);
    out << "\nkernel_dim = " << mono.kernel_dim
        << (mono.rotating_frame_count ? " (from the co-rotating linearization)" : "") << "\n"
        << "multipliers within 1e-2 of 1 = " << mono.multipliers_near_one << "\n"
        << "integration steps = " << mono.steps << " (refinement change " << mono.richardson_delta << ")\n";
    if (kind == SeedKind::Triangle) {
      const TriangleConditions c = triangle_conditions(gammas[0], gammas[1], gammas[2]);
      out << "closed-form conditions: Gamma = " << c.total << ", L = " << c.angular_momentum
          << ", sum of squares = " << c.sum_squares << " -> "
          << (c.predicted_nondegenerate ? "sufficient condition holds" : "sufficient condition fails") << "\n";
    }
    out << "verdict: " << (mono.nondegenerate ? "nondegenerate" : "degenerate") << "\n";
    ok = ok && mono.nondegenerate;
  }
  return ok ? kExitOk : kExitFailure;
}

// --------------------------------------------------------------------------

struct ContinueArgs {
  std::string config;
  std::optional<double> r_max, r_min;
  std::optional<int> r_steps, modes;
  std::optional<std::string> mode, out_dir;
  bool dump = false;
};

std::string orbit_name(std::size_t index, double r) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "orbit_%02zu_r%.6e.json", index, r);
  return buf;
}

int cmd_continue(const ContinueArgs& a, std::ostream& out, std::ostream& err) {
  RunConfig cfg = load_config(a.config);
  if (a.r_max) cfg.solver.grid.r_max = *a.r_max;
  if (a.r_min) cfg.solver.grid.r_min = *a.r_min;
  if (a.r_steps) cfg.solver.grid.steps = *a.r_steps;
  if (a.modes) cfg.solver.modes = *a.modes;
  if (a.mode) cfg.solver.mode = parse_solve_mode(*a.mode);
  if (a.out_dir) cfg.out_dir = *a.out_dir;
  cfg.solver.validate();
  if (a.dump) {
    out << dump_config(cfg);
    return kExitOk;
  }

  const VortexSystem sys = cfg.system();
  if (sys.total() == 0.0) {
    throw ZeroTotalVorticity("the family exists only when the total vorticity is nonzero");
  }
  const Domain domain = cfg.make_domain();
  const RelativeEquilibrium seed = cfg.seed_equilibrium();
  const RelativeEquilibrium normalized = normalize_period(seed);
  const LoopFrame frame = make_frame(normalized, cfg.solver.modes);
  const ContinuationPath path = continue_path(sys, domain, cfg.anchor, frame, cfg.solver);

  std::ostringstream table;
  table << std::setprecision(10);
  table << "r,vnorm,residual_grad,phase_defect,iterations,spectral_tail\n";
  std::size_t index = 0;
  for (const ReducedSolution& s : path.entries) {
    table << s.r << "," << s.vnorm << "," << s.residual_grad << "," << s.phase_defect << "," << s.iterations << ","
          << s.spectral_tail << "\n";
    write_orbit((std::filesystem::path(cfg.out_dir) / orbit_name(index++, s.r)).string(),
                make_record(sys, domain, cfg.anchor, seed.omega, s));
  }
  write_file_atomic((std::filesystem::path(cfg.out_dir) / "summary.csv").string(), table.str());
  if (cfg.svg && !path.entries.empty()) {
    const ReducedSolution& s = path.entries.front();
    const PhysicalOrbit orbit = unrescale(domain, cfg.anchor, s.r, s.u, std::max(cfg.samples, 256));
    write_file_atomic((std::filesystem::path(cfg.out_dir) / "orbit.svg").string(),
                      trajectory_svg(domain, orbit.samples));
  }

  out << table.str();
  for (const PathFailure& f : path.failures) err << "r = " << f.r << " failed: " << f.reason << "\n";
  out << std::setprecision(6) << "converged " << path.entries.size() << "/" << path.grid.size()
      << "  empirical_r0 = " << path.empirical_r0 << "\n";
  return path.converged_fraction() >= 0.8 ? kExitOk : kExitFailure;
}

// --------------------------------------------------------------------------

struct ValidateArgs {
  std::string orbit;
  double rtol = 1e-10;
  double threshold = 1e-6;
  int samples = 64;
  std::optional<std::string> svg, csv;
};

int cmd_validate(const ValidateArgs& a, std::ostream& out) {
  const OrbitRecord rec = read_orbit(a.orbit);
  const VortexSystem sys(rec.gammas);
  const PhysicalOrbit orbit = unrescale(rec.domain, rec.anchor, rec.r, rec.loop, a.samples);
  const OrbitCheck check = validate_orbit(sys, rec.domain, orbit, a.rtol);
  if (a.csv) write_file_atomic(*a.csv, trajectory_csv(check.trajectory));
  if (a.svg) write_file_atomic(*a.svg, trajectory_svg(rec.domain, check.trajectory.states));
  out << std::setprecision(6) << "r = " << rec.r << "  period = " << orbit.period << "\n"
      << "closure_error = " << check.closure_error << "\n"
      << "max_pointwise_defect = " << check.max_pointwise_defect << "\n"
      << "min_separation = " << check.trajectory.min_separation << "\n";
  const bool ok = check.closure_error <= a.threshold;
  out << (ok ? "PASS" : "FAIL") << " (threshold " << a.threshold << ")\n";
  return ok ? kExitOk : kExitFailure;
}

// --------------------------------------------------------------------------

struct SimulateArgs {
  std::string config;
  std::optional<std::string> z0;
  std::optional<double> time;
  std::string flow = "physical";
  double r = 0.1;
  double rtol = 1e-10;
  std::optional<std::string> csv, svg;
};

int cmd_simulate(const SimulateArgs& a, std::ostream& out) {
  const RunConfig cfg = load_config(a.config);
  const VortexSystem sys = cfg.system();
  const Domain domain = cfg.make_domain();

  Flow flow;
  if (a.flow == "plane") {
    flow = Flow::plane();
  } else if (a.flow == "rescaled") {
    if (!(a.r > 0.0)) throw InvalidArgument("--r must be positive");
    flow = Flow::rescaled(a.r, cfg.anchor);
  } else if (a.flow == "physical") {
    flow = Flow::physical();
  } else {
    throw InvalidArgument("--flow must be physical, rescaled or plane");
  }

  std::optional<RelativeEquilibrium> seed;
  Vec z0;
  if (a.z0) {
    const std::vector<double> v = parse_list(*a.z0);
    z0 = Eigen::Map<const Vec>(v.data(), static_cast<Eigen::Index>(v.size()));
    if (z0.size() != sys.dim()) throw InvalidArgument("--z0 needs 2N coordinates");
  } else {
    // Default start: the seed in the frame of the chosen flow. Rescaled and
    // physical runs use the normalized seed, the latter placed at a0 + r Z.
    seed = cfg.seed_equilibrium();
    z0 = seed->z;
    if (flow.kind != Flow::Kind::Plane) {
      seed = normalize_period(*seed);
      z0 = seed->z;
    }
    if (flow.kind == Flow::Kind::Physical) {
      if (!(a.r > 0.0)) throw InvalidArgument("--r must be positive");
      z0 = lifted(sys.n(), cfg.anchor) + a.r * seed->z;
    }
  }
  double T = 0.0;
  if (a.time) {
    T = *a.time;
  } else if (seed) {
    T = seed->period();
    if (flow.kind == Flow::Kind::Physical) T *= a.r * a.r;
  } else {
    throw InvalidArgument("--time is required with --z0");
  }

  const Trajectory traj = integrate(sys, domain, flow, z0, T, a.rtol, a.rtol * 1e-2);
  const InvariantReport inv = invariants_along(sys, domain, flow, traj);
  const std::string csv_path = a.csv.value_or((std::filesystem::path(cfg.out_dir) / "trajectory.csv").string());
  write_file_atomic(csv_path, trajectory_csv(traj));
  if (a.svg) write_file_atomic(*a.svg, trajectory_svg(domain, traj.states));

  out << std::setprecision(6) << "steps accepted = " << traj.accepted << ", rejected = " << traj.rejected << "\n"
      << "final time = " << traj.times.back() << "\n"
      << "distance to start = " << (traj.states.back() - z0).norm() << "\n"
      << "min_separation = " << traj.min_separation << "\n"
      << "energy_drift = " << inv.energy_drift << "\n";
  if (inv.center_of_vorticity_drift) {
    out << "center_of_vorticity_drift = " << *inv.center_of_vorticity_drift << "\n"
        << "angular_impulse_drift = " << *inv.angular_impulse_drift << "\n";
  }
  out << "trajectory written to " << csv_path << "\n";
  return kExitOk;
}

// --------------------------------------------------------------------------

struct RobinArgs {
  std::string domain;
  std::string guess = "0,0";
  std::string A = "1,0,1";
};

int cmd_robin(const RobinArgs& a, std::ostream& out) {
  Mat2 A = Mat2::Identity();
  const std::vector<double> entries = parse_list(a.A);
  if (entries.size() != 3) throw InvalidArgument("--A expects a11,a12,a22");
  A << entries[0], entries[1], entries[1], entries[2];
  const Domain domain = parse_domain(a.domain, A);
  const Vec2 guess = parse_point(a.guess);
  if (!domain.contains(guess)) throw InvalidArgument("--guess lies outside the domain");

  const CriticalPoint cp = find_critical_point_h(domain, guess);
  Eigen::SelfAdjointEigenSolver<Mat2> eig(cp.hessian);
  out << std::setprecision(12) << "a0 = (" << cp.point.x() << ", " << cp.point.y() << ")\n"
      << "h(a0) = " << domain.h(cp.point) << "\n"
      << "hessian = [[" << cp.hessian(0, 0) << ", " << cp.hessian(0, 1) << "], [" << cp.hessian(1, 0) << ", "
      << cp.hessian(1, 1) << "]]\n"
      << "eigenvalues = " << eig.eigenvalues()(0) << ", " << eig.eigenvalues()(1) << "\n"
      << "iterations = " << cp.iterations << "\n"
      << "verdict: " << (cp.nondegenerate ? "nondegenerate" : "degenerate") << "\n";
  return cp.nondegenerate ? kExitOk : kExitFailure;
}

bool is_usage_error(const Error& e) {
  return dynamic_cast<const InvalidArgument*>(&e) || dynamic_cast<const ParseError*>(&e) ||
         dynamic_cast<const DimensionMismatch*>(&e) || dynamic_cast<const ZeroTotalVorticity*>(&e) ||
         dynamic_cast<const VorticityMismatch*>(&e) || dynamic_cast<const AliasWarning*>(&e);
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Periodic orbits of point vortices near a Robin critical point"};
  app.require_subcommand(1);

  EquilibriumArgs eq;
  auto* sub_eq = app.add_subcommand("equilibrium", "Build a relative equilibrium and check nondegeneracy");
  sub_eq->add_option("--type", eq.type, "pair | triangle | thomson")->required();
  sub_eq->add_option("--gamma", eq.gamma, "vorticities, comma separated")->required();
  sub_eq->add_option("--n", eq.n, "number of vortices (thomson)");
  sub_eq->add_option("--sep", eq.sep, "pair separation");
  sub_eq->add_option("--side", eq.side, "triangle side");
  sub_eq->add_option("--radius", eq.radius, "polygon radius");
  sub_eq->add_flag("--check", eq.check, "compute Floquet multipliers");

  ContinueArgs co;
  auto* sub_co = app.add_subcommand("continue", "Continue the orbit family over the r-grid");
  sub_co->add_option("--config", co.config, "run configuration")->required();
  sub_co->add_option("--r-max", co.r_max);
  sub_co->add_option("--r-min", co.r_min);
  sub_co->add_option("--r-steps", co.r_steps);
  sub_co->add_option("--modes", co.modes);
  sub_co->add_option("--mode", co.mode, "fixedpoint | newton");
  sub_co->add_option("--out", co.out_dir, "output directory");
  sub_co->add_flag("--dump-config", co.dump, "print the effective configuration and exit");

  ValidateArgs va;
  auto* sub_va = app.add_subcommand("validate", "Integrate an orbit file over one period");
  sub_va->add_option("--orbit", va.orbit)->required();
  sub_va->add_option("--rtol", va.rtol)->capture_default_str();
  sub_va->add_option("--threshold", va.threshold, "closure error bound")->capture_default_str();
  sub_va->add_option("--samples", va.samples)->capture_default_str();
  sub_va->add_option("--svg", va.svg);
  sub_va->add_option("--csv", va.csv);

  SimulateArgs si;
  auto* sub_si = app.add_subcommand("simulate", "Integrate the vortex equations");
  sub_si->add_option("--config", si.config)->required();
  sub_si->add_option("--z0", si.z0, "x1,y1,...,xN,yN (default: seed equilibrium)");
  sub_si->add_option("--time", si.time, "final time (default: seed period)");
  sub_si->add_option("--flow", si.flow, "physical | rescaled | plane")->capture_default_str();
  sub_si->add_option("--r", si.r, "blow-up scale (rescaled flow, physical default start)")->capture_default_str();
  sub_si->add_option("--rtol", si.rtol)->capture_default_str();
  sub_si->add_option("--csv", si.csv);
  sub_si->add_option("--svg", si.svg);

  RobinArgs ro;
  auto* sub_ro = app.add_subcommand("robin", "Locate a critical point of the Robin function");
  sub_ro->add_option("--domain", ro.domain, "disk | halfplane | synthetic | plane")->required();
  sub_ro->add_option("--guess", ro.guess, "x,y")->capture_default_str();
  sub_ro->add_option("--A", ro.A, "a11,a12,a22 (synthetic)")->capture_default_str();

  std::vector<std::string> storage{"vorb"};
  storage.insert(storage.end(), args.begin(), args.end());
  std::vector<char*> argv;
  for (std::string& s : storage) argv.push_back(s.data());

  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (*sub_eq) return cmd_equilibrium(eq, out);
    if (*sub_co) return cmd_continue(co, out, err);
    if (*sub_va) return cmd_validate(va, out);
    if (*sub_si) return cmd_simulate(si, out);
    if (*sub_ro) return cmd_robin(ro, out);
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return is_usage_error(e) ? kExitUsage : kExitFailure;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitFailure;
  }
  return kExitUsage;
}

}  // namespace vorb
