#include "vorb/dynamics.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include <boost/numeric/odeint.hpp>

namespace vorb {

namespace {

namespace odeint = boost::numeric::odeint;
using State = std::vector<double>;

Vec to_vec(const State& x) { return Eigen::Map<const Vec>(x.data(), static_cast<Eigen::Index>(x.size())); }

State to_state(const Vec& z) { return State(z.data(), z.data() + z.size()); }

enum class Verdict { Ok, Collision, Boundary };

double boundary_gap(const Domain& domain, const Flow& flow, const Vec& z) {
  if (domain.kind() == DomainKind::Plane || flow.kind == Flow::Kind::Plane) {
    return std::numeric_limits<double>::infinity();
  }
  double gap = std::numeric_limits<double>::infinity();
  for (int k = 0; k < z.size() / 2; ++k) {
    const Vec2 p = flow.kind == Flow::Kind::Rescaled ? Vec2(flow.anchor + flow.r * block(z, k)) : block(z, k);
    gap = std::min(gap, domain.contains(p) ? domain.boundary_distance(p) : -1.0);
  }
  return gap;
}

Verdict check(const Domain& domain, const Flow& flow, const Vec& z) {
  if (!z.allFinite()) return Verdict::Collision;
  if (!flow_state_valid(domain, flow, z) || boundary_gap(domain, flow, z) <= kCollisionGuard) {
    return Verdict::Boundary;
  }
  const double scale = flow.kind == Flow::Kind::Rescaled ? flow.r : 1.0;
  if (scale * min_separation(z) <= kCollisionGuard) return Verdict::Collision;
  return Verdict::Ok;
}

// Raised from inside the right-hand side when a stage leaves the valid set;
// the step is then treated like a rejected one.
struct InvalidStage {
  Verdict verdict;
};

}  // namespace

Trajectory integrate(const VortexSystem& sys, const Domain& domain, const Flow& flow, const Vec& z0,
                     double T, double rtol, double atol, const std::vector<double>& checkpoints) {
  if (z0.size() != sys.dim()) throw DimensionMismatch("initial state has the wrong length");
  if (!(rtol > 0.0) || !(atol > 0.0)) throw InvalidArgument("tolerances must be positive");
  if (!std::isfinite(T)) throw InvalidArgument("integration time must be finite");
  if (check(domain, flow, z0) != Verdict::Ok) throw InvalidArgument("initial state is not admissible");

  const double direction = T < 0.0 ? -1.0 : 1.0;
  const double span = std::abs(T);
  const double min_step = 1e-12 * span;
  const double sep0 = min_separation(z0);
  const double gap0 = boundary_gap(domain, flow, z0);

  std::vector<double> stops;
  for (double c : checkpoints) {
    if (c * direction < 0.0 || std::abs(c) > span) throw InvalidArgument("checkpoint outside [0, T]");
    stops.push_back(std::abs(c));
  }
  std::vector<std::size_t> order(stops.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return stops[a] < stops[b]; });

  Trajectory traj;
  traj.times.push_back(0.0);
  traj.states.push_back(z0);
  traj.min_separation = min_separation(z0);
  traj.checkpoints.assign(stops.size(), Vec());
  std::size_t next_stop = 0;
  auto record_stops = [&](double s, const Vec& z) {
    while (next_stop < order.size() && stops[order[next_stop]] <= s) traj.checkpoints[order[next_stop++]] = z;
  };
  record_stops(0.0, z0);
  if (span == 0.0) return traj;

  // Integrate in s = |t| with the field multiplied by the direction.
  auto rhs = [&](const State& x, State& dxdt, double /*s*/) {
    const Vec z = to_vec(x);
    const Verdict v = check(domain, flow, z);
    if (v != Verdict::Ok) throw InvalidStage{v};
    Vec f;
    try {
      f = direction * vortex_rhs(sys, domain, flow, z);
    } catch (const CollisionError&) {
      throw InvalidStage{Verdict::Collision};
    } catch (const Error&) {
      throw InvalidStage{Verdict::Boundary};
    }
    dxdt.assign(f.data(), f.data() + f.size());
  };

  auto stepper = odeint::make_controlled<odeint::runge_kutta_dopri5<State>>(atol, rtol);
  State x = to_state(z0);
  double s = 0.0;
  double dt = std::min(span, 1e-3 * span);

  auto fail = [&](Verdict v, const std::string& why) {
    std::ostringstream msg;
    msg << why << " at t = " << direction * s;
    if (v == Verdict::Collision) throw CollisionApproach(msg.str());
    if (v == Verdict::Boundary) throw BoundaryApproach(msg.str());
    throw MinStepReached(msg.str());
  };

  while (s < span) {
    double target = span;
    if (next_stop < order.size()) target = std::min(target, stops[order[next_stop]]);
    const bool clipped = dt >= target - s;
    if (clipped) dt = target - s;

    const State saved = x;
    const double s_saved = s;
    Verdict verdict = Verdict::Ok;
    odeint::controlled_step_result result = odeint::fail;
    try {
      result = stepper.try_step(rhs, x, s, dt);
    } catch (const InvalidStage& bad) {
      verdict = bad.verdict;
    }
    if (verdict == Verdict::Ok && result == odeint::success) verdict = check(domain, flow, to_vec(x));

    if (verdict != Verdict::Ok) {
      x = saved;
      s = s_saved;
      dt *= 0.5;
      stepper.reset();
      ++traj.rejected;
      if (dt < min_step) fail(verdict, "step size fell below the minimum near an inadmissible state");
      continue;
    }
    if (result != odeint::success) {
      ++traj.rejected;
      if (dt < min_step) {
        // A shrinking step next to a near-collision or the wall is attributed
        // to it when the gap has closed by three orders of magnitude.
        const Vec z = to_vec(x);
        Verdict cause = Verdict::Ok;
        if (min_separation(z) < 1e-3 * sep0) cause = Verdict::Collision;
        else if (boundary_gap(domain, flow, z) < 1e-3 * gap0) cause = Verdict::Boundary;
        fail(cause, "step size fell below the minimum");
      }
      continue;
    }
    if (clipped) s = target;  // remove roundoff so stops are hit exactly
    ++traj.accepted;
    const Vec z = to_vec(x);
    traj.times.push_back(direction * s);
    traj.states.push_back(z);
    traj.min_separation = std::min(traj.min_separation, min_separation(z));
    record_stops(s, z);
  }
  return traj;
}

InvariantReport invariants_along(const VortexSystem& sys, const Domain& domain, const Flow& flow,
                                 const Trajectory& traj) {
  InvariantReport report;
  if (traj.states.empty()) return report;
  const bool plane = flow.kind == Flow::Kind::Plane || domain.kind() == DomainKind::Plane;
  if (plane) {
    report.center_of_vorticity_drift = 0.0;
    report.angular_impulse_drift = 0.0;
  }
  auto impulse = [&](const Vec& z) {
    double sum = 0.0;
    for (int k = 0; k < sys.n(); ++k) sum += sys.gamma(k) * block(z, k).squaredNorm();
    return sum;
  };
  const Vec& z0 = traj.states.front();
  const double e0 = flow_energy(sys, domain, flow, z0);
  const Vec2 c0 = center_of_vorticity_sum(sys, z0);
  const double i0 = impulse(z0);
  for (const Vec& z : traj.states) {
    report.energy_drift = std::max(report.energy_drift, std::abs(flow_energy(sys, domain, flow, z) - e0));
    if (plane) {
      *report.center_of_vorticity_drift =
          std::max(*report.center_of_vorticity_drift, (center_of_vorticity_sum(sys, z) - c0).norm());
      *report.angular_impulse_drift = std::max(*report.angular_impulse_drift, std::abs(impulse(z) - i0));
    }
  }
  return report;
}

OrbitCheck validate_orbit(const VortexSystem& sys, const Domain& domain, const PhysicalOrbit& orbit,
                          double rtol) {
  if (orbit.samples.empty()) throw InvalidArgument("orbit has no samples");
  if (orbit.samples.size() != orbit.times.size()) throw DimensionMismatch("orbit times and samples differ in length");
  const Vec& start = orbit.samples.front();
  const double scale = std::max(start.cwiseAbs().maxCoeff(), 1e-300);
  std::vector<double> stops(orbit.times.begin(), orbit.times.end());
  for (double& t : stops) t -= orbit.times.front();

  OrbitCheck out;
  out.trajectory = integrate(sys, domain, Flow::physical(), start, orbit.period, rtol, rtol * scale, stops);
  out.closure_error = (out.trajectory.states.back() - start).norm();
  for (std::size_t i = 0; i < stops.size(); ++i) {
    out.max_pointwise_defect =
        std::max(out.max_pointwise_defect, (out.trajectory.checkpoints[i] - orbit.samples[i]).norm());
  }
  return out;
}

}  // namespace vorb
