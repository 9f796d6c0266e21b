// Direct time integration of the vortex equations with validity guards and
// first-integral monitoring.

#ifndef VORB_DYNAMICS_HPP
#define VORB_DYNAMICS_HPP

#include <optional>
#include <vector>

#include "vorb/core.hpp"
#include "vorb/reduction.hpp"

namespace vorb {

/// Minimum pairwise distance and boundary distance kept by the integrator.
inline constexpr double kCollisionGuard = 1e-9;

struct Trajectory {
  std::vector<double> times;  // monotone in the direction of integration
  std::vector<Vec> states;
  double min_separation = 0.0;
  int accepted = 0;
  int rejected = 0;
  /// States at the requested checkpoints, in the order given.
  std::vector<Vec> checkpoints;
};

/// Adaptive Dormand-Prince 5(4) from t = 0 to t = T (T may be negative).
/// Steps are cut to land exactly on every time in `checkpoints`.
Trajectory integrate(const VortexSystem& sys, const Domain& domain, const Flow& flow, const Vec& z0,
                     double T, double rtol = 1e-10, double atol = 1e-12,
                     const std::vector<double>& checkpoints = {});

struct InvariantReport {
  double energy_drift = 0.0;
  /// Only on the plane, where translations and rotations are symmetries.
  std::optional<double> center_of_vorticity_drift;
  std::optional<double> angular_impulse_drift;
};

InvariantReport invariants_along(const VortexSystem& sys, const Domain& domain, const Flow& flow,
                                 const Trajectory& traj);

struct OrbitCheck {
  double closure_error = 0.0;
  double max_pointwise_defect = 0.0;
  Trajectory trajectory;
};

/// Integrates the physical system from the first sample over one period and
/// compares with the remaining samples.
OrbitCheck validate_orbit(const VortexSystem& sys, const Domain& domain, const PhysicalOrbit& orbit,
                          double rtol = 1e-10);

}  // namespace vorb

#endif  // VORB_DYNAMICS_HPP
