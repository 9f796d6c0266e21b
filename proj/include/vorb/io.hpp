// Orbit files, trajectory CSV, SVG sketches and run configuration files.

#ifndef VORB_IO_HPP
#define VORB_IO_HPP

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

#include "vorb/core.hpp"
#include "vorb/dynamics.hpp"
#include "vorb/reduction.hpp"

namespace vorb {

inline constexpr int kOrbitSchemaVersion = 1;

struct OrbitRecord {
  std::vector<double> gammas;
  Domain domain = Domain::plane();
  Vec2 anchor = Vec2::Zero();
  double r = 0.0;
  double omega_seed = 1.0;
  Loop loop;
  double residual_grad = 0.0;
  double phase_defect = 0.0;
  double vnorm = 0.0;
  int iterations = 0;
};

OrbitRecord make_record(const VortexSystem& sys, const Domain& domain, const Vec2& anchor, double omega_seed,
                        const ReducedSolution& solution);

nlohmann::json orbit_to_json(const OrbitRecord& record);
/// Throws ParseError naming the offending field.
OrbitRecord orbit_from_json(const nlohmann::json& doc);

void write_orbit(const std::string& path, const OrbitRecord& record);
OrbitRecord read_orbit(const std::string& path);

/// Writes to a temporary sibling and renames it over `path`.
void write_file_atomic(const std::string& path, const std::string& contents);

/// Header t,x1,y1,...,xN,yN; 17 significant digits.
void write_trajectory_csv(std::ostream& out, const Trajectory& traj);
std::string trajectory_csv(const Trajectory& traj);

/// One polyline per vortex plus the domain boundary (unit circle or real axis).
std::string trajectory_svg(const Domain& domain, const std::vector<Vec>& states);

enum class SeedKind { Pair, Triangle, Thomson };

struct RunConfig {
  std::vector<double> gammas;
  std::string domain = "disk";        // plane | disk | halfplane | synthetic
  Mat2 quadratic = Mat2::Identity();  // synthetic only
  Vec2 anchor = Vec2::Zero();
  SeedKind seed = SeedKind::Pair;
  double seed_size = 2.0;  // separation, side or radius
  SolverParams solver;
  std::string out_dir = "out";
  int samples = 64;
  bool svg = false;

  VortexSystem system() const { return VortexSystem(gammas); }
  Domain make_domain() const;
  /// Seed equilibrium before period normalization.
  RelativeEquilibrium seed_equilibrium() const;
};

const char* to_string(SeedKind kind);
SeedKind parse_seed_kind(const std::string& text);
Domain parse_domain(const std::string& name, const Mat2& quadratic = Mat2::Identity());

/// INI-style text with sections [system], [domain], [solver], [output].
/// Errors are reported as "<source>:<line>: <section>.<key>: <reason>".
RunConfig parse_config(std::istream& in, const std::string& source = "<config>");
RunConfig load_config(const std::string& path);
std::string dump_config(const RunConfig& config);

/// Comma-separated reals, e.g. "1,2,-0.5".
std::vector<double> parse_list(const std::string& text);

}  // namespace vorb

#endif  // VORB_IO_HPP
