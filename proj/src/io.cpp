#include "vorb/io.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <map>
#include <set>
#include <sstream>

#include <boost/algorithm/string.hpp>
#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

namespace vorb {

using nlohmann::json;

OrbitRecord make_record(const VortexSystem& sys, const Domain& domain, const Vec2& anchor, double omega_seed,
                        const ReducedSolution& solution) {
  OrbitRecord rec;
  rec.gammas = sys.gammas();
  rec.domain = domain;
  rec.anchor = anchor;
  rec.r = solution.r;
  rec.omega_seed = omega_seed;
  rec.loop = solution.u;
  rec.residual_grad = solution.residual_grad;
  rec.phase_defect = solution.phase_defect;
  rec.vnorm = solution.vnorm;
  rec.iterations = solution.iterations;
  return rec;
}

json orbit_to_json(const OrbitRecord& rec) {
  json domain_params = json::object();
  if (rec.domain.kind() == DomainKind::SyntheticQuadratic) {
    const Mat2& A = rec.domain.quadratic();
    domain_params["A"] = {{A(0, 0), A(0, 1)}, {A(1, 0), A(1, 1)}};
  }
  json coeffs = json::array();
  for (int i = 0; i < rec.loop.coeffs().rows(); ++i) {
    json row = json::array();
    for (int c = 0; c < rec.loop.coeffs().cols(); ++c) row.push_back(rec.loop.coeffs()(i, c));
    coeffs.push_back(std::move(row));
  }
  return {
      {"schema_version", kOrbitSchemaVersion},
      {"system", {{"gammas", rec.gammas}}},
      {"domain", {{"variant", rec.domain.name()}, {"params", domain_params}}},
      {"a0", {rec.anchor.x(), rec.anchor.y()}},
      {"r", rec.r},
      {"omega_seed", rec.omega_seed},
      {"loop", {{"n", rec.loop.n()}, {"modes", rec.loop.modes()}, {"coeffs", coeffs}}},
      {"diagnostics",
       {{"residual_grad", rec.residual_grad},
        {"phase_defect", rec.phase_defect},
        {"vnorm", rec.vnorm},
        {"iterations", rec.iterations}}},
  };
}

namespace {

const json& field(const json& obj, const char* key, const std::string& where) {
  if (!obj.is_object() || !obj.contains(key)) throw ParseError("missing field '" + where + key + "'");
  return obj.at(key);
}

double real(const json& obj, const char* key, const std::string& where) {
  const json& v = field(obj, key, where);
  if (!v.is_number()) throw ParseError("field '" + where + key + "' is not a number");
  return v.get<double>();
}

int integer(const json& obj, const char* key, const std::string& where) {
  const json& v = field(obj, key, where);
  if (!v.is_number_integer()) throw ParseError("field '" + where + key + "' is not an integer");
  return v.get<int>();
}

std::vector<double> reals(const json& v, const std::string& name) {
  if (!v.is_array()) throw ParseError("field '" + name + "' is not an array");
  std::vector<double> out;
  for (const json& x : v) {
    if (!x.is_number()) throw ParseError("field '" + name + "' holds a non-number");
    out.push_back(x.get<double>());
  }
  return out;
}

}  // namespace

OrbitRecord orbit_from_json(const json& doc) {
  if (!doc.is_object()) throw ParseError("orbit document is not a JSON object");
  const int version = integer(doc, "schema_version", "");
  if (version != kOrbitSchemaVersion) {
    throw ParseError("unsupported schema_version " + std::to_string(version));
  }
  OrbitRecord rec;
  rec.gammas = reals(field(field(doc, "system", ""), "gammas", "system."), "system.gammas");

  const json& domain = field(doc, "domain", "");
  const json& variant = field(domain, "variant", "domain.");
  if (!variant.is_string()) throw ParseError("field 'domain.variant' is not a string");
  Mat2 A = Mat2::Identity();
  if (variant.get<std::string>() == "synthetic") {
    const json& rows = field(field(domain, "params", "domain."), "A", "domain.params.");
    if (!rows.is_array() || rows.size() != 2) throw ParseError("field 'domain.params.A' must be 2x2");
    for (int i = 0; i < 2; ++i) {
      const std::vector<double> row = reals(rows[i], "domain.params.A");
      if (row.size() != 2) throw ParseError("field 'domain.params.A' must be 2x2");
      A(i, 0) = row[0];
      A(i, 1) = row[1];
    }
  }
  try {
    rec.domain = parse_domain(variant.get<std::string>(), A);
  } catch (const InvalidArgument& e) {
    throw ParseError(std::string("field 'domain.variant': ") + e.what());
  }

  const std::vector<double> a0 = reals(field(doc, "a0", ""), "a0");
  if (a0.size() != 2) throw ParseError("field 'a0' must have two entries");
  rec.anchor = Vec2(a0[0], a0[1]);
  rec.r = real(doc, "r", "");
  rec.omega_seed = real(doc, "omega_seed", "");

  const json& loop = field(doc, "loop", "");
  const int n = integer(loop, "n", "loop.");
  const int modes = integer(loop, "modes", "loop.");
  if (n < 1 || modes < 0) throw ParseError("field 'loop' has invalid n or modes");
  if (static_cast<int>(rec.gammas.size()) != n) throw ParseError("loop.n disagrees with system.gammas");
  const json& coeffs = field(loop, "coeffs", "loop.");
  if (!coeffs.is_array() || static_cast<int>(coeffs.size()) != 2 * n) {
    throw ParseError("field 'loop.coeffs' must have 2n rows");
  }
  Mat C(2 * n, 2 * modes + 1);
  for (int i = 0; i < 2 * n; ++i) {
    const std::vector<double> row = reals(coeffs[i], "loop.coeffs");
    if (static_cast<int>(row.size()) != 2 * modes + 1) throw ParseError("field 'loop.coeffs' has a short row");
    for (int c = 0; c <= 2 * modes; ++c) C(i, c) = row[c];
  }
  if (!C.allFinite()) throw ParseError("field 'loop.coeffs' holds non-finite values");
  rec.loop = Loop(std::move(C));

  const json& diag = field(doc, "diagnostics", "");
  rec.residual_grad = real(diag, "residual_grad", "diagnostics.");
  rec.phase_defect = real(diag, "phase_defect", "diagnostics.");
  rec.vnorm = real(diag, "vnorm", "diagnostics.");
  rec.iterations = integer(diag, "iterations", "diagnostics.");
  if (!(rec.r > 0.0)) throw ParseError("field 'r' must be positive");
  return rec;
}

void write_file_atomic(const std::string& path, const std::string& contents) {
  namespace fs = std::filesystem;
  const fs::path target(path);
  if (target.has_parent_path()) fs::create_directories(target.parent_path());
  fs::path tmp = target;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw InvalidArgument("cannot open '" + tmp.string() + "' for writing");
    out << contents;
    out.flush();
    if (!out) throw InvalidArgument("failed writing '" + tmp.string() + "'");
  }
  std::error_code ec;
  fs::rename(tmp, target, ec);
  if (ec) {
    fs::remove(tmp);
    throw InvalidArgument("cannot rename onto '" + path + "': " + ec.message());
  }
}

void write_orbit(const std::string& path, const OrbitRecord& record) {
  write_file_atomic(path, orbit_to_json(record).dump(2) + "\n");
}

OrbitRecord read_orbit(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open orbit file '" + path + "'");
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::exception& e) {
    throw ParseError("'" + path + "' is not valid JSON: " + e.what());
  }
  return orbit_from_json(doc);
}

void write_trajectory_csv(std::ostream& out, const Trajectory& traj) {
  const int n = traj.states.empty() ? 0 : static_cast<int>(traj.states.front().size() / 2);
  out << "t";
  for (int k = 1; k <= n; ++k) out << ",x" << k << ",y" << k;
  out << "\n" << std::setprecision(17);
  for (std::size_t i = 0; i < traj.states.size(); ++i) {
    out << traj.times[i];
    for (Eigen::Index j = 0; j < traj.states[i].size(); ++j) out << "," << traj.states[i](j);
    out << "\n";
  }
}

std::string trajectory_csv(const Trajectory& traj) {
  std::ostringstream out;
  write_trajectory_csv(out, traj);
  return out.str();
}

std::string trajectory_svg(const Domain& domain, const std::vector<Vec>& states) {
  if (states.empty()) throw InvalidArgument("nothing to draw");
  const int n = static_cast<int>(states.front().size() / 2);
  double xmin = 1e300, xmax = -1e300, ymin = 1e300, ymax = -1e300;
  for (const Vec& z : states) {
    for (int k = 0; k < n; ++k) {
      xmin = std::min(xmin, z(2 * k));
      xmax = std::max(xmax, z(2 * k));
      ymin = std::min(ymin, z(2 * k + 1));
      ymax = std::max(ymax, z(2 * k + 1));
    }
  }
  if (domain.kind() == DomainKind::UnitDisk) {
    xmin = std::min(xmin, -1.0);
    xmax = std::max(xmax, 1.0);
    ymin = std::min(ymin, -1.0);
    ymax = std::max(ymax, 1.0);
  } else if (domain.kind() == DomainKind::HalfPlane) {
    ymin = std::min(ymin, 0.0);
  }
  const double span = std::max({xmax - xmin, ymax - ymin, 1e-12});
  const double pad = 0.05 * span;
  xmin -= pad;
  ymin -= pad;
  const double size = span + 2 * pad;
  const double px = 600.0;
  auto X = [&](double x) { return (x - xmin) / size * px; };
  auto Y = [&](double y) { return px - (y - ymin) / size * px; };

  static const char* colors[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b"};
  std::ostringstream svg;
  svg << std::setprecision(6);
  svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << px << "\" height=\"" << px
      << "\" viewBox=\"0 0 " << px << " " << px << "\">\n";
  svg << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  if (domain.kind() == DomainKind::UnitDisk) {
    svg << "<circle cx=\"" << X(0) << "\" cy=\"" << Y(0) << "\" r=\"" << px / size
        << "\" fill=\"none\" stroke=\"black\" stroke-width=\"1\"/>\n";
  } else if (domain.kind() == DomainKind::HalfPlane) {
    svg << "<line x1=\"0\" y1=\"" << Y(0) << "\" x2=\"" << px << "\" y2=\"" << Y(0)
        << "\" stroke=\"black\" stroke-width=\"1\"/>\n";
  }
  for (int k = 0; k < n; ++k) {
    svg << "<polyline fill=\"none\" stroke=\"" << colors[k % 6] << "\" stroke-width=\"1.5\" points=\"";
    for (const Vec& z : states) svg << X(z(2 * k)) << "," << Y(z(2 * k + 1)) << " ";
    svg << "\"/>\n";
    svg << "<circle cx=\"" << X(states.front()(2 * k)) << "\" cy=\"" << Y(states.front()(2 * k + 1))
        << "\" r=\"3\" fill=\"" << colors[k % 6] << "\"/>\n";
  }
  svg << "</svg>\n";
  return svg.str();
}

// ---------------------------------------------------------------------------
// Run configuration

const char* to_string(SeedKind kind) {
  switch (kind) {
    case SeedKind::Pair: return "pair";
    case SeedKind::Triangle: return "triangle";
    case SeedKind::Thomson: return "thomson";
  }
  return "pair";
}

SeedKind parse_seed_kind(const std::string& text) {
  if (text == "pair") return SeedKind::Pair;
  if (text == "triangle") return SeedKind::Triangle;
  if (text == "thomson") return SeedKind::Thomson;
  throw InvalidArgument("unknown seed '" + text + "' (expected pair, triangle or thomson)");
}

Domain parse_domain(const std::string& name, const Mat2& quadratic) {
  if (name == "plane") return Domain::plane();
  if (name == "disk") return Domain::unit_disk();
  if (name == "halfplane") return Domain::half_plane();
  if (name == "synthetic") return Domain::synthetic(quadratic);
  throw InvalidArgument("unknown domain '" + name + "' (expected plane, disk, halfplane or synthetic)");
}

Domain RunConfig::make_domain() const { return parse_domain(domain, quadratic); }

RelativeEquilibrium RunConfig::seed_equilibrium() const {
  switch (seed) {
    case SeedKind::Pair:
      if (gammas.size() != 2) throw InvalidArgument("pair seed needs two vorticities");
      return make_pair(gammas[0], gammas[1], seed_size);
    case SeedKind::Triangle:
      if (gammas.size() != 3) throw InvalidArgument("triangle seed needs three vorticities");
      return make_triangle(gammas[0], gammas[1], gammas[2], seed_size);
    case SeedKind::Thomson:
      if (gammas.size() < 2) throw InvalidArgument("Thomson seed needs at least two vortices");
      for (double g : gammas) {
        if (g != gammas.front()) throw InvalidArgument("Thomson seed needs equal vorticities");
      }
      return make_thomson(static_cast<int>(gammas.size()), gammas.front(), seed_size);
  }
  throw InvalidArgument("unknown seed");
}

std::vector<double> parse_list(const std::string& text) {
  std::vector<std::string> parts;
  boost::split(parts, text, boost::is_any_of(","));
  std::vector<double> out;
  for (std::string& p : parts) {
    boost::trim(p);
    if (p.empty()) throw InvalidArgument("empty entry in list '" + text + "'");
    std::size_t used = 0;
    double v = 0.0;
    try {
      v = std::stod(p, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used != p.size() || !std::isfinite(v)) throw InvalidArgument("'" + p + "' is not a finite number");
    out.push_back(v);
  }
  return out;
}

namespace {

namespace pt = boost::property_tree;

// Line numbers of "section.key" entries, for error messages.
std::map<std::string, int> key_lines(const std::string& text) {
  std::map<std::string, int> lines;
  std::istringstream in(text);
  std::string line, section;
  int number = 0;
  while (std::getline(in, line)) {
    ++number;
    boost::trim(line);
    if (line.empty() || line[0] == ';' || line[0] == '#') continue;
    if (line.front() == '[' && line.back() == ']') {
      section = boost::trim_copy(line.substr(1, line.size() - 2));
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos) continue;
    lines[section + "." + boost::trim_copy(line.substr(0, eq))] = number;
  }
  return lines;
}

class Reader {
 public:
  Reader(const pt::ptree& tree, std::map<std::string, int> lines, std::string source)
      : tree_(tree), lines_(std::move(lines)), source_(std::move(source)) {}

  [[noreturn]] void fail(const std::string& key, const std::string& why) const {
    std::ostringstream msg;
    msg << source_;
    const auto it = lines_.find(key);
    if (it != lines_.end()) msg << ":" << it->second;
    msg << ": " << key << ": " << why;
    throw ParseError(msg.str());
  }

  std::optional<std::string> text(const std::string& key) {
    seen_.insert(key);
    const auto v = tree_.get_optional<std::string>(pt::ptree::path_type(key, '.'));
    if (!v) return std::nullopt;
    return boost::trim_copy(*v);
  }

  template <typename T, typename Parse>
  void read(const std::string& key, T& target, Parse parse) {
    const auto v = text(key);
    if (!v) return;
    try {
      target = parse(*v);
    } catch (const std::exception& e) {
      fail(key, e.what());
    }
  }

  void check_unknown() const {
    for (const auto& [section, entries] : tree_) {
      if (entries.empty() && !entries.data().empty()) fail(section, "key outside of any section");
      for (const auto& [key, value] : entries) {
        const std::string full = section + "." + key;
        if (!seen_.count(full)) fail(full, "unknown key");
      }
    }
  }

 private:
  const pt::ptree& tree_;
  std::map<std::string, int> lines_;
  std::string source_;
  std::set<std::string> seen_;
};

double to_real(const std::string& s) {
  const std::vector<double> v = parse_list(s);
  if (v.size() != 1) throw InvalidArgument("expected a single number");
  return v[0];
}

int to_int(const std::string& s) {
  std::size_t used = 0;
  const int v = std::stoi(s, &used);
  if (used != s.size()) throw InvalidArgument("'" + s + "' is not an integer");
  return v;
}

bool to_bool(const std::string& s) {
  const std::string l = boost::to_lower_copy(s);
  if (l == "true" || l == "yes" || l == "1" || l == "on") return true;
  if (l == "false" || l == "no" || l == "0" || l == "off") return false;
  throw InvalidArgument("'" + s + "' is not a boolean");
}

std::string join(const std::vector<double>& v) {
  std::ostringstream out;
  out << std::setprecision(17);
  for (std::size_t i = 0; i < v.size(); ++i) out << (i ? "," : "") << v[i];
  return out.str();
}

}  // namespace

RunConfig parse_config(std::istream& in, const std::string& source) {
  const std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  pt::ptree tree;
  try {
    std::istringstream stream(text);
    pt::ini_parser::read_ini(stream, tree);
  } catch (const pt::ini_parser_error& e) {
    throw ParseError(source + ":" + std::to_string(e.line()) + ": " + e.message());
  }
  Reader rd(tree, key_lines(text), source);
  RunConfig cfg;

  const auto gammas = rd.text("system.gammas");
  if (!gammas) rd.fail("system.gammas", "required field is missing");
  rd.read("system.gammas", cfg.gammas, parse_list);
  for (double g : cfg.gammas) {
    if (g == 0.0) rd.fail("system.gammas", "vorticities must be nonzero");
  }
  rd.read("system.seed", cfg.seed, parse_seed_kind);
  rd.read("system.seed_size", cfg.seed_size, to_real);
  if (!(cfg.seed_size > 0.0)) rd.fail("system.seed_size", "must be positive");

  rd.read("domain.variant", cfg.domain, [](const std::string& s) {
    parse_domain(s);
    return s;
  });
  rd.read("domain.A", cfg.quadratic, [](const std::string& s) {
    const std::vector<double> v = parse_list(s);
    if (v.size() != 3) throw InvalidArgument("expected a11,a12,a22");
    Mat2 A;
    A << v[0], v[1], v[1], v[2];
    return A;
  });
  rd.read("domain.anchor", cfg.anchor, [](const std::string& s) {
    const std::vector<double> v = parse_list(s);
    if (v.size() != 2) throw InvalidArgument("expected x,y");
    return Vec2(v[0], v[1]);
  });

  SolverParams& sp = cfg.solver;
  rd.read("solver.modes", sp.modes, to_int);
  rd.read("solver.nodes", sp.nodes, to_int);
  rd.read("solver.mode", sp.mode, parse_solve_mode);
  rd.read("solver.fp_tol", sp.fp_tol, to_real);
  rd.read("solver.newton_tol", sp.newton_tol, to_real);
  rd.read("solver.max_iter", sp.max_iter, to_int);
  rd.read("solver.contraction_guard", sp.contraction_guard, to_real);
  rd.read("solver.r_max", sp.grid.r_max, to_real);
  rd.read("solver.r_min", sp.grid.r_min, to_real);
  rd.read("solver.r_steps", sp.grid.steps, to_int);
  rd.read("solver.tail_tol", sp.tail_tol, to_real);
  rd.read("solver.upward_probes", sp.upward_probes, to_int);
  rd.read("solver.upward_factor", sp.upward_factor, to_real);
  rd.read("solver.symmetry", sp.symmetry, [](const std::string& s) {
    std::vector<int> sigma;
    for (double v : parse_list(s)) {
      if (v != std::floor(v)) throw InvalidArgument("permutation entries must be integers");
      sigma.push_back(static_cast<int>(v));
    }
    permutation_order(sigma);
    return std::optional<std::vector<int>>(sigma);
  });
  try {
    sp.validate();
  } catch (const InvalidArgument& e) {
    rd.fail("solver", e.what());
  }

  rd.read("output.dir", cfg.out_dir, [](const std::string& s) {
    if (s.empty()) throw InvalidArgument("must not be empty");
    return s;
  });
  rd.read("output.samples", cfg.samples, to_int);
  if (cfg.samples < 2) rd.fail("output.samples", "need at least two samples");
  rd.read("output.svg", cfg.svg, to_bool);
  rd.check_unknown();
  return cfg;
}

RunConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open config file '" + path + "'");
  return parse_config(in, path);
}

std::string dump_config(const RunConfig& cfg) {
  const SolverParams& sp = cfg.solver;
  std::ostringstream out;
  out << std::setprecision(17);
  out << "[system]\n"
      << "gammas = " << join(cfg.gammas) << "\n"
      << "seed = " << to_string(cfg.seed) << "\n"
      << "seed_size = " << cfg.seed_size << "\n\n";
  out << "[domain]\n"
      << "variant = " << cfg.domain << "\n"
      << "A = " << join({cfg.quadratic(0, 0), cfg.quadratic(0, 1), cfg.quadratic(1, 1)}) << "\n"
      << "anchor = " << join({cfg.anchor.x(), cfg.anchor.y()}) << "\n\n";
  out << "[solver]\n"
      << "modes = " << sp.modes << "\n"
      << "nodes = " << sp.nodes << "\n"
      << "mode = " << to_string(sp.mode) << "\n"
      << "fp_tol = " << sp.fp_tol << "\n"
      << "newton_tol = " << sp.newton_tol << "\n"
      << "max_iter = " << sp.max_iter << "\n"
      << "contraction_guard = " << sp.contraction_guard << "\n"
      << "r_max = " << sp.grid.r_max << "\n"
      << "r_min = " << sp.grid.r_min << "\n"
      << "r_steps = " << sp.grid.steps << "\n"
      << "tail_tol = " << sp.tail_tol << "\n"
      << "upward_probes = " << sp.upward_probes << "\n"
      << "upward_factor = " << sp.upward_factor << "\n";
  if (sp.symmetry) {
    out << "symmetry = ";
    for (std::size_t i = 0; i < sp.symmetry->size(); ++i) out << (i ? "," : "") << (*sp.symmetry)[i];
    out << "\n";
  }
  out << "\n[output]\n"
      << "dir = " << cfg.out_dir << "\n"
      << "samples = " << cfg.samples << "\n"
      << "svg = " << (cfg.svg ? "true" : "false") << "\n";
  return out.str();
}

}  // namespace vorb
