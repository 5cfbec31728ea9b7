#include "fracflow/app.hpp"

#include <algorithm>
#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <set>
#include <sstream>

#include "fracflow/audit.hpp"
#include "fracflow/csv.hpp"
#include "fracflow/errors.hpp"
#include "fracflow/parallel.hpp"
#include "fracflow/validation.hpp"

namespace fracflow {

namespace {

namespace fs = std::filesystem;

struct Entry {
  ConfigKey info;
  std::function<void(RunConfig&, const std::string&)> set;
  std::function<std::string(const RunConfig&)> get;
};

std::string trim(std::string s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

std::vector<std::string> split_list(const std::string& text) {
  std::vector<std::string> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item = trim(item);
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

template <class T>
using Proj = T& (*)(RunConfig&);

template <class T>
T& project(const RunConfig& c, Proj<T> p) {
  return p(const_cast<RunConfig&>(c));
}

Entry num(std::string sec, std::string key, Proj<double> p, std::string help) {
  const std::string what = sec + "." + key;
  return {{sec, key, std::move(help)},
          [p, what](RunConfig& c, const std::string& v) { p(c) = parse_double(v, what); },
          [p](const RunConfig& c) { return format_double(project(c, p)); }};
}

Entry integer(std::string sec, std::string key, Proj<int> p, std::string help) {
  const std::string what = sec + "." + key;
  return {{sec, key, std::move(help)},
          [p, what](RunConfig& c, const std::string& v) {
            const double d = parse_double(v, what);
            if (d != std::floor(d) || std::fabs(d) > 1e9) throw ConfigError(what + " must be an integer (got '" + v + "')");
            p(c) = static_cast<int>(d);
          },
          [p](const RunConfig& c) { return std::to_string(project(c, p)); }};
}

Entry count(std::string sec, std::string key, Proj<std::size_t> p, std::string help) {
  const std::string what = sec + "." + key;
  return {{sec, key, std::move(help)},
          [p, what](RunConfig& c, const std::string& v) {
            const double d = parse_double(v, what);
            if (d != std::floor(d) || d < 0 || d > 1e12) throw ConfigError(what + " must be a non-negative integer (got '" + v + "')");
            p(c) = static_cast<std::size_t>(d);
          },
          [p](const RunConfig& c) { return std::to_string(project(c, p)); }};
}

Entry text(std::string sec, std::string key, Proj<std::string> p, std::string help) {
  return {{sec, key, std::move(help)},
          [p](RunConfig& c, const std::string& v) { p(c) = v; },
          [p](const RunConfig& c) { return project(c, p); }};
}

Entry flag(std::string sec, std::string key, Proj<bool> p, std::string help) {
  const std::string what = sec + "." + key;
  return {{sec, key, std::move(help)},
          [p, what](RunConfig& c, const std::string& v) {
            if (v == "true" || v == "1" || v == "yes") p(c) = true;
            else if (v == "false" || v == "0" || v == "no") p(c) = false;
            else throw ConfigError(what + " must be true or false (got '" + v + "')");
          },
          [p](const RunConfig& c) { return std::string(project(c, p) ? "true" : "false"); }};
}

Entry numbers(std::string sec, std::string key, Proj<std::vector<double>> p, std::string help) {
  const std::string what = sec + "." + key;
  return {{sec, key, std::move(help)},
          [p, what](RunConfig& c, const std::string& v) {
            std::vector<double> out;
            for (const std::string& item : split_list(v)) out.push_back(parse_double(item, what));
            p(c) = out;
          },
          [p](const RunConfig& c) {
            std::string s;
            for (double x : project(c, p)) s += (s.empty() ? "" : ", ") + format_double(x);
            return s;
          }};
}

Entry words(std::string sec, std::string key, Proj<std::vector<std::string>> p, std::string help) {
  return {{sec, key, std::move(help)},
          [p](RunConfig& c, const std::string& v) { p(c) = split_list(v); },
          [p](const RunConfig& c) {
            std::string s;
            for (const std::string& x : project(c, p)) s += (s.empty() ? "" : ", ") + x;
            return s;
          }};
}

Entry seed_entry() {
  return {{"run", "seed", "seed of the Monte Carlo oracle (nothing else is random)"},
          [](RunConfig& c, const std::string& v) {
            const double d = parse_double(v, "run.seed");
            if (d != std::floor(d) || d < 0 || d > 9e15) throw ConfigError("run.seed must be a non-negative integer");
            c.seed = static_cast<std::uint64_t>(d);
          },
          [](const RunConfig& c) { return std::to_string(c.seed); }};
}

#define FF_P(T, expr) static_cast<Proj<T>>([](RunConfig& c) -> T& { return c.expr; })

const std::vector<Entry>& entries() {
  static const std::vector<Entry> table = {
      text("kernel", "variant", FF_P(std::string, kernel.variant),
           "power_law | power_law_unchecked | gaussian | annulus | profile | dislocation"),
      num("kernel", "alpha", FF_P(double, kernel.alpha), "power-law exponent, in (0,1) unless power_law_unchecked"),
      num("kernel", "prefactor", FF_P(double, kernel.prefactor), "power-law prefactor (> 0)"),
      num("kernel", "epsilon", FF_P(double, kernel.epsilon), "dislocation rescaling parameter, in (0,1)"),
      text("kernel", "anisotropy_path", FF_P(std::string, kernel.anisotropy_path),
           "power law only: file with one positive g sample per line at theta_k = 2 pi k / M; empty = isotropic"),
      num("kernel", "amplitude", FF_P(double, kernel.amplitude), "gaussian: amplitude * exp(-(rho/sigma)^2)"),
      num("kernel", "sigma", FF_P(double, kernel.sigma), "gaussian width"),
      num("kernel", "inner", FF_P(double, kernel.inner), "annulus inner radius"),
      num("kernel", "outer", FF_P(double, kernel.outer), "annulus outer radius"),
      num("kernel", "value", FF_P(double, kernel.value), "annulus density value"),
      text("kernel", "profile_path", FF_P(std::string, kernel.profile_path),
           "profile: CSV with radius,value rows (piecewise linear, zero beyond the last radius)"),
      num("grid", "extent", FF_P(double, grid.extent), "half-width of the square domain [-extent, extent]^2"),
      num("grid", "h", FF_P(double, grid.h), "grid spacing"),
      text("initial", "shape", FF_P(std::string, initial.shape), "disk | ellipse | dumbbell | half_plane | field"),
      num("initial", "center_x", FF_P(double, initial.center_x), "center (disk, ellipse, first dumbbell disk)"),
      num("initial", "center_y", FF_P(double, initial.center_y), ""),
      num("initial", "radius", FF_P(double, initial.radius), "disk radius, first dumbbell radius"),
      num("initial", "semi_a", FF_P(double, initial.semi_a), "ellipse semi-axis along the rotated x axis"),
      num("initial", "semi_b", FF_P(double, initial.semi_b), "ellipse semi-axis along the rotated y axis"),
      num("initial", "angle", FF_P(double, initial.angle), "ellipse rotation (radians)"),
      num("initial", "center2_x", FF_P(double, initial.center2_x), "second dumbbell disk center"),
      num("initial", "center2_y", FF_P(double, initial.center2_y), ""),
      num("initial", "radius2", FF_P(double, initial.radius2), "second dumbbell radius"),
      num("initial", "bar_half_width", FF_P(double, initial.bar_half_width), "dumbbell bar half-width"),
      num("initial", "normal_x", FF_P(double, initial.normal_x), "half_plane normal (points inside), through the center"),
      num("initial", "normal_y", FF_P(double, initial.normal_y), ""),
      text("initial", "field_path", FF_P(std::string, initial.field_path),
           "field: file in the field_{k}.csv format; its grid replaces the [grid] block"),
      num("initial", "clamp_cells", FF_P(double, initial.clamp_cells), "signed distance clamp, in cells"),
      num("flow", "mobility", FF_P(double, flow.mobility), "constant mobility factor (> 0)"),
      text("flow", "mobility_path", FF_P(std::string, flow.mobility_path),
           "optional mobility samples over the gradient direction (same format as kernel.anisotropy_path)"),
      num("flow", "c1", FF_P(double, flow.c1), "constant driving force"),
      text("flow", "c1_path", FF_P(std::string, flow.c1_path), "optional c1 field in the field_{k}.csv format on the run grid"),
      num("flow", "delta_over_h", FF_P(double, flow.delta_over_h), "near-field radius in units of h (>= 2)"),
      num("flow", "cfl", FF_P(double, flow.cfl), "CFL factor in (0,1]"),
      num("flow", "band", FF_P(double, flow.band), "narrow band half-width in units of h; 0 = whole grid"),
      text("flow", "far_field", FF_P(std::string, flow.far_field), "transform | direct"),
      num("flow", "t_end", FF_P(double, flow.t_end), "final time"),
      num("flow", "snapshot_every", FF_P(double, flow.snapshot_every), "snapshot interval; 0 = initial and final only"),
      integer("flow", "reinit_every", FF_P(int, flow.reinit_every), "steps between reinitializations; 0 = never"),
      integer("flow", "subcell", FF_P(int, flow.subcell), "sub-samples per cell axis for level-set fractions (>= 2)"),
      integer("flow", "transform_levels", FF_P(int, flow.transform_levels), "threshold slabs of the far-field transform"),
      num("flow", "stop_radius", FF_P(double, flow.stop_radius), "stop when the largest contour radius drops below; 0 = off"),
      flag("flow", "field_dumps", FF_P(bool, flow.field_dumps), "write field_{k}.csv with every snapshot"),
      words("validation", "harnesses", FF_P(std::vector<std::string>, validation.harnesses),
            "comma list of audit, oracle, comparison, consistency, containment"),
      num("validation", "audit_threshold", FF_P(double, validation.audit_threshold), "largest accepted plateau ratio"),
      numbers("validation", "oracle_radii", FF_P(std::vector<double>, validation.oracle_radii),
              "radii for the quadrature vs Monte Carlo check"),
      num("validation", "oracle_tolerance", FF_P(double, validation.oracle_tolerance),
          "relative tolerance, quadrature vs Monte Carlo"),
      count("validation", "oracle_samples", FF_P(std::size_t, validation.oracle_samples), "Monte Carlo sample count"),
      num("validation", "oracle_grid_tolerance", FF_P(double, validation.oracle_grid_tolerance),
          "relative tolerance of grid kappa on the disk band (disk initial data only)"),
      num("validation", "comparison_gap", FF_P(double, validation.comparison_gap), "v0 = u0 + gap"),
      num("validation", "comparison_outer_radius", FF_P(double, validation.comparison_outer_radius),
          "if > 0, v0 is the disk of this radius around the initial center instead"),
      num("validation", "comparison_tolerance", FF_P(double, validation.comparison_tolerance), "largest accepted (u - v)+"),
      text("validation", "consistency_theta", FF_P(std::string, validation.consistency_theta),
           "tanh (tanh 2s) | half (s/2) | identity"),
      num("validation", "consistency_tolerance_h", FF_P(double, validation.consistency_tolerance_h),
          "largest accepted Hausdorff distance, in units of h"),
      num("validation", "containment_radius", FF_P(double, validation.containment_radius),
          "R of the containing ball around the initial center; 0 = the initial disk radius"),
      num("validation", "containment_tolerance_h", FF_P(double, validation.containment_tolerance_h),
          "largest accepted excess over R + C t, in units of h"),
      text("study", "family", FF_P(std::string, study.family), "alpha | epsilon | alpha_limit"),
      numbers("study", "values", FF_P(std::vector<double>, study.values), "alpha or epsilon values, in study order"),
      num("study", "r0", FF_P(double, study.r0), "initial disk radius of the flow studies"),
      num("study", "t_end", FF_P(double, study.t_end), "study horizon; 0 = r0^2 / 4"),
      numbers("study", "radii", FF_P(std::vector<double>, study.radii), "radii of the alpha_limit table"),
      num("study", "max_error", FF_P(double, study.max_error), "largest accepted error of the last family member; 0 = off"),
      text("output", "dir", FF_P(std::string, output_dir), "output directory (created if missing)"),
      seed_entry(),
  };
  return table;
}

#undef FF_P

void require(bool ok, const std::string& field, const std::string& rule) {
  if (!ok) throw ConfigError(field + " " + rule);
}

Anisotropy read_samples(const std::string& path, const std::string& what) {
  std::ifstream in(path);
  if (!in) throw ConfigError(what + ": cannot open '" + path + "'");
  std::vector<double> v;
  std::string line;
  while (std::getline(in, line)) {
    line = trim(line);
    if (line.empty() || line[0] == '#') continue;
    v.push_back(parse_double(line, what));
  }
  if (v.empty()) throw ConfigError(what + ": '" + path + "' has no samples");
  return Anisotropy(std::move(v));
}

Vec2 initial_center(const RunConfig& cfg) { return {cfg.initial.center_x, cfg.initial.center_y}; }

void prepare_output(const RunConfig& cfg) {
  fs::create_directories(cfg.output_dir);
  std::ofstream out(fs::path(cfg.output_dir) / "config.resolved.ini");
  if (!out) throw ConfigError("output.dir: cannot write into '" + cfg.output_dir + "'");
  out << echo_config(cfg);
}

std::string out_path(const RunConfig& cfg, const std::string& name) {
  return (fs::path(cfg.output_dir) / name).string();
}

int guarded(std::ostream& log, const std::function<int()>& body) {
  try {
    return body();
  } catch (const ConfigError& e) {
    log << "config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const DataError& e) {
    log << "input error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const DomainError& e) {
    log << "precondition violated: " << e.what() << "\n";
    return kExitConfig;
  } catch (const PreconditionError& e) {
    log << "precondition violated: " << e.what() << "\n";
    return kExitConfig;
  } catch (const NumericalError& e) {
    log << "numerical abort: " << e.what() << "\n";
    return kExitNumerical;
  } catch (const AccuracyError& e) {
    log << "numerical abort: " << e.what() << "\n";
    return kExitNumerical;
  } catch (const fs::filesystem_error& e) {
    log << "config error: " << e.what() << "\n";
    return kExitConfig;
  }
}

struct SummaryLine {
  std::string harness, metric;
  double value, threshold;
  bool pass;
};

}  // namespace

const std::vector<ConfigKey>& config_keys() {
  static const std::vector<ConfigKey> keys = [] {
    std::vector<ConfigKey> k;
    for (const Entry& e : entries()) k.push_back(e.info);
    return k;
  }();
  return keys;
}

RunConfig parse_config_text(const std::string& text) {
  namespace pt = boost::property_tree;
  pt::ptree tree;
  std::istringstream in(text);
  try {
    pt::read_ini(in, tree);
  } catch (const pt::ini_parser_error& e) {
    throw ConfigError(std::string("config syntax: ") + e.what());
  }
  std::map<std::string, const Entry*> index;
  for (const Entry& e : entries()) index[e.info.section + "." + e.info.key] = &e;
  RunConfig cfg;
  for (const auto& [section, body] : tree) {
    if (body.empty()) throw ConfigError("config key '" + section + "' must sit inside a [section]");
    for (const auto& [key, value] : body) {
      const std::string name = section + "." + key;
      const auto it = index.find(name);
      if (it == index.end()) throw ConfigError("unknown config key " + name);
      it->second->set(cfg, trim(value.get_value<std::string>()));
    }
  }
  validate_config(cfg);
  return cfg;
}

RunConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config_text(ss.str());
}

void validate_config(const RunConfig& c) {
  const auto& k = c.kernel;
  static const std::set<std::string> variants{"power_law", "power_law_unchecked", "gaussian", "annulus", "profile",
                                              "dislocation"};
  require(variants.count(k.variant) > 0, "kernel.variant", "must be one of power_law, power_law_unchecked, gaussian, annulus, profile, dislocation (got '" + k.variant + "')");
  if (k.variant == "power_law")
    require(k.alpha > 0.0 && k.alpha < 1.0, "kernel.alpha", "must lie in (0,1) (got " + format_double(k.alpha) + ")");
  if (k.variant == "power_law_unchecked")
    require(k.alpha > 0.0 && k.alpha < 2.0, "kernel.alpha", "must lie in (0,2) (got " + format_double(k.alpha) + ")");
  require(k.prefactor > 0.0 && std::isfinite(k.prefactor), "kernel.prefactor", "must be positive");
  if (k.variant == "dislocation")
    require(k.epsilon > 0.0 && k.epsilon < 1.0, "kernel.epsilon", "must lie in (0,1) (got " + format_double(k.epsilon) + ")");
  if (k.variant == "gaussian") {
    require(k.amplitude > 0.0, "kernel.amplitude", "must be positive");
    require(k.sigma > 0.0, "kernel.sigma", "must be positive");
  }
  if (k.variant == "annulus") {
    require(k.inner >= 0.0 && k.outer > k.inner, "kernel.outer", "must exceed kernel.inner >= 0");
    require(k.value > 0.0, "kernel.value", "must be positive");
  }
  if (k.variant == "profile") require(!k.profile_path.empty(), "kernel.profile_path", "is required for variant = profile");

  require(c.grid.extent > 0.0 && std::isfinite(c.grid.extent), "grid.extent", "must be positive");
  require(c.grid.h > 0.0 && c.grid.h < c.grid.extent, "grid.h", "must lie in (0, grid.extent)");
  require(c.grid.extent / c.grid.h <= 4096, "grid.h", "gives more than 8193 nodes per axis");

  const auto& in = c.initial;
  static const std::set<std::string> shapes{"disk", "ellipse", "dumbbell", "half_plane", "field"};
  require(shapes.count(in.shape) > 0, "initial.shape", "must be one of disk, ellipse, dumbbell, half_plane, field (got '" + in.shape + "')");
  if (in.shape == "disk" || in.shape == "dumbbell") require(in.radius > 0.0, "initial.radius", "must be positive");
  if (in.shape == "ellipse") {
    require(in.semi_a > 0.0, "initial.semi_a", "must be positive");
    require(in.semi_b > 0.0, "initial.semi_b", "must be positive");
  }
  if (in.shape == "dumbbell") {
    require(in.radius2 > 0.0, "initial.radius2", "must be positive");
    require(in.bar_half_width > 0.0, "initial.bar_half_width", "must be positive");
  }
  if (in.shape == "half_plane")
    require(std::hypot(in.normal_x, in.normal_y) > 0.0, "initial.normal_x", "and normal_y must not both be 0");
  if (in.shape == "field") require(!in.field_path.empty(), "initial.field_path", "is required for shape = field");
  require(in.clamp_cells >= 2.0, "initial.clamp_cells", "must be at least 2");

  const auto& f = c.flow;
  require(f.mobility > 0.0 && std::isfinite(f.mobility), "flow.mobility", "must be positive");
  require(std::isfinite(f.c1), "flow.c1", "must be finite");
  require(f.delta_over_h >= 2.0, "flow.delta_over_h", "must be at least 2");
  require(f.cfl > 0.0 && f.cfl <= 1.0, "flow.cfl", "must lie in (0,1]");
  require(f.band >= 0.0, "flow.band", "must be non-negative");
  require(f.far_field == "transform" || f.far_field == "direct", "flow.far_field", "must be transform or direct");
  require(f.t_end >= 0.0 && std::isfinite(f.t_end), "flow.t_end", "must be non-negative");
  require(f.snapshot_every >= 0.0, "flow.snapshot_every", "must be non-negative");
  require(f.reinit_every >= 0, "flow.reinit_every", "must be non-negative");
  require(f.subcell >= 2, "flow.subcell", "must be at least 2");
  require(f.transform_levels >= 1, "flow.transform_levels", "must be positive");
  require(f.stop_radius >= 0.0, "flow.stop_radius", "must be non-negative");

  const auto& v = c.validation;
  static const std::set<std::string> harnesses{"audit", "oracle", "comparison", "consistency", "containment"};
  for (const std::string& h : v.harnesses)
    require(harnesses.count(h) > 0, "validation.harnesses", "has unknown entry '" + h + "'");
  require(v.audit_threshold > 0.0, "validation.audit_threshold", "must be positive");
  for (double r : v.oracle_radii) require(r > 0.0, "validation.oracle_radii", "must be positive");
  require(v.oracle_tolerance > 0.0, "validation.oracle_tolerance", "must be positive");
  require(v.oracle_samples >= 1000, "validation.oracle_samples", "must be at least 1000");
  require(v.oracle_grid_tolerance > 0.0, "validation.oracle_grid_tolerance", "must be positive");
  require(std::isfinite(v.comparison_gap), "validation.comparison_gap", "must be finite");
  require(v.comparison_outer_radius >= 0.0, "validation.comparison_outer_radius", "must be non-negative");
  require(v.comparison_tolerance >= 0.0, "validation.comparison_tolerance", "must be non-negative");
  require(v.consistency_theta == "tanh" || v.consistency_theta == "half" || v.consistency_theta == "identity",
          "validation.consistency_theta", "must be tanh, half or identity");
  require(v.consistency_tolerance_h > 0.0, "validation.consistency_tolerance_h", "must be positive");
  require(v.containment_radius >= 0.0, "validation.containment_radius", "must be non-negative");
  require(v.containment_tolerance_h >= 0.0, "validation.containment_tolerance_h", "must be non-negative");

  const auto& s = c.study;
  require(s.family == "alpha" || s.family == "epsilon" || s.family == "alpha_limit", "study.family",
          "must be alpha, epsilon or alpha_limit");
  require(!s.values.empty(), "study.values", "must list at least one value");
  for (double p : s.values) require(p > 0.0 && p < 1.0, "study.values", "entries must lie in (0,1)");
  require(s.r0 > 0.0, "study.r0", "must be positive");
  require(s.t_end >= 0.0, "study.t_end", "must be non-negative");
  for (double r : s.radii) require(r > 0.0, "study.radii", "must be positive");
  require(s.max_error >= 0.0, "study.max_error", "must be non-negative");
  require(!c.output_dir.empty(), "output.dir", "must not be empty");
}

std::string echo_config(const RunConfig& cfg) {
  std::ostringstream out;
  std::string section;
  for (const Entry& e : entries()) {
    if (e.info.section != section) {
      section = e.info.section;
      out << (out.tellp() > 0 ? "\n" : "") << "[" << section << "]\n";
    }
    out << e.info.key << " = " << e.get(cfg) << "\n";
  }
  return out.str();
}

KernelPtr build_kernel(const RunConfig& cfg) {
  const auto& k = cfg.kernel;
  Anisotropy g;
  if (!k.anisotropy_path.empty()) g = read_samples(k.anisotropy_path, "kernel.anisotropy_path");
  if (k.variant == "power_law") return std::make_shared<const KernelSpec>(KernelSpec::power_law(k.alpha, 2, g, k.prefactor));
  if (k.variant == "power_law_unchecked")
    return std::make_shared<const KernelSpec>(KernelSpec::power_law_unchecked(k.alpha, 2, g, k.prefactor));
  if (k.variant == "gaussian")
    return std::make_shared<const KernelSpec>(KernelSpec::bounded(RadialProfile::gaussian(k.amplitude, k.sigma)));
  if (k.variant == "annulus")
    return std::make_shared<const KernelSpec>(KernelSpec::bounded(RadialProfile::annulus(k.inner, k.outer, k.value)));
  if (k.variant == "profile")
    return std::make_shared<const KernelSpec>(KernelSpec::bounded(RadialProfile::from_csv(k.profile_path)));
  return std::make_shared<const KernelSpec>(KernelSpec::rescaled_dislocation(k.epsilon));
}

Grid build_grid(const RunConfig& cfg) {
  if (cfg.initial.shape == "field") return read_field_csv(cfg.initial.field_path).grid();
  return Grid::centered(cfg.grid.extent, cfg.grid.h);
}

LevelSetField build_initial(const RunConfig& cfg, const Grid& grid) {
  const auto& in = cfg.initial;
  const Vec2 c = initial_center(cfg);
  if (in.shape == "field") {
    LevelSetField f = read_field_csv(in.field_path);
    if (!(f.grid() == grid)) throw ConfigError("initial.field_path: field grid differs from the run grid");
    return f;
  }
  Shape s = Shape::disk(c, in.radius);
  if (in.shape == "ellipse") s = Shape::ellipse(c, in.semi_a, in.semi_b, in.angle);
  if (in.shape == "dumbbell")
    s = Shape::dumbbell(c, in.radius, {in.center2_x, in.center2_y}, in.radius2, in.bar_half_width);
  if (in.shape == "half_plane") s = Shape::half_plane(c, {in.normal_x, in.normal_y});
  return make_signed_distance(s, grid, in.clamp_cells);
}

FlowConfig build_flow_config(const RunConfig& cfg, const Grid& grid, KernelPtr kernel) {
  const auto& f = cfg.flow;
  FlowConfig fc;
  fc.kernel = std::move(kernel);
  fc.delta = f.delta_over_h * grid.h;
  fc.mobility = f.mobility;
  if (!f.mobility_path.empty()) fc.mobility_table = read_samples(f.mobility_path, "flow.mobility_path");
  fc.c1 = f.c1;
  if (!f.c1_path.empty()) {
    const LevelSetField c1 = read_field_csv(f.c1_path);
    if (!(c1.grid() == grid)) throw ConfigError("flow.c1_path: field grid differs from the run grid");
    fc.c1_field = c1.values();
  }
  fc.cfl = f.cfl;
  fc.band_width = f.band;
  fc.far_field_mode = f.far_field == "direct" ? FarFieldMode::Direct : FarFieldMode::Transform;
  fc.t_end = f.t_end;
  fc.snapshot_every = f.snapshot_every;
  fc.reinit_every = f.reinit_every;
  fc.subcell = f.subcell;
  fc.transform_levels = f.transform_levels;
  fc.clamp_cells = cfg.initial.clamp_cells;
  fc.stop_radius = f.stop_radius;
  fc.keep_fields = f.field_dumps;
  fc.center = initial_center(cfg);
  fc.dump_path = out_path(cfg, "abort_field.csv");
  fc.validate(grid);
  return fc;
}

int cmd_simulate(const RunConfig& cfg, std::ostream& log) {
  return guarded(log, [&] {
    validate_config(cfg);
    prepare_output(cfg);
    const Grid grid = build_grid(cfg);
    const LevelSetField u0 = build_initial(cfg, grid);
    const FlowConfig fc = build_flow_config(cfg, grid, build_kernel(cfg));
    const RunResult run = FlowSolver(grid, fc).run(u0);

    CsvWriter stats(out_path(cfg, "stats.csv"),
                    {"snapshot", "step", "t", "dt", "area", "min_radius", "max_radius", "mean_radius", "max_velocity"});
    for (std::size_t k = 0; k < run.snapshots.size(); ++k) {
      const FrontSnapshot& s = run.snapshots[k];
      stats.row({static_cast<double>(k), static_cast<double>(s.step), s.t, s.dt, s.area, s.radii.min_radius,
                 s.radii.max_radius, s.radii.mean_radius, s.max_velocity});
      write_contour_csv(out_path(cfg, "contour_" + std::to_string(k) + ".csv"), s.contour);
      if (fc.keep_fields && s.field) write_field_csv(out_path(cfg, "field_" + std::to_string(k) + ".csv"), *s.field, s.t);
    }
    log << "grid " << grid.nx << "x" << grid.ny << ", h = " << format_double(grid.h) << ", kernel " << fc.kernel->describe()
        << "\n";
    log << "steps " << run.final_state.step_count << ", t = " << format_double(run.final_state.t) << ", snapshots "
        << run.snapshots.size() << (run.message.empty() ? "" : ", " + run.message) << "\n";
    if (run.aborted) {
      log << "numerical abort: " << run.message << "; state written to " << fc.dump_path << "\n";
      return static_cast<int>(kExitNumerical);
    }
    return static_cast<int>(kExitOk);
  });
}

int cmd_curvature(const RunConfig& cfg, std::ostream& log) {
  return guarded(log, [&] {
    validate_config(cfg);
    prepare_output(cfg);
    const Grid grid = build_grid(cfg);
    const LevelSetField u = build_initial(cfg, grid);
    const KernelPtr kernel = build_kernel(cfg);
    const double delta = cfg.flow.delta_over_h * grid.h;
    const CurvatureEvaluator ev(grid, kernel, delta);
    const FieldContext ctx(u, cfg.flow.subcell);
    const double band = cfg.flow.band * grid.h;
    std::vector<std::size_t> nodes;
    for (std::size_t k = 0; k < grid.size(); ++k)
      if (band == 0.0 || std::fabs(u[k]) <= band) nodes.push_back(k);
    std::vector<CurvatureEval> evals(nodes.size());
    parallel_for(nodes.size(), [&](std::size_t b, std::size_t e) {
      for (std::size_t n = b; n < e; ++n) evals[n] = ev.evaluate(ctx, grid.col(nodes[n]), grid.row(nodes[n]));
    });
    CsvWriter w(out_path(cfg, "curvature.csv"), {"i", "j", "x", "y", "u", "kappa_upper", "kappa_lower", "grad_norm",
                                                  "near", "far_upper", "far_lower", "degenerate"});
    std::size_t degenerate = 0;
    for (std::size_t n = 0; n < nodes.size(); ++n) {
      const int i = grid.col(nodes[n]), j = grid.row(nodes[n]);
      const CurvatureEval& c = evals[n];
      const Vec2 x = grid.point(i, j);
      degenerate += c.degenerate ? 1 : 0;
      w.row({static_cast<double>(i), static_cast<double>(j), x.x, x.y, u[nodes[n]], c.kappa_upper, c.kappa_lower,
             norm(c.gradient), c.near_part, c.far_upper, c.far_lower, c.degenerate ? 1.0 : 0.0});
    }
    log << "curvature at " << nodes.size() << " nodes (" << degenerate << " degenerate), delta = " << format_double(delta)
        << ", tail_mass(delta) = " << format_double(kernel->tail_mass(delta)) << "\n";
    return static_cast<int>(kExitOk);
  });
}

int cmd_validate(const RunConfig& cfg, std::ostream& log) {
  return guarded(log, [&] {
    validate_config(cfg);
    prepare_output(cfg);
    const auto& v = cfg.validation;
    const KernelPtr kernel = build_kernel(cfg);
    std::vector<SummaryLine> lines;
    auto wants = [&](const char* name) { return std::find(v.harnesses.begin(), v.harnesses.end(), name) != v.harnesses.end(); };

    if (wants("audit")) {
      const AdmissibilityReport rep = admissibility_audit(*kernel, 16, v.audit_threshold);
      write_audit_csv(out_path(cfg, "audit.csv"), rep);
      lines.push_back({"audit", "worst_plateau_ratio", rep.worst_plateau_ratio, v.audit_threshold, rep.pass});
    }
    // The remaining harnesses need a finite curvature; an inadmissible kernel stops here.
    const bool admissible = kernel->kind() != KernelKind::PowerLaw || kernel->alpha() < 1.0;
    if (!admissible && v.harnesses.size() > 1) log << "kernel is not admissible; flow harnesses skipped\n";

    const Grid grid = build_grid(cfg);
    const bool disk = cfg.initial.shape == "disk";
    if (admissible && wants("oracle")) {
      CsvWriter w(out_path(cfg, "oracle.csv"), {"r", "quadrature", "monte_carlo", "rel_diff"});
      double worst = 0.0;
      for (double r : v.oracle_radii) {
        const double q = radial_ball_oracle(r, *kernel);
        const double m = monte_carlo_ball_curvature(r, *kernel, v.oracle_samples, cfg.seed);
        const double d = std::fabs(m / q - 1.0);
        worst = std::max(worst, d);
        w.row({r, q, m, d});
      }
      lines.push_back({"oracle", "max_rel_diff", worst, v.oracle_tolerance, worst <= v.oracle_tolerance});
      if (disk) {
        const DiskBandCheck band = disk_band_check(grid, initial_center(cfg), cfg.initial.radius, kernel,
                                                   cfg.flow.delta_over_h * grid.h, 2.0 * grid.h, cfg.flow.subcell);
        write_disk_band_csv(out_path(cfg, "oracle_grid.csv"), band);
        lines.push_back({"oracle_grid", "max_rel_error", band.max_rel_error, v.oracle_grid_tolerance,
                         band.max_rel_error <= v.oracle_grid_tolerance});
      }
    }

    if (admissible && (wants("comparison") || wants("consistency") || wants("containment"))) {
      const LevelSetField u0 = build_initial(cfg, grid);
      const FlowConfig fc = build_flow_config(cfg, grid, kernel);
      const double h = grid.h;
      if (wants("comparison")) {
        LevelSetField v0 = u0;
        if (v.comparison_outer_radius > 0.0) {
          v0 = make_signed_distance(Shape::disk(initial_center(cfg), v.comparison_outer_radius), grid, cfg.initial.clamp_cells);
        } else {
          for (double& x : v0.mutable_values()) x += v.comparison_gap;
          v0.set_outside_value(v0.outside_value() + v.comparison_gap);
        }
        const ComparisonResult r = comparison_harness(u0, v0, fc);
        write_comparison_csv(out_path(cfg, "comparison.csv"), r);
        lines.push_back({"comparison", "max_violation", r.max_violation, v.comparison_tolerance,
                         r.max_violation <= v.comparison_tolerance && r.fronts_nested});
      }
      if (wants("consistency")) {
        std::function<double(double)> theta = [](double s) { return s; };
        if (v.consistency_theta == "tanh") theta = [](double s) { return std::tanh(2.0 * s); };
        if (v.consistency_theta == "half") theta = [](double s) { return 0.5 * s; };
        const ConsistencyResult r = consistency_harness(u0, theta, fc);
        write_consistency_csv(out_path(cfg, "consistency.csv"), r);
        const double tol = v.consistency_tolerance_h * h;
        lines.push_back({"consistency", "max_hausdorff", r.max_distance, tol, r.max_distance <= tol});
      }
      if (wants("containment")) {
        double R = v.containment_radius;
        if (R == 0.0) {
          if (!disk) throw ConfigError("validation.containment_radius is required unless initial.shape = disk");
          R = cfg.initial.radius;
        }
        const ContainmentResult r = containment_check(u0, initial_center(cfg), R, fc);
        write_containment_csv(out_path(cfg, "containment.csv"), r);
        const double tol = v.containment_tolerance_h * h;
        lines.push_back({"containment", "max_excess", r.max_excess, tol, r.max_excess <= tol});
      }
    }

    CsvWriter w(out_path(cfg, "summary.csv"), {"harness", "metric", "value", "threshold", "pass"});
    bool all = true;
    for (const SummaryLine& l : lines) {
      w.row_mixed({l.harness, l.metric, format_double(l.value), format_double(l.threshold), l.pass ? "PASS" : "FAIL"});
      log << (l.pass ? "PASS " : "FAIL ") << l.harness << ": " << l.metric << " = " << format_double(l.value)
          << " (threshold " << format_double(l.threshold) << ")\n";
      all = all && l.pass;
    }
    if (!admissible) all = false;
    return static_cast<int>(all ? kExitOk : kExitHarnessFail);
  });
}

int cmd_study(const RunConfig& cfg, std::ostream& log) {
  return guarded(log, [&] {
    validate_config(cfg);
    prepare_output(cfg);
    const auto& s = cfg.study;
    bool pass = true;
    if (s.family == "alpha_limit") {
      const std::vector<AlphaLimitRow> rows = alpha_limit_study(s.values, s.radii);
      write_alpha_limit_csv(out_path(cfg, "study_alpha_limit.csv"), rows);
      // Rows come alpha-major; along alpha the error must drop for every radius.
      const std::size_t nr = s.radii.size();
      for (std::size_t a = 1; a < s.values.size(); ++a)
        for (std::size_t k = 0; k < nr; ++k)
          if (!(rows[a * nr + k].rel_error < rows[(a - 1) * nr + k].rel_error)) pass = false;
      for (const AlphaLimitRow& r : rows)
        log << "alpha " << format_double(r.alpha) << " r " << format_double(r.r) << " rel_error "
            << format_double(r.rel_error) << "\n";
      if (s.max_error > 0.0) {
        for (std::size_t k = 0; k < nr; ++k) pass = pass && rows[(s.values.size() - 1) * nr + k].rel_error <= s.max_error;
      }
    } else {
      if (cfg.flow.c1 != 0.0 || !cfg.flow.c1_path.empty() || cfg.flow.mobility != 1.0 || !cfg.flow.mobility_path.empty())
        throw ConfigError("study runs need flow.c1 = 0 and flow.mobility = 1 without tables");
      const Grid grid = Grid::centered(cfg.grid.extent, cfg.grid.h);
      RunConfig base_cfg = cfg;
      base_cfg.flow.t_end = 0.0;
      // The kernel is replaced per family member; this one only satisfies the config check.
      FlowConfig base = build_flow_config(base_cfg, grid, std::make_shared<const KernelSpec>(KernelSpec::power_law(0.5)));
      base.t_end = s.t_end;
      base.snapshot_every = 0.0;
      base.keep_fields = false;
      const StudyFamily fam = s.family == "alpha" ? StudyFamily::Alpha : StudyFamily::Epsilon;
      const StudyResult r = mcf_convergence_study(fam, s.values, s.r0, grid, base);
      write_study_csv(out_path(cfg, std::string("study_") + family_name(fam) + ".csv"), r);
      for (const StudyRow& row : r.rows)
        log << family_name(fam) << " " << format_double(row.parameter) << " max_rel_error "
            << format_double(row.max_rel_error) << (row.extinct ? " (stopped early)" : "") << "\n";
      pass = r.monotone;
      if (s.max_error > 0.0) pass = pass && r.rows.back().max_rel_error <= s.max_error;
    }
    log << (pass ? "PASS" : "FAIL") << " study " << s.family << "\n";
    return static_cast<int>(pass ? kExitOk : kExitHarnessFail);
  });
}

std::string config_help() {
  std::ostringstream out;
  out << "Config file: INI sections with key = value lines; unknown keys are rejected.\n";
  std::string section;
  for (const ConfigKey& k : config_keys()) {
    if (k.section != section) {
      section = k.section;
      out << "\n[" << section << "]\n";
    }
    out << "  " << k.key;
    if (!k.help.empty()) out << std::string(k.key.size() < 26 ? 26 - k.key.size() : 1, ' ') << k.help;
    out << "\n";
  }
  return out.str();
}

std::string outputs_help() {
  return R"(Outputs (in output.dir):
  config.resolved.ini   every key with its resolved value; reloading it reproduces the run
  simulate:
    stats.csv           snapshot, step, t, dt, area, min_radius, max_radius, mean_radius, max_velocity
    contour_{k}.csv     polyline, x, y (zero contour of snapshot k)
    field_{k}.csv       flow.field_dumps = true; header "# nx= ny= h= origin_x= origin_y= t= outside="
                        then ny rows of nx comma-separated values (row-major, j = 0 first)
    abort_field.csv     written on a numerical abort (exit 3), same format
  curvature:
    curvature.csv       i, j, x, y, u, kappa_upper, kappa_lower, grad_norm, near, far_upper, far_lower, degenerate
  validate:
    summary.csv         harness, metric, value, threshold, pass
    audit.csv           check, direction, parameter, value, monotone, plateau_ratio, pass
    oracle.csv          r, quadrature, monte_carlo, rel_diff
    oracle_grid.csv     x, y, u, kappa, oracle, rel_error (disk initial data)
    comparison.csv      step, t, violation
    consistency.csv     t, hausdorff
    containment.csv     t, max_radius, bound, excess, C
  study:
    study_alpha.csv, study_epsilon.csv
                        family, parameter, max_rel_error, final_radius, classical_final, extinct, steps
    study_alpha_limit.csv
                        alpha, r, scaled_kappa, classical, rel_error
Exit codes: 0 success / all checks pass, 1 a check failed, 2 configuration or precondition error,
3 numerical abort.
)";
}

}  // namespace fracflow
