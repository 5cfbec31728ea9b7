#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "fracflow/flow.hpp"
#include "fracflow/geometry.hpp"
#include "fracflow/kernels.hpp"

namespace fracflow {

// Everything a run needs, read from an INI file with [kernel], [grid], [initial], [flow],
// [validation], [study], [output] and [run] sections. Field names match the INI keys.
struct RunConfig {
  struct Kernel {
    std::string variant = "power_law";  // power_law | power_law_unchecked | gaussian | annulus | profile | dislocation
    double alpha = 0.5;
    double prefactor = 1.0;
    double epsilon = 0.1;
    std::string anisotropy_path;  // one g sample per line, at theta_k = 2 pi k / M
    double amplitude = 1.0, sigma = 0.25;            // gaussian
    double inner = 0.0, outer = 0.5, value = 1.0;    // annulus
    std::string profile_path;                        // profile: radius,value rows
    bool operator==(const Kernel&) const = default;
  } kernel;

  struct GridBlock {
    double extent = 1.25;  // half-width of the square domain centered at the origin
    double h = 1.0 / 64;
    bool operator==(const GridBlock&) const = default;
  } grid;

  struct Initial {
    std::string shape = "disk";  // disk | ellipse | dumbbell | half_plane | field
    double center_x = 0.0, center_y = 0.0;
    double radius = 1.0;
    double semi_a = 1.0, semi_b = 0.5, angle = 0.0;
    double center2_x = 0.6, center2_y = 0.0, radius2 = 0.3, bar_half_width = 0.1;
    double normal_x = 1.0, normal_y = 0.0;
    std::string field_path;
    double clamp_cells = 10.0;
    bool operator==(const Initial&) const = default;
  } initial;

  struct Flow {
    double mobility = 1.0;
    std::string mobility_path;  // anisotropy samples multiplying `mobility`
    double c1 = 0.0;
    std::string c1_path;        // field CSV on the run grid, replaces c1
    double delta_over_h = 4.0;
    double cfl = 0.5;
    double band = 6.0;
    std::string far_field = "transform";  // transform | direct
    double t_end = 0.0;
    double snapshot_every = 0.0;
    int reinit_every = 1;
    int subcell = 8;
    int transform_levels = 32;
    double stop_radius = 0.0;
    bool field_dumps = false;
    bool operator==(const Flow&) const = default;
  } flow;

  struct Validation {
    std::vector<std::string> harnesses{"audit", "oracle", "comparison", "consistency", "containment"};
    double audit_threshold = 1e-3;
    std::vector<double> oracle_radii{0.5, 1.0, 2.0};
    double oracle_tolerance = 0.01;  // relative, quadrature vs Monte Carlo
    std::size_t oracle_samples = 1000000;
    double oracle_grid_tolerance = 0.02;  // grid kappa on the disk band vs the oracle
    double comparison_gap = 0.1;           // v0 = u0 + gap when comparison_outer_radius = 0
    double comparison_outer_radius = 0.0;  // v0 = disk of this radius around the initial center
    double comparison_tolerance = 1e-10;
    std::string consistency_theta = "tanh";  // tanh (tanh 2s) | half (s/2) | identity
    double consistency_tolerance_h = 2.0;
    double containment_radius = 0.0;  // 0 = radius of the initial disk
    double containment_tolerance_h = 2.0;
    bool operator==(const Validation&) const = default;
  } validation;

  struct Study {
    std::string family = "alpha";  // alpha | epsilon | alpha_limit
    std::vector<double> values{0.5, 0.7, 0.9, 0.95};
    double r0 = 0.5;
    double t_end = 0.0;  // 0 = r0^2 / 4
    std::vector<double> radii{0.5, 1.0, 2.0};  // alpha_limit only
    double max_error = 0.0;  // last-row error threshold; 0 = not checked
    bool operator==(const Study&) const = default;
  } study;

  std::string output_dir = "fracflow_out";
  std::uint64_t seed = 1;

  bool operator==(const RunConfig&) const = default;
};

// Key table shared by the parser, the resolved-config echo and the help text.
struct ConfigKey {
  std::string section, key, help;
};
const std::vector<ConfigKey>& config_keys();

// Throws ConfigError naming section.key on unknown keys, unparsable values or invalid settings.
RunConfig parse_config_text(const std::string& text);
RunConfig load_config(const std::string& path);
void validate_config(const RunConfig& cfg);
// INI text listing every key with its resolved value; parse_config_text(echo) == cfg.
std::string echo_config(const RunConfig& cfg);

KernelPtr build_kernel(const RunConfig& cfg);
Grid build_grid(const RunConfig& cfg);
LevelSetField build_initial(const RunConfig& cfg, const Grid& grid);
FlowConfig build_flow_config(const RunConfig& cfg, const Grid& grid, KernelPtr kernel);

enum ExitCode : int { kExitOk = 0, kExitHarnessFail = 1, kExitConfig = 2, kExitNumerical = 3 };

// Subcommands. Each writes its files under cfg.output_dir (created if missing), including
// config.resolved.ini, logs to `log`, and returns an ExitCode. Errors are mapped to exit codes.
int cmd_simulate(const RunConfig& cfg, std::ostream& log);
int cmd_curvature(const RunConfig& cfg, std::ostream& log);
int cmd_validate(const RunConfig& cfg, std::ostream& log);
int cmd_study(const RunConfig& cfg, std::ostream& log);

// Help text for keys and output columns.
std::string config_help();
std::string outputs_help();

}  // namespace fracflow
