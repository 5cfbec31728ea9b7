#pragma once

#include <memory>
#include <string>
#include <vector>

#include "fracflow/curvature.hpp"
#include "fracflow/geometry.hpp"
#include "fracflow/transform.hpp"

namespace fracflow {

enum class FarFieldMode { Direct, Transform };

struct FlowConfig {
  KernelPtr kernel;
  double delta = 0.0;        // near-field radius; 0 selects 4h
  double mobility = 1.0;     // constant factor
  Anisotropy mobility_table; // multiplies `mobility` by a function of the gradient direction
  double c1 = 0.0;
  std::vector<double> c1_field;  // per grid node; replaces c1 when non-empty
  double cfl = 0.5;
  double band_width = 6.0;  // in units of h; nodes with |u| > band_width * h are frozen; 0 = whole grid
  double grad_factor = 1e-6;
  double t_end = 0.0;
  double snapshot_every = 0.0;  // 0 = initial and final snapshots only
  FarFieldMode far_field_mode = FarFieldMode::Transform;
  int transform_levels = 32;
  int reinit_every = 1;       // steps between signed-distance reinitializations; 0 = never
  double clamp_cells = 10.0;  // clamp used by reinitialization
  int subcell = 8;
  Vec2 center;                // reference point for radius statistics
  bool keep_fields = false;
  std::size_t max_steps = 10000000;
  double stop_radius = 0.0;   // stop once the largest contour radius falls below this; 0 = off
  std::string dump_path;      // where a numerical abort writes the offending field; empty = no dump

  double mobility_at(Vec2 p) const;
  double c1_at(std::size_t node) const { return c1_field.empty() ? c1 : c1_field[node]; }
  void validate(const Grid& grid) const;
};

// Largest |c1(x) - c1(y)| / |x - y| over neighbouring nodes.
double c1_lipschitz(const Grid& grid, const std::vector<double>& c1_field);

struct FlowState {
  LevelSetField field;
  double t = 0.0;
  std::size_t step_count = 0;
  double last_dt = 0.0;
  double max_velocity = 0.0;      // max |du/dt| of the last step
  double max_normal_speed = 0.0;  // max |mu (c1 + kappa)| over active nodes
  std::size_t band_size = 0;      // nodes inside the band
  std::size_t active_nodes = 0;   // band nodes with a nonzero upwind gradient
};

struct VelocityField {
  std::vector<double> v;  // du/dt per node
  double max_velocity = 0.0;
  double max_normal_speed = 0.0;
  std::size_t band_size = 0;
  std::size_t active_nodes = 0;
};

struct RunResult {
  std::vector<FrontSnapshot> snapshots;
  FlowState final_state;
  bool extinct = false;
  bool aborted = false;
  std::string message;
};

class FlowSolver {
 public:
  FlowSolver(const Grid& grid, FlowConfig config);

  const Grid& grid() const { return grid_; }
  const FlowConfig& config() const { return config_; }
  const CurvatureEvaluator& evaluator() const { return *evaluator_; }

  // Upwind velocity: max(F_lower, 0) |D-u| + min(F_upper, 0) |D+u| with F = mu (c1 + kappa).
  VelocityField velocity(const LevelSetField& u) const;
  // cfl * h / max normal speed, capped by `remaining`; `remaining` when nothing moves.
  double cfl_dt(const VelocityField& vel, double remaining) const;
  // u += dt v; throws NumericalError on non-finite values.
  void advance(FlowState& state, const VelocityField& vel, double dt) const;
  // One step bounded by t_stop.
  void step(FlowState& state, double t_stop) const;
  RunResult run(const LevelSetField& u0) const;

  FrontSnapshot snapshot(const FlowState& state) const;

 private:
  Grid grid_;
  FlowConfig config_;
  std::shared_ptr<const CurvatureEvaluator> evaluator_;
  std::unique_ptr<FarFieldTransform> transform_;
};

// Magnitudes of the upwind gradients at node k: (growth, shrink), i.e. used when the speed is
// positive (values rise toward larger neighbours) and negative.
std::pair<double, double> upwind_gradients(const LevelSetField& u, int i, int j);

}  // namespace fracflow
