#include "fracflow/flow.hpp"

#include <algorithm>
#include <cmath>

#include "fracflow/errors.hpp"
#include "fracflow/parallel.hpp"

namespace fracflow {

double FlowConfig::mobility_at(Vec2 p) const {
  if (mobility_table.is_constant()) return mobility;
  return mobility * mobility_table(std::atan2(p.y, p.x));
}

void FlowConfig::validate(const Grid& grid) const {
  grid.validate();
  if (!kernel) throw ConfigError("flow needs a kernel");
  if (!(mobility > 0.0) || !std::isfinite(mobility)) throw ConfigError("flow.mobility must be positive");
  if (!std::isfinite(c1)) throw ConfigError("flow.c1 must be finite");
  if (!c1_field.empty()) {
    if (c1_field.size() != grid.size()) throw ConfigError("flow.c1 field does not match the grid");
    for (double v : c1_field)
      if (!std::isfinite(v)) throw ConfigError("flow.c1 field contains a non-finite value");
  }
  if (!(cfl > 0.0 && cfl <= 1.0)) throw ConfigError("flow.cfl must lie in (0, 1]");
  if (!(band_width >= 0.0)) throw ConfigError("flow.band_width must be non-negative");
  if (!(grad_factor > 0.0)) throw ConfigError("flow.grad_threshold must be positive");
  if (!(t_end >= 0.0) || !std::isfinite(t_end)) throw ConfigError("flow.t_end must be a non-negative number");
  if (!(snapshot_every >= 0.0)) throw ConfigError("flow.snapshot_every must be non-negative");
  if (delta != 0.0 && !(delta >= 2.0 * grid.h)) throw ConfigError("flow.delta must be at least 2h");
  if (transform_levels < 1) throw ConfigError("flow.transform_levels must be positive");
  if (reinit_every < 0) throw ConfigError("flow.reinit_every must be non-negative");
  if (far_field_mode == FarFieldMode::Transform && !kernel->is_even())
    throw ConfigError("flow.far_field = transform needs an even kernel; use direct");
}

double c1_lipschitz(const Grid& grid, const std::vector<double>& c1) {
  if (c1.empty()) return 0.0;
  double lip = 0.0;
  for (int j = 0; j < grid.ny; ++j)
    for (int i = 0; i < grid.nx; ++i) {
      const double v = c1[grid.index(i, j)];
      if (i + 1 < grid.nx) lip = std::max(lip, std::fabs(c1[grid.index(i + 1, j)] - v) / grid.h);
      if (j + 1 < grid.ny) lip = std::max(lip, std::fabs(c1[grid.index(i, j + 1)] - v) / grid.h);
    }
  return lip;
}

std::pair<double, double> upwind_gradients(const LevelSetField& u, int i, int j) {
  const double c = u.at(i, j);
  double grow = 0.0, shrink = 0.0;
  for (const auto& [di, dj] : {std::pair{1, 0}, std::pair{0, 1}}) {
    const double a = u.at(i - di, j - dj), b = u.at(i + di, j + dj);
    const double up = std::max({a - c, b - c, 0.0});
    const double down = std::max({c - a, c - b, 0.0});
    grow += up * up;
    shrink += down * down;
  }
  const double h = u.grid().h;
  return {std::sqrt(grow) / h, std::sqrt(shrink) / h};
}

FlowSolver::FlowSolver(const Grid& grid, FlowConfig config) : grid_(grid), config_(std::move(config)) {
  config_.validate(grid_);
  const double delta = config_.delta > 0.0 ? config_.delta : 4.0 * grid_.h;
  evaluator_ = std::make_shared<const CurvatureEvaluator>(grid_, config_.kernel, delta);
  if (config_.far_field_mode == FarFieldMode::Transform)
    transform_ = std::make_unique<FarFieldTransform>(evaluator_, config_.transform_levels);
}

VelocityField FlowSolver::velocity(const LevelSetField& u) const {
  if (!(u.grid() == grid_)) throw ConfigError("field grid does not match the flow grid");
  const std::size_t n = grid_.size();
  FieldContext ctx(u, config_.subcell, config_.grad_factor);
  VelocityField out;
  out.v.assign(n, 0.0);

  std::vector<std::size_t> nodes;
  std::vector<std::pair<double, double>> upwind;
  const double band = config_.band_width * grid_.h;
  for (std::size_t k = 0; k < n; ++k) {
    if (config_.band_width > 0.0 && std::fabs(u[k]) > band) continue;
    ++out.band_size;
    const auto g = upwind_gradients(u, grid_.col(k), grid_.row(k));
    if (g.first == 0.0 && g.second == 0.0) continue;
    nodes.push_back(k);
    upwind.push_back(g);
  }

  std::vector<CurvatureEval> evals(nodes.size());
  std::vector<char> live(nodes.size(), 0);
  parallel_for(nodes.size(), [&](std::size_t b, std::size_t e) {
    for (std::size_t q = b; q < e; ++q)
      live[q] = evaluator_->local_part(ctx, grid_.col(nodes[q]), grid_.row(nodes[q]), evals[q]) ? 1 : 0;
  });
  std::vector<std::size_t> live_nodes;
  std::vector<std::size_t> live_index;
  for (std::size_t q = 0; q < nodes.size(); ++q)
    if (live[q]) {
      live_nodes.push_back(nodes[q]);
      live_index.push_back(q);
    }

  std::vector<double> far_up, far_lo;
  if (transform_) {
    std::vector<double> thresholds(live_nodes.size());
    for (std::size_t q = 0; q < live_nodes.size(); ++q) thresholds[q] = u[live_nodes[q]];
    transform_->evaluate(ctx, live_nodes, thresholds, far_up, far_lo);
  } else {
    far_up.resize(live_nodes.size());
    far_lo.resize(live_nodes.size());
    parallel_for(live_nodes.size(), [&](std::size_t b, std::size_t e) {
      for (std::size_t q = b; q < e; ++q) {
        const int i = grid_.col(live_nodes[q]), j = grid_.row(live_nodes[q]);
        const Vec2 p = evals[live_index[q]].gradient;
        far_up[q] = evaluator_->far_field(ctx, i, j, u[live_nodes[q]], p, Strictness::Upper);
        far_lo[q] = evaluator_->far_field(ctx, i, j, u[live_nodes[q]], p, Strictness::Lower);
      }
    });
  }

  for (std::size_t q = 0; q < live_nodes.size(); ++q) {
    const std::size_t k = live_nodes[q];
    const CurvatureEval& e = evals[live_index[q]];
    const auto [grow, shrink] = upwind[live_index[q]];
    const double mu = config_.mobility_at(e.gradient);
    const double c1 = config_.c1_at(k);
    const double f_upper = mu * (c1 + e.near_part + far_up[q]);
    const double f_lower = mu * (c1 + e.near_part + far_lo[q]);
    const double rise = std::max(f_lower, 0.0), fall = std::min(f_upper, 0.0);
    out.v[k] = rise * grow + fall * shrink;
    ++out.active_nodes;
    if (grow > 0.0) out.max_normal_speed = std::max(out.max_normal_speed, rise);
    if (shrink > 0.0) out.max_normal_speed = std::max(out.max_normal_speed, -fall);
    out.max_velocity = std::max(out.max_velocity, std::fabs(out.v[k]));
  }
  return out;
}

double FlowSolver::cfl_dt(const VelocityField& vel, double remaining) const {
  if (!(remaining > 0.0)) return 0.0;
  const double speed = std::max(vel.max_normal_speed, 1e-12);
  if (vel.max_velocity == 0.0) return remaining;
  return std::min(config_.cfl * grid_.h / speed, remaining);
}

void FlowSolver::advance(FlowState& state, const VelocityField& vel, double dt) const {
  std::vector<double>& u = state.field.mutable_values();
  for (std::size_t k = 0; k < u.size(); ++k) {
    u[k] += dt * vel.v[k];
    if (!std::isfinite(u[k])) {
      if (!config_.dump_path.empty()) write_field_csv(config_.dump_path, state.field, state.t);
      throw NumericalError("non-finite level-set value at node " + std::to_string(k) + " after step " +
                           std::to_string(state.step_count + 1));
    }
  }
  state.t += dt;
  state.last_dt = dt;
  ++state.step_count;
  state.max_velocity = vel.max_velocity;
  state.max_normal_speed = vel.max_normal_speed;
  state.band_size = vel.band_size;
  state.active_nodes = vel.active_nodes;
  if (config_.reinit_every > 0 && state.step_count % static_cast<std::size_t>(config_.reinit_every) == 0)
    state.field = reinitialize(state.field, config_.clamp_cells);
}

void FlowSolver::step(FlowState& state, double t_stop) const {
  const VelocityField vel = velocity(state.field);
  const double dt = cfl_dt(vel, t_stop - state.t);
  advance(state, vel, dt);
  if (std::fabs(state.t - t_stop) <= 1e-12 * std::max(1.0, std::fabs(t_stop))) state.t = t_stop;
}

FrontSnapshot FlowSolver::snapshot(const FlowState& state) const {
  FrontSnapshot s = make_snapshot(state.field, state.t, config_.center, config_.keep_fields);
  s.step = state.step_count;
  s.dt = state.last_dt;
  s.max_velocity = state.max_velocity;
  return s;
}

RunResult FlowSolver::run(const LevelSetField& u0) const {
  RunResult r;
  r.final_state.field = u0;
  FlowState& st = r.final_state;
  r.snapshots.push_back(snapshot(st));
  const double t_end = config_.t_end;
  double next = config_.snapshot_every > 0.0 ? std::min(config_.snapshot_every, t_end) : t_end;
  std::size_t snap_index = 1;
  try {
    while (st.t < t_end && st.step_count < config_.max_steps) {
      step(st, next);
      const bool at_snapshot = st.t >= next;
      const bool extinct = st.field.max_value() < 0.0;
      bool stop_small = false;
      if (at_snapshot || extinct || config_.stop_radius > 0.0) {
        FrontSnapshot s = snapshot(st);
        stop_small = config_.stop_radius > 0.0 && s.radii.max_radius < config_.stop_radius;
        if (at_snapshot || extinct || stop_small) r.snapshots.push_back(std::move(s));
      }
      if (extinct) {
        r.extinct = true;
        r.message = "front extinct";
        break;
      }
      if (stop_small) {
        r.message = "front radius fell below the stop radius";
        break;
      }
      if (at_snapshot) {
        ++snap_index;
        next = config_.snapshot_every > 0.0 ? std::min(config_.snapshot_every * snap_index, t_end) : t_end;
      }
    }
  } catch (const NumericalError& e) {
    r.aborted = true;
    r.message = e.what();
  }
  return r;
}

}  // namespace fracflow
