#include "fracflow/validation.hpp"

#include <algorithm>
#include <array>
// pchip.hpp in Boost 1.74 calls isnan unqualified; this brings boost::math::isnan into scope.
#include <boost/math/special_functions/fpclassify.hpp>
#include <boost/math/interpolators/pchip.hpp>
#include <boost/math/quadrature/tanh_sinh.hpp>
#include <boost/numeric/odeint.hpp>
#include <cmath>
#include <limits>
#include <memory>
#include <random>

#include "fracflow/csv.hpp"
#include "fracflow/errors.hpp"
#include "fracflow/parallel.hpp"

namespace fracflow {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

RunResult checked(RunResult r) {
  if (r.aborted) throw NumericalError(r.message);
  return r;
}

}  // namespace

double radial_ball_oracle(double r, const KernelSpec& kernel) {
  if (!(r > 0.0) || !std::isfinite(r)) throw DomainError("radial_ball_oracle needs a finite radius r > 0");
  if (kernel.dimension() == 1) return -kernel.radial_mass(kPi, 2.0 * r, kInf);

  // From x = (r, 0) the ray in direction theta = pi/2 + phi (phi in (0, pi)) leaves the disk after
  // the chord 2 r sin(phi); everything beyond it lies outside and in front of the tangent line.
  std::vector<double> cuts{0.0, kPi / 2, kPi};
  for (double b : kernel.angular_breakpoints())
    for (int k = -1; k <= 2; ++k) {
      const double w = b + k * kTwoPi - kPi / 2;
      if (w > 0.0 && w < kPi) cuts.push_back(w);
    }
  std::sort(cuts.begin(), cuts.end());
  cuts.erase(std::unique(cuts.begin(), cuts.end()), cuts.end());

  // Near the tangent the integrand behaves like d^-e (e the singular exponent, d the angular
  // distance); the end pieces are integrated in u = d^(1-e), where the integrand is bounded.
  const double e = kernel.singular_exponent();
  if (!(e < 1.0)) throw DomainError("radial_ball_oracle: the kernel is not integrable at the tangent");
  boost::math::quadrature::tanh_sinh<double> integrator;
  auto chord_mass = [&](double phi, double d) {
    return kernel.radial_mass(kPi / 2 + phi, 2.0 * r * std::sin(d), kInf);
  };
  double total = 0.0;
  const std::size_t pieces = cuts.size() - 1;
  for (std::size_t k = 0; k < pieces; ++k) {
    const double a = cuts[k], b = cuts[k + 1];
    if (!(b - a > 1e-14)) continue;
    double err = 0.0, l1 = 0.0, value = 0.0;
    if (k == 0 || k + 1 == pieces) {
      const bool left = k == 0;
      const double span = b - a;
      const double q = 1.0 - e;
      auto f = [&](double u) {
        const double d = std::max(std::pow(u, 1.0 / q), 1e-250);
        const double phi = left ? d : kPi - d;
        return chord_mass(phi, d) * std::pow(d, e) / q;
      };
      value = integrator.integrate(f, 0.0, std::pow(span, q), 1e-12, &err, &l1);
    } else {
      auto f = [&](double phi) { return chord_mass(phi, phi <= kPi / 2 ? phi : kPi - phi); };
      value = integrator.integrate(f, a, b, 1e-12, &err, &l1);
    }
    if (err > 1e-8 * l1 && err > 1e-14) throw AccuracyError("radial_ball_oracle: angular quadrature did not converge");
    total += value;
  }
  return -total;
}

double monte_carlo_ball_curvature(double r, const KernelSpec& kernel, std::size_t samples, std::uint64_t seed) {
  if (!(r > 0.0)) throw DomainError("monte_carlo_ball_curvature needs r > 0");
  if (kernel.dimension() != 2) throw DomainError("monte_carlo_ball_curvature is 2D only");
  if (samples < 64) throw ConfigError("monte_carlo_ball_curvature needs at least 64 samples");
  constexpr int kShells = 60;
  const std::size_t per_shell = samples / kShells;
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  double total = kernel.halfspace_tail(2.0 * r, {-1.0, 0.0});
  for (int k = 0; k < kShells; ++k) {
    const double hi = 2.0 * r * std::ldexp(1.0, -k), lo = 0.5 * hi;
    // Hits need -rho / (2r) < cos(theta) < 0, so directions are drawn from the two windows of
    // half-width w next to the tangent; the sector area is 2 w / (2 pi) of the shell.
    const double w = std::asin(std::min(1.0, hi / (2.0 * r)));
    const double area = w * (hi * hi - lo * lo);
    double sum = 0.0;
    for (std::size_t n = 0; n < per_shell; ++n) {
      // Uniform in area: rho^2 uniform on [lo^2, hi^2].
      const double rho = std::sqrt(lo * lo + (hi * hi - lo * lo) * unit(rng));
      const double phi = w * unit(rng);
      const double th = unit(rng) < 0.5 ? kPi / 2 + phi : 3 * kPi / 2 - phi;
      const Vec2 z{rho * std::cos(th), rho * std::sin(th)};
      // |x + z|^2 - r^2 expanded, so tiny shells do not cancel against r^2.
      if (z.x < 0.0 && 2.0 * r * z.x + rho * rho > 0.0) sum += kernel.density(z);
    }
    total += area * sum / static_cast<double>(per_shell);
  }
  return -total;
}

BallCurvatureTable::BallCurvatureTable(const KernelSpec& kernel, double r_min, double r_max, int points)
    : r_min_(r_min), r_max_(r_max) {
  if (!(r_min > 0.0) || !(r_max >= r_min)) throw DomainError("BallCurvatureTable needs 0 < r_min <= r_max");
  if (points < 4) throw ConfigError("BallCurvatureTable needs at least 4 points");
  if (r_max_ < r_min_ * (1.0 + 1e-6)) {
    r_min_ *= 0.9;
    r_max_ *= 1.1;
  }
  const double s0 = std::log(r_min_), s1 = std::log(r_max_);
  std::vector<double> s(points), kv(points);
  for (int k = 0; k < points; ++k) {
    s[k] = s0 + (s1 - s0) * k / (points - 1);
    kv[k] = radial_ball_oracle(std::exp(s[k]), kernel);
  }
  log_values_ = std::all_of(kv.begin(), kv.end(), [](double v) { return v < 0.0; });
  std::vector<double> y(points);
  for (int k = 0; k < points; ++k) y[k] = log_values_ ? std::log(-kv[k]) : kv[k];
  auto spline = std::make_shared<boost::math::interpolators::pchip<std::vector<double>>>(std::move(s), std::move(y));
  interp_ = [spline](double x) { return (*spline)(x); };

  for (int k = 0; k + 1 < points; ++k) {
    const double rm = std::exp(s0 + (s1 - s0) * (k + 0.5) / (points - 1));
    const double exact = radial_ball_oracle(rm, kernel);
    const double approx = (*this)(rm);
    if (exact != 0.0) max_error_ = std::max(max_error_, std::fabs(approx / exact - 1.0));
  }
}

double BallCurvatureTable::operator()(double r) const {
  if (!(r >= r_min_ * (1 - 1e-12) && r <= r_max_ * (1 + 1e-12)))
    throw DomainError("BallCurvatureTable: radius outside the tabulated range");
  const double v = interp_(std::log(std::clamp(r, r_min_, r_max_)));
  return log_values_ ? -std::exp(v) : v;
}

DiskBandCheck disk_band_check(const Grid& grid, Vec2 center, double R, KernelPtr kernel, double delta, double band,
                              int subcell) {
  if (!kernel) throw ConfigError("disk_band_check needs a kernel");
  if (!(band > 0.0) || !(band < R)) throw DomainError("disk_band_check needs 0 < band < R");
  const LevelSetField u = make_signed_distance(Shape::disk(center, R), grid);
  const CurvatureEvaluator ev(grid, kernel, delta);
  const FieldContext ctx(u, subcell);
  const BallCurvatureTable table(*kernel, R - band - grid.h, R + band + grid.h);
  std::vector<std::size_t> nodes;
  for (std::size_t k = 0; k < grid.size(); ++k)
    if (std::fabs(u[k]) <= band) nodes.push_back(k);
  DiskBandCheck out;
  out.rows.resize(nodes.size());
  parallel_for(nodes.size(), [&](std::size_t b, std::size_t e) {
    for (std::size_t n = b; n < e; ++n) {
      const std::size_t k = nodes[n];
      const int i = grid.col(k), j = grid.row(k);
      const CurvatureEval c = ev.evaluate(ctx, i, j);
      DiskBandRow& row = out.rows[n];
      row.x = grid.point(i, j);
      row.u = u[k];
      row.kappa = 0.5 * (c.kappa_upper + c.kappa_lower);
      row.oracle = table(norm(row.x - center));
      row.rel_error = std::fabs(row.kappa / row.oracle - 1.0);
    }
  });
  for (const DiskBandRow& row : out.rows) out.max_rel_error = std::max(out.max_rel_error, row.rel_error);
  return out;
}

void write_disk_band_csv(const std::string& path, const DiskBandCheck& check) {
  CsvWriter w(path, {"x", "y", "u", "kappa", "oracle", "rel_error"});
  for (const DiskBandRow& r : check.rows) w.row({r.x.x, r.x.y, r.u, r.kappa, r.oracle, r.rel_error});
}

double BallTrajectory::radius_at(double time) const {
  if (t.empty()) throw DomainError("empty trajectory");
  if (time <= t.front()) return r.front();
  if (extinct && time >= extinction_time) return 0.0;
  if (time >= t.back()) return r.back();
  const std::size_t k = static_cast<std::size_t>(std::upper_bound(t.begin(), t.end(), time) - t.begin()) - 1;
  const double dt = t[k + 1] - t[k];
  const double s = (time - t[k]) / dt;
  const double h00 = (1 + 2 * s) * (1 - s) * (1 - s), h10 = s * (1 - s) * (1 - s);
  const double h01 = s * s * (3 - 2 * s), h11 = s * s * (s - 1);
  return h00 * r[k] + h10 * dt * drdt[k] + h01 * r[k + 1] + h11 * dt * drdt[k + 1];
}

BallTrajectory ball_ode_trajectory(double r0, const KernelSpec& kernel, double c1, double mu, double t_end,
                                   double r_min) {
  if (!(r0 > 0.0) || !std::isfinite(r0)) throw DomainError("ball_ode_trajectory needs r0 > 0");
  if (!(t_end >= 0.0) || !std::isfinite(t_end)) throw DomainError("ball_ode_trajectory needs t_end >= 0");
  if (!(mu > 0.0)) throw DomainError("ball_ode_trajectory needs mu > 0");
  if (r_min <= 0.0) r_min = 1e-3 * r0;
  // kappa_ball < 0, so the radius can never exceed r0 + mu max(c1, 0) t_end.
  const double r_hi = (r0 + mu * std::max(c1, 0.0) * t_end) * 1.01;
  const BallCurvatureTable table(kernel, std::min(r_min, r0) * 0.99, r_hi);

  using State = std::array<double, 1>;
  auto speed = [&](double r) { return mu * (c1 + table(std::clamp(r, table.r_min(), table.r_max()))); };
  auto rhs = [&](const State& x, State& dx, double) { dx[0] = speed(x[0]); };

  BallTrajectory out;
  out.t.push_back(0.0);
  out.r.push_back(r0);
  out.drdt.push_back(speed(r0));
  if (t_end == 0.0) return out;

  namespace ode = boost::numeric::odeint;
  auto stepper = ode::make_dense_output(1e-12, 1e-12, t_end / 256, ode::runge_kutta_dopri5<State>());
  const double v0 = std::fabs(out.drdt.back());
  const double dt0 = std::min(t_end, v0 > 0.0 ? 1e-3 * r0 / v0 : t_end) * 1e-2;
  stepper.initialize(State{r0}, 0.0, dt0);
  while (stepper.current_time() < t_end) {
    stepper.do_step(rhs);
    const double t1 = stepper.current_time();
    if (stepper.current_state()[0] <= r_min) {
      double lo = stepper.previous_time(), hi = t1;
      State x;
      for (int it = 0; it < 200 && hi - lo > 1e-15 * std::max(1.0, hi); ++it) {
        const double mid = 0.5 * (lo + hi);
        stepper.calc_state(mid, x);
        (x[0] <= r_min ? hi : lo) = mid;
      }
      if (hi <= t_end) {
        out.extinct = true;
        out.extinction_time = hi;
        out.t.push_back(hi);
        out.r.push_back(r_min);
        out.drdt.push_back(speed(r_min));
        return out;
      }
    }
    const double tt = std::min(t1, t_end);
    State x;
    stepper.calc_state(tt, x);
    out.t.push_back(tt);
    out.r.push_back(x[0]);
    out.drdt.push_back(speed(x[0]));
    if (x[0] <= r_min) {
      out.extinct = true;
      out.extinction_time = tt;
      return out;
    }
  }
  return out;
}

ComparisonResult comparison_harness(const LevelSetField& u0, const LevelSetField& v0, const FlowConfig& config) {
  if (!(u0.grid() == v0.grid())) throw DomainError("comparison_harness: fields live on different grids");
  if (u0.extension() != Extension::Constant || v0.extension() != Extension::Constant)
    throw DomainError("comparison_harness needs constant extensions");
  for (std::size_t k = 0; k < u0.grid().size(); ++k)
    if (u0[k] > v0[k]) throw DomainError("comparison_harness needs u0 <= v0 at every node");
  if (u0.outside_value() > v0.outside_value()) throw DomainError("comparison_harness needs u0 <= v0 outside the grid");

  const FlowSolver solver(u0.grid(), config);
  FlowState su, sv;
  su.field = u0;
  sv.field = v0;
  ComparisonResult r;
  const double t_end = config.t_end;
  while (su.t < t_end && r.steps < config.max_steps) {
    const VelocityField vu = solver.velocity(su.field), vv = solver.velocity(sv.field);
    const double remaining = t_end - su.t;
    const double dt = std::min(solver.cfl_dt(vu, remaining), solver.cfl_dt(vv, remaining));
    solver.advance(su, vu, dt);
    solver.advance(sv, vv, dt);
    if (std::fabs(su.t - t_end) <= 1e-12 * std::max(1.0, t_end)) su.t = sv.t = t_end;
    ++r.steps;
    double worst = 0.0;
    const auto& a = su.field.values();
    const auto& b = sv.field.values();
    for (std::size_t k = 0; k < a.size(); ++k) worst = std::max(worst, a[k] - b[k]);
    r.t.push_back(su.t);
    r.violation.push_back(worst);
    r.max_violation = std::max(r.max_violation, worst);
    for (const Polyline& line : extract_contour(su.field))
      for (const Vec2& p : line)
        if (sv.field.interpolate(p) < -1e-10) r.fronts_nested = false;
    if (su.field.max_value() < 0.0 && sv.field.max_value() < 0.0) break;
  }
  return r;
}

ConsistencyResult consistency_harness(const LevelSetField& u0, const std::function<double(double)>& theta,
                                      const FlowConfig& config) {
  if (std::fabs(theta(0.0)) > 1e-14) throw DomainError("consistency_harness needs theta(0) = 0");
  std::vector<double> vals = u0.values();
  vals.push_back(u0.outside_value());
  vals.push_back(0.0);
  std::sort(vals.begin(), vals.end());
  vals.erase(std::unique(vals.begin(), vals.end()), vals.end());
  for (std::size_t k = 0; k + 1 < vals.size(); ++k)
    if (!(theta(vals[k]) < theta(vals[k + 1]))) throw DomainError("consistency_harness needs theta strictly increasing");

  std::vector<double> mapped(u0.values().size());
  for (std::size_t k = 0; k < mapped.size(); ++k) mapped[k] = theta(u0[k]);
  const LevelSetField w0(u0.grid(), std::move(mapped), theta(u0.outside_value()));

  const FlowSolver solver(u0.grid(), config);
  const RunResult a = checked(solver.run(u0));
  const RunResult b = checked(solver.run(w0));
  ConsistencyResult r;
  const double spacing = u0.grid().h / 4;
  auto has_points = [](const std::vector<Polyline>& c) {
    return std::any_of(c.begin(), c.end(), [](const Polyline& l) { return !l.empty(); });
  };
  // Union of both snapshot schedules, each time paired with the nearest snapshot of the other run.
  auto nearest = [](const std::vector<FrontSnapshot>& list, double t) {
    const FrontSnapshot* best = nullptr;
    for (const FrontSnapshot& s : list)
      if (!best || std::fabs(s.t - t) < std::fabs(best->t - t)) best = &s;
    return best;
  };
  std::vector<std::pair<const FrontSnapshot*, const FrontSnapshot*>> pairs;
  for (const FrontSnapshot& s : a.snapshots) pairs.emplace_back(&s, nearest(b.snapshots, s.t));
  for (const FrontSnapshot& s : b.snapshots) pairs.emplace_back(nearest(a.snapshots, s.t), &s);
  std::sort(pairs.begin(), pairs.end(), [](const auto& x, const auto& y) {
    const double tx = std::min(x.first->t, x.second->t), ty = std::min(y.first->t, y.second->t);
    return tx != ty ? tx < ty : x < y;
  });
  pairs.erase(std::unique(pairs.begin(), pairs.end()), pairs.end());
  for (const auto& [sa, sb] : pairs) {
    if (!sa || !sb) continue;
    if (std::fabs(sa->t - sb->t) > std::max(sa->dt, sb->dt) + 1e-12) continue;
    const bool pa = has_points(sa->contour), pb = has_points(sb->contour);
    double d = 0.0;
    if (pa && pb) d = hausdorff_distance(sa->contour, sb->contour, spacing);
    else if (pa != pb) d = kInf;
    r.t.push_back(std::min(sa->t, sb->t));
    r.distance.push_back(d);
    r.max_distance = std::max(r.max_distance, d);
  }
  return r;
}

ContainmentResult containment_check(const LevelSetField& u0, Vec2 center, double R, const FlowConfig& config,
                                    int directions) {
  if (!(R > 0.0)) throw DomainError("containment_check needs R > 0");
  if (directions < 1) throw ConfigError("containment_check needs at least one direction");
  if (u0.extension() != Extension::Constant || !(u0.outside_value() < 0.0))
    throw DomainError("containment_check needs a negative constant exterior");
  const Grid& g = u0.grid();
  for (std::size_t k = 0; k < g.size(); ++k)
    if (u0[k] >= 0.0 && norm(g.point(g.col(k), g.row(k)) - center) > R * (1 + 1e-12))
      throw DomainError("containment_check: {u0 >= 0} is not inside B_R");
  if (!config.kernel) throw ConfigError("flow needs a kernel");

  ContainmentResult r;
  double sup_c1 = std::fabs(config.c1);
  if (!config.c1_field.empty()) {
    sup_c1 = 0.0;
    for (double v : config.c1_field) sup_c1 = std::max(sup_c1, std::fabs(v));
  }
  r.lens_infimum = kInf;
  for (int i = 0; i < directions; ++i) {
    const double th = kTwoPi * i / directions;
    const double m = lens_mass(*config.kernel, {std::cos(th), std::sin(th)});
    r.lens_by_direction.push_back(m);
    r.lens_infimum = std::min(r.lens_infimum, m);
  }
  r.C = sup_c1 - r.lens_infimum;

  FlowConfig cfg = config;
  cfg.center = center;
  r.horizon = cfg.t_end;
  if (r.C < 0.0) r.horizon = std::min(r.horizon, R / -r.C);
  cfg.t_end = r.horizon;
  if (!(cfg.snapshot_every > 0.0)) cfg.snapshot_every = r.horizon / 20;
  const RunResult run = checked(FlowSolver(g, cfg).run(u0));
  for (const FrontSnapshot& s : run.snapshots) {
    const double bound = R + r.C * s.t;
    if (!(bound > 0.0)) continue;
    const bool empty = std::all_of(s.contour.begin(), s.contour.end(), [](const Polyline& l) { return l.empty(); });
    const double maxr = empty ? 0.0 : s.radii.max_radius;
    r.t.push_back(s.t);
    r.max_radius.push_back(maxr);
    r.bound.push_back(bound);
    r.max_excess = std::max(r.max_excess, maxr - bound);
  }
  return r;
}

const char* family_name(StudyFamily f) { return f == StudyFamily::Alpha ? "alpha" : "epsilon"; }

StudyResult mcf_convergence_study(StudyFamily family, const std::vector<double>& parameters, double r0,
                                  const Grid& grid, FlowConfig base) {
  if (parameters.empty()) throw ConfigError("study needs at least one parameter");
  if (!(r0 > 0.0)) throw ConfigError("study.r0 must be positive");
  StudyResult out;
  out.family = family;
  out.r0 = r0;
  out.t_end = base.t_end > 0.0 ? base.t_end : 0.25 * r0 * r0;
  if (!(2 * kClassicalConstant * out.t_end < r0 * r0)) throw ConfigError("study.t_end exceeds the circle-law extinction time");
  base.t_end = out.t_end;
  if (!(base.snapshot_every > 0.0)) base.snapshot_every = out.t_end / 10;
  if (!(base.stop_radius > 0.0)) base.stop_radius = 2 * grid.h;
  const Vec2 center = base.center;
  const LevelSetField u0 = make_signed_distance(Shape::disk(center, r0), grid, base.clamp_cells);

  for (double p : parameters) {
    FlowConfig cfg = base;
    if (family == StudyFamily::Alpha)
      cfg.kernel = std::make_shared<const KernelSpec>(KernelSpec::power_law(p, 2, {}, 1.0 - p));
    else
      cfg.kernel = std::make_shared<const KernelSpec>(KernelSpec::rescaled_dislocation(p, 2));
    const RunResult run = checked(FlowSolver(grid, cfg).run(u0));
    StudyRow row;
    row.parameter = p;
    row.extinct = !run.message.empty();
    row.steps = run.final_state.step_count;
    for (const FrontSnapshot& s : run.snapshots) {
      const double req = std::sqrt(s.area / kPi);
      const double classical = std::sqrt(r0 * r0 - 2 * kClassicalConstant * s.t);
      row.max_rel_error = std::max(row.max_rel_error, std::fabs(req - classical) / classical);
      row.final_radius = req;
      row.classical_final = classical;
    }
    // A front that vanished before the horizon has radius 0 at the remaining snapshot times.
    if (run.final_state.t < out.t_end * (1 - 1e-12)) {
      row.max_rel_error = std::max(row.max_rel_error, 1.0);
      row.final_radius = 0.0;
      row.classical_final = std::sqrt(r0 * r0 - 2 * kClassicalConstant * out.t_end);
    }
    out.rows.push_back(row);
  }
  out.monotone = true;
  for (std::size_t k = 1; k < out.rows.size(); ++k)
    if (!(out.rows[k].max_rel_error < out.rows[k - 1].max_rel_error)) out.monotone = false;
  return out;
}

std::vector<AlphaLimitRow> alpha_limit_study(const std::vector<double>& alphas, const std::vector<double>& radii) {
  std::vector<AlphaLimitRow> rows;
  for (double a : alphas) {
    const KernelSpec k = KernelSpec::power_law(a, 2, {}, 1.0 - a);
    for (double r : radii) {
      AlphaLimitRow row;
      row.alpha = a;
      row.r = r;
      row.scaled_kappa = radial_ball_oracle(r, k);
      row.classical = -kClassicalConstant / r;
      row.rel_error = std::fabs(row.scaled_kappa / row.classical - 1.0);
      rows.push_back(row);
    }
  }
  return rows;
}

void write_comparison_csv(const std::string& path, const ComparisonResult& r) {
  CsvWriter w(path, {"step", "t", "violation"});
  for (std::size_t k = 0; k < r.t.size(); ++k) w.row({static_cast<double>(k + 1), r.t[k], r.violation[k]});
}

void write_consistency_csv(const std::string& path, const ConsistencyResult& r) {
  CsvWriter w(path, {"t", "hausdorff"});
  for (std::size_t k = 0; k < r.t.size(); ++k) w.row({r.t[k], r.distance[k]});
}

void write_containment_csv(const std::string& path, const ContainmentResult& r) {
  CsvWriter w(path, {"t", "max_radius", "bound", "excess", "C"});
  for (std::size_t k = 0; k < r.t.size(); ++k) w.row({r.t[k], r.max_radius[k], r.bound[k], r.max_radius[k] - r.bound[k], r.C});
}

void write_study_csv(const std::string& path, const StudyResult& r) {
  CsvWriter w(path, {"family", "parameter", "max_rel_error", "final_radius", "classical_final", "extinct", "steps"});
  for (const StudyRow& row : r.rows)
    w.row_mixed({family_name(r.family), format_double(row.parameter), format_double(row.max_rel_error),
                 format_double(row.final_radius), format_double(row.classical_final), row.extinct ? "1" : "0",
                 std::to_string(row.steps)});
}

void write_alpha_limit_csv(const std::string& path, const std::vector<AlphaLimitRow>& rows) {
  CsvWriter w(path, {"alpha", "r", "scaled_kappa", "classical", "rel_error"});
  for (const AlphaLimitRow& row : rows) w.row({row.alpha, row.r, row.scaled_kappa, row.classical, row.rel_error});
}

}  // namespace fracflow
