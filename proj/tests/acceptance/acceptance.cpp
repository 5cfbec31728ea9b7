// Acceptance suite: one PASS/FAIL line per criterion. Criteria can be selected by number on the
// command line (default: all). Exit status 1 if any selected criterion fails.
#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iterator>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "fracflow/app.hpp"
#include "fracflow/audit.hpp"
#include "fracflow/parallel.hpp"
#include "fracflow/transform.hpp"
#include "fracflow/validation.hpp"

using namespace fracflow;
namespace fs = std::filesystem;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

KernelPtr power(double alpha, double prefactor = 1.0) {
  return std::make_shared<const KernelSpec>(KernelSpec::power_law(alpha, 2, {}, prefactor));
}

std::string fmt(double v, int digits = 4) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*g", digits, v);
  return buf;
}

struct Outcome {
  bool pass = false;
  std::string detail;
};

void report(int id, const char* name, const Outcome& o, double secs) {
  std::printf("[%s] %2d %s: %s (%.0f s)\n", o.pass ? "PASS" : "FAIL", id, name, o.detail.c_str(), secs);
  std::fflush(stdout);
}

void info(const std::string& line) {
  std::printf("       %s\n", line.c_str());
  std::fflush(stdout);
}

Grid disk_grid(double R, double h) { return Grid::centered(R + 12 * h, h); }

// Time at which the ball ODE (c1 = 0, mu = 1) reaches radius r_target.
double ode_time_at_radius(const BallTrajectory& tr, double r_target) {
  double lo = 0.0, hi = tr.t.back();
  for (int it = 0; it < 200; ++it) {
    const double mid = 0.5 * (lo + hi);
    (tr.radius_at(mid) > r_target ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

// 1. Linear fields have zero curvature at every band node.
Outcome crit_flat_front() {
  const double h = 1.0 / 32;
  const Grid g = Grid::centered(1.0, h);
  const double delta = 4 * h;
  double worst_ratio = 0.0;
  for (double alpha : {0.25, 0.5, 0.75}) {
    const KernelPtr k = power(alpha);
    const CurvatureEvaluator ev(g, k, delta);
    const double tol = 1e-8 * k->tail_mass(delta);
    for (Vec2 p : {Vec2{1.0, 0.0}, Vec2{0.6, 0.8}, Vec2{2 * std::cos(1.0), 2 * std::sin(1.0)}, Vec2{-0.3, 0.7}}) {
      const LevelSetField u = LevelSetField::affine(g, p, 0.1);
      const FieldContext ctx(u);
      for (std::size_t q = 0; q < g.size(); ++q) {
        if (std::fabs(u[q]) > 6 * h * norm(p)) continue;
        const CurvatureEval c = ev.evaluate(ctx, g.col(q), g.row(q));
        worst_ratio = std::max(worst_ratio, std::max(std::fabs(c.kappa_upper), std::fabs(c.kappa_lower)) / tol);
      }
    }
  }
  return {worst_ratio <= 1.0, "max |kappa| / (1e-8 tail_mass(delta)) = " + fmt(worst_ratio) + " over 3 alphas x 4 slopes"};
}

// 2. Grid curvature on the unit-disk band against the oracle.
Outcome crit_oracle_match() {
  const KernelPtr k = power(0.5);
  const double delta = 4.0 / 64;
  const DiskBandCheck coarse = disk_band_check(disk_grid(1.0, 1.0 / 64), {0, 0}, 1.0, k, delta, 1.0 / 64);
  const DiskBandCheck fine = disk_band_check(disk_grid(1.0, 1.0 / 128), {0, 0}, 1.0, k, delta, 1.0 / 128);
  const DiskBandCheck fine_scaled = disk_band_check(disk_grid(1.0, 1.0 / 128), {0, 0}, 1.0, k, 4.0 / 128, 1.0 / 128);
  auto mean = [](const DiskBandCheck& c) {
    double s = 0.0;
    for (const DiskBandRow& r : c.rows) s += r.rel_error;
    return s / static_cast<double>(c.rows.size());
  };
  info("delta = 4h at h = 1/128: max rel error " + fmt(fine_scaled.max_rel_error) + ", mean " + fmt(mean(fine_scaled)));
  const bool pass = coarse.max_rel_error <= 0.02 && fine.max_rel_error < coarse.max_rel_error && mean(fine) < mean(coarse);
  return {pass, "max rel error h=1/64: " + fmt(coarse.max_rel_error) + " (<= 0.02), h=1/128 at the same delta: " +
                    fmt(fine.max_rel_error) + "; mean " + fmt(mean(coarse)) + " -> " + fmt(mean(fine))};
}

// 3. kappa_ball(r) r^alpha is constant in r.
Outcome crit_homogeneity() {
  double worst = 0.0;
  for (double alpha : {0.25, 0.5, 0.75}) {
    const KernelPtr k = power(alpha);
    std::vector<double> v;
    for (double r : {0.5, 1.0, 2.0}) v.push_back(radial_ball_oracle(r, *k) * std::pow(r, alpha));
    for (double x : v) worst = std::max(worst, std::fabs(x / v[1] - 1.0));
  }
  const double frozen = radial_ball_oracle(1.0, *power(0.5));
  const bool frozen_ok = std::fabs(frozen / -7.416298709205488 - 1.0) < 1e-9;
  return {worst <= 0.005 && frozen_ok, "max deviation of kappa_ball(r) r^alpha: " + fmt(worst) +
                                           "; kappa_ball(1), alpha = 0.5: " + fmt(frozen, 16)};
}

// 4. Sign formula against the split evaluation for bounded kernels.
Outcome crit_bounded_equivalence() {
  const double h = 1.0 / 64;
  const Grid g = Grid::centered(1.5, h);
  std::vector<double> vals(g.size());
  for (std::size_t q = 0; q < g.size(); ++q) {
    const Vec2 p = g.point(g.col(q), g.row(q));
    vals[q] = std::sin(2 * p.x) * std::cos(p.y) + 0.3 * p.y;
  }
  const LevelSetField u(g, vals);
  const FieldContext ctx(u);
  const std::vector<std::pair<std::string, KernelPtr>> kernels{
      {"gaussian", std::make_shared<const KernelSpec>(KernelSpec::bounded(RadialProfile::gaussian(1.0, 0.15)))},
      {"annulus", std::make_shared<const KernelSpec>(KernelSpec::bounded(RadialProfile::annulus(0.1, 0.4, 2.0)))},
      {"sampled", std::make_shared<const KernelSpec>(
                      KernelSpec::bounded(RadialProfile::sampled({0.0, 0.2, 0.45}, {3.0, 1.0, 0.0})))}};
  std::string detail;
  bool pass = true;
  for (const auto& [name, k] : kernels) {
    const SignFormulaEvaluator sf(g, k);
    const CurvatureEvaluator ev(g, k, 4 * h);
    double worst = 0.0;
    for (std::size_t q = 0; q < g.size(); ++q) {
      const Vec2 p = g.point(g.col(q), g.row(q));
      if (std::fabs(p.x) > 0.5 || std::fabs(p.y) > 0.5 || q % 3 != 0) continue;
      const SignFormulaResult a = sf.evaluate(ctx, g.col(q), g.row(q));
      const CurvatureEval b = ev.evaluate(ctx, g.col(q), g.row(q));
      if (b.degenerate) continue;
      worst = std::max({worst, std::fabs(a.upper - b.kappa_upper), std::fabs(a.lower - b.kappa_lower)});
    }
    const double ratio = worst / sf.mass();
    pass = pass && ratio <= 1e-3;
    detail += (detail.empty() ? "" : ", ") + name + " " + fmt(ratio);
  }
  return {pass, "max |difference| / mass: " + detail + " (<= 1e-3)"};
}

// 5. Shrinking disk against the radial ODE down to r0 / 2.
Outcome crit_shrinking_disk() {
  const double h = 1.0 / 128, r0 = 1.0;
  const KernelPtr k = power(0.5);
  const BallTrajectory ode = ball_ode_trajectory(r0, *k, 0.0, 1.0, 0.2);
  const double t_half = ode_time_at_radius(ode, 0.5 * r0);
  const Grid g = disk_grid(r0, h);
  FlowConfig cfg;
  cfg.kernel = k;
  cfg.t_end = t_half;
  cfg.snapshot_every = t_half / 10;
  const RunResult run = FlowSolver(g, cfg).run(make_signed_distance(Shape::disk({0, 0}, r0), g));
  if (run.aborted) return {false, "run aborted: " + run.message};
  double worst = 0.0;
  for (const FrontSnapshot& s : run.snapshots) {
    const double r = std::sqrt(s.area / kPi);
    worst = std::max(worst, std::fabs(r / ode.radius_at(s.t) - 1.0));
  }
  const double closed_form = std::pow(1.0 - 1.5 * 7.416298709205488 * t_half, 2.0 / 3.0);
  info("t_half = " + fmt(t_half, 8) + ", closed-form radius there " + fmt(closed_form, 8) + ", steps " +
       std::to_string(run.final_state.step_count));
  return {worst <= 0.03 && run.final_state.t >= t_half * (1 - 1e-12),
          "max relative radius error " + fmt(worst) + " (<= 0.03) over " + std::to_string(run.snapshots.size()) + " snapshots"};
}

// 6. Nested disks stay ordered.
Outcome crit_comparison() {
  const double h = 1.0 / 64;
  const KernelPtr k = power(0.5);
  const Grid g = disk_grid(1.0, h);
  const BallTrajectory ode = ball_ode_trajectory(1.0, *k, 0.0, 1.0, 0.2);
  FlowConfig cfg;
  cfg.kernel = k;
  cfg.t_end = 1.05 * ode.extinction_time;
  const ComparisonResult r = comparison_harness(make_signed_distance(Shape::disk({0, 0}, 0.8), g),
                                                make_signed_distance(Shape::disk({0, 0}, 1.0), g), cfg);
  return {r.max_violation <= 1e-10 && r.fronts_nested,
          "max (u - v)+ = " + fmt(r.max_violation) + " over " + std::to_string(r.steps) + " shared steps to t = " +
              fmt(r.t.empty() ? 0.0 : r.t.back()) + ", fronts nested: " + (r.fronts_nested ? "yes" : "no")};
}

// 7. Relabelled initial data gives the same fronts.
Outcome crit_consistency() {
  const double h = 1.0 / 64;
  const KernelPtr k = power(0.5);
  const Grid g = disk_grid(1.0, h);
  const double t_half = ode_time_at_radius(ball_ode_trajectory(1.0, *k, 0.0, 1.0, 0.2), 0.5);
  FlowConfig cfg;
  cfg.kernel = k;
  cfg.t_end = t_half;
  cfg.snapshot_every = t_half / 8;
  const ConsistencyResult r =
      consistency_harness(make_signed_distance(Shape::disk({0, 0}, 1.0), g), [](double s) { return std::tanh(2 * s); }, cfg);
  return {r.max_distance <= 2 * h && !r.t.empty(), "max Hausdorff distance " + fmt(r.max_distance) + " = " +
                                                       fmt(r.max_distance / h) + " h over " + std::to_string(r.t.size()) +
                                                       " matched snapshots (<= 2h)"};
}

// 8. Containment in B_{R + C t}.
Outcome crit_containment() {
  const double h = 1.0 / 64;
  const KernelPtr k = power(0.5);
  auto check = [&](double R, double c1) {
    const Grid g = disk_grid(1.0, h);
    FlowConfig cfg;
    cfg.kernel = k;
    cfg.c1 = c1;
    cfg.t_end = 0.2;
    return containment_check(make_signed_distance(Shape::disk({0, 0}, R), g), {0, 0}, R, cfg);
  };
  std::string detail;
  bool pass = true;
  for (double c1 : {0.0, 2.0}) {
    const ContainmentResult r = check(1.0, c1);
    pass = pass && r.max_excess <= 2 * h;
    detail += (detail.empty() ? "" : "; ") + std::string("R = 1, c1 = ") + fmt(c1) + ": C = " + fmt(r.C, 6) +
              ", max excess " + fmt(r.max_excess) + " (<= 2h = " + fmt(2 * h) + ")";
  }
  for (double c1 : {0.0, 2.0}) {
    const ContainmentResult r = check(0.4, c1);
    info("R = 0.4, c1 = " + fmt(c1) + ": C = " + fmt(r.C, 6) + ", max excess " + fmt(r.max_excess) +
         (r.max_excess <= 2 * h ? " (contained)" : " (exceeds)"));
  }
  const double lens = lens_mass(*k, {1.0, 0.0});
  info("inf_e lens mass = " + fmt(lens, 8) + " = |kappa_ball(1/2)| = " + fmt(-radial_ball_oracle(0.5, *k), 8) +
       " > |kappa_ball(1)| = " + fmt(-radial_ball_oracle(1.0, *k), 8) + ": the bound outruns the unit disk");
  return {pass, detail};
}

std::string study_detail(const StudyResult& r) {
  std::string s;
  for (const StudyRow& row : r.rows)
    s += (s.empty() ? "" : ", ") + fmt(row.parameter) + " -> " + fmt(row.max_rel_error);
  return s;
}

// 9. alpha -> 1 approaches the classical circle law.
Outcome crit_alpha_limit() {
  const double h = 1.0 / 128, r0 = 0.5;
  FlowConfig base;
  const StudyResult r = mcf_convergence_study(StudyFamily::Alpha, {0.5, 0.7, 0.9, 0.95}, r0, disk_grid(r0, h), base);
  const double last = r.rows.back().max_rel_error;
  return {r.monotone && last <= 0.10, "max rel radius error per alpha: " + study_detail(r) + "; monotone " +
                                          (r.monotone ? "yes" : "no") + ", alpha = 0.95 error " + fmt(last) + " (<= 0.10)"};
}

// 10. epsilon -> 0 for the rescaled dislocation kernels.
Outcome crit_epsilon_limit() {
  const double h = 1.0 / 128, r0 = 0.5;
  FlowConfig base;
  const StudyResult r = mcf_convergence_study(StudyFamily::Epsilon, {0.4, 0.2, 0.1}, r0, disk_grid(r0, h), base);
  return {r.monotone, "max rel radius error per epsilon: " + study_detail(r) + "; monotone " + (r.monotone ? "yes" : "no")};
}

// 11. Admissibility audit.
Outcome crit_audit() {
  std::vector<double> g_samples;
  for (int i = 0; i < 16; ++i) g_samples.push_back(1.0 + 0.5 * std::cos(2 * kTwoPi * i / 16));
  const std::vector<std::pair<std::string, KernelSpec>> shipped{
      {"power 0.25", KernelSpec::power_law(0.25)},
      {"power 0.5", KernelSpec::power_law(0.5)},
      {"power 0.75", KernelSpec::power_law(0.75)},
      {"anisotropic power 0.5", KernelSpec::power_law(0.5, 2, Anisotropy(g_samples))},
      {"gaussian", KernelSpec::bounded(RadialProfile::gaussian(1.0, 0.25))},
      {"annulus", KernelSpec::bounded(RadialProfile::annulus(0.0, 0.5, 1.0))},
      {"sampled", KernelSpec::bounded(RadialProfile::sampled({0.0, 0.2, 0.45}, {3.0, 1.0, 0.0}))},
      {"dislocation 0.4", KernelSpec::rescaled_dislocation(0.4)},
      {"dislocation 0.1", KernelSpec::rescaled_dislocation(0.1)},
  };
  bool pass = true;
  double worst = 0.0;
  for (const auto& [name, k] : shipped) {
    const AdmissibilityReport rep = admissibility_audit(k);
    if (!rep.pass) info(name + " failed, plateau ratio " + fmt(rep.worst_plateau_ratio));
    pass = pass && rep.pass;
    worst = std::max(worst, rep.worst_plateau_ratio);
  }
  const AdmissibilityReport bypass = admissibility_audit(KernelSpec::power_law_unchecked(1.0));
  return {pass && !bypass.pass, std::to_string(shipped.size()) + " shipped kernels " + (pass ? "PASS" : "not all PASS") +
                                    " (worst plateau ratio " + fmt(worst) + "); alpha = 1 bypass " +
                                    (bypass.pass ? "PASS" : "FAIL") + " (tail plateau ratio " +
                                    fmt(bypass.tail.plateau_ratio) + ")"};
}

// 12. Transform far field equals direct summation and is faster.
Outcome crit_transform() {
  const double h = 1.25 / 128;
  const KernelPtr k = power(0.5);
  const Grid g = Grid::centered(1.25, h);
  const LevelSetField u = make_signed_distance(Shape::disk({0, 0}, 1.0), g);
  const double delta = 4 * h;
  const auto ev = std::make_shared<const CurvatureEvaluator>(g, k, delta);
  const FarFieldTransform tr(ev);
  const FieldContext ctx(u);
  auto t0 = Clock::now();
  const std::vector<double> up = transform_far_field(u, tr, Strictness::Upper);
  const std::vector<double> lo = transform_far_field(u, tr, Strictness::Lower);
  const double t_transform = seconds_since(t0);
  std::vector<double> dup(g.size()), dlo(g.size());
  t0 = Clock::now();
  parallel_for(g.size(), [&](std::size_t b, std::size_t e) {
    for (std::size_t q = b; q < e; ++q) {
      dup[q] = ev->far_field(ctx, g.col(q), g.row(q), 0.0, {1.0, 0.0}, Strictness::Upper);
      dlo[q] = ev->far_field(ctx, g.col(q), g.row(q), 0.0, {1.0, 0.0}, Strictness::Lower);
    }
  });
  const double t_direct = seconds_since(t0);
  double worst = 0.0;
  for (std::size_t q = 0; q < g.size(); ++q) worst = std::max({worst, std::fabs(up[q] - dup[q]), std::fabs(lo[q] - dlo[q])});
  const double tol = 1e-8 * k->tail_mass(delta);

  // The flow workload: band velocities with each far-field path, best of two timings.
  FlowConfig cfg;
  cfg.kernel = k;
  cfg.t_end = 1.0;
  double tv[2] = {1e300, 1e300};
  VelocityField vel[2];
  for (int mode = 0; mode < 2; ++mode) {
    cfg.far_field_mode = mode == 0 ? FarFieldMode::Transform : FarFieldMode::Direct;
    const FlowSolver solver(g, cfg);
    for (int rep = 0; rep < 2; ++rep) {
      t0 = Clock::now();
      vel[mode] = solver.velocity(u);
      tv[mode] = std::min(tv[mode], seconds_since(t0));
    }
  }
  double vdiff = 0.0;
  for (std::size_t q = 0; q < g.size(); ++q) vdiff = std::max(vdiff, std::fabs(vel[0].v[q] - vel[1].v[q]));
  const double speed_indicator = t_direct / t_transform, speed_band = tv[1] / tv[0];
  info("indicator mode, all " + std::to_string(g.size()) + " nodes: direct " + fmt(t_direct, 3) + " s, transform " +
       fmt(t_transform, 3) + " s; band velocity (" + std::to_string(vel[0].band_size) + " nodes): direct " +
       fmt(tv[1], 3) + " s, transform " + fmt(tv[0], 3) + " s, max velocity difference " + fmt(vdiff));
  return {worst <= tol && speed_indicator >= 5.0 && speed_band >= 5.0,
          std::to_string(g.nx) + "^2 grid: max |transform - direct| = " + fmt(worst) + " (<= " + fmt(tol) +
              "), speedup " + fmt(speed_indicator, 3) + "x indicator mode, " + fmt(speed_band, 3) + "x band velocity (>= 5)"};
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

// 13. Byte-identical outputs across thread counts.
Outcome crit_determinism() {
  const fs::path root = fs::temp_directory_path() / "fracflow_acceptance_determinism";
  fs::remove_all(root);
  RunConfig cfg;
  cfg.grid.extent = 1.0;
  cfg.grid.h = 1.0 / 64;
  cfg.initial.shape = "ellipse";
  cfg.initial.semi_a = 0.7;
  cfg.initial.semi_b = 0.45;
  cfg.initial.angle = 0.3;
  cfg.flow.t_end = 0.01;
  cfg.flow.snapshot_every = 0.005;
  cfg.flow.field_dumps = true;
  std::vector<std::vector<std::pair<std::string, std::string>>> outputs;
  std::ostringstream log;
  for (int threads : {1, 4, 8}) {
    set_thread_count(threads);
    RunConfig c = cfg;
    c.output_dir = (root / ("threads_" + std::to_string(threads))).string();
    const int code = cmd_simulate(c, log);
    if (code != 0) {
      set_thread_count(1);
      return {false, "simulate exited with " + std::to_string(code) + ": " + log.str()};
    }
    std::vector<std::pair<std::string, std::string>> files;
    for (const auto& e : fs::directory_iterator(c.output_dir))
      if (e.path().filename() != "config.resolved.ini") files.emplace_back(e.path().filename().string(), slurp(e.path()));
    std::sort(files.begin(), files.end());
    outputs.push_back(std::move(files));
  }
  set_thread_count(1);
  fs::remove_all(root);
  const bool same = outputs[0] == outputs[1] && outputs[0] == outputs[2];
  std::size_t bytes = 0;
  for (const auto& f : outputs[0]) bytes += f.second.size();
  return {same && !outputs[0].empty(), std::to_string(outputs[0].size()) + " files (" + std::to_string(bytes) +
                                           " bytes) per run; threads 1, 4, 8 " + (same ? "byte-identical" : "DIFFER")};
}

}  // namespace

int main(int argc, char** argv) {
  struct Crit {
    int id;
    const char* name;
    std::function<Outcome()> run;
  };
  const std::vector<Crit> crits{
      {1, "flat-front zero", crit_flat_front},
      {2, "oracle match", crit_oracle_match},
      {3, "homogeneity", crit_homogeneity},
      {4, "bounded-kernel equivalence", crit_bounded_equivalence},
      {5, "shrinking-disk trajectory", crit_shrinking_disk},
      {6, "discrete comparison principle", crit_comparison},
      {7, "level-set consistency", crit_consistency},
      {8, "containment", crit_containment},
      {9, "alpha -> 1 limit", crit_alpha_limit},
      {10, "epsilon -> 0 dislocation rescaling", crit_epsilon_limit},
      {11, "admissibility audit", crit_audit},
      {12, "performance path", crit_transform},
      {13, "determinism across threads", crit_determinism},
  };
  std::set<int> wanted;
  for (int i = 1; i < argc; ++i) wanted.insert(std::atoi(argv[i]));
  int failed = 0, ran = 0;
  for (const Crit& c : crits) {
    if (!wanted.empty() && !wanted.count(c.id)) continue;
    const auto t0 = Clock::now();
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    report(c.id, c.name, o, seconds_since(t0));
    ++ran;
    failed += o.pass ? 0 : 1;
  }
  std::printf("%d of %d criteria passed\n", ran - failed, ran);
  return failed == 0 ? 0 : 1;
}
