#include <doctest.h>

#include <cmath>

#include "fracflow/errors.hpp"
#include "fracflow/flow.hpp"
#include "fracflow/parallel.hpp"

using namespace fracflow;

namespace {

FlowConfig half_power() {
  FlowConfig c;
  c.kernel = std::make_shared<const KernelSpec>(KernelSpec::power_law(0.5));
  return c;
}

}  // namespace

TEST_SUITE("flow") {
  TEST_CASE("upwind gradients of an affine field") {
    const Grid g = Grid::centered(0.5, 1.0 / 16);
    const LevelSetField u = LevelSetField::affine(g, {0.6, -0.8}, 0.0);
    const auto [grow, shrink] = upwind_gradients(u, 5, 5);
    CHECK(grow == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(shrink == doctest::Approx(1.0).epsilon(1e-12));
  }

  TEST_CASE("configuration is validated against the grid") {
    const Grid g = Grid::centered(1.0, 1.0 / 32);
    FlowConfig c = half_power();
    c.t_end = 0.1;
    c.delta = g.h;  // below 2h
    CHECK_THROWS_AS(FlowSolver(g, c), ConfigError);
    c.delta = 0.0;
    c.cfl = 1.5;
    CHECK_THROWS_AS(FlowSolver(g, c), ConfigError);
  }

  TEST_CASE("CFL step from the largest normal speed") {
    const Grid g = Grid::centered(1.0, 1.0 / 32);
    FlowConfig c = half_power();
    c.t_end = 1.0;
    const FlowSolver s(g, c);
    VelocityField v;
    v.max_normal_speed = 4.0;
    v.max_velocity = 4.0;
    CHECK(s.cfl_dt(v, 1.0) == doctest::Approx(0.5 * g.h / 4.0));
    CHECK(s.cfl_dt(v, 1e-5) == doctest::Approx(1e-5));
    v.max_velocity = 0.0;
    CHECK(s.cfl_dt(v, 0.3) == doctest::Approx(0.3));
  }

  TEST_CASE("a disk shrinks along dr/dt = -K r^-alpha") {
    const double h = 1.0 / 32, r0 = 0.6, alpha = 0.5;
    const Grid g = Grid::centered(r0 + 12 * h, h);
    FlowConfig c = half_power();
    c.t_end = 0.01;
    const RunResult run = FlowSolver(g, c).run(make_signed_distance(Shape::disk({0, 0}, r0), g));
    REQUIRE_FALSE(run.aborted);
    REQUIRE(run.snapshots.size() == 2);
    // Closed form with K = |kappa_ball(1)| = B(1/2, 1/4) 2^-alpha / alpha.
    const double K = std::beta(0.5, 0.25) * std::pow(2.0, -alpha) / alpha;
    const double r_exact = std::pow(std::pow(r0, 1 + alpha) - (1 + alpha) * K * c.t_end, 1 / (1 + alpha));
    const double r_num = std::sqrt(run.snapshots.back().area / M_PI);
    CHECK(r_num == doctest::Approx(r_exact).epsilon(0.01));
  }

  TEST_CASE("a positive driving force can stop the shrinking") {
    const double h = 1.0 / 32, r0 = 0.5;
    const Grid g = Grid::centered(r0 + 14 * h, h);
    FlowConfig c = half_power();
    c.c1 = 30.0;  // above |kappa_ball(1/2)|, so the disk grows
    c.t_end = 0.002;
    const RunResult run = FlowSolver(g, c).run(make_signed_distance(Shape::disk({0, 0}, r0), g));
    REQUIRE_FALSE(run.aborted);
    CHECK(run.snapshots.back().area > run.snapshots.front().area);
  }

  TEST_CASE("velocity does not depend on the thread count") {
    const Grid g = Grid::centered(1.0, 1.0 / 32);
    FlowConfig c = half_power();
    c.t_end = 1.0;
    const LevelSetField u = make_signed_distance(Shape::ellipse({0, 0}, 0.6, 0.3, 0.2), g);
    set_thread_count(1);
    const VelocityField a = FlowSolver(g, c).velocity(u);
    set_thread_count(3);
    const VelocityField b = FlowSolver(g, c).velocity(u);
    set_thread_count(1);
    CHECK(a.v == b.v);
    CHECK(a.band_size == b.band_size);
  }

  TEST_CASE("direct and transform far fields give the same velocity") {
    const Grid g = Grid::centered(1.0, 1.0 / 32);
    FlowConfig c = half_power();
    c.t_end = 1.0;
    const LevelSetField u = make_signed_distance(Shape::dumbbell({-0.35, 0}, 0.25, {0.35, 0}, 0.2, 0.08), g);
    const VelocityField a = FlowSolver(g, c).velocity(u);
    c.far_field_mode = FarFieldMode::Direct;
    const VelocityField b = FlowSolver(g, c).velocity(u);
    double worst = 0.0;
    for (std::size_t k = 0; k < g.size(); ++k) worst = std::max(worst, std::fabs(a.v[k] - b.v[k]));
    CHECK(worst < 1e-8 * c.kernel->tail_mass(4 * g.h));
  }
}
