#include <doctest.h>

#include <cmath>

#include "fracflow/errors.hpp"
#include "fracflow/validation.hpp"

using namespace fracflow;

namespace {

// kappa_ball(r) = -(2r)^-alpha B(1/2, (1 - alpha)/2) / alpha for the isotropic power law, g = 1.
double closed_form_ball(double alpha, double r) {
  return -std::pow(2 * r, -alpha) * std::beta(0.5, (1 - alpha) / 2) / alpha;
}

KernelPtr power(double alpha) { return std::make_shared<const KernelSpec>(KernelSpec::power_law(alpha)); }

}  // namespace

TEST_SUITE("validation") {
  TEST_CASE("ball oracle against the Beta-function closed form") {
    for (double alpha : {0.25, 0.5, 0.75, 0.9})
      for (double r : {0.5, 1.0, 2.0})
        CHECK(radial_ball_oracle(r, *power(alpha)) == doctest::Approx(closed_form_ball(alpha, r)).epsilon(1e-9));
    // Frozen reference values at r = 1.
    CHECK(radial_ball_oracle(1.0, *power(0.25)) == doctest::Approx(-12.969335766520992).epsilon(1e-12));
    CHECK(radial_ball_oracle(1.0, *power(0.5)) == doctest::Approx(-7.4162987092054875).epsilon(1e-12));
    CHECK(radial_ball_oracle(1.0, *power(0.75)) == doctest::Approx(-7.380013678171074).epsilon(1e-12));
  }

  TEST_CASE("ball oracle in one dimension") {
    // The ball is a segment; seen from its end the kernel mass beyond 2r is (2r)^-alpha / alpha.
    const KernelSpec k = KernelSpec::power_law(0.5, 1);
    CHECK(radial_ball_oracle(1.0, k) == doctest::Approx(-std::pow(2.0, -0.5) / 0.5).epsilon(1e-12));
  }

  TEST_CASE("Monte Carlo agrees with the quadrature oracle") {
    const KernelSpec g = KernelSpec::bounded(RadialProfile::gaussian(1.0, 0.7));
    for (const KernelSpec& k : {KernelSpec::power_law(0.5), g, KernelSpec::rescaled_dislocation(0.3)}) {
      const double q = radial_ball_oracle(0.8, k);
      const double mc = monte_carlo_ball_curvature(0.8, k, 200000, 7);
      CHECK(mc == doctest::Approx(q).epsilon(5e-3));
    }
    CHECK(monte_carlo_ball_curvature(1.0, *power(0.5), 1000, 3) == monte_carlo_ball_curvature(1.0, *power(0.5), 1000, 3));
  }

  TEST_CASE("ball curvature table interpolates the oracle") {
    const BallCurvatureTable t(*power(0.5), 0.2, 2.0);
    CHECK(t.max_interpolation_error() < 1e-6);
    CHECK(t(0.77) == doctest::Approx(closed_form_ball(0.5, 0.77)).epsilon(1e-6));
  }

  TEST_CASE("ball ODE against the closed-form trajectory") {
    const double alpha = 0.5, r0 = 1.0;
    const double K = -closed_form_ball(alpha, 1.0);
    const double t_ext = std::pow(r0, 1 + alpha) / ((1 + alpha) * K);
    const BallTrajectory tr = ball_ode_trajectory(r0, *power(alpha), 0.0, 1.0, 0.2);
    CHECK(tr.extinct);
    CHECK(tr.extinction_time == doctest::Approx(t_ext).epsilon(1e-3));
    for (double t : {0.01, 0.05, 0.08}) {
      const double exact = std::pow(std::pow(r0, 1 + alpha) - (1 + alpha) * K * t, 1 / (1 + alpha));
      CHECK(tr.radius_at(t) == doctest::Approx(exact).epsilon(1e-8));
    }
  }

  TEST_CASE("alpha limit approaches the classical curvature") {
    const std::vector<AlphaLimitRow> rows = alpha_limit_study({0.9, 0.99, 0.999}, {1.0});
    REQUIRE(rows.size() == 3);
    CHECK(rows[1].rel_error < rows[0].rel_error);
    CHECK(rows[2].rel_error < rows[1].rel_error);
    CHECK(rows[2].rel_error < 0.01);
    CHECK(rows[0].classical == doctest::Approx(-kClassicalConstant));
  }

  TEST_CASE("harness preconditions") {
    const Grid g = Grid::centered(1.0, 1.0 / 16);
    const LevelSetField small = make_signed_distance(Shape::disk({0, 0}, 0.3), g);
    const LevelSetField big = make_signed_distance(Shape::disk({0, 0}, 0.4), g);
    FlowConfig c;
    c.kernel = power(0.5);
    c.t_end = 0.01;
    CHECK_THROWS_AS(comparison_harness(big, small, c), DomainError);
    CHECK_THROWS_AS(consistency_harness(small, [](double s) { return -s; }, c), DomainError);
    CHECK_THROWS_AS(consistency_harness(small, [](double s) { return s + 1; }, c), DomainError);
    CHECK_THROWS_AS(containment_check(big, {0, 0}, 0.3, c), DomainError);
  }

  TEST_CASE("short comparison and containment runs") {
    const double h = 1.0 / 32;
    const Grid g = Grid::centered(1.0, h);
    FlowConfig c;
    c.kernel = power(0.5);
    c.t_end = 0.01;
    const ComparisonResult cr = comparison_harness(make_signed_distance(Shape::disk({0, 0}, 0.4), g),
                                                   make_signed_distance(Shape::disk({0, 0}, 0.5), g), c);
    CHECK(cr.max_violation <= 1e-10);
    CHECK(cr.fronts_nested);
    const ContainmentResult ct = containment_check(make_signed_distance(Shape::disk({0, 0}, 0.4), g), {0, 0}, 0.4, c);
    CHECK(ct.C == doctest::Approx(-std::beta(0.5, 0.25) / 0.5).epsilon(1e-8));
    CHECK(ct.max_excess <= 2 * h);
  }
}
