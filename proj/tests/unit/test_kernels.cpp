#include <doctest.h>

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/quadrature/tanh_sinh.hpp>
#include <algorithm>
#include <cmath>
#include <vector>

#include "fracflow/audit.hpp"
#include "fracflow/errors.hpp"
#include "fracflow/kernels.hpp"

using namespace fracflow;

TEST_SUITE("kernels") {
  TEST_CASE("power-law radial mass matches the closed form") {
    for (double alpha : {0.25, 0.5, 0.75}) {
      const KernelSpec k = KernelSpec::power_law(alpha, 2, {}, 1.5);
      for (auto [a, b] : {std::pair{0.1, 0.7}, std::pair{0.5, 3.0}}) {
        const double expected = 1.5 * (std::pow(a, -alpha) - std::pow(b, -alpha)) / alpha;
        CHECK(k.radial_mass(0.4, a, b) == doctest::Approx(expected).epsilon(1e-12));
      }
      const double tail = 1.5 * 2 * M_PI * std::pow(0.2, -alpha) / alpha;
      CHECK(k.tail_mass(0.2) == doctest::Approx(tail).epsilon(1e-12));
      CHECK(k.halfspace_tail(0.2, {0.6, 0.8}) == doctest::Approx(tail / 2).epsilon(1e-12));
      CHECK(k.density({0.3, 0.4}) == doctest::Approx(1.5 * std::pow(0.5, -2 - alpha)).epsilon(1e-14));
    }
  }

  TEST_CASE("one-dimensional power law") {
    const KernelSpec k = KernelSpec::power_law(0.5, 1);
    CHECK(k.radial_mass(0.0, 1.0, INFINITY) == doctest::Approx(2.0).epsilon(1e-14));
    CHECK(k.tail_mass(1.0) == doctest::Approx(4.0).epsilon(1e-14));
  }

  TEST_CASE("alpha outside (0,1) is rejected unless unchecked") {
    CHECK_THROWS_AS(KernelSpec::power_law(1.0), ConfigError);
    CHECK_THROWS_AS(KernelSpec::power_law(0.0), ConfigError);
    CHECK_NOTHROW(KernelSpec::power_law_unchecked(1.0));
  }

  TEST_CASE("anisotropy integral agrees with a fine midpoint rule") {
    std::vector<double> samples;
    for (int i = 0; i < 16; ++i) samples.push_back(1.2 + std::sin(i) + 0.1 * i);
    const Anisotropy g(samples);
    const double a = -1.0, b = 9.0;
    const int n = 200000;
    double s = 0.0;
    for (int i = 0; i < n; ++i) s += g(a + (i + 0.5) * (b - a) / n);
    CHECK(g.integral(a, b) == doctest::Approx(s * (b - a) / n).epsilon(1e-8));
    CHECK(g(2 * M_PI * 3 / 16) == doctest::Approx(samples[3]));
    CHECK_FALSE(g.is_even());
  }

  TEST_CASE("anisotropic power law scales the tail by the mean of g") {
    std::vector<double> samples;
    for (int i = 0; i < 16; ++i) samples.push_back(i % 2 ? 3.0 : 1.0);
    const Anisotropy g(samples);
    const KernelSpec k = KernelSpec::power_law(0.5, 2, g);
    CHECK(k.tail_mass(1.0) == doctest::Approx(g.integral(0, 2 * M_PI) / 0.5).epsilon(1e-12));
  }

  TEST_CASE("bounded profile moments") {
    const RadialProfile gauss = RadialProfile::gaussian(2.0, 0.3);
    CHECK(gauss.moment(0.0, INFINITY, 2) == doctest::Approx(2.0 * 0.09 / 2).epsilon(1e-12));
    const RadialProfile ann = RadialProfile::annulus(0.1, 0.4, 2.0);
    CHECK(ann.moment(0.0, 1.0, 2) == doctest::Approx(2.0 * (0.16 - 0.01) / 2).epsilon(1e-14));
    const RadialProfile tri = RadialProfile::sampled({0.0, 1.0}, {1.0, 0.0});
    // integral_0^1 (1 - r) r dr = 1/6
    CHECK(tri.moment(0.0, 2.0, 2) == doctest::Approx(1.0 / 6).epsilon(1e-14));
    const KernelSpec k = KernelSpec::bounded(ann);
    CHECK(k.total_mass() == doctest::Approx(2 * M_PI * 0.15).epsilon(1e-12));
  }

  TEST_CASE("dislocation base profile has the s^-3 tail") {
    for (double s : {1.0, 2.0, 7.5}) CHECK(KernelSpec::dislocation_base(s, 2) == doctest::Approx(std::pow(s, -3)));
    const KernelSpec k = KernelSpec::rescaled_dislocation(0.1);
    CHECK(k.is_bounded());
    CHECK(k.total_mass() > 0);
  }

  TEST_CASE("parabola region mass against polar tanh-sinh quadrature") {
    const double alpha = 0.5;
    const KernelSpec k = KernelSpec::power_law(alpha);
    boost::math::quadrature::tanh_sinh<double> ts;
    for (double r : {1.0, 0.125}) {
      // psi is the angle from the tangent line; rho0 = r sin(psi) / cos^2(psi), rho in (rho0, 1).
      auto f = [&](double psi) {
        const double c = std::cos(psi);
        const double rho0 = r * std::sin(psi) / (c * c);
        return rho0 >= 1.0 ? 0.0 : (std::pow(rho0, -alpha) - 1.0) / alpha;
      };
      const double psi_max = std::asin(2.0 / (r + std::sqrt(r * r + 4.0)));
      const double expected = 4.0 * ts.integrate(f, 0.0, psi_max, 1e-14);
      CHECK(parabola_region_mass(k, r, {0.6, 0.8}, 1.0) == doctest::Approx(expected).epsilon(1e-8));
    }
  }

  TEST_CASE("lens mass of the half-power law") {
    const KernelSpec k = KernelSpec::power_law(0.5);
    // The lens {0 <= e.z <= |z|^2} is the exterior of the ball of radius 1/2 seen from its boundary,
    // so its mass is |kappa_ball(1/2)| = B(1/2, 1/4) / alpha.
    const double expected = std::beta(0.5, 0.25) / 0.5;
    CHECK(expected == doctest::Approx(10.488230217).epsilon(1e-9));
    CHECK(lens_mass(k, {1.0, 0.0}) == doctest::Approx(expected).epsilon(1e-9));
    CHECK(lens_mass(k, {0.0, -1.0}) == doctest::Approx(expected).epsilon(1e-9));
  }

  TEST_CASE("lens mass of bounded kernels against a Cartesian region quadrature") {
    // e = (1, 0): the region is x >= 0 with y^2 >= x - x^2, i.e. everything for x >= 1.
    using GK = boost::math::quadrature::gauss_kronrod<double, 31>;
    boost::math::quadrature::tanh_sinh<double> outer;
    for (const KernelSpec& k : {KernelSpec::bounded(RadialProfile::gaussian(1.0, 0.6)),
                                KernelSpec::bounded(RadialProfile::annulus(0.2, 1.5, 2.0))}) {
      const double reach = std::isfinite(k.profile()->support()) ? k.profile()->support() : 8.0;
      auto column = [&](double x) {
        const double y0 = x < 1.0 ? std::sqrt(x - x * x) : 0.0;
        if (y0 >= reach) return 0.0;
        auto f = [&](double y) { return k.density({x, y}); };
        // Split at the profile's radial breakpoints seen along this column.
        std::vector<double> cuts{y0};
        for (double b : k.radial_breakpoints())
          if (b > std::hypot(x, y0) && b < reach) cuts.push_back(std::sqrt(b * b - x * x));
        cuts.push_back(reach);
        double s = 0.0;
        for (std::size_t i = 0; i + 1 < cuts.size(); ++i) s += GK::integrate(f, cuts[i], cuts[i + 1], 6, 1e-10);
        return 2.0 * s;
      };
      std::vector<double> xs{0.0, 1.0, reach};
      for (double b : k.radial_breakpoints())
        if (b > 0 && b < reach) xs.push_back(b);
      std::sort(xs.begin(), xs.end());
      double expected = 0.0;
      for (std::size_t i = 0; i + 1 < xs.size(); ++i)
        if (xs[i + 1] > xs[i]) expected += outer.integrate(column, xs[i], xs[i + 1], 1e-9);
      CHECK(lens_mass(k, {1.0, 0.0}) == doctest::Approx(expected).epsilon(1e-4));
      CHECK(lens_mass(k, {std::cos(2.0), std::sin(2.0)}) == doctest::Approx(expected).epsilon(1e-4));
    }
  }

  TEST_CASE("Aitken extrapolation") {
    std::vector<double> s;
    for (int k = 0; k < 6; ++k) s.push_back(1.0 + std::ldexp(1.0, -k));
    CHECK(aitken_limit(s) == doctest::Approx(1.0).epsilon(1e-14));
    CHECK(aitken_limit({3.0, 3.0, 3.0}) == 3.0);
    CHECK_THROWS_AS(aitken_limit({}), DomainError);
  }

  TEST_CASE("audit separates admissible kernels from the alpha = 1 bypass") {
    CHECK(admissibility_audit(KernelSpec::power_law(0.5), 4).pass);
    CHECK(admissibility_audit(KernelSpec::bounded(RadialProfile::gaussian(1.0, 0.25)), 4).pass);
    const AdmissibilityReport bad = admissibility_audit(KernelSpec::power_law_unchecked(1.0), 4);
    CHECK_FALSE(bad.pass);
    CHECK_FALSE(bad.tail.pass);
  }
}
