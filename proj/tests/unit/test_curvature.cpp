#include <doctest.h>

#include <boost/math/quadrature/tanh_sinh.hpp>
#include <cmath>

#include "fracflow/curvature.hpp"
#include "fracflow/geometry.hpp"
#include "fracflow/transform.hpp"
#include "fracflow/validation.hpp"

using namespace fracflow;

namespace {

KernelPtr power(double alpha) { return std::make_shared<const KernelSpec>(KernelSpec::power_law(alpha)); }

}  // namespace

TEST_SUITE("curvature") {
  TEST_CASE("near field of a flat quadratic vanishes") {
    CHECK(near_field_kappa({1.0, 0.0}, Sym2{}, *power(0.5), 0.1) == 0.0);
  }

  TEST_CASE("near field of p = (a, 0), H = diag(0, b) against polar quadrature") {
    const double alpha = 0.5, a = 1.3, b = 2.0, delta = 0.1;
    // Region 0 <= -a x <= b y^2 / 2 inside B_delta. With psi the angle from the y axis into x < 0,
    // rho >= rho0 = 2 a sin(psi) / (b cos^2 psi); the two mirror halves contribute equally.
    auto f = [&](double psi) {
      const double c = std::cos(psi);
      const double rho0 = 2 * a * std::sin(psi) / (b * c * c);
      return rho0 >= delta ? 0.0 : (std::pow(rho0, -alpha) - std::pow(delta, -alpha)) / alpha;
    };
    const double q = b * delta / (2 * a);  // sin(psi) / cos^2(psi) = q at the cutoff
    const double psi_max = std::asin((-1 + std::sqrt(1 + 4 * q * q)) / (2 * q));
    boost::math::quadrature::tanh_sinh<double> ts;
    const double expected = 2 * ts.integrate(f, 0.0, psi_max, 1e-14);
    Sym2 H;
    H.yy = b;
    CHECK(near_field_kappa({a, 0.0}, H, *power(alpha), delta) == doctest::Approx(expected).epsilon(1e-8));
  }

  TEST_CASE("affine field has zero curvature") {
    const Grid g = Grid::centered(0.5, 1.0 / 16);
    const LevelSetField u = LevelSetField::affine(g, {0.6, -0.8}, 0.05);
    const KernelPtr k = power(0.5);
    for (auto [i, j] : {std::pair{8, 8}, std::pair{3, 12}, std::pair{0, 0}}) {
      const CurvatureEval c = kappa_at(u, i, j, k, 4 * g.h);
      CHECK(std::fabs(c.kappa_upper) < 1e-8 * k->tail_mass(4 * g.h));
      CHECK(std::fabs(c.kappa_lower) < 1e-8 * k->tail_mass(4 * g.h));
    }
  }

  TEST_CASE("disk boundary curvature near the ball value") {
    const double h = 1.0 / 32;
    const Grid g = Grid::centered(0.5 + 12 * h, h);
    const LevelSetField u = make_signed_distance(Shape::disk({0, 0}, 0.5), g);
    const KernelPtr k = power(0.5);
    const int i = g.nx / 2 + 16, j = g.ny / 2;  // node (0.5, 0) on the circle
    REQUIRE(std::fabs(g.point(i, j).x - 0.5) < 1e-12);
    const CurvatureEval c = kappa_at(u, i, j, k, 4 * h);
    const double oracle = -std::beta(0.5, 0.25) / 0.5;  // kappa_ball(1/2), alpha = 1/2
    CHECK(0.5 * (c.kappa_upper + c.kappa_lower) == doctest::Approx(oracle).epsilon(0.01));
    CHECK(c.kappa_upper == doctest::Approx(c.kappa_lower).epsilon(1e-6));
  }

  TEST_CASE("classical curvature of a circle") {
    const Grid g = Grid::centered(1.0, 1.0 / 64);
    const LevelSetField u = make_signed_distance(Shape::disk({0, 0}, 0.5), g);
    const ClassicalCurvature c = classical_curvature(u, g.nx / 2 + 32, g.ny / 2);
    CHECK(c.value == doctest::Approx(-2.0).epsilon(1e-3));
  }

  TEST_CASE("sign formula and split evaluation agree for a bounded kernel") {
    const double h = 1.0 / 32;
    const Grid g = Grid::centered(1.0, h);
    const LevelSetField u = make_signed_distance(Shape::ellipse({0, 0}, 0.5, 0.3, 0.4), g);
    const KernelPtr k = std::make_shared<const KernelSpec>(KernelSpec::bounded(RadialProfile::annulus(0.1, 0.4, 2.0)));
    const FieldContext ctx(u);
    const SignFormulaEvaluator sf(g, k);
    const CurvatureEvaluator ev(g, k, 4 * h);
    for (auto [i, j] : {std::pair{g.nx / 2 + 16, g.ny / 2}, std::pair{g.nx / 2 + 5, g.ny / 2 + 9}}) {
      const SignFormulaResult a = sf.evaluate(ctx, i, j);
      const CurvatureEval b = ev.evaluate(ctx, i, j);
      CHECK(std::fabs(a.upper - b.kappa_upper) < 1e-3 * sf.mass());
      CHECK(std::fabs(a.lower - b.kappa_lower) < 1e-3 * sf.mass());
    }
  }

  TEST_CASE("transform far field equals the direct sum") {
    const double h = 1.0 / 32;
    const Grid g = Grid::centered(0.75, h);
    const LevelSetField u = make_signed_distance(Shape::ellipse({0.05, 0}, 0.4, 0.25, 0.3), g);
    const KernelPtr k = power(0.5);
    const auto ev = std::make_shared<const CurvatureEvaluator>(g, k, 4 * h);
    const FarFieldTransform tr(ev);
    const FieldContext ctx(u);
    std::vector<std::size_t> nodes;
    std::vector<double> thr;
    for (std::size_t q = 0; q < g.size(); q += 7) nodes.push_back(q), thr.push_back(u[q]);
    std::vector<double> up, lo;
    tr.evaluate(ctx, nodes, thr, up, lo);
    double worst = 0.0;
    for (std::size_t n = 0; n < nodes.size(); ++n) {
      const int i = g.col(nodes[n]), j = g.row(nodes[n]);
      const Vec2 p = gradient_at(u, i, j);
      worst = std::max(worst, std::fabs(up[n] - ev->far_field(ctx, i, j, thr[n], p, Strictness::Upper)));
      worst = std::max(worst, std::fabs(lo[n] - ev->far_field(ctx, i, j, thr[n], p, Strictness::Lower)));
    }
    CHECK(worst < 1e-8 * k->tail_mass(4 * h));
  }

  TEST_CASE("cell weight table reproduces the tail mass") {
    const KernelPtr k = power(0.5);
    const CellWeightTable t(k, 1.0 / 16, 20, 20, 0.25);
    CHECK(t.table_sum() + t.beyond_mass() == doctest::Approx(t.tail_mass()).epsilon(1e-10));
    CHECK(t.weight(0, 0) == 0.0);
    CHECK(t.weight(7, 3) == doctest::Approx(t.weight(-3, 7)).epsilon(1e-12));
  }
}
