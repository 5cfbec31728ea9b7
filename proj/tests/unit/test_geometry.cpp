#include <doctest.h>

#include <cmath>
#include <filesystem>

#include "fracflow/errors.hpp"
#include "fracflow/geometry.hpp"

using namespace fracflow;

namespace {

// Brute-force distance from x to the ellipse boundary by dense parameter sampling and local refinement.
double brute_ellipse_distance(double a, double b, Vec2 x) {
  double best = INFINITY, best_t = 0.0;
  const int n = 20000;
  for (int i = 0; i < n; ++i) {
    const double t = 2 * M_PI * i / n;
    const double d = std::hypot(a * std::cos(t) - x.x, b * std::sin(t) - x.y);
    if (d < best) best = d, best_t = t;
  }
  double lo = best_t - 2 * M_PI / n, hi = best_t + 2 * M_PI / n;
  for (int it = 0; it < 100; ++it) {
    const double m1 = lo + (hi - lo) / 3, m2 = hi - (hi - lo) / 3;
    auto f = [&](double t) { return std::hypot(a * std::cos(t) - x.x, b * std::sin(t) - x.y); };
    (f(m1) < f(m2) ? hi : lo) = (f(m1) < f(m2) ? m2 : m1);
  }
  const double t = 0.5 * (lo + hi);
  const double d = std::hypot(a * std::cos(t) - x.x, b * std::sin(t) - x.y);
  const bool inside = (x.x / a) * (x.x / a) + (x.y / b) * (x.y / b) <= 1.0;
  return inside ? d : -d;
}

std::vector<Polyline> circle(double r, int n) {
  Polyline p;
  for (int i = 0; i <= n; ++i) p.push_back({r * std::cos(2 * M_PI * (i % n) / n), r * std::sin(2 * M_PI * (i % n) / n)});
  return {p};
}

}  // namespace

TEST_SUITE("geometry") {
  TEST_CASE("disk and half-plane signed distances") {
    const Shape d = Shape::disk({0.1, -0.2}, 0.5);
    CHECK(d.signed_distance({0.1, -0.2}) == doctest::Approx(0.5));
    CHECK(d.signed_distance({1.1, -0.2}) == doctest::Approx(-0.5));
    const Shape hp = Shape::half_plane({0, 0}, {0, 2});
    CHECK(hp.signed_distance({3, 0.25}) == doctest::Approx(0.25));
    CHECK_FALSE(hp.bounded());
  }

  TEST_CASE("ellipse distance against brute force") {
    for (Vec2 x : {Vec2{0.3, 0.1}, Vec2{1.4, 0.7}, Vec2{-0.05, 0.4}, Vec2{0.0, 0.0}, Vec2{-2.0, -0.1}})
      CHECK(ellipse_signed_distance(1.0, 0.5, x) == doctest::Approx(brute_ellipse_distance(1.0, 0.5, x)).epsilon(1e-8));
  }

  TEST_CASE("rotated ellipse is the rotated distance") {
    const Shape e = Shape::ellipse({0.2, 0.1}, 0.8, 0.4, M_PI / 2);
    CHECK(e.signed_distance({0.2, 0.1 + 0.8}) == doctest::Approx(0.0).epsilon(1e-12));
    CHECK(e.signed_distance({0.2 + 0.4, 0.1}) == doctest::Approx(0.0).epsilon(1e-12));
  }

  TEST_CASE("signed distance field needs room on the grid") {
    const Grid g = Grid::centered(1.0, 1.0 / 32);
    CHECK_THROWS_AS(make_signed_distance(Shape::disk({0, 0}, 0.95), g), ConfigError);
    const LevelSetField u = make_signed_distance(Shape::disk({0, 0}, 0.5), g);
    CHECK(u.max_value() == doctest::Approx(10.0 / 32));
    CHECK(u.outside_value() < 0);
  }

  TEST_CASE("area and contour of a disk") {
    const double h = 1.0 / 64, r = 0.6;
    const LevelSetField u = make_signed_distance(Shape::disk({0.05, 0}, r), Grid::centered(1.0, h));
    CHECK(enclosed_area(u) == doctest::Approx(M_PI * r * r).epsilon(2e-4));
    const std::vector<Polyline> c = extract_contour(u);
    REQUIRE(c.size() == 1);
    CHECK(is_closed(c[0]));
    const RadiusStats s = radius_stats(c, {0.05, 0});
    CHECK(s.min_radius > r - h * h);
    CHECK(s.max_radius < r + h * h);
  }

  TEST_CASE("Hausdorff distance of concentric circles") {
    CHECK(hausdorff_distance(circle(1.0, 400), circle(0.9, 400), 0.01) == doctest::Approx(0.1).epsilon(1e-3));
    CHECK(hausdorff_distance(circle(1.0, 400), circle(1.0, 400), 0.01) == doctest::Approx(0.0));
    CHECK_THROWS_AS(hausdorff_distance({}, circle(1.0, 10), 0.01), DomainError);
  }

  TEST_CASE("reinitialization restores the signed distance") {
    const Grid g = Grid::centered(1.0, 1.0 / 64);
    const Shape d = Shape::disk({0, 0}, 0.5);
    const LevelSetField sd = make_signed_distance(d, g);
    std::vector<double> v(sd.values());
    for (double& x : v) x = std::tanh(3 * x);
    const LevelSetField r = reinitialize(LevelSetField(g, v));
    double worst = 0.0;
    for (std::size_t k = 0; k < g.size(); ++k)
      if (std::fabs(sd[k]) < 5 * g.h) worst = std::max(worst, std::fabs(r[k] - sd[k]));
    CHECK(worst < 0.05 * g.h);
  }

  TEST_CASE("field CSV round trip") {
    const Grid g = Grid::centered(0.5, 1.0 / 32);
    const LevelSetField u = make_signed_distance(Shape::disk({0, 0}, 0.1), g, 3.0);
    const std::string path = (std::filesystem::temp_directory_path() / "fracflow_unit_field.csv").string();
    write_field_csv(path, u, 0.25);
    const LevelSetField w = read_field_csv(path);
    std::filesystem::remove(path);
    CHECK(w.grid() == g);
    CHECK(w.values() == u.values());
  }
}
