#include "fracflow/cell_weights.hpp"

#include <algorithm>
#include <boost/math/quadrature/gauss.hpp>
#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/quadrature/tanh_sinh.hpp>
#include <cmath>
#include <map>
#include <string>

#include "fracflow/errors.hpp"

namespace fracflow {

namespace {

struct Rule {
  std::vector<double> x, w;  // on [-1, 1]
};

template <unsigned N>
Rule make_rule() {
  using G = boost::math::quadrature::gauss<double, N>;
  Rule r;
  const auto& a = G::abscissa();
  const auto& w = G::weights();
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (a[i] == 0.0) {
      r.x.push_back(0.0);
      r.w.push_back(w[i]);
    } else {
      r.x.push_back(-a[i]);
      r.w.push_back(w[i]);
      r.x.push_back(a[i]);
      r.w.push_back(w[i]);
    }
  }
  return r;
}

const Rule& rule(int n) {
  static const std::map<int, Rule> rules = {{2, make_rule<2>()}, {3, make_rule<3>()}, {4, make_rule<4>()},
                                            {5, make_rule<5>()}, {6, make_rule<6>()}, {8, make_rule<8>()},
                                            {10, make_rule<10>()}, {20, make_rule<20>()}};
  const auto it = rules.find(n);
  if (it == rules.end()) throw ConfigError("cell quadrature order must be one of 2, 3, 4, 5, 6, 8, 10, 20");
  return it->second;
}

double dist_to_box(double x0, double x1, double y0, double y1) {
  const double dx = x0 > 0 ? x0 : (x1 < 0 ? -x1 : 0.0);
  const double dy = y0 > 0 ? y0 : (y1 < 0 ? -y1 : 0.0);
  return std::hypot(dx, dy);
}

double far_corner(double x0, double x1, double y0, double y1) {
  return std::hypot(std::max(std::fabs(x0), std::fabs(x1)), std::max(std::fabs(y0), std::fabs(y1)));
}

void add_cut(std::vector<double>& cuts, double v, double lo, double hi) {
  if (v > lo && v < hi) cuts.push_back(v);
}

double nested_box(const KernelSpec& kernel, double x0, double x1, double y0, double y1, double delta,
                  const std::vector<double>& radii) {
  const Rule& inner = rule(20);
  auto column = [&](double x) {
    std::vector<double> cuts{y0, y1};
    for (double r : radii) {
      if (r > std::fabs(x)) {
        const double s = std::sqrt(r * r - x * x);
        add_cut(cuts, s, y0, y1);
        add_cut(cuts, -s, y0, y1);
      }
    }
    std::sort(cuts.begin(), cuts.end());
    double total = 0.0;
    for (std::size_t k = 0; k + 1 < cuts.size(); ++k) {
      const double a = cuts[k], b = cuts[k + 1];
      if (!(b > a)) continue;
      const double mid = 0.5 * (a + b), half = 0.5 * (b - a);
      if (std::hypot(x, mid) < delta) continue;
      double s = 0.0;
      for (std::size_t q = 0; q < inner.x.size(); ++q) s += inner.w[q] * kernel.density({x, mid + half * inner.x[q]});
      total += half * s;
    }
    return total;
  };
  std::vector<double> cuts{x0, x1};
  for (double r : radii) {
    add_cut(cuts, r, x0, x1);
    add_cut(cuts, -r, x0, x1);
    for (double y : {y0, y1}) {
      if (r > std::fabs(y)) {
        const double s = std::sqrt(r * r - y * y);
        add_cut(cuts, s, x0, x1);
        add_cut(cuts, -s, x0, x1);
      }
    }
  }
  std::sort(cuts.begin(), cuts.end());
  static thread_local boost::math::quadrature::tanh_sinh<double> ts(10);
  double total = 0.0;
  for (std::size_t k = 0; k + 1 < cuts.size(); ++k) {
    const double a = cuts[k], b = cuts[k + 1];
    if (!(b - a > 1e-15 * (std::fabs(a) + std::fabs(b)))) continue;
    total += ts.integrate(column, a, b, 1e-12);
  }
  return total;
}

}  // namespace

double box_mass(const KernelSpec& kernel, double x0, double x1, double y0, double y1, double delta, int kq) {
  const double dmin = dist_to_box(x0, x1, y0, y1);
  const double dmax = far_corner(x0, x1, y0, y1);
  if (dmax <= delta) return 0.0;
  std::vector<double> radii;
  if (delta > 0.0) radii.push_back(delta);
  for (double r : kernel.radial_breakpoints()) radii.push_back(r);
  bool special = false;
  for (double r : radii)
    if (r > dmin && r < dmax) special = true;
  const double size = std::max(x1 - x0, y1 - y0);
  if (dmin < 12.0 * size) special = true;
  if (special) return nested_box(kernel, x0, x1, y0, y1, delta, radii);
  const Rule& r = rule(kq);
  const double cx = 0.5 * (x0 + x1), hx = 0.5 * (x1 - x0);
  const double cy = 0.5 * (y0 + y1), hy = 0.5 * (y1 - y0);
  double total = 0.0;
  for (std::size_t b = 0; b < r.x.size(); ++b) {
    double row = 0.0;
    for (std::size_t a = 0; a < r.x.size(); ++a) row += r.w[a] * kernel.density({cx + hx * r.x[a], cy + hy * r.x[b]});
    total += r.w[b] * row;
  }
  return total * hx * hy;
}

namespace {

// integral over theta in [t0, t1] of radial_mass(theta, max(delta, box exit radius), inf)
double polar_beyond(const KernelSpec& kernel, double bx, double by, double delta, double t0, double t1) {
  std::vector<double> cuts{t0, t1};
  const double tc = std::atan2(by, bx);
  for (int turn = -1; turn <= 2; ++turn) {
    for (double c : {tc, kPi - tc, kPi + tc, kTwoPi - tc}) add_cut(cuts, c + turn * kTwoPi, t0, t1);
    for (double c : kernel.angular_breakpoints()) add_cut(cuts, c + turn * kTwoPi, t0, t1);
  }
  std::sort(cuts.begin(), cuts.end());
  auto f = [&](double th) {
    const double c = std::fabs(std::cos(th)), s = std::fabs(std::sin(th));
    double rho = std::numeric_limits<double>::infinity();
    if (c > 0) rho = std::min(rho, bx / c);
    if (s > 0) rho = std::min(rho, by / s);
    return kernel.radial_mass(th, std::max(rho, delta), std::numeric_limits<double>::infinity());
  };
  double total = 0.0;
  for (std::size_t k = 0; k + 1 < cuts.size(); ++k) {
    if (!(cuts[k + 1] > cuts[k])) continue;
    total += boost::math::quadrature::gauss_kronrod<double, 31>::integrate(f, cuts[k], cuts[k + 1], 15, 1e-13);
  }
  return total;
}

}  // namespace

CellWeightTable::CellWeightTable(KernelPtr kernel, double h, int half_x, int half_y, double delta, int kq)
    : kernel_(std::move(kernel)), h_(h), delta_(delta), half_x_(half_x), half_y_(half_y) {
  const KernelSpec& k = *kernel_;
  if (k.dimension() != 2) throw ConfigError("cell weight tables are two-dimensional");
  if (!(h > 0.0)) throw ConfigError("cell weight table needs h > 0");
  if (half_x < 1 || half_y < 1) throw ConfigError("cell weight table needs at least one offset per side");
  if (!(delta >= 0.0)) throw ConfigError("cell weight table needs delta >= 0");
  if (delta == 0.0 && !k.is_bounded()) throw ConfigError("delta = 0 is only allowed for bounded kernels");
  rule(kq);

  const std::size_t W = width(), H = height();
  w_.assign(W * H, 0.0);
  auto mass_at = [&](int di, int dj) {
    const double cx = di * h, cy = dj * h;
    return box_mass(k, cx - 0.5 * h, cx + 0.5 * h, cy - 0.5 * h, cy + 0.5 * h, delta, kq);
  };
  auto set = [&](int di, int dj, double v) {
    if (di < -half_x_ || di > half_x_ || dj < -half_y_ || dj > half_y_) return;
    w_[static_cast<std::size_t>(dj + half_y_) * W + static_cast<std::size_t>(di + half_x_)] = v;
  };
  if (k.is_isotropic()) {
    // Radial density: the mass depends on (max(|di|,|dj|), min(|di|,|dj|)) only.
    const int hm = std::max(half_x_, half_y_);
    for (int a = 0; a <= hm; ++a) {
      for (int b = 0; b <= a; ++b) {
        const bool needed = (a <= half_x_ && b <= half_y_) || (a <= half_y_ && b <= half_x_);
        if (!needed) continue;
        const double v = mass_at(a, b);
        for (int sx : {-1, 1})
          for (int sy : {-1, 1}) {
            set(sx * a, sy * b, v);
            set(sx * b, sy * a, v);
          }
      }
    }
  } else if (k.is_even()) {
    for (int dj = 0; dj <= half_y_; ++dj)
      for (int di = -half_x_; di <= half_x_; ++di) {
        if (dj == 0 && di < 0) continue;
        const double v = mass_at(di, dj);
        set(di, dj, v);
        set(-di, -dj, v);
      }
  } else {
    for (int dj = -half_y_; dj <= half_y_; ++dj)
      for (int di = -half_x_; di <= half_x_; ++di) set(di, dj, mass_at(di, dj));
  }

  prefix_.assign((W + 1) * (H + 1), 0.0);
  for (std::size_t j = 0; j < H; ++j) {
    double run = 0.0;
    for (std::size_t i = 0; i < W; ++i) {
      run += w_[j * W + i];
      prefix_[(j + 1) * (W + 1) + i + 1] = prefix_[j * (W + 1) + i + 1] + run;
    }
  }
  table_sum_ = prefix_.back();
  const double bx = (half_x_ + 0.5) * h, by = (half_y_ + 0.5) * h;
  beyond_ = polar_beyond(k, bx, by, delta, 0.0, kTwoPi);
  tail_ = delta > 0.0 ? k.tail_mass(delta) : k.total_mass();
  const double rel = std::fabs(table_sum_ + beyond_ - tail_) / tail_;
  if (!(rel <= 1e-6)) {
    throw AccuracyError("cell weight table mass mismatch: table " + std::to_string(table_sum_) + " + beyond " +
                        std::to_string(beyond_) + " vs tail " + std::to_string(tail_) + " (relative " +
                        std::to_string(rel) + ")");
  }
}

double CellWeightTable::beyond_halfspace(Vec2 p, bool closed) const {
  (void)closed;  // the boundary line is nu-null
  const double tp = std::atan2(p.y, p.x);
  const double bx = (half_x_ + 0.5) * h_, by = (half_y_ + 0.5) * h_;
  return polar_beyond(*kernel_, bx, by, delta_, tp - kPi / 2, tp + kPi / 2);
}

double CellWeightTable::rect_sum(int di0, int di1, int dj0, int dj1) const {
  di0 = std::max(di0, -half_x_);
  dj0 = std::max(dj0, -half_y_);
  di1 = std::min(di1, half_x_);
  dj1 = std::min(dj1, half_y_);
  if (di1 < di0 || dj1 < dj0) return 0.0;
  const std::size_t W1 = width() + 1;
  const std::size_t i0 = static_cast<std::size_t>(di0 + half_x_), i1 = static_cast<std::size_t>(di1 + half_x_) + 1;
  const std::size_t j0 = static_cast<std::size_t>(dj0 + half_y_), j1 = static_cast<std::size_t>(dj1 + half_y_) + 1;
  return prefix_[j1 * W1 + i1] - prefix_[j0 * W1 + i1] - prefix_[j1 * W1 + i0] + prefix_[j0 * W1 + i0];
}

}  // namespace fracflow
