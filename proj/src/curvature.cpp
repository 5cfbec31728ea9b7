#include "fracflow/curvature.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <array>
#include <boost/math/quadrature/gauss.hpp>
#include <cmath>

#include "fracflow/errors.hpp"

namespace fracflow {

namespace {
const LevelSetField& validated(const LevelSetField& f) {
  f.validate();
  return f;
}
}  // namespace

FieldContext::FieldContext(const LevelSetField& field, int subcell, double grad_factor)
    : field_(&field), samples_(validated(field), subcell) {
  grad_threshold_ = grad_factor * field.max_abs() / field.grid().h;
}

// ---------------------------------------------------------------- local differential data

Vec2 gradient_at(const LevelSetField& field, int i, int j, bool* boundary) {
  const Grid& g = field.grid();
  if (!g.contains(i, j)) throw DomainError("gradient_at: node outside the grid");
  bool edge = false;
  auto diff = [&](int di, int dj, int n, int idx) {
    if (idx > 0 && idx < n - 1) return (field.at(i + di, j + dj) - field.at(i - di, j - dj)) / (2.0 * g.h);
    edge = true;
    if (idx == 0) return (field.at(i + di, j + dj) - field.at(i, j)) / g.h;
    return (field.at(i, j) - field.at(i - di, j - dj)) / g.h;
  };
  const Vec2 p{diff(1, 0, g.nx, i), diff(0, 1, g.ny, j)};
  if (boundary) *boundary = edge;
  return p;
}

Sym2 hessian_fit(const LevelSetField& field, int i, int j, bool* fallback) {
  const Grid& g = field.grid();
  const double inv_h2 = 1.0 / (g.h * g.h);
  if (fallback) *fallback = false;
  if (i >= 2 && j >= 2 && i < g.nx - 2 && j < g.ny - 2) {
    // Second differences over 2h leave the odd-even mode untouched. A 5x5 least-squares fit flips
    // its sign (anti-diffusive near field); compact differences damp it so hard that stability
    // would need dt ~ h^2.
    const double c = field.at(i, j);
    const double hxx = 0.25 * (field.at(i + 2, j) - 2.0 * c + field.at(i - 2, j));
    const double hyy = 0.25 * (field.at(i, j + 2) - 2.0 * c + field.at(i, j - 2));
    const double hxy =
        0.25 * (field.at(i + 1, j + 1) - field.at(i + 1, j - 1) - field.at(i - 1, j + 1) + field.at(i - 1, j - 1));
    return {hxx * inv_h2, hxy * inv_h2, hyy * inv_h2};
  }
  std::vector<std::array<double, 3>> pts;
  for (int dj = -2; dj <= 2; ++dj)
    for (int di = -2; di <= 2; ++di)
      if (g.contains(i + di, j + dj)) pts.push_back({double(di), double(dj), field.at(i + di, j + dj)});
  if (pts.size() >= 6) {
    Eigen::MatrixXd X(pts.size(), 6);
    Eigen::VectorXd y(pts.size());
    for (std::size_t r = 0; r < pts.size(); ++r) {
      const double x = pts[r][0], z = pts[r][1];
      X.row(static_cast<Eigen::Index>(r)) << 1.0, x, z, 0.5 * x * x, x * z, 0.5 * z * z;
      y(static_cast<Eigen::Index>(r)) = pts[r][2];
    }
    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(X);
    if (qr.rank() == 6) {
      const Eigen::VectorXd c = qr.solve(y);
      return {c(3) * inv_h2, c(4) * inv_h2, c(5) * inv_h2};
    }
  }
  if (fallback) *fallback = true;
  return {};
}

// ---------------------------------------------------------------- near field

namespace {

template <class F>
double gl_panels(F&& f, double a, double b, int panels) {
  using G = boost::math::quadrature::gauss<double, 20>;
  double total = 0.0;
  const double step = (b - a) / panels;
  for (int k = 0; k < panels; ++k) total += G::integrate(f, a + k * step, a + (k + 1) * step);
  return total;
}

// Integral of f over [a, b] with an integrable |theta - a|^-s singularity at a (left) or b.
template <class F>
double graded(F&& f, double a, double b, bool singular_left, double grade) {
  const double L = b - a;
  auto g = [&](double t) {
    const double tg = std::pow(t, grade);
    const double jac = L * grade * std::pow(t, grade - 1.0);
    return f(singular_left ? a + L * tg : b - L * tg) * jac;
  };
  return gl_panels(g, 0.0, 1.0, 3);
}

}  // namespace

double near_field_kappa(Vec2 p, const Sym2& H, const KernelSpec& kernel, double delta) {
  const double pn = norm(p);
  if (!(pn > 0.0)) throw DomainError("near_field_kappa needs a nonzero gradient");
  if (!(delta > 0.0)) throw DomainError("near_field_kappa needs delta > 0");
  if (kernel.dimension() != 2) throw ConfigError("near_field_kappa is implemented for N = 2");
  if (!(H.max_abs() * delta > 1e-12 * pn)) return 0.0;

  const double tp = std::atan2(p.y, p.x);
  const double A = 0.5 * (H.xx + H.yy), B = 0.5 * (H.xx - H.yy), C = H.xy;
  const double R = std::hypot(B, C), phi = std::atan2(C, B);
  auto cval = [&](double th) { return std::cos(th - tp); };
  auto qval = [&](double th) { return A + B * std::cos(2.0 * th) + C * std::sin(2.0 * th); };

  // Tangent directions (c = 0) bound the two half-circles.
  const double t0 = tp + kPi / 2.0, t1 = t0 + kPi, t2 = t0 + kTwoPi;
  std::vector<double> cuts{t0, t1, t2};
  auto add = [&](double v) {
    for (int k = -3; k <= 3; ++k) {
      const double w = v + k * kTwoPi;
      if (w > t0 && w < t2 && w != t1) cuts.push_back(w);
    }
  };
  if (R > 0.0 && std::fabs(A) <= R) {
    const double ac = std::acos(std::clamp(-A / R, -1.0, 1.0));
    for (double base : {0.5 * (phi + ac), 0.5 * (phi - ac)}) {
      add(base);
      add(base + kPi);
    }
  }
  for (double k : kernel.angular_breakpoints()) add(k);

  // Directions where rho0 = 2|p||c|/|q| crosses delta or a radial breakpoint of the kernel.
  std::vector<double> radii{delta};
  for (double r : kernel.radial_breakpoints())
    if (r < delta) radii.push_back(r);
  constexpr int kSamples = 720;
  // Sample angles are t0 + 2 pi s / kSamples, so c = -sin(2 pi s / kSamples) and q follows from
  // one rotation; the tables keep trigonometry out of the scan.
  static const std::array<double, kSamples> sin_table = [] {
    std::array<double, kSamples> t{};
    for (int s = 0; s < kSamples; ++s) t[s] = std::sin(kTwoPi * s / kSamples);
    return t;
  }();
  auto table_cos = [&](int s) { return sin_table[(s + kSamples / 4) % kSamples]; };
  const double beta = 2.0 * t0 - phi, cb = std::cos(beta), sb = std::sin(beta);
  for (double r : radii) {
    auto G = [&](double th) { return 2.0 * pn * std::fabs(cval(th)) - r * std::fabs(qval(th)); };
    auto G_at = [&](int s) {
      const int s2 = (2 * s) % kSamples;
      const double q = A + R * (cb * table_cos(s2) - sb * sin_table[s2]);
      return 2.0 * pn * std::fabs(sin_table[s % kSamples]) - r * std::fabs(q);
    };
    double prev_t = t0, prev_g = G_at(0);
    for (int s = 1; s <= kSamples; ++s) {
      const double t = t0 + kTwoPi * s / kSamples;
      const double gv = G_at(s);
      if ((prev_g < 0) != (gv < 0)) {
        double lo = prev_t, hi = t, glo = prev_g;
        for (int it = 0; it < 80 && hi - lo > 1e-15; ++it) {
          const double mid = 0.5 * (lo + hi);
          const double gm = G(mid);
          if ((gm < 0) == (glo < 0)) {
            lo = mid;
            glo = gm;
          } else {
            hi = mid;
          }
        }
        add(0.5 * (lo + hi));
      }
      prev_t = t;
      prev_g = gv;
    }
  }
  std::sort(cuts.begin(), cuts.end());
  cuts.erase(std::unique(cuts.begin(), cuts.end()), cuts.end());

  const double s_exp = kernel.singular_exponent();
  const double grade = std::min(1.0 / (1.0 - s_exp), 30.0);
  auto is_tangent = [&](double v) { return v == t0 || v == t1 || v == t2; };

  double total = 0.0;
  for (std::size_t k = 0; k + 1 < cuts.size(); ++k) {
    const double a = cuts[k], b = cuts[k + 1];
    if (!(b - a > 1e-14)) continue;
    const double mid = 0.5 * (a + b);
    const double cm = cval(mid), qm = qval(mid);
    int sign = 0;
    if (cm < 0 && qm > 0) sign = 1;        // superlevel part behind the tangent line
    else if (cm > 0 && qm < 0) sign = -1;  // sublevel part in front of it
    if (sign == 0) continue;
    auto f = [&](double th) {
      const double c = cval(th), q = qval(th);
      if (sign > 0 ? !(c <= 0 && q > 0) : !(c >= 0 && q < 0)) return 0.0;
      const double rho0 = 2.0 * pn * std::fabs(c) / std::fabs(q);
      if (rho0 >= delta) return 0.0;
      return kernel.radial_mass(th, rho0, delta);
    };
    const bool sa = is_tangent(a) && f(a + 1e-9 * (b - a)) > 0.0;
    const bool sb = is_tangent(b) && f(b - 1e-9 * (b - a)) > 0.0;
    double piece;
    if (sa && sb) {
      piece = graded(f, a, mid, true, grade) + graded(f, mid, b, false, grade);
    } else if (sa || sb) {
      piece = graded(f, a, b, sa, grade);
    } else {
      piece = gl_panels(f, a, b, 2);
    }
    total += sign * piece;
  }
  return total;
}

// ---------------------------------------------------------------- evaluator

CurvatureEvaluator::CurvatureEvaluator(const Grid& grid, KernelPtr kernel, double delta, int cell_order)
    : grid_(grid), kernel_(std::move(kernel)), delta_(delta) {
  grid_.validate();
  if (!kernel_) throw ConfigError("curvature evaluator needs a kernel");
  if (kernel_->dimension() != 2) throw ConfigError("grid curvature is implemented for N = 2");
  if (!(delta >= 2.0 * grid.h * (1.0 - 1e-12))) {
    throw ConfigError("delta must be at least 2h (near field unresolvable), got delta/h = " +
                      std::to_string(delta / grid.h));
  }
  table_ = std::make_shared<CellWeightTable>(kernel_, grid.h, grid.nx - 1, grid.ny - 1, delta, cell_order);
}

double CurvatureEvaluator::in_grid_mass(int i, int j) const {
  return table_->rect_sum(-i, grid_.nx - 1 - i, -j, grid_.ny - 1 - j);
}

double CurvatureEvaluator::halfspace(Vec2 p) const {
  if (kernel_->is_even()) return 0.5 * table_->tail_mass();
  const double pn = norm(p);
  if (!(pn > 0.0)) return 0.5 * table_->tail_mass();
  return kernel_->halfspace_tail(delta_, p * (1.0 / pn));
}

double CurvatureEvaluator::far_field(const FieldContext& ctx, int i, int j, double a, Vec2 p, Strictness s) const {
  const bool closed = s == Strictness::Upper;
  const SubcellSamples& samp = ctx.samples();
  const LevelSetField& f = ctx.field();
  const CellWeightTable& tab = *table_;
  double sum = 0.0;
  if (f.extension() == Extension::Affine) {
    for (int dj = -tab.half_y(); dj <= tab.half_y(); ++dj)
      for (int di = -tab.half_x(); di <= tab.half_x(); ++di) {
        const double w = tab.weight(di, dj);
        if (w != 0.0) sum += w * samp.fraction_at(i + di, j + dj, a, closed);
      }
    // Beyond the table the extension is the exact half-plane {p_affine . z >= 0}.
    sum += tab.beyond_halfspace(f.affine_slope(), closed);
  } else {
    const std::size_t W = tab.width();
    const double* wdata = tab.data().data();
    for (int jy = 0; jy < grid_.ny; ++jy) {
      const double* row = wdata + static_cast<std::size_t>(jy - j + tab.half_y()) * W + (tab.half_x() - i);
      const std::size_t base = grid_.index(0, jy);
      for (int ix = 0; ix < grid_.nx; ++ix) {
        const double w = row[ix];
        if (w == 0.0) continue;
        sum += w * samp.fraction(base + static_cast<std::size_t>(ix), a, closed);
      }
    }
    const double o = f.outside_value(), tol = samp.tie_tolerance();
    if (closed ? o >= a - tol : o > a + tol) sum += outside_mass(i, j);
  }
  return sum - halfspace(p);
}

namespace {

// Values of constant bilinear patches touching the 3x3 stencil around (i, j).
std::vector<double> plateau_values(const FieldContext& ctx, int i, int j) {
  const Grid& g = ctx.field().grid();
  const SubcellSamples& s = ctx.samples();
  std::vector<double> vals;
  for (int dj = -1; dj <= 1; ++dj)
    for (int di = -1; di <= 1; ++di) {
      if (!g.contains(i + di, j + dj)) continue;
      const std::size_t k = g.index(i + di, j + dj);
      for (int e = 0; e < s.flat_count(k); ++e)
        if (std::find(vals.begin(), vals.end(), s.flat_value(k, e)) == vals.end()) vals.push_back(s.flat_value(k, e));
    }
  return vals;
}

// Quadratic fit that ignores stencil points sitting on a plateau, the centre included, so a
// clamped profile is modelled by its sloped side instead of by the kink.
bool one_sided_fit(const LevelSetField& f, int i, int j, const std::vector<double>& plateau, Vec2& p, Sym2& H) {
  const Grid& g = f.grid();
  const double u0 = f.at(i, j);
  std::vector<std::array<double, 3>> pts;
  for (int dj = -2; dj <= 2; ++dj)
    for (int di = -2; di <= 2; ++di) {
      if (!g.contains(i + di, j + dj)) continue;
      const double v = f.at(i + di, j + dj);
      if (std::find(plateau.begin(), plateau.end(), v) != plateau.end()) continue;
      pts.push_back({double(di), double(dj), v - u0});
    }
  if (pts.size() < 7) return false;
  Eigen::MatrixXd X(pts.size(), 6);
  Eigen::VectorXd y(pts.size());
  for (std::size_t r = 0; r < pts.size(); ++r) {
    const double x = pts[r][0], z = pts[r][1];
    X.row(static_cast<Eigen::Index>(r)) << 1.0, x, z, 0.5 * x * x, x * z, 0.5 * z * z;
    y(static_cast<Eigen::Index>(r)) = pts[r][2];
  }
  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(X);
  if (qr.rank() < 6) return false;
  const Eigen::VectorXd c = qr.solve(y);
  const double h = g.h;
  p = {c(1) / h, c(2) / h};
  H = {c(3) / (h * h), c(4) / (h * h), c(5) / (h * h)};
  return true;
}

}  // namespace

bool CurvatureEvaluator::local_part(const FieldContext& ctx, int i, int j, CurvatureEval& e) const {
  const LevelSetField& f = ctx.field();
  e.delta = delta_;
  e.gradient = gradient_at(f, i, j, &e.boundary);
  const std::vector<double> plateau = plateau_values(ctx, i, j);
  if (!plateau.empty() && std::find(plateau.begin(), plateau.end(), f.at(i, j)) != plateau.end()) {
    // A clamped node: its own value says nothing about the local shape, so only the far field acts.
    e.plateau_fit = true;
    if (!(norm(e.gradient) > ctx.grad_threshold())) {
      e.degenerate = true;
      return false;
    }
    e.flat_fallback = true;
    e.hessian = {};
    e.near_part = 0.0;
    return true;
  }
  if (!plateau.empty()) {
    Vec2 p;
    Sym2 H;
    if (one_sided_fit(f, i, j, plateau, p, H)) {
      e.plateau_fit = true;
      e.gradient = p;
      if (!(norm(p) > ctx.grad_threshold())) {
        e.degenerate = true;
        return false;
      }
      e.hessian = H;
      e.near_part = near_field_kappa(p, H, *kernel_, delta_);
      return true;
    }
  }
  if (!(norm(e.gradient) > ctx.grad_threshold())) {
    e.degenerate = true;
    return false;
  }
  e.hessian = hessian_fit(f, i, j, &e.flat_fallback);
  e.near_part = near_field_kappa(e.gradient, e.hessian, *kernel_, delta_);
  return true;
}

CurvatureEval CurvatureEvaluator::evaluate(const FieldContext& ctx, int i, int j) const {
  if (&ctx.field().grid() != &grid_ && !(ctx.field().grid() == grid_))
    throw ConfigError("field grid does not match the curvature evaluator grid");
  CurvatureEval e;
  if (!local_part(ctx, i, j, e)) return e;
  const double a = ctx.field().at(i, j);
  e.far_upper = far_field(ctx, i, j, a, e.gradient, Strictness::Upper);
  e.far_lower = far_field(ctx, i, j, a, e.gradient, Strictness::Lower);
  e.kappa_upper = e.near_part + e.far_upper;
  e.kappa_lower = e.near_part + e.far_lower;
  return e;
}

CurvatureEval kappa_at(const LevelSetField& field, int i, int j, KernelPtr kernel, double delta) {
  CurvatureEvaluator ev(field.grid(), std::move(kernel), delta);
  FieldContext ctx(field);
  return ev.evaluate(ctx, i, j);
}

// ---------------------------------------------------------------- sign formula

SignFormulaEvaluator::SignFormulaEvaluator(const Grid& grid, KernelPtr kernel, int cell_order)
    : grid_(grid), kernel_(std::move(kernel)) {
  if (!kernel_ || !kernel_->is_bounded() || !kernel_->is_even()) {
    throw PreconditionError("sign formula needs an even kernel with finite mass");
  }
  grid_.validate();
  table_ = std::make_shared<CellWeightTable>(kernel_, grid.h, grid.nx - 1, grid.ny - 1, 0.0, cell_order);
}

SignFormulaResult SignFormulaEvaluator::evaluate(const FieldContext& ctx, int i, int j) const {
  const LevelSetField& f = ctx.field();
  const SubcellSamples& samp = ctx.samples();
  const CellWeightTable& tab = *table_;
  const double a = f.at(i, j);
  double up = 0.0, lo = 0.0;
  if (f.extension() == Extension::Affine) {
    for (int dj = -tab.half_y(); dj <= tab.half_y(); ++dj)
      for (int di = -tab.half_x(); di <= tab.half_x(); ++di) {
        const double w = tab.weight(di, dj);
        if (w == 0.0) continue;
        up += w * (2.0 * samp.fraction_at(i + di, j + dj, a, true) - 1.0);
        lo += w * (2.0 * samp.fraction_at(i + di, j + dj, a, false) - 1.0);
      }
    const double half = tab.beyond_halfspace(f.affine_slope(), true);
    up += 2.0 * half - tab.beyond_mass();
    lo += 2.0 * half - tab.beyond_mass();
  } else {
    for (int jy = 0; jy < grid_.ny; ++jy)
      for (int ix = 0; ix < grid_.nx; ++ix) {
        const double w = tab.weight(ix - i, jy - j);
        if (w == 0.0) continue;
        const std::size_t k = grid_.index(ix, jy);
        up += w * (2.0 * samp.fraction(k, a, true) - 1.0);
        lo += w * (2.0 * samp.fraction(k, a, false) - 1.0);
      }
    const double out = tab.tail_mass() - tab.rect_sum(-i, grid_.nx - 1 - i, -j, grid_.ny - 1 - j);
    const double o = f.outside_value(), tol = samp.tie_tolerance();
    up += (o >= a - tol ? out : -out);
    lo += (o > a + tol ? out : -out);
  }
  return {0.5 * up, 0.5 * lo, up, lo};
}

SignFormulaResult sign_formula_kappa(const LevelSetField& field, int i, int j, KernelPtr kernel) {
  SignFormulaEvaluator ev(field.grid(), std::move(kernel));
  FieldContext ctx(field);
  return ev.evaluate(ctx, i, j);
}

// ---------------------------------------------------------------- classical curvature

ClassicalCurvature classical_curvature(const LevelSetField& field, int i, int j, double grad_factor) {
  const Grid& g = field.grid();
  ClassicalCurvature out;
  if (i < 1 || j < 1 || i > g.nx - 2 || j > g.ny - 2) {
    out.degenerate = true;
    return out;
  }
  const double h = g.h;
  const double ux = (field.at(i + 1, j) - field.at(i - 1, j)) / (2 * h);
  const double uy = (field.at(i, j + 1) - field.at(i, j - 1)) / (2 * h);
  const double gn = std::hypot(ux, uy);
  if (!(gn > grad_factor * field.max_abs() / h)) {
    out.degenerate = true;
    return out;
  }
  const double uxx = (field.at(i + 1, j) - 2 * field.at(i, j) + field.at(i - 1, j)) / (h * h);
  const double uyy = (field.at(i, j + 1) - 2 * field.at(i, j) + field.at(i, j - 1)) / (h * h);
  const double uxy = (field.at(i + 1, j + 1) - field.at(i + 1, j - 1) - field.at(i - 1, j + 1) + field.at(i - 1, j - 1)) /
                     (4 * h * h);
  out.value = (uxx * uy * uy - 2 * uxy * ux * uy + uyy * ux * ux) / (gn * gn * gn);
  return out;
}

}  // namespace fracflow
