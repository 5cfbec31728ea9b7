#include "fracflow/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <sstream>
#include <unordered_map>

#include "fracflow/csv.hpp"
#include "fracflow/errors.hpp"

namespace fracflow {

namespace {

void require_radius(double r, const char* what) {
  if (!(r > 0.0) || !std::isfinite(r)) throw ConfigError(std::string(what) + " must be positive");
}

double disk_sd(Vec2 c, double r, Vec2 x) { return r - norm(x - c); }

// Oriented box of half-length hl along axis e and half-width hw, positive inside.
double box_sd(Vec2 c, Vec2 e, double hl, double hw, Vec2 x) {
  const Vec2 d = x - c;
  const double qx = std::fabs(dot(d, e)) - hl;
  const double qy = std::fabs(cross(e, d)) - hw;
  const double outside = std::hypot(std::max(qx, 0.0), std::max(qy, 0.0));
  const double inside = std::min(std::max(qx, qy), 0.0);
  return -(outside + inside);
}

// Root of the secular equation for the closest point on an ellipse (bisection, robust for all inputs).
double ellipse_root(double r0, double z0, double z1, double g) {
  const double n0 = r0 * z0;
  double s0 = z1 - 1.0;
  double s1 = g < 0 ? 0.0 : std::hypot(n0, z1) - 1.0;
  double s = 0.0;
  for (int it = 0; it < 2000; ++it) {
    s = 0.5 * (s0 + s1);
    if (s == s0 || s == s1) break;
    const double ratio0 = n0 / (s + r0), ratio1 = z1 / (s + 1.0);
    g = ratio0 * ratio0 + ratio1 * ratio1 - 1.0;
    if (g > 0) s0 = s;
    else if (g < 0) s1 = s;
    else break;
  }
  return s;
}

// Unsigned distance from (y0, y1) >= 0 to the ellipse with e0 >= e1.
double ellipse_distance_quadrant(double e0, double e1, double y0, double y1) {
  if (y1 > 0) {
    if (y0 > 0) {
      const double z0 = y0 / e0, z1 = y1 / e1;
      const double g = z0 * z0 + z1 * z1 - 1.0;
      if (g == 0.0) return 0.0;
      const double r0 = (e0 / e1) * (e0 / e1);
      const double sbar = ellipse_root(r0, z0, z1, g);
      const double x0 = r0 * y0 / (sbar + r0), x1 = y1 / (sbar + 1.0);
      return std::hypot(x0 - y0, x1 - y1);
    }
    return std::fabs(y1 - e1);
  }
  const double numer0 = e0 * y0, denom0 = e0 * e0 - e1 * e1;
  if (numer0 < denom0) {
    const double xde0 = numer0 / denom0;
    const double x0 = e0 * xde0, x1 = e1 * std::sqrt(1.0 - xde0 * xde0);
    return std::hypot(x0 - y0, x1);
  }
  return std::fabs(y0 - e0);
}

}  // namespace

double ellipse_signed_distance(double a, double b, Vec2 x) {
  double px = std::fabs(x.x), py = std::fabs(x.y);
  double e0 = a, e1 = b;
  if (e0 < e1) {
    std::swap(e0, e1);
    std::swap(px, py);
  }
  const double d = ellipse_distance_quadrant(e0, e1, px, py);
  const double level = (px / e0) * (px / e0) + (py / e1) * (py / e1);
  return level <= 1.0 ? d : -d;
}

Shape Shape::disk(Vec2 center, double radius) {
  require_radius(radius, "disk radius");
  Shape s;
  s.kind_ = Kind::Disk;
  s.centers_ = {center};
  s.radii_ = {radius};
  return s;
}

Shape Shape::ellipse(Vec2 center, double a, double b, double angle) {
  require_radius(a, "ellipse semi-axis a");
  require_radius(b, "ellipse semi-axis b");
  Shape s;
  s.kind_ = Kind::Ellipse;
  s.centers_ = {center};
  s.a_ = a;
  s.b_ = b;
  s.angle_ = angle;
  return s;
}

Shape Shape::disk_union(std::vector<Vec2> centers, std::vector<double> radii) {
  if (centers.empty() || centers.size() != radii.size())
    throw ConfigError("disk union needs matching, non-empty centre and radius lists");
  for (double r : radii) require_radius(r, "disk union radius");
  Shape s;
  s.kind_ = Kind::DiskUnion;
  s.centers_ = std::move(centers);
  s.radii_ = std::move(radii);
  return s;
}

Shape Shape::dumbbell(Vec2 c1, double r1, Vec2 c2, double r2, double bar_half_width) {
  require_radius(r1, "dumbbell radius r1");
  require_radius(r2, "dumbbell radius r2");
  require_radius(bar_half_width, "dumbbell bar half-width");
  if (norm(c2 - c1) == 0.0) throw ConfigError("dumbbell centres must differ");
  if (bar_half_width > std::min(r1, r2)) throw ConfigError("dumbbell bar must be thinner than both disks");
  Shape s;
  s.kind_ = Kind::Dumbbell;
  s.centers_ = {c1, c2};
  s.radii_ = {r1, r2};
  s.bar_ = bar_half_width;
  return s;
}

Shape Shape::half_plane(Vec2 point, Vec2 normal) {
  const double n = norm(normal);
  if (!(n > 0.0)) throw ConfigError("half-plane normal must be nonzero");
  Shape s;
  s.kind_ = Kind::HalfPlane;
  s.centers_ = {point};
  s.normal_ = normal / n;
  return s;
}

double Shape::signed_distance(Vec2 x) const {
  switch (kind_) {
    case Kind::Disk:
      return disk_sd(centers_[0], radii_[0], x);
    case Kind::Ellipse: {
      const Vec2 d = x - centers_[0];
      const double c = std::cos(angle_), s = std::sin(angle_);
      return ellipse_signed_distance(a_, b_, {c * d.x + s * d.y, -s * d.x + c * d.y});
    }
    case Kind::DiskUnion: {
      double best = -std::numeric_limits<double>::infinity();
      for (std::size_t k = 0; k < centers_.size(); ++k) best = std::max(best, disk_sd(centers_[k], radii_[k], x));
      return best;
    }
    case Kind::Dumbbell: {
      const Vec2 axis = centers_[1] - centers_[0];
      const double len = norm(axis);
      const double bar = box_sd(0.5 * (centers_[0] + centers_[1]), axis / len, 0.5 * len, bar_, x);
      return std::max({disk_sd(centers_[0], radii_[0], x), disk_sd(centers_[1], radii_[1], x), bar});
    }
    case Kind::HalfPlane:
      return dot(normal_, x - centers_[0]);
  }
  return 0.0;
}

std::pair<Vec2, Vec2> Shape::bounding_box() const {
  const double inf = std::numeric_limits<double>::infinity();
  Vec2 lo{inf, inf}, hi{-inf, -inf};
  auto grow = [&](Vec2 c, double rx, double ry) {
    lo.x = std::min(lo.x, c.x - rx);
    lo.y = std::min(lo.y, c.y - ry);
    hi.x = std::max(hi.x, c.x + rx);
    hi.y = std::max(hi.y, c.y + ry);
  };
  switch (kind_) {
    case Kind::Ellipse: {
      const double c = std::cos(angle_), s = std::sin(angle_);
      grow(centers_[0], std::hypot(a_ * c, b_ * s), std::hypot(a_ * s, b_ * c));
      break;
    }
    case Kind::HalfPlane:
      throw DomainError("a half-plane has no bounding box");
    default:
      for (std::size_t k = 0; k < centers_.size(); ++k) grow(centers_[k], radii_[k], radii_[k]);
  }
  return {lo, hi};
}

Vec2 Shape::reference_center() const {
  Vec2 c{};
  for (const Vec2& v : centers_) c = c + v;
  return c / static_cast<double>(centers_.size());
}

std::string Shape::describe() const {
  std::ostringstream os;
  switch (kind_) {
    case Kind::Disk: os << "disk r=" << radii_[0]; break;
    case Kind::Ellipse: os << "ellipse a=" << a_ << " b=" << b_; break;
    case Kind::DiskUnion: os << "union of " << centers_.size() << " disks"; break;
    case Kind::Dumbbell: os << "dumbbell"; break;
    case Kind::HalfPlane: os << "half-plane"; break;
  }
  return os.str();
}

LevelSetField make_signed_distance(const Shape& shape, const Grid& grid, double clamp_cells) {
  grid.validate();
  if (!(clamp_cells > 0.0)) throw ConfigError("signed distance clamp must be positive");
  if (shape.bounded()) {
    const auto [lo, hi] = shape.bounding_box();
    const double margin = 8.0 * grid.h;
    const Vec2 glo = grid.origin, ghi = grid.point(grid.nx - 1, grid.ny - 1);
    if (lo.x - glo.x < margin || lo.y - glo.y < margin || ghi.x - hi.x < margin || ghi.y - hi.y < margin)
      throw ConfigError("initial shape comes within 8 grid spacings of the domain boundary");
  }
  const double clamp = clamp_cells * grid.h;
  std::vector<double> v(grid.size());
  for (int j = 0; j < grid.ny; ++j)
    for (int i = 0; i < grid.nx; ++i)
      v[grid.index(i, j)] = std::clamp(shape.signed_distance(grid.point(i, j)), -clamp, clamp);
  return LevelSetField(grid, std::move(v), -clamp);
}

// ---------------------------------------------------------------- marching squares

namespace {

// Edge keys: 2 * node + 0 for the edge to the right neighbour, + 1 for the edge to the upper one.
struct Segment {
  std::int64_t k0, k1;
};

}  // namespace

std::vector<Polyline> extract_contour(const LevelSetField& field) {
  const Grid& g = field.grid();
  auto node = [&](int i, int j) { return static_cast<std::int64_t>(j) * g.nx + i; };
  auto in = [&](int i, int j) { return field.at(i, j) >= 0.0; };

  std::unordered_map<std::int64_t, Vec2> points;
  auto crossing = [&](int i0, int j0, int i1, int j1) {
    const double a = field.at(i0, j0), b = field.at(i1, j1);
    const double t = a / (a - b);
    const Vec2 p0 = g.point(i0, j0), p1 = g.point(i1, j1);
    return p0 + t * (p1 - p0);
  };

  std::vector<Segment> segs;
  for (int j = 0; j + 1 < g.ny; ++j) {
    for (int i = 0; i + 1 < g.nx; ++i) {
      const bool b0 = in(i, j), b1 = in(i + 1, j), b2 = in(i + 1, j + 1), b3 = in(i, j + 1);
      const int code = b0 | (b1 << 1) | (b2 << 2) | (b3 << 3);
      if (code == 0 || code == 15) continue;
      // e0 bottom, e1 right, e2 top, e3 left
      const std::int64_t e[4] = {2 * node(i, j), 2 * node(i + 1, j) + 1, 2 * node(i, j + 1), 2 * node(i, j) + 1};
      const bool crosses[4] = {b0 != b1, b1 != b2, b3 != b2, b0 != b3};
      const int ends[4][2] = {{i, j}, {i + 1, j}, {i, j + 1}, {i, j}};
      const int dirs[4][2] = {{1, 0}, {0, 1}, {1, 0}, {0, 1}};
      for (int k = 0; k < 4; ++k) {
        if (!crosses[k] || points.count(e[k])) continue;
        int ia = ends[k][0], ja = ends[k][1];
        int ib = ia + dirs[k][0], jb = ja + dirs[k][1];
        // Interpolate from the inside node so the point is independent of the visiting cell.
        if (!in(ia, ja)) {
          std::swap(ia, ib);
          std::swap(ja, jb);
        }
        points.emplace(e[k], crossing(ia, ja, ib, jb));
      }
      if (code == 5 || code == 10) {
        const double centre = 0.25 * (field.at(i, j) + field.at(i + 1, j) + field.at(i + 1, j + 1) + field.at(i, j + 1));
        const bool centre_in = centre >= 0.0;
        // Pairs isolating single corners: corner0 -> (e0,e3), corner1 -> (e0,e1), corner2 -> (e1,e2), corner3 -> (e2,e3)
        const bool isolate_02 = (code == 5) != centre_in;
        if (isolate_02) {
          segs.push_back({e[0], e[3]});
          segs.push_back({e[1], e[2]});
        } else {
          segs.push_back({e[0], e[1]});
          segs.push_back({e[2], e[3]});
        }
        continue;
      }
      std::int64_t pair[2];
      int n = 0;
      for (int k = 0; k < 4; ++k)
        if (crosses[k]) pair[n++] = e[k];
      segs.push_back({pair[0], pair[1]});
    }
  }

  std::unordered_map<std::int64_t, std::vector<std::size_t>> by_key;
  for (std::size_t s = 0; s < segs.size(); ++s) {
    by_key[segs[s].k0].push_back(s);
    by_key[segs[s].k1].push_back(s);
  }
  std::vector<bool> used(segs.size(), false);
  std::vector<Polyline> out;

  auto walk = [&](std::size_t start, std::int64_t from) {
    Polyline line;
    line.push_back(points.at(from));
    std::size_t s = start;
    std::int64_t key = from;
    while (true) {
      used[s] = true;
      const std::int64_t next = segs[s].k0 == key ? segs[s].k1 : segs[s].k0;
      line.push_back(points.at(next));
      key = next;
      std::size_t cont = segs.size();
      for (std::size_t cand : by_key[key])
        if (!used[cand]) {
          cont = cand;
          break;
        }
      if (cont == segs.size()) break;
      s = cont;
    }
    return line;
  };

  // Open polylines start at keys touched once (the grid boundary).
  for (std::size_t s = 0; s < segs.size(); ++s) {
    if (used[s]) continue;
    for (std::int64_t k : {segs[s].k0, segs[s].k1})
      if (by_key[k].size() == 1 && !used[s]) out.push_back(walk(s, k));
  }
  for (std::size_t s = 0; s < segs.size(); ++s)
    if (!used[s]) out.push_back(walk(s, segs[s].k0));
  return out;
}

namespace {

double shoelace(const std::vector<Vec2>& poly) {
  double a = 0.0;
  for (std::size_t k = 0; k < poly.size(); ++k) a += cross(poly[k], poly[(k + 1) % poly.size()]);
  return 0.5 * std::fabs(a);
}

}  // namespace

double enclosed_area(const LevelSetField& field) {
  const Grid& g = field.grid();
  double total = 0.0;
  for (int j = 0; j + 1 < g.ny; ++j) {
    for (int i = 0; i + 1 < g.nx; ++i) {
      const int ci[4] = {i, i + 1, i + 1, i};
      const int cj[4] = {j, j, j + 1, j + 1};
      double v[4];
      bool b[4];
      int n_in = 0;
      for (int k = 0; k < 4; ++k) {
        v[k] = field.at(ci[k], cj[k]);
        b[k] = v[k] >= 0.0;
        n_in += b[k];
      }
      if (n_in == 0) continue;
      if (n_in == 4) {
        total += g.h * g.h;
        continue;
      }
      auto corner = [&](int k) { return g.point(ci[k], cj[k]); };
      auto cut = [&](int k0, int k1) {
        const double t = v[k0] / (v[k0] - v[k1]);
        return corner(k0) + t * (corner(k1) - corner(k0));
      };
      const bool saddle = n_in == 2 && b[0] == b[2];
      if (saddle) {
        const bool centre_in = 0.25 * (v[0] + v[1] + v[2] + v[3]) >= 0.0;
        double corners_area = 0.0;
        // Triangles cut off at the two isolated corners (inside ones or outside ones).
        for (int k = 0; k < 4; ++k) {
          if (b[k] == centre_in) continue;
          const int prev = (k + 3) % 4, next = (k + 1) % 4;
          corners_area += shoelace({corner(k), cut(k, next), cut(k, prev)});
        }
        total += centre_in ? g.h * g.h - corners_area : corners_area;
        continue;
      }
      std::vector<Vec2> poly;
      for (int k = 0; k < 4; ++k) {
        const int next = (k + 1) % 4;
        if (b[k]) poly.push_back(corner(k));
        if (b[k] != b[next]) poly.push_back(cut(k, next));
      }
      total += shoelace(poly);
    }
  }
  return total;
}

RadiusStats radius_stats(const std::vector<Polyline>& contour, Vec2 center) {
  RadiusStats s;
  s.min_radius = std::numeric_limits<double>::infinity();
  double sum = 0.0;
  std::size_t n = 0;
  for (const auto& line : contour) {
    const std::size_t count = is_closed(line) ? line.size() - 1 : line.size();
    for (std::size_t k = 0; k < count; ++k) {
      const double r = norm(line[k] - center);
      s.min_radius = std::min(s.min_radius, r);
      s.max_radius = std::max(s.max_radius, r);
      sum += r;
      ++n;
    }
  }
  if (n == 0) return RadiusStats{};
  s.mean_radius = sum / static_cast<double>(n);
  return s;
}

namespace {

double point_segment(Vec2 p, Vec2 a, Vec2 b) {
  const Vec2 d = b - a;
  const double L2 = dot(d, d);
  const double t = L2 > 0 ? std::clamp(dot(p - a, d) / L2, 0.0, 1.0) : 0.0;
  return norm(p - (a + t * d));
}

std::vector<Vec2> densify(const std::vector<Polyline>& lines, double spacing) {
  std::vector<Vec2> pts;
  for (const auto& l : lines) {
    if (l.size() == 1) pts.push_back(l[0]);
    for (std::size_t k = 0; k + 1 < l.size(); ++k) {
      const double len = norm(l[k + 1] - l[k]);
      const int n = std::max(1, static_cast<int>(std::ceil(len / spacing)));
      for (int s = 0; s < n; ++s) pts.push_back(l[k] + (static_cast<double>(s) / n) * (l[k + 1] - l[k]));
    }
    if (!l.empty()) pts.push_back(l.back());
  }
  return pts;
}

double directed(const std::vector<Vec2>& pts, const std::vector<Polyline>& target) {
  double worst = 0.0;
  for (const Vec2& p : pts) {
    double best = std::numeric_limits<double>::infinity();
    for (const auto& l : target) {
      if (l.size() == 1) best = std::min(best, norm(p - l[0]));
      for (std::size_t k = 0; k + 1 < l.size() && best > worst; ++k) best = std::min(best, point_segment(p, l[k], l[k + 1]));
      if (best <= worst) break;
    }
    worst = std::max(worst, best);
  }
  return worst;
}

}  // namespace

double hausdorff_distance(const std::vector<Polyline>& a, const std::vector<Polyline>& b, double spacing) {
  if (!(spacing > 0.0)) throw DomainError("hausdorff_distance needs a positive sampling spacing");
  const bool ea = a.empty() || std::all_of(a.begin(), a.end(), [](const Polyline& l) { return l.empty(); });
  const bool eb = b.empty() || std::all_of(b.begin(), b.end(), [](const Polyline& l) { return l.empty(); });
  if (ea || eb) throw DomainError("hausdorff_distance needs two non-empty contour sets");
  return std::max(directed(densify(a, spacing), b), directed(densify(b, spacing), a));
}

FrontSnapshot make_snapshot(const LevelSetField& field, double t, Vec2 center, bool keep_field) {
  FrontSnapshot s;
  s.t = t;
  s.contour = extract_contour(field);
  s.area = enclosed_area(field);
  s.radii = radius_stats(s.contour, center);
  if (keep_field) s.field = std::make_shared<const LevelSetField>(field);
  return s;
}

LevelSetField reinitialize(const LevelSetField& u, double clamp_cells) {
  const Grid& g = u.grid();
  const double clamp = clamp_cells * g.h;
  const auto contour = extract_contour(u);
  // Bucket the contour segments on a grid of clamp-sized cells.
  const double cell = std::max(clamp, g.h);
  const int bx = static_cast<int>(std::ceil((g.nx - 1) * g.h / cell)) + 1;
  const int by = static_cast<int>(std::ceil((g.ny - 1) * g.h / cell)) + 1;
  std::vector<std::vector<std::pair<Vec2, Vec2>>> buckets(static_cast<std::size_t>(bx) * by);
  auto bucket_of = [&](double x, double y) {
    const int ix = std::clamp(static_cast<int>(std::floor((x - g.origin.x) / cell)), 0, bx - 1);
    const int iy = std::clamp(static_cast<int>(std::floor((y - g.origin.y) / cell)), 0, by - 1);
    return std::pair{ix, iy};
  };
  for (const auto& line : contour)
    for (std::size_t k = 0; k + 1 < line.size(); ++k) {
      const auto [x0, y0] = bucket_of(std::min(line[k].x, line[k + 1].x), std::min(line[k].y, line[k + 1].y));
      const auto [x1, y1] = bucket_of(std::max(line[k].x, line[k + 1].x), std::max(line[k].y, line[k + 1].y));
      for (int iy = y0; iy <= y1; ++iy)
        for (int ix = x0; ix <= x1; ++ix) buckets[static_cast<std::size_t>(iy) * bx + ix].push_back({line[k], line[k + 1]});
    }
  std::vector<double> v(g.size());
  for (int j = 0; j < g.ny; ++j)
    for (int i = 0; i < g.nx; ++i) {
      const Vec2 p = g.point(i, j);
      const auto [cx, cy] = bucket_of(p.x, p.y);
      double d = clamp;
      for (int iy = std::max(cy - 1, 0); iy <= std::min(cy + 1, by - 1); ++iy)
        for (int ix = std::max(cx - 1, 0); ix <= std::min(cx + 1, bx - 1); ++ix)
          for (const auto& [a, b] : buckets[static_cast<std::size_t>(iy) * bx + ix]) d = std::min(d, point_segment(p, a, b));
      v[g.index(i, j)] = u[g.index(i, j)] >= 0.0 ? d : -d;
    }
  return LevelSetField(g, std::move(v), u.outside_value() >= 0.0 ? clamp : -clamp);
}

void write_contour_csv(const std::string& path, const std::vector<Polyline>& contour) {
  CsvWriter w(path, {"polyline", "x", "y"});
  for (std::size_t k = 0; k < contour.size(); ++k)
    for (const Vec2& p : contour[k]) w.row({static_cast<double>(k), p.x, p.y});
}

}  // namespace fracflow
