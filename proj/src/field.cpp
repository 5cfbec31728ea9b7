#include "fracflow/field.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <sstream>

#include "fracflow/csv.hpp"
#include "fracflow/errors.hpp"

namespace fracflow {

Grid Grid::centered(double extent, double h) {
  if (!(h > 0.0) || !(extent > 0.0)) throw ConfigError("grid needs positive extent and spacing");
  const int half = static_cast<int>(std::ceil(extent / h - 1e-9));
  Grid g;
  g.nx = g.ny = 2 * half + 1;
  g.h = h;
  g.origin = {-half * h, -half * h};
  return g;
}

void Grid::validate() const {
  if (!(h > 0.0) || !std::isfinite(h)) throw ConfigError("grid spacing h must be positive");
  if (nx < 8 || ny < 8) throw ConfigError("grid needs at least 8 nodes per axis");
  if (!std::isfinite(origin.x) || !std::isfinite(origin.y)) throw ConfigError("grid origin must be finite");
}

LevelSetField::LevelSetField(Grid grid, std::vector<double> values) : grid_(grid), values_(std::move(values)) {
  validate();
  outside_ = -max_abs();
}

LevelSetField::LevelSetField(Grid grid, std::vector<double> values, double outside_value)
    : grid_(grid), values_(std::move(values)), outside_(outside_value) {
  validate();
  if (!std::isfinite(outside_)) throw DataError("outside value must be finite");
}

LevelSetField LevelSetField::affine(Grid grid, Vec2 p, double c) {
  std::vector<double> v(grid.size());
  for (int j = 0; j < grid.ny; ++j)
    for (int i = 0; i < grid.nx; ++i) v[grid.index(i, j)] = dot(p, grid.point(i, j)) + c;
  LevelSetField f(grid, std::move(v));
  f.extension_ = Extension::Affine;
  f.affine_p_ = p;
  f.affine_c_ = c;
  return f;
}

double LevelSetField::extension_value(int i, int j) const {
  if (extension_ == Extension::Affine) return dot(affine_p_, grid_.point(i, j)) + affine_c_;
  return outside_;
}

double LevelSetField::interpolate(Vec2 x) const {
  const double fx = (x.x - grid_.origin.x) / grid_.h, fy = (x.y - grid_.origin.y) / grid_.h;
  const double i0 = std::floor(fx), j0 = std::floor(fy);
  const double tx = fx - i0, ty = fy - j0;
  const int i = static_cast<int>(i0), j = static_cast<int>(j0);
  return (1 - ty) * ((1 - tx) * at(i, j) + tx * at(i + 1, j)) + ty * ((1 - tx) * at(i, j + 1) + tx * at(i + 1, j + 1));
}

double LevelSetField::max_abs() const {
  double m = 0.0;
  for (double v : values_) m = std::max(m, std::fabs(v));
  return m;
}

double LevelSetField::min_value() const { return *std::min_element(values_.begin(), values_.end()); }
double LevelSetField::max_value() const { return *std::max_element(values_.begin(), values_.end()); }

void LevelSetField::validate() const {
  grid_.validate();
  if (values_.size() != grid_.size()) throw DataError("field has the wrong number of values for its grid");
  for (double v : values_)
    if (!std::isfinite(v)) throw DataError("field contains a non-finite value");
}

// ---------------------------------------------------------------- sub-cell samples

SubcellSamples::SubcellSamples(const LevelSetField& field, int m)
    : field_(&field), m_(m), tie_tol_(1e-12 * field.max_abs()) {
  if (m < 2 || m > 32 || m % 2 != 0) throw ConfigError("subcell sample count must be an even integer in [2, 32]");
  for (int k = 0; k < m; ++k) offsets_.push_back((k + 0.5) / m - 0.5);
  const Grid& g = field.grid();
  const std::size_t n = g.size();
  lo_.resize(n);
  hi_.resize(n);
  sloped_start_.assign(n, 0);
  sloped_count_.assign(n, 0);
  flat_start_.assign(n, 0);
  flat_n_.assign(n, 0);
  Node node;
  for (int j = 0; j < g.ny; ++j) {
    for (int i = 0; i < g.nx; ++i) {
      const std::size_t k = g.index(i, j);
      collect(i, j, node);
      double lo = std::numeric_limits<double>::infinity(), hi = -lo;
      std::sort(node.sloped.begin(), node.sloped.begin() + node.n_sloped);
      if (node.n_sloped > 0) {
        lo = node.sloped[0];
        hi = node.sloped[node.n_sloped - 1];
      }
      for (int e = 0; e < node.n_flat; ++e) {
        lo = std::min(lo, node.flat_value[e]);
        hi = std::max(hi, node.flat_value[e]);
      }
      lo_[k] = lo;
      hi_[k] = hi;
      sloped_start_[k] = static_cast<std::int64_t>(sorted_.size());
      sloped_count_[k] = node.n_sloped;
      sorted_.insert(sorted_.end(), node.sloped.begin(), node.sloped.begin() + node.n_sloped);
      flat_start_[k] = static_cast<std::int64_t>(flat_value_.size());
      flat_n_[k] = static_cast<std::uint8_t>(node.n_flat);
      for (int e = 0; e < node.n_flat; ++e) {
        flat_value_.push_back(node.flat_value[e]);
        flat_samples_.push_back(node.flat_count[e]);
      }
    }
  }
}

void SubcellSamples::collect(int i, int j, Node& out) const {
  const LevelSetField& f = *field_;
  double v[3][3];
  for (int dj = -1; dj <= 1; ++dj)
    for (int di = -1; di <= 1; ++di) v[dj + 1][di + 1] = f.at(i + di, j + dj);
  out.n_sloped = 0;
  out.n_flat = 0;
  const int half = m_ / 2;
  // Quadrant (rx, ry) of the node's cell is the bilinear patch with lower-left corner v[ry][rx].
  for (int ry = 0; ry < 2; ++ry) {
    for (int rx = 0; rx < 2; ++rx) {
      const double a = v[ry][rx], b = v[ry][rx + 1], c = v[ry + 1][rx], d = v[ry + 1][rx + 1];
      if (a == b && a == c && a == d) {
        out.flat_value[out.n_flat] = a;
        out.flat_count[out.n_flat] = half * half;
        ++out.n_flat;
        continue;
      }
      for (int ky = ry * half; ky < (ry + 1) * half; ++ky) {
        const double sy = offsets_[ky];
        const double ty = sy < 0 ? 1.0 + sy : sy;
        for (int kx = rx * half; kx < (rx + 1) * half; ++kx) {
          const double sx = offsets_[kx];
          const double tx = sx < 0 ? 1.0 + sx : sx;
          const double bottom = a + tx * (b - a);
          const double top = c + tx * (d - c);
          out.sloped[out.n_sloped++] = bottom + ty * (top - bottom);
        }
      }
    }
  }
}

void SubcellSamples::samples_at(int i, int j, double* out) const {
  Node node;
  collect(i, j, node);
  std::size_t n = 0;
  for (int k = 0; k < node.n_sloped; ++k) out[n++] = node.sloped[k];
  for (int e = 0; e < node.n_flat; ++e)
    for (int c = 0; c < node.flat_count[e]; ++c) out[n++] = node.flat_value[e];
}

namespace {

double tally_flat(const double* value, const int* count, int n, double a, double tol, bool closed) {
  double c = 0.0;
  for (int e = 0; e < n; ++e)
    if (value[e] > a + tol || (closed && value[e] >= a - tol)) c += count[e];
  return c;
}

}  // namespace

double SubcellSamples::fraction(std::size_t k, double a, bool closed) const {
  if (lo_[k] > a + tie_tol_) return 1.0;
  if (hi_[k] < a - tie_tol_) return 0.0;
  const double* first = sorted_.data() + sloped_start_[k];
  const double* last = first + sloped_count_[k];
  const double* lb = std::lower_bound(first, last, a - tie_tol_);
  const double* ub = std::upper_bound(lb, last, a + tie_tol_);
  double c = static_cast<double>(last - ub) + 0.5 * static_cast<double>(ub - lb);
  c += tally_flat(flat_value_.data() + flat_start_[k], flat_samples_.data() + flat_start_[k], flat_n_[k], a, tie_tol_,
                  closed);
  return c / static_cast<double>(m_ * m_);
}

double SubcellSamples::fraction_at(int i, int j, double a, bool closed) const {
  const Grid& g = field_->grid();
  if (g.contains(i, j)) return fraction(g.index(i, j), a, closed);
  // Far from the grid a constant extension is flat.
  if (field_->extension() == Extension::Constant && (i < -1 || j < -1 || i > g.nx || j > g.ny)) {
    const double o = field_->outside_value();
    return (closed ? o >= a - tie_tol_ : o > a + tie_tol_) ? 1.0 : 0.0;
  }
  double nlo = field_->at(i, j), nhi = nlo;
  for (int dj = -1; dj <= 1; ++dj)
    for (int di = -1; di <= 1; ++di) {
      const double v = field_->at(i + di, j + dj);
      nlo = std::min(nlo, v);
      nhi = std::max(nhi, v);
    }
  if (nlo > a + tie_tol_) return 1.0;
  if (nhi < a - tie_tol_) return 0.0;
  Node node;
  collect(i, j, node);
  double c = 0.0;
  for (int k = 0; k < node.n_sloped; ++k) {
    const double s = node.sloped[k];
    c += s > a + tie_tol_ ? 1.0 : (s >= a - tie_tol_ ? 0.5 : 0.0);
  }
  c += tally_flat(node.flat_value.data(), node.flat_count.data(), node.n_flat, a, tie_tol_, closed);
  return c / static_cast<double>(m_ * m_);
}

// ---------------------------------------------------------------- CSV

LevelSetField read_field_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open field CSV '" + path + "'");
  std::string header;
  std::getline(in, header);
  if (header.empty() || header[0] != '#') throw DataError("field CSV '" + path + "' lacks the '# nx=...' header");
  Grid g;
  double outside = std::nan("");
  bool have_nx = false, have_ny = false, have_h = false;
  std::istringstream hs(header.substr(1));
  std::string tok;
  while (hs >> tok) {
    const auto eq = tok.find('=');
    if (eq == std::string::npos) continue;
    const std::string key = tok.substr(0, eq);
    const double val = parse_double(tok.substr(eq + 1), "field CSV header key " + key);
    if (key == "nx") g.nx = static_cast<int>(val), have_nx = true;
    else if (key == "ny") g.ny = static_cast<int>(val), have_ny = true;
    else if (key == "h") g.h = val, have_h = true;
    else if (key == "origin_x") g.origin.x = val;
    else if (key == "origin_y") g.origin.y = val;
    else if (key == "outside") outside = val;
  }
  if (!have_nx || !have_ny || !have_h) throw DataError("field CSV header must define nx, ny and h");
  g.validate();
  std::vector<double> values;
  values.reserve(g.size());
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    for (const auto& cell : split_csv_line(line)) values.push_back(parse_double(cell, "field CSV value"));
  }
  if (values.size() != g.size()) {
    throw DataError("field CSV '" + path + "' has " + std::to_string(values.size()) + " values, expected " +
                    std::to_string(g.size()));
  }
  if (std::isnan(outside)) return LevelSetField(g, std::move(values));
  return LevelSetField(g, std::move(values), outside);
}

void write_field_csv(const std::string& path, const LevelSetField& field, double t) {
  std::ofstream out(path);
  if (!out) throw ConfigError("cannot write field CSV '" + path + "'");
  const Grid& g = field.grid();
  out << "# nx=" << g.nx << " ny=" << g.ny << " h=" << format_double(g.h) << " origin_x=" << format_double(g.origin.x)
      << " origin_y=" << format_double(g.origin.y) << " t=" << format_double(t)
      << " outside=" << format_double(field.outside_value()) << "\n";
  for (int j = 0; j < g.ny; ++j) {
    for (int i = 0; i < g.nx; ++i) {
      if (i) out << ',';
      out << format_double(field[g.index(i, j)]);
    }
    out << '\n';
  }
}

}  // namespace fracflow
