#include "fracflow/transform.hpp"

#include <fftw3.h>

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <mutex>

#include "fracflow/errors.hpp"
#include "fracflow/parallel.hpp"

namespace fracflow {

namespace {

std::mutex& planner_mutex() {
  static std::mutex m;
  return m;
}

bool smooth_size(int n) {
  for (int f : {2, 3, 5, 7})
    while (n % f == 0) n /= f;
  return n == 1;
}

int fft_size(int n) {
  while (!smooth_size(n)) ++n;
  return n;
}

struct FftwDeleter {
  void operator()(void* p) const { fftw_free(p); }
};
using RealBuf = std::unique_ptr<double, FftwDeleter>;
using ComplexBuf = std::unique_ptr<fftw_complex, FftwDeleter>;

}  // namespace

struct FarFieldTransform::Impl {
  int nx = 0, ny = 0;  // grid
  int px = 0, py = 0;  // padded transform size
  std::size_t nreal = 0, ncomplex = 0;
  fftw_plan forward = nullptr, backward = nullptr;
  ComplexBuf weight_spectrum;

  ~Impl() {
    std::lock_guard<std::mutex> lock(planner_mutex());
    if (forward) fftw_destroy_plan(forward);
    if (backward) fftw_destroy_plan(backward);
  }

  // out[x] = sum_y W(y - x) f(y) over grid nodes, for the grid-shaped input f.
  void correlate(const std::vector<double>& f, std::vector<double>& out) const {
    RealBuf in(static_cast<double*>(fftw_malloc(sizeof(double) * nreal)));
    ComplexBuf spec(static_cast<fftw_complex*>(fftw_malloc(sizeof(fftw_complex) * ncomplex)));
    std::fill(in.get(), in.get() + nreal, 0.0);
    for (int j = 0; j < ny; ++j)
      for (int i = 0; i < nx; ++i) in.get()[static_cast<std::size_t>(j) * px + i] = f[static_cast<std::size_t>(j) * nx + i];
    fftw_execute_dft_r2c(forward, in.get(), spec.get());
    const fftw_complex* w = weight_spectrum.get();
    for (std::size_t k = 0; k < ncomplex; ++k) {
      const double re = spec.get()[k][0] * w[k][0] - spec.get()[k][1] * w[k][1];
      const double im = spec.get()[k][0] * w[k][1] + spec.get()[k][1] * w[k][0];
      spec.get()[k][0] = re;
      spec.get()[k][1] = im;
    }
    fftw_execute_dft_c2r(backward, spec.get(), in.get());
    const double scale = 1.0 / static_cast<double>(nreal);
    out.resize(f.size());
    for (int j = 0; j < ny; ++j)
      for (int i = 0; i < nx; ++i)
        out[static_cast<std::size_t>(j) * nx + i] = in.get()[static_cast<std::size_t>(j) * px + i] * scale;
  }
};

FarFieldTransform::FarFieldTransform(std::shared_ptr<const CurvatureEvaluator> evaluator, int levels)
    : ev_(std::move(evaluator)), levels_(levels), impl_(std::make_unique<Impl>()) {
  if (!ev_) throw ConfigError("transform needs a curvature evaluator");
  if (!ev_->kernel().is_even()) throw PreconditionError("transform far field needs an even kernel");
  if (levels_ < 1) throw ConfigError("transform level count must be at least 1");
  const Grid& g = ev_->grid();
  const CellWeightTable& tab = ev_->table();
  if (tab.half_x() < g.nx - 1 || tab.half_y() < g.ny - 1)
    throw ConfigError("weight table does not cover every in-grid offset");
  Impl& m = *impl_;
  m.nx = g.nx;
  m.ny = g.ny;
  m.px = fft_size(2 * g.nx - 1);
  m.py = fft_size(2 * g.ny - 1);
  m.nreal = static_cast<std::size_t>(m.px) * m.py;
  m.ncomplex = static_cast<std::size_t>(m.py) * (m.px / 2 + 1);

  RealBuf in(static_cast<double*>(fftw_malloc(sizeof(double) * m.nreal)));
  m.weight_spectrum.reset(static_cast<fftw_complex*>(fftw_malloc(sizeof(fftw_complex) * m.ncomplex)));
  {
    std::lock_guard<std::mutex> lock(planner_mutex());
    m.forward = fftw_plan_dft_r2c_2d(m.py, m.px, in.get(), m.weight_spectrum.get(), FFTW_ESTIMATE);
    m.backward = fftw_plan_dft_c2r_2d(m.py, m.px, m.weight_spectrum.get(), in.get(), FFTW_ESTIMATE);
  }
  if (!m.forward || !m.backward) throw NumericalError("FFTW could not create a plan");
  // B[(x - y) mod P] = W(y - x): store W(d) at index (-d) mod P.
  std::fill(in.get(), in.get() + m.nreal, 0.0);
  for (int dj = -(g.ny - 1); dj <= g.ny - 1; ++dj) {
    const int row = ((-dj) % m.py + m.py) % m.py;
    for (int di = -(g.nx - 1); di <= g.nx - 1; ++di) {
      const int col = ((-di) % m.px + m.px) % m.px;
      in.get()[static_cast<std::size_t>(row) * m.px + col] = tab.weight(di, dj);
    }
  }
  fftw_execute_dft_r2c(m.forward, in.get(), m.weight_spectrum.get());
}

FarFieldTransform::~FarFieldTransform() = default;

void FarFieldTransform::evaluate(const FieldContext& ctx, const std::vector<std::size_t>& nodes,
                                 const std::vector<double>& thresholds, std::vector<double>& upper,
                                 std::vector<double>& lower) const {
  const LevelSetField& f = ctx.field();
  const Grid& g = ev_->grid();
  if (!(f.grid() == g)) throw ConfigError("field grid does not match the transform grid");
  if (f.extension() != Extension::Constant) throw PreconditionError("transform far field needs a constant extension");
  if (nodes.size() != thresholds.size()) throw ConfigError("one threshold per node is required");
  const SubcellSamples& s = ctx.samples();
  const CellWeightTable& tab = ev_->table();
  const std::size_t n = g.size();
  const double inv_m2 = 1.0 / static_cast<double>(s.m() * s.m());
  const double tol = s.tie_tolerance();

  // Constant-patch groups.
  std::map<double, std::vector<double>> flat_groups;
  for (std::size_t k = 0; k < n; ++k)
    for (int e = 0; e < s.flat_count(k); ++e) {
      auto& grp = flat_groups[s.flat_value(k, e)];
      if (grp.empty()) {
        if (static_cast<int>(flat_groups.size()) > kMaxFlatValues)
          throw PreconditionError("field has too many distinct constant patches for the transform");
        grp.assign(n, 0.0);
      }
      grp[k] += s.flat_samples(k, e) * inv_m2;
    }
  std::vector<std::pair<double, std::vector<double>>> flat_mass;
  for (auto& [v, grp] : flat_groups) {
    std::vector<double> out;
    impl_->correlate(grp, out);
    flat_mass.emplace_back(v, std::move(out));
  }

  // Level ladder over the sloped samples.
  double smin = std::numeric_limits<double>::infinity(), smax = -smin;
  for (std::size_t k = 0; k < n; ++k) {
    const int c = s.sloped_count(k);
    if (c == 0) continue;
    smin = std::min(smin, s.sloped_begin(k)[0]);
    smax = std::max(smax, s.sloped_begin(k)[c - 1]);
  }
  const bool any_sloped = smin <= smax;
  std::vector<double> L;
  std::vector<std::vector<double>> above;             // above[k][x] = sum_y W(y-x) #{s_y > L_k} / m^2
  // Slab k: for each node with samples in (L_{k-1}, L_k], its position and those samples (sorted).
  struct Slab {
    std::vector<int> di, dj;
    std::vector<double> vmax;
    std::vector<std::uint32_t> begin, end;  // each node's run in values
    std::vector<double> values;

    // Orders entries by decreasing vmax so scans can stop at the first vmax <= cut.
    void sort_by_vmax() {
      std::vector<std::size_t> order(di.size());
      for (std::size_t e = 0; e < order.size(); ++e) order[e] = e;
      std::stable_sort(order.begin(), order.end(), [&](std::size_t p, std::size_t q) { return vmax[p] > vmax[q]; });
      auto permute = [&](auto& v) {
        auto copy = v;
        for (std::size_t e = 0; e < order.size(); ++e) v[e] = copy[order[e]];
      };
      permute(di);
      permute(dj);
      permute(vmax);
      permute(begin);
      permute(end);
    }
  };
  std::vector<Slab> slabs;
  if (any_sloped) {
    const int K = smax > smin ? levels_ : 1;
    L.resize(static_cast<std::size_t>(K) + 1);
    L[0] = std::nextafter(smin, -std::numeric_limits<double>::infinity());
    for (int k = 1; k < K; ++k) L[k] = smin + (smax - smin) * k / K;
    L[K] = smax;
    above.resize(L.size());
    std::vector<double> count(n);
    for (std::size_t k = 0; k < L.size(); ++k) {
      for (std::size_t y = 0; y < n; ++y) {
        const int c = s.sloped_count(y);
        const double* b = s.sloped_begin(y);
        count[y] = static_cast<double>(b + c - std::upper_bound(b, b + c, L[k])) * inv_m2;
      }
      impl_->correlate(count, above[k]);
    }
    slabs.resize(L.size());
    for (std::size_t y = 0; y < n; ++y) {
      const int c = s.sloped_count(y);
      if (c == 0) continue;
      const double* sb = s.sloped_begin(y);
      const double* se = sb + c;
      // Slabs k >= 1 holding samples in (L_{k-1}, L_k].
      const std::size_t k0 = static_cast<std::size_t>(std::lower_bound(L.begin(), L.end(), sb[0]) - L.begin());
      for (std::size_t k = std::max<std::size_t>(k0, 1); k < L.size() && L[k - 1] < se[-1]; ++k) {
        const double* p0 = std::upper_bound(sb, se, L[k - 1]);
        const double* p1 = std::upper_bound(p0, se, L[k]);
        if (p0 == p1) continue;
        Slab& sl = slabs[k];
        sl.di.push_back(static_cast<int>(y % g.nx));
        sl.dj.push_back(static_cast<int>(y / g.nx));
        sl.vmax.push_back(p1[-1]);
        sl.begin.push_back(static_cast<std::uint32_t>(sl.values.size()));
        sl.values.insert(sl.values.end(), p0, p1);
        sl.end.push_back(static_cast<std::uint32_t>(sl.values.size()));
      }
    }
    for (Slab& sl : slabs) sl.sort_by_vmax();
  }

  upper.assign(nodes.size(), 0.0);
  lower.assign(nodes.size(), 0.0);
  const double o = f.outside_value();
  const double half = ev_->halfspace(Vec2{1.0, 0.0});
  const double neg_inf = -std::numeric_limits<double>::infinity();
  parallel_for(nodes.size(), [&](std::size_t begin, std::size_t end) {
    for (std::size_t q = begin; q < end; ++q) {
      const std::size_t x = nodes[q];
      const double a = thresholds[q];
      const int xi = static_cast<int>(x % g.nx), xj = static_cast<int>(x / g.nx);

      // cut[c]: slab index (or -1 below the ladder, -2 above it); count of sloped samples above b[c]
      // weighted by W(y - x) / m^2.
      const double b[2] = {a + tol, std::nextafter(a - tol, neg_inf)};
      double count[2] = {0.0, 0.0};
      std::ptrdiff_t slab[2] = {-2, -2};
      for (int c = 0; c < 2; ++c) {
        if (!any_sloped || b[c] >= L.back()) continue;
        if (b[c] < L.front()) {
          count[c] = above.front()[x];
          continue;
        }
        slab[c] = std::lower_bound(L.begin(), L.end(), b[c]) - L.begin();
        count[c] = above[static_cast<std::size_t>(slab[c])][x];
      }
      for (int c = 0; c < 2; ++c) {
        if (slab[c] <= 0) continue;
        // Both cuts usually fall in one slab: one pass serves both.
        const bool both = c == 0 && slab[1] == slab[0];
        const Slab& sl = slabs[static_cast<std::size_t>(slab[c])];
        const double b0 = b[c], b1 = both ? b[1] : b[c];  // b1 <= b0
        double s0 = 0.0, s1 = 0.0;
        for (std::size_t e = 0; e < sl.di.size() && sl.vmax[e] > b1; ++e) {
          int n0 = 0, n1 = 0;
          for (std::uint32_t v = sl.end[e]; v > sl.begin[e];) {
            const double val = sl.values[--v];
            if (val <= b1) break;
            ++n1;
            n0 += val > b0;
          }
          const double w = tab.weight(sl.di[e] - xi, sl.dj[e] - xj);
          s0 += w * n0;
          s1 += w * n1;
        }
        count[c] += s0 * inv_m2;
        if (both) {
          count[1] += s1 * inv_m2;
          break;
        }
      }
      const double sloped = 0.5 * (count[0] + count[1]);
      double flat_up = 0.0, flat_lo = 0.0;
      for (const auto& [v, mass] : flat_mass) {
        if (v > a + tol) {
          flat_up += mass[x];
          flat_lo += mass[x];
        } else if (v >= a - tol) {
          flat_up += mass[x];
        }
      }
      const double out = ev_->outside_mass(xi, xj);
      upper[q] = sloped + flat_up + (o >= a - tol ? out : 0.0) - half;
      lower[q] = sloped + flat_lo + (o > a + tol ? out : 0.0) - half;
    }
  });
}

std::vector<double> transform_far_field(const LevelSetField& field, const FarFieldTransform& transform,
                                        Strictness strictness) {
  FieldContext ctx(field);
  const std::size_t n = field.grid().size();
  std::vector<std::size_t> nodes(n);
  for (std::size_t k = 0; k < n; ++k) nodes[k] = k;
  std::vector<double> thresholds(n, 0.0), up, lo;
  transform.evaluate(ctx, nodes, thresholds, up, lo);
  return strictness == Strictness::Upper ? up : lo;
}

}  // namespace fracflow
