#include "fracflow/kernels.hpp"

#include <algorithm>
#include <boost/math/quadrature/gauss.hpp>
#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <cmath>
#include <fstream>
#include <sstream>

#include "fracflow/errors.hpp"

namespace fracflow {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

double wrap_angle(double theta) {
  double t = std::fmod(theta, kTwoPi);
  if (t < 0) t += kTwoPi;
  if (t >= kTwoPi) t = 0.0;
  return t;
}

template <class F>
double gk_integrate(F&& f, double a, double b, double tol = 1e-13) {
  if (!(b > a)) return 0.0;
  return boost::math::quadrature::gauss_kronrod<double, 31>::integrate(f, a, b, 20, tol);
}

std::string fmt_double(double v) {
  std::ostringstream os;
  os.precision(17);
  os << v;
  return os.str();
}

}  // namespace

// ---------------------------------------------------------------- Anisotropy

Anisotropy::Anisotropy(std::vector<double> samples) : samples_(std::move(samples)) {
  if (samples_.empty()) return;
  if (samples_.size() < 16) throw ConfigError("anisotropy table needs at least 16 direction samples");
  for (double g : samples_) {
    if (!std::isfinite(g) || g <= 0.0) throw ConfigError("anisotropy samples must be finite and positive");
  }
  const std::size_t m = samples_.size();
  const double step = kTwoPi / static_cast<double>(m);
  cumulative_.assign(m + 1, 0.0);
  for (std::size_t k = 0; k < m; ++k) {
    cumulative_[k + 1] = cumulative_[k] + 0.5 * step * (samples_[k] + samples_[(k + 1) % m]);
  }
  period_integral_ = cumulative_[m];
}

double Anisotropy::operator()(double theta) const {
  if (samples_.empty()) return 1.0;
  const std::size_t m = samples_.size();
  const double step = kTwoPi / static_cast<double>(m);
  const double t = wrap_angle(theta) / step;
  auto k = static_cast<std::size_t>(t);
  if (k >= m) k = m - 1;
  const double f = t - static_cast<double>(k);
  return samples_[k] + f * (samples_[(k + 1) % m] - samples_[k]);
}

double Anisotropy::primitive(double theta) const {
  const std::size_t m = samples_.size();
  const double step = kTwoPi / static_cast<double>(m);
  const double t = theta / step;
  auto k = static_cast<std::size_t>(t);
  if (k >= m) return cumulative_[m];
  const double f = t - static_cast<double>(k);
  const double g0 = samples_[k];
  const double g1 = samples_[(k + 1) % m];
  return cumulative_[k] + step * (f * g0 + 0.5 * f * f * (g1 - g0));
}

double Anisotropy::integral(double a, double b) const {
  if (samples_.empty()) return b - a;
  auto full = [&](double th) {
    const double turns = std::floor(th / kTwoPi);
    return turns * period_integral_ + primitive(th - turns * kTwoPi);
  };
  return full(b) - full(a);
}

bool Anisotropy::is_even() const {
  if (samples_.empty()) return true;
  const std::size_t m = samples_.size();
  if (m % 2 != 0) return false;
  for (std::size_t k = 0; k < m / 2; ++k) {
    if (samples_[k] != samples_[k + m / 2]) return false;
  }
  return true;
}

std::vector<double> Anisotropy::knots() const {
  std::vector<double> out;
  const std::size_t m = samples_.size();
  for (std::size_t k = 0; k < m; ++k) out.push_back(kTwoPi * static_cast<double>(k) / static_cast<double>(m));
  return out;
}

// ---------------------------------------------------------------- RadialProfile

RadialProfile RadialProfile::gaussian(double amplitude, double sigma) {
  RadialProfile p;
  p.kind = Kind::Gaussian;
  p.amplitude = amplitude;
  p.sigma = sigma;
  p.validate();
  return p;
}

RadialProfile RadialProfile::annulus(double inner, double outer, double value) {
  RadialProfile p;
  p.kind = Kind::Annulus;
  p.inner = inner;
  p.outer = outer;
  p.value = value;
  p.validate();
  return p;
}

RadialProfile RadialProfile::sampled(std::vector<double> radius, std::vector<double> values) {
  RadialProfile p;
  p.kind = Kind::Sampled;
  p.radius = std::move(radius);
  p.samples = std::move(values);
  p.validate();
  return p;
}

RadialProfile RadialProfile::from_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open radial profile CSV '" + path + "'");
  std::vector<double> r, v;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    std::replace(line.begin(), line.end(), ',', ' ');
    std::istringstream ls(line);
    double a = 0, b = 0;
    if (!(ls >> a >> b)) {
      if (r.empty()) continue;  // header line
      throw DataError("malformed row in radial profile CSV '" + path + "': " + line);
    }
    r.push_back(a);
    v.push_back(b);
  }
  return sampled(std::move(r), std::move(v));
}

void RadialProfile::validate() const {
  switch (kind) {
    case Kind::Gaussian:
      if (!(amplitude >= 0.0) || !(sigma > 0.0) || !std::isfinite(amplitude) || !std::isfinite(sigma))
        throw ConfigError("gaussian profile needs amplitude >= 0 and sigma > 0");
      break;
    case Kind::Annulus:
      if (!(inner >= 0.0) || !(outer > inner) || !(value >= 0.0) || !std::isfinite(outer) || !std::isfinite(value))
        throw ConfigError("annulus profile needs 0 <= inner < outer and value >= 0");
      break;
    case Kind::Sampled:
      if (radius.size() < 2 || radius.size() != samples.size())
        throw ConfigError("sampled radial profile needs at least two (radius, value) rows");
      for (std::size_t i = 0; i < radius.size(); ++i) {
        if (!std::isfinite(radius[i]) || !std::isfinite(samples[i]) || samples[i] < 0.0 || radius[i] < 0.0)
          throw DataError("sampled radial profile has a negative or non-finite entry");
        if (i > 0 && !(radius[i] > radius[i - 1])) throw DataError("sampled radial profile radii must increase");
      }
      break;
  }
}

double RadialProfile::operator()(double rho) const {
  switch (kind) {
    case Kind::Gaussian:
      return amplitude * std::exp(-(rho / sigma) * (rho / sigma));
    case Kind::Annulus:
      return (rho >= inner && rho <= outer) ? value : 0.0;
    case Kind::Sampled: {
      if (rho <= radius.front()) return samples.front();
      if (rho > radius.back()) return 0.0;
      const auto it = std::upper_bound(radius.begin(), radius.end(), rho);
      const std::size_t i = static_cast<std::size_t>(it - radius.begin()) - 1;
      if (i + 1 >= radius.size()) return samples.back();
      const double f = (rho - radius[i]) / (radius[i + 1] - radius[i]);
      return samples[i] + f * (samples[i + 1] - samples[i]);
    }
  }
  return 0.0;
}

double RadialProfile::moment(double a, double b, int dim) const {
  if (!(b > a)) return 0.0;
  switch (kind) {
    case Kind::Gaussian: {
      if (dim == 2) {
        const double ea = std::exp(-(a / sigma) * (a / sigma));
        const double eb = std::isinf(b) ? 0.0 : std::exp(-(b / sigma) * (b / sigma));
        return 0.5 * amplitude * sigma * sigma * (ea - eb);
      }
      const double ca = std::erfc(a / sigma);
      const double cb = std::isinf(b) ? 0.0 : std::erfc(b / sigma);
      return 0.5 * amplitude * sigma * std::sqrt(kPi) * (ca - cb);
    }
    case Kind::Annulus: {
      const double lo = std::max(a, inner);
      const double hi = std::min(b, outer);
      if (!(hi > lo)) return 0.0;
      return dim == 2 ? 0.5 * value * (hi * hi - lo * lo) : value * (hi - lo);
    }
    case Kind::Sampled: {
      double total = 0.0;
      auto piece = [&](double lo, double hi, double c0, double s) {
        // integral of (c0 + s rho) rho^(dim-1)
        if (!(hi > lo)) return 0.0;
        if (dim == 1) return c0 * (hi - lo) + 0.5 * s * (hi * hi - lo * lo);
        return 0.5 * c0 * (hi * hi - lo * lo) + s * (hi * hi * hi - lo * lo * lo) / 3.0;
      };
      total += piece(a, std::min(b, radius.front()), samples.front(), 0.0);
      for (std::size_t i = 0; i + 1 < radius.size(); ++i) {
        const double lo = std::max(a, radius[i]);
        const double hi = std::min(b, radius[i + 1]);
        const double s = (samples[i + 1] - samples[i]) / (radius[i + 1] - radius[i]);
        total += piece(lo, hi, samples[i] - s * radius[i], s);
      }
      return total;
    }
  }
  return 0.0;
}

std::vector<double> RadialProfile::breakpoints() const {
  switch (kind) {
    case Kind::Gaussian:
      return {};
    case Kind::Annulus:
      return inner > 0.0 ? std::vector<double>{inner, outer} : std::vector<double>{outer};
    case Kind::Sampled: {
      std::vector<double> out;
      for (double r : radius)
        if (r > 0.0) out.push_back(r);
      return out;
    }
  }
  return {};
}

double RadialProfile::support() const {
  switch (kind) {
    case Kind::Gaussian:
      return kInf;
    case Kind::Annulus:
      return outer;
    case Kind::Sampled:
      return radius.back();
  }
  return kInf;
}

// ---------------------------------------------------------------- KernelSpec

KernelSpec KernelSpec::power_law_unchecked(double alpha, int dim, Anisotropy g, double prefactor) {
  if (dim != 1 && dim != 2) throw ConfigError("kernel dimension must be 1 or 2");
  if (!(prefactor > 0.0) || !std::isfinite(prefactor)) throw ConfigError("kernel.prefactor must be positive");
  if (dim == 1 && !g.is_constant()) throw ConfigError("anisotropy tables are only meaningful for dimension 2");
  KernelSpec k;
  k.kind_ = KernelKind::PowerLaw;
  k.dim_ = dim;
  k.alpha_ = alpha;
  k.prefactor_ = prefactor;
  k.g_ = std::move(g);
  return k;
}

KernelSpec KernelSpec::power_law(double alpha, int dim, Anisotropy g, double prefactor) {
  if (!(alpha > 0.0 && alpha < 1.0)) {
    throw ConfigError("kernel.alpha must lie strictly inside (0, 1), got " + fmt_double(alpha));
  }
  return power_law_unchecked(alpha, dim, std::move(g), prefactor);
}

KernelSpec KernelSpec::bounded(RadialProfile profile, int dim) {
  if (dim != 1 && dim != 2) throw ConfigError("kernel dimension must be 1 or 2");
  profile.validate();
  KernelSpec k;
  k.kind_ = KernelKind::BoundedDensity;
  k.dim_ = dim;
  k.has_profile_ = true;
  k.profile_ = std::move(profile);
  k.support_ = k.profile_.support();
  return k;
}

KernelSpec KernelSpec::bounded_closure(std::function<double(Vec2)> c0, double support_radius, bool even,
                                       std::vector<double> radial_breaks) {
  if (!c0) throw ConfigError("bounded kernel closure is empty");
  if (!(support_radius > 0.0) || !std::isfinite(support_radius))
    throw ConfigError("bounded kernel closure needs a finite support radius");
  KernelSpec k;
  k.kind_ = KernelKind::BoundedDensity;
  k.dim_ = 2;
  k.closure_ = std::move(c0);
  k.support_ = support_radius;
  k.closure_even_ = even;
  k.closure_breaks_ = std::move(radial_breaks);
  std::sort(k.closure_breaks_.begin(), k.closure_breaks_.end());
  return k;
}

KernelSpec KernelSpec::rescaled_dislocation(double epsilon, int dim) {
  if (dim != 1 && dim != 2) throw ConfigError("kernel dimension must be 1 or 2");
  if (!(epsilon > 0.0 && epsilon < 1.0)) {
    throw ConfigError("kernel.epsilon must lie strictly inside (0, 1), got " + fmt_double(epsilon));
  }
  KernelSpec k;
  k.kind_ = KernelKind::RescaledDislocation;
  k.dim_ = dim;
  k.epsilon_ = epsilon;
  k.dislocation_scale_ = std::pow(epsilon, -(dim + 1)) / std::fabs(std::log(epsilon));
  return k;
}

double KernelSpec::dislocation_base(double s, int dim) {
  const double p = static_cast<double>(dim + 1);
  if (s <= 0.8) return 1.0;
  if (s >= 1.0) return std::pow(s, -p);
  const double t = (s - 0.8) / 0.2;
  const double b = t * t * t * (10.0 + t * (-15.0 + 6.0 * t));
  return (1.0 - b) + b * std::pow(s, -p);
}

bool KernelSpec::is_even() const {
  switch (kind_) {
    case KernelKind::PowerLaw:
      return g_.is_even();
    case KernelKind::BoundedDensity:
      return has_profile_ ? true : closure_even_;
    case KernelKind::RescaledDislocation:
      return true;
  }
  return false;
}

bool KernelSpec::is_isotropic() const {
  switch (kind_) {
    case KernelKind::PowerLaw:
      return g_.is_constant();
    case KernelKind::BoundedDensity:
      return has_profile_;
    case KernelKind::RescaledDislocation:
      return true;
  }
  return false;
}

double KernelSpec::density(Vec2 z) const {
  const double r = dim_ == 1 ? std::fabs(z.x) : norm(z);
  if (!(r > 0.0)) throw DomainError("kernel density is singular at z = 0");
  switch (kind_) {
    case KernelKind::PowerLaw: {
      const double g = g_.is_constant() ? 1.0 : g_(std::atan2(z.y, z.x));
      return prefactor_ * g * std::pow(r, -static_cast<double>(dim_) - alpha_);
    }
    case KernelKind::BoundedDensity:
      return has_profile_ ? profile_(r) : (r > support_ ? 0.0 : closure_(z));
    case KernelKind::RescaledDislocation:
      return dislocation_scale_ * dislocation_base(r / epsilon_, dim_);
  }
  return 0.0;
}

namespace {

// integral_a^b c0(s) s^(dim-1) ds for the dislocation base profile.
double dislocation_moment(double a, double b, int dim) {
  if (!(b > a)) return 0.0;
  double total = 0.0;
  {
    const double lo = a, hi = std::min(b, 0.8);
    if (hi > lo) total += dim == 2 ? 0.5 * (hi * hi - lo * lo) : hi - lo;
  }
  {
    const double lo = std::max(a, 0.8), hi = std::min(b, 1.0);
    if (hi > lo) {
      auto f = [dim](double s) { return KernelSpec::dislocation_base(s, dim) * (dim == 2 ? s : 1.0); };
      total += boost::math::quadrature::gauss<double, 30>::integrate(f, lo, hi);
    }
  }
  {
    const double lo = std::max(a, 1.0);
    if (b > lo) total += 1.0 / lo - (std::isinf(b) ? 0.0 : 1.0 / b);
  }
  return total;
}

}  // namespace

double KernelSpec::radial_mass(double theta, double a, double b) const {
  if (a < 0.0) a = 0.0;
  if (!(b > a)) return 0.0;
  switch (kind_) {
    case KernelKind::PowerLaw: {
      const double g = (dim_ == 1 || g_.is_constant()) ? 1.0 : g_(theta);
      if (a == 0.0) return kInf;
      const double tb = std::isinf(b) ? 0.0 : std::pow(b, -alpha_);
      if (alpha_ == 1.0) return prefactor_ * g * (1.0 / a - (std::isinf(b) ? 0.0 : 1.0 / b));
      return prefactor_ * g * (std::pow(a, -alpha_) - tb) / alpha_;
    }
    case KernelKind::BoundedDensity: {
      if (has_profile_) return profile_.moment(a, b, dim_);
      const double hi = std::min(b, support_);
      if (!(hi > a)) return 0.0;
      const Vec2 w = unit_from_angle(theta);
      std::vector<double> cuts{a};
      for (double r : closure_breaks_)
        if (r > a && r < hi) cuts.push_back(r);
      cuts.push_back(hi);
      double total = 0.0;
      for (std::size_t i = 0; i + 1 < cuts.size(); ++i) {
        total += gk_integrate([&](double rho) { return closure_(w * rho) * rho; }, cuts[i], cuts[i + 1]);
      }
      return total;
    }
    case KernelKind::RescaledDislocation: {
      const double sb = std::isinf(b) ? kInf : b / epsilon_;
      return dislocation_moment(a / epsilon_, sb, dim_) * dislocation_scale_ * std::pow(epsilon_, dim_);
    }
  }
  return 0.0;
}

double KernelSpec::angular_integral(double a, double b, const std::function<double(double)>& f) const {
  // Split at quarter turns so the Kronrod rule sees smooth pieces for typical closures.
  double total = 0.0;
  const int pieces = std::max(1, static_cast<int>(std::ceil((b - a) / (kPi / 4.0) - 1e-12)));
  const double step = (b - a) / pieces;
  for (int i = 0; i < pieces; ++i) total += gk_integrate(f, a + i * step, a + (i + 1) * step, 1e-12);
  return total;
}

double KernelSpec::tail_mass(double delta) const {
  if (!(delta > 0.0)) throw DomainError("tail_mass needs delta > 0");
  if (dim_ == 1) return radial_mass(0.0, delta, kInf) + radial_mass(kPi, delta, kInf);
  switch (kind_) {
    case KernelKind::PowerLaw: {
      const double radial = alpha_ == 1.0 ? 1.0 / delta : std::pow(delta, -alpha_) / alpha_;
      return prefactor_ * radial * g_.integral(0.0, kTwoPi);
    }
    case KernelKind::BoundedDensity:
      if (has_profile_) return kTwoPi * profile_.moment(delta, kInf, 2);
      return angular_integral(0.0, kTwoPi, [&](double th) { return radial_mass(th, delta, kInf); });
    case KernelKind::RescaledDislocation:
      return kTwoPi * radial_mass(0.0, delta, kInf);
  }
  return 0.0;
}

double KernelSpec::halfspace_tail(double delta, Vec2 e) const {
  if (!(delta > 0.0)) throw DomainError("halfspace_tail needs delta > 0");
  if (is_even()) return 0.5 * tail_mass(delta);
  if (dim_ == 1) return e.x > 0 ? radial_mass(0.0, delta, kInf) : radial_mass(kPi, delta, kInf);
  const double te = std::atan2(e.y, e.x);
  if (kind_ == KernelKind::PowerLaw) {
    return prefactor_ * std::pow(delta, -alpha_) / alpha_ * g_.integral(te - kPi / 2, te + kPi / 2);
  }
  return angular_integral(te - kPi / 2, te + kPi / 2, [&](double th) { return radial_mass(th, delta, kInf); });
}

double KernelSpec::total_mass() const {
  switch (kind_) {
    case KernelKind::PowerLaw:
      return kInf;
    case KernelKind::BoundedDensity:
    case KernelKind::RescaledDislocation:
      if (dim_ == 1) return radial_mass(0.0, 0.0, kInf) + radial_mass(kPi, 0.0, kInf);
      if (is_isotropic()) return kTwoPi * radial_mass(0.0, 0.0, kInf);
      return angular_integral(0.0, kTwoPi, [&](double th) { return radial_mass(th, 0.0, kInf); });
  }
  return kInf;
}

double KernelSpec::singular_exponent() const { return kind_ == KernelKind::PowerLaw ? alpha_ : 0.0; }

std::vector<double> KernelSpec::radial_breakpoints() const {
  switch (kind_) {
    case KernelKind::PowerLaw:
      return {};
    case KernelKind::BoundedDensity: {
      std::vector<double> out = has_profile_ ? profile_.breakpoints() : closure_breaks_;
      if (!has_profile_) out.push_back(support_);
      std::sort(out.begin(), out.end());
      out.erase(std::unique(out.begin(), out.end()), out.end());
      return out;
    }
    case KernelKind::RescaledDislocation:
      return {0.8 * epsilon_, epsilon_};
  }
  return {};
}

std::vector<double> KernelSpec::angular_breakpoints() const {
  if (kind_ == KernelKind::PowerLaw) return g_.knots();
  return {};
}

std::string KernelSpec::describe() const {
  std::ostringstream os;
  os.precision(17);
  switch (kind_) {
    case KernelKind::PowerLaw:
      os << "power_law(alpha=" << alpha_ << ", prefactor=" << prefactor_
         << (g_.is_constant() ? ", isotropic" : ", anisotropic") << ", N=" << dim_ << ")";
      break;
    case KernelKind::BoundedDensity:
      os << "bounded_density(N=" << dim_ << ", mass=" << total_mass() << ")";
      break;
    case KernelKind::RescaledDislocation:
      os << "rescaled_dislocation(epsilon=" << epsilon_ << ", N=" << dim_ << ")";
      break;
  }
  return os.str();
}

// ---------------------------------------------------------------- region masses

namespace {

// Composite Gauss-Legendre on t in [0,1] with theta = theta0 + sign * width * t^grade.
// Returns the integral of f(theta) d theta over the piece.
template <class F>
double graded_piece(F&& f, double theta0, double width, double sign, double grade, int panels) {
  const auto& x = boost::math::quadrature::gauss<double, 8>::abscissa();
  const auto& w = boost::math::quadrature::gauss<double, 8>::weights();
  double total = 0.0;
  for (int p = 0; p < panels; ++p) {
    const double a = static_cast<double>(p) / panels;
    const double b = static_cast<double>(p + 1) / panels;
    const double mid = 0.5 * (a + b), half = 0.5 * (b - a);
    for (std::size_t i = 0; i < x.size(); ++i) {
      for (int s = -1; s <= 1; s += 2) {
        if (i == 0 && s == 1 && x[0] == 0.0) continue;
        const double t = mid + s * half * x[i];
        const double jac = width * grade * std::pow(t, grade - 1.0);
        total += half * w[i] * f(theta0 + sign * width * std::pow(t, grade)) * jac;
      }
    }
  }
  return total;
}

}  // namespace

double parabola_region_mass(const KernelSpec& kernel, double r, Vec2 e, double delta) {
  if (!(r > 0.0)) throw DomainError("parabola_region_mass needs r > 0");
  if (!(delta > 0.0 && delta <= 1.0)) throw DomainError("parabola_region_mass needs 0 < delta <= 1");
  const double en = norm(e);
  if (std::fabs(en - 1.0) > 1e-12) throw DomainError("parabola_region_mass needs a unit vector e");
  if (kernel.dimension() == 1) return 0.0;  // the region degenerates to {0}
  // Directions w with |e.w| = sin(psi) < c_star satisfy rho0 = r|c|/s^2 < delta.
  const double c_star = 2.0 * delta / (r + std::sqrt(r * r + 4.0 * delta * delta));
  const double psi_star = std::asin(std::min(1.0, c_star));
  const double te = std::atan2(e.y, e.x);
  const double s_exp = kernel.singular_exponent();
  const double grade = s_exp < 1.0 ? std::min(1.0 / (1.0 - s_exp), 12.0) : 12.0;
  // Offsets psi from the tangent directions te +- pi/2, where the integrand is singular. Working in
  // psi keeps |e.w| = sin(psi) exact near the tangent.
  auto piece = [&](double base, double sign, int panels) {
    auto integrand = [&](double psi) {
      if (!(psi > 0.0)) return 0.0;
      const double c = std::sin(psi);
      const double s2 = std::max(0.0, 1.0 - c * c);
      if (s2 <= 0.0) return 0.0;
      const double rho0 = r * c / s2;
      if (rho0 >= delta) return 0.0;
      return kernel.radial_mass(base + sign * psi, rho0, delta);
    };
    return graded_piece(integrand, 0.0, psi_star, +1.0, grade, panels);
  };
  auto level = [&](int panels) {
    double total = 0.0;
    for (double base : {te + kPi / 2, te - kPi / 2}) total += piece(base, +1.0, panels) + piece(base, -1.0, panels);
    return total;
  };
  double prev = level(4);
  double change = 0.0;
  for (int depth = 1, panels = 8; depth <= 12; ++depth, panels *= 2) {
    const double cur = level(panels);
    change = std::fabs(cur - prev);
    prev = cur;
    if (change <= 1e-10 * std::fabs(cur)) return cur;
  }
  if (change > 1e-4 * std::fabs(prev)) {
    throw AccuracyError("parabola_region_mass: refinement did not converge (relative change " +
                        fmt_double(change / std::fabs(prev)) + ")");
  }
  return prev;
}

double lens_mass(const KernelSpec& kernel, Vec2 e) {
  const double en = norm(e);
  if (std::fabs(en - 1.0) > 1e-12) throw DomainError("lens_mass needs a unit vector e");
  if (kernel.dimension() == 1) {
    return e.x > 0 ? kernel.radial_mass(0.0, 1.0, kInf) : kernel.radial_mass(kPi, 1.0, kInf);
  }
  const double te = std::atan2(e.y, e.x);
  const double s_exp = kernel.singular_exponent();
  const double grade = s_exp < 1.0 ? std::min(1.0 / (1.0 - s_exp), 12.0) : 12.0;
  // psi is the offset from the tangent direction toward e, so e.w = sin(psi).
  auto piece = [&](double base, double sign, int panels) {
    auto integrand = [&](double psi) {
      if (!(psi > 0.0)) return 0.0;
      return kernel.radial_mass(base + sign * psi, std::sin(psi), kInf);
    };
    return graded_piece(integrand, 0.0, kPi / 2, +1.0, grade, panels);
  };
  auto level = [&](int panels) { return piece(te + kPi / 2, -1.0, panels) + piece(te - kPi / 2, +1.0, panels); };
  double prev = level(8);
  for (int panels = 16; panels <= 8192; panels *= 2) {
    const double cur = level(panels);
    if (std::fabs(cur - prev) <= 1e-11 * std::fabs(cur)) return cur;
    prev = cur;
  }
  throw AccuracyError("lens_mass: angular refinement did not converge");
}

}  // namespace fracflow
