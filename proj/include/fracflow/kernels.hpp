#pragma once

#include <functional>
#include <limits>
#include <memory>
#include <string>
#include <vector>

#include "fracflow/vec.hpp"

namespace fracflow {

enum class KernelKind { PowerLaw, BoundedDensity, RescaledDislocation };

// Positive function on the unit circle sampled at theta_k = 2 pi k / M and interpolated linearly.
// An empty table means g == 1.
class Anisotropy {
 public:
  Anisotropy() = default;
  explicit Anisotropy(std::vector<double> samples);

  double operator()(double theta) const;
  // Exact integral of the interpolant over [a, b] (any a <= b, may wrap several times).
  double integral(double a, double b) const;
  bool is_constant() const { return samples_.empty(); }
  bool is_even() const;
  // Knot angles in [0, 2 pi); empty when constant.
  std::vector<double> knots() const;
  const std::vector<double>& samples() const { return samples_; }

 private:
  double primitive(double theta) const;  // integral from 0 to theta, theta in [0, 2 pi]
  std::vector<double> samples_;
  std::vector<double> cumulative_;
  double period_integral_ = kTwoPi;
};

// Radial density profile for bounded kernels with analytic radial moments.
struct RadialProfile {
  enum class Kind { Gaussian, Annulus, Sampled };
  Kind kind = Kind::Gaussian;
  // Gaussian: amplitude * exp(-(rho/sigma)^2)
  double amplitude = 1.0;
  double sigma = 1.0;
  // Annulus: value on inner <= rho <= outer
  double inner = 0.0;
  double outer = 1.0;
  double value = 1.0;
  // Sampled: piecewise linear through (radius, value), zero beyond the last radius
  std::vector<double> radius;
  std::vector<double> samples;

  static RadialProfile gaussian(double amplitude, double sigma);
  static RadialProfile annulus(double inner, double outer, double value);
  static RadialProfile sampled(std::vector<double> radius, std::vector<double> values);
  static RadialProfile from_csv(const std::string& path);

  double operator()(double rho) const;
  // integral_a^b c(rho) rho^(dim-1) d rho, b may be +inf
  double moment(double a, double b, int dim) const;
  std::vector<double> breakpoints() const;
  double support() const;  // +inf for the Gaussian
  void validate() const;
};

// The singular measure nu = density(z) dz in dimension 1 or 2.
class KernelSpec {
 public:
  static KernelSpec power_law(double alpha, int dim = 2, Anisotropy g = {}, double prefactor = 1.0);
  // Skips the alpha in (0,1) check. Only for demonstrating why alpha = 1 is excluded.
  static KernelSpec power_law_unchecked(double alpha, int dim = 2, Anisotropy g = {}, double prefactor = 1.0);
  static KernelSpec bounded(RadialProfile profile, int dim = 2);
  // General bounded density given as a closure; numeric radial moments. dim = 2 only.
  static KernelSpec bounded_closure(std::function<double(Vec2)> c0, double support_radius, bool even,
                                    std::vector<double> radial_breaks = {});
  static KernelSpec rescaled_dislocation(double epsilon, int dim = 2);

  KernelKind kind() const { return kind_; }
  int dimension() const { return dim_; }
  bool is_even() const;
  bool is_isotropic() const;
  bool is_bounded() const { return kind_ != KernelKind::PowerLaw; }

  double density(Vec2 z) const;
  // integral_a^b density(rho w) rho^(N-1) d rho along w = (cos theta, sin theta); b may be +inf.
  double radial_mass(double theta, double a, double b) const;
  double tail_mass(double delta) const;
  // nu{|z| > delta : e.z > 0}
  double halfspace_tail(double delta, Vec2 e) const;
  // Total mass, +inf for the power law.
  double total_mass() const;

  // Exponent s such that radial_mass(theta, rho0, b) ~ rho0^-s as rho0 -> 0 (alpha for the power law, 0 otherwise).
  double singular_exponent() const;
  // Radii where the density is not smooth.
  std::vector<double> radial_breakpoints() const;
  // Directions where the density is not smooth in angle.
  std::vector<double> angular_breakpoints() const;

  double alpha() const { return alpha_; }
  double prefactor() const { return prefactor_; }
  double epsilon() const { return epsilon_; }
  const Anisotropy& anisotropy() const { return g_; }
  const RadialProfile* profile() const { return has_profile_ ? &profile_ : nullptr; }
  std::string describe() const;

  // Smooth base profile of the rescaled dislocation kernel (equal to s^-(N+1) for s >= 1).
  static double dislocation_base(double s, int dim);

 private:
  KernelSpec() = default;
  double angular_integral(double a, double b, const std::function<double(double)>& f) const;

  KernelKind kind_ = KernelKind::PowerLaw;
  int dim_ = 2;
  double alpha_ = 0.5;
  double prefactor_ = 1.0;
  Anisotropy g_;
  bool has_profile_ = false;
  RadialProfile profile_;
  std::function<double(Vec2)> closure_;
  double support_ = std::numeric_limits<double>::infinity();
  bool closure_even_ = false;
  std::vector<double> closure_breaks_;
  double epsilon_ = 0.0;
  double dislocation_scale_ = 0.0;  // eps^-(N+1) / |ln eps|
};

using KernelPtr = std::shared_ptr<const KernelSpec>;

// nu{ z in B_delta : r |z.e| <= |z - (z.e) e|^2 }
double parabola_region_mass(const KernelSpec& kernel, double r, Vec2 e, double delta);

// nu{ z : 0 <= e.z <= |z|^2 }, the quantity whose infimum over e enters the containment constant.
double lens_mass(const KernelSpec& kernel, Vec2 e);

}  // namespace fracflow
