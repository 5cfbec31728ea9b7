#include "fracflow/audit.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "fracflow/csv.hpp"
#include "fracflow/errors.hpp"

namespace fracflow {

double aitken_limit(const std::vector<double>& s) {
  const std::size_t n = s.size();
  if (n == 0) throw DomainError("aitken_limit needs a non-empty sequence");
  if (n < 3) return s.back();
  const double a = s[n - 3], b = s[n - 2], c = s[n - 1];
  const double d1 = c - b, d0 = b - a;
  const double denom = d1 - d0;
  // A constant tail (or one whose differences stop shrinking) is its own limit.
  if (denom == 0.0 || !(std::fabs(d1) < std::fabs(d0))) return c;
  return c - d1 * d1 / denom;
}

namespace {

// For alpha >= 1 the region mass diverges (the angular integrand is not integrable at the
// tangent directions) and the quadrature reports non-convergence.
double region_mass_or_inf(const KernelSpec& kernel, double r, Vec2 e) {
  try {
    return parabola_region_mass(kernel, r, e, 1.0);
  } catch (const AccuracyError&) {
    return std::numeric_limits<double>::infinity();
  }
}

void finish(AuditSequence& s, double threshold) {
  if (!std::all_of(s.value.begin(), s.value.end(), [](double v) { return std::isfinite(v); })) {
    s.monotone = false;
    s.limit_estimate = s.plateau_ratio = std::numeric_limits<double>::infinity();
    s.pass = false;
    return;
  }
  s.monotone = true;
  for (std::size_t k = 3; k < s.value.size(); ++k)
    if (s.value[k] > s.value[k - 1]) s.monotone = false;
  s.limit_estimate = std::max(0.0, aitken_limit(s.value));
  const double first = s.value.front();
  s.plateau_ratio = first > 0.0 ? s.limit_estimate / first : 0.0;
  s.pass = s.plateau_ratio < threshold;
}

}  // namespace

AdmissibilityReport admissibility_audit(const KernelSpec& kernel, int directions, double threshold) {
  if (directions < 1) throw ConfigError("admissibility audit needs at least one direction");
  AdmissibilityReport r;
  r.kernel = kernel.describe();
  r.threshold = threshold;
  constexpr int kLevels = 13;

  r.tail.name = "tail";
  for (int k = 0; k < kLevels; ++k) {
    const double d = std::ldexp(1.0, -k);
    r.tail.parameter.push_back(d);
    r.tail.value.push_back(d * kernel.tail_mass(d));
  }
  finish(r.tail, threshold);
  r.worst_plateau_ratio = r.tail.plateau_ratio;
  r.pass = r.tail.pass;

  if (kernel.dimension() == 2) {
    for (int i = 0; i < directions; ++i) {
      const double th = 2.0 * kPi * i / directions;
      r.directions.push_back(th);
      AuditSequence s;
      s.name = "parabola";
      const Vec2 e{std::cos(th), std::sin(th)};
      for (int j = 0; j < kLevels; ++j) {
        const double rr = std::ldexp(1.0, -j);
        s.parameter.push_back(rr);
        // Once the mass has diverged the smaller radii are not evaluated.
        const bool diverged = !s.value.empty() && !std::isfinite(s.value.back());
        s.value.push_back(diverged ? s.value.back() : rr * region_mass_or_inf(kernel, rr, e));
      }
      finish(s, threshold);
      r.worst_plateau_ratio = std::max(r.worst_plateau_ratio, s.plateau_ratio);
      r.pass = r.pass && s.pass;
      r.parabola.push_back(std::move(s));
    }
  }
  return r;
}

void write_audit_csv(const std::string& path, const AdmissibilityReport& report) {
  CsvWriter w(path, {"check", "direction", "parameter", "value", "monotone", "plateau_ratio", "pass"});
  auto emit = [&](const AuditSequence& s, const std::string& dir) {
    for (std::size_t k = 0; k < s.value.size(); ++k)
      w.row_mixed({s.name, dir, format_double(s.parameter[k]), format_double(s.value[k]), s.monotone ? "1" : "0",
                   format_double(s.plateau_ratio), s.pass ? "PASS" : "FAIL"});
  };
  emit(report.tail, "");
  for (std::size_t i = 0; i < report.parabola.size(); ++i) emit(report.parabola[i], format_double(report.directions[i]));
}

}  // namespace fracflow
