#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "fracflow/curvature.hpp"
#include "fracflow/flow.hpp"
#include "fracflow/kernels.hpp"

namespace fracflow {

// Limit of (1 - alpha) kappa_ball(1) as alpha -> 1 for the isotropic power law with g = 1 in 2D,
// and of the rescaled dislocation curvature of the unit disk as epsilon -> 0: the classical law
// reads dr/dt = -C_N / r.
inline constexpr double kClassicalConstant = 1.0;

// kappa at x = (r, 0) on the boundary of B_r (inward gradient), by graded quadrature over the
// directions of the front half-plane; independent of any grid.
double radial_ball_oracle(double r, const KernelSpec& kernel);

// Same quantity by Monte Carlo: dyadic shells around x, uniform points in each shell weighted by the
// density, hit test against the ball. Beyond |z| = 2r the region is exactly the back half-plane.
// Deterministic for a given seed. 2D kernels only.
double monte_carlo_ball_curvature(double r, const KernelSpec& kernel, std::size_t samples, std::uint64_t seed);

// kappa_ball on a log-spaced radius table with monotone cubic interpolation (of log|kappa| when
// kappa < 0 on the whole table).
class BallCurvatureTable {
 public:
  BallCurvatureTable(const KernelSpec& kernel, double r_min, double r_max, int points = 64);
  double operator()(double r) const;
  double r_min() const { return r_min_; }
  double r_max() const { return r_max_; }
  // Largest relative deviation from the oracle at the midpoints between table radii.
  double max_interpolation_error() const { return max_error_; }

 private:
  double r_min_, r_max_;
  bool log_values_ = true;
  std::function<double(double)> interp_;
  double max_error_ = 0.0;
};

struct DiskBandRow {
  Vec2 x;
  double u = 0.0;
  double kappa = 0.0;   // mean of the two envelopes
  double oracle = 0.0;  // kappa_ball(|x - center|), the level circle through the node
  double rel_error = 0.0;
};

struct DiskBandCheck {
  std::vector<DiskBandRow> rows;
  double max_rel_error = 0.0;
};

// Grid curvature (direct far field) at every node with |u| <= band of the signed distance to the
// disk B_R(center), against the oracle on the circle through the node.
DiskBandCheck disk_band_check(const Grid& grid, Vec2 center, double R, KernelPtr kernel, double delta, double band,
                              int subcell = 8);
void write_disk_band_csv(const std::string& path, const DiskBandCheck& check);

struct BallTrajectory {
  std::vector<double> t, r, drdt;
  bool extinct = false;          // r reached r_min before t_end
  double extinction_time = 0.0;
  // Cubic Hermite interpolation between accepted steps; 0 after extinction.
  double radius_at(double time) const;
};

// dr/dt = mu (c1 + kappa_ball(r)) by an adaptive embedded Runge-Kutta 4(5) pair, until t_end or
// r <= r_min (r_min = 0 selects 1e-3 r0).
BallTrajectory ball_ode_trajectory(double r0, const KernelSpec& kernel, double c1, double mu, double t_end,
                                   double r_min = 0.0);

struct ComparisonResult {
  double max_violation = 0.0;           // max over steps and nodes of (u - v)+
  std::vector<double> t, violation;     // per step
  bool fronts_nested = true;            // every zero-contour point of u has v >= 0 there
  std::size_t steps = 0;
};

// Runs u0 and v0 on one shared dt sequence (the smaller CFL step of the two).
// Throws DomainError unless u0 <= v0 at every node and outside.
ComparisonResult comparison_harness(const LevelSetField& u0, const LevelSetField& v0, const FlowConfig& config);

struct ConsistencyResult {
  double max_distance = 0.0;
  std::vector<double> t, distance;  // per matched snapshot
};

// Runs u0 and theta(u0) and compares their zero contours at matched snapshot times.
// theta must be strictly increasing with theta(0) = 0 (checked on the values of u0).
ConsistencyResult consistency_harness(const LevelSetField& u0, const std::function<double(double)>& theta,
                                      const FlowConfig& config);

struct ContainmentResult {
  double C = 0.0;                          // sup|c1| - inf_e nu{0 <= e.z <= |z|^2}
  double lens_infimum = 0.0;
  std::vector<double> lens_by_direction;
  double max_excess = 0.0;                 // max (max radius - (R + C t))+
  std::vector<double> t, max_radius, bound;
  double horizon = 0.0;                    // time actually checked
};

// {u0 >= 0} must lie in the closed ball B_R(center). Runs until min(t_end, R / |C|) when C < 0.
ContainmentResult containment_check(const LevelSetField& u0, Vec2 center, double R, const FlowConfig& config,
                                    int directions = 64);

enum class StudyFamily { Alpha, Epsilon };

struct StudyRow {
  double parameter = 0.0;
  double max_rel_error = 0.0;
  double final_radius = 0.0;      // sqrt(area / pi) at the last snapshot
  double classical_final = 0.0;
  bool extinct = false;
  std::size_t steps = 0;
};

struct StudyResult {
  StudyFamily family = StudyFamily::Alpha;
  double r0 = 0.0, t_end = 0.0;
  std::vector<StudyRow> rows;
  bool monotone = false;  // errors strictly decrease along the family
};

// Shrinking-disk runs compared with the circle law r(t) = sqrt(r0^2 - 2 C_N t).
// Alpha family: power law with prefactor 1 - alpha. Epsilon family: rescaled dislocation kernels.
// `base` supplies everything but the kernel; its t_end (0 selects r0^2 / 4) is the horizon.
StudyResult mcf_convergence_study(StudyFamily family, const std::vector<double>& parameters, double r0,
                                  const Grid& grid, FlowConfig base);

struct AlphaLimitRow {
  double alpha = 0.0, r = 0.0;
  double scaled_kappa = 0.0;  // (1 - alpha) kappa_ball(r)
  double classical = 0.0;     // -C_N / r
  double rel_error = 0.0;
};

// Oracle-level limit: (1 - alpha) kappa_ball(r) against the classical curvature -C_N / r.
std::vector<AlphaLimitRow> alpha_limit_study(const std::vector<double>& alphas, const std::vector<double>& radii);

const char* family_name(StudyFamily f);

// CSV reports; column names are listed in the CLI help.
void write_comparison_csv(const std::string& path, const ComparisonResult& r);
void write_consistency_csv(const std::string& path, const ConsistencyResult& r);
void write_containment_csv(const std::string& path, const ContainmentResult& r);
void write_study_csv(const std::string& path, const StudyResult& r);
void write_alpha_limit_csv(const std::string& path, const std::vector<AlphaLimitRow>& rows);

}  // namespace fracflow
