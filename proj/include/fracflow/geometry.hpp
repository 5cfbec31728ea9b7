#pragma once

#include <memory>
#include <string>
#include <vector>

#include "fracflow/field.hpp"
#include "fracflow/vec.hpp"

namespace fracflow {

// Closed set described by an exact (or, for unions, a one-sided exact) signed distance, positive inside.
class Shape {
 public:
  enum class Kind { Disk, Ellipse, DiskUnion, Dumbbell, HalfPlane };

  static Shape disk(Vec2 center, double radius);
  // Semi-axes a along the rotated x axis and b along the rotated y axis.
  static Shape ellipse(Vec2 center, double a, double b, double angle = 0.0);
  static Shape disk_union(std::vector<Vec2> centers, std::vector<double> radii);
  // Two disks joined by a straight bar of half-width bar_half_width.
  static Shape dumbbell(Vec2 c1, double r1, Vec2 c2, double r2, double bar_half_width);
  // {x : n.(x - point) >= 0}
  static Shape half_plane(Vec2 point, Vec2 normal);

  Kind kind() const { return kind_; }
  double signed_distance(Vec2 x) const;
  bool bounded() const { return kind_ != Kind::HalfPlane; }
  // Axis-aligned bounding box (lo, hi); only for bounded shapes.
  std::pair<Vec2, Vec2> bounding_box() const;
  Vec2 reference_center() const;
  std::string describe() const;

 private:
  Kind kind_ = Kind::Disk;
  std::vector<Vec2> centers_;
  std::vector<double> radii_;
  double a_ = 0.0, b_ = 0.0, angle_ = 0.0, bar_ = 0.0;
  Vec2 normal_;
};

// Signed distance to the ellipse (x/a)^2 + (y/b)^2 = 1, positive inside.
double ellipse_signed_distance(double a, double b, Vec2 x);

// Samples the clamped signed distance min(max(d, -clamp), clamp) with clamp = clamp_cells * h.
// Bounded shapes must stay 8 h away from the grid boundary (ConfigError otherwise).
LevelSetField make_signed_distance(const Shape& shape, const Grid& grid, double clamp_cells = 10.0);

using Polyline = std::vector<Vec2>;  // closed polylines repeat the first point at the end

inline bool is_closed(const Polyline& p) {
  return p.size() > 2 && p.front().x == p.back().x && p.front().y == p.back().y;
}

// Marching squares on the zero level set; nodes with u >= 0 are inside and saddle cells are
// resolved by the cell-centre average.
std::vector<Polyline> extract_contour(const LevelSetField& field);

// Area of {u >= 0}, with crossings placed by linear interpolation along cell edges.
double enclosed_area(const LevelSetField& field);

struct RadiusStats {
  double min_radius = 0.0;
  double max_radius = 0.0;
  double mean_radius = 0.0;
};
RadiusStats radius_stats(const std::vector<Polyline>& contour, Vec2 center);

// Symmetric Hausdorff distance between polyline sets; vertices are densified to the given spacing.
// Throws DomainError when either set has no points.
double hausdorff_distance(const std::vector<Polyline>& a, const std::vector<Polyline>& b, double spacing);

struct FrontSnapshot {
  double t = 0.0;
  std::vector<Polyline> contour;
  double area = 0.0;
  RadiusStats radii;
  std::shared_ptr<const LevelSetField> field;  // may be null when fields are not retained
  // Stepper diagnostics of the step that produced this snapshot.
  std::size_t step = 0;
  double dt = 0.0;
  double max_velocity = 0.0;
};

FrontSnapshot make_snapshot(const LevelSetField& field, double t, Vec2 center, bool keep_field);

// Clamped signed distance to the zero contour of u, with the sign of u (u >= 0 inside).
LevelSetField reinitialize(const LevelSetField& u, double clamp_cells = 10.0);

void write_contour_csv(const std::string& path, const std::vector<Polyline>& contour);

}  // namespace fracflow
