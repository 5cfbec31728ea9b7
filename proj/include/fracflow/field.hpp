#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "fracflow/vec.hpp"

namespace fracflow {

struct Grid {
  int nx = 0;
  int ny = 0;
  double h = 1.0;
  Vec2 origin;  // position of node (0, 0)

  std::size_t size() const { return static_cast<std::size_t>(nx) * static_cast<std::size_t>(ny); }
  std::size_t index(int i, int j) const { return static_cast<std::size_t>(j) * nx + i; }
  int col(std::size_t k) const { return static_cast<int>(k % static_cast<std::size_t>(nx)); }
  int row(std::size_t k) const { return static_cast<int>(k / static_cast<std::size_t>(nx)); }
  bool contains(int i, int j) const { return i >= 0 && j >= 0 && i < nx && j < ny; }
  Vec2 point(int i, int j) const { return {origin.x + i * h, origin.y + j * h}; }
  // Square grid covering [-extent, extent]^2 with spacing h (node count rounded to cover the extent).
  static Grid centered(double extent, double h);
  void validate() const;
  bool operator==(const Grid&) const = default;
};

enum class Extension { Constant, Affine };

// Grid function u with its model beyond the grid: a constant exterior value, or an affine function.
class LevelSetField {
 public:
  LevelSetField() = default;
  // Constant extension; outside value defaults to -max|u|.
  LevelSetField(Grid grid, std::vector<double> values);
  LevelSetField(Grid grid, std::vector<double> values, double outside_value);
  // u(x) = p.x + c everywhere, including beyond the grid.
  static LevelSetField affine(Grid grid, Vec2 p, double c);

  const Grid& grid() const { return grid_; }
  const std::vector<double>& values() const { return values_; }
  std::vector<double>& mutable_values() { return values_; }
  double operator[](std::size_t k) const { return values_[k]; }
  // Value at lattice node (i, j), applying the extension off-grid.
  double at(int i, int j) const {
    if (grid_.contains(i, j)) return values_[grid_.index(i, j)];
    return extension_value(i, j);
  }
  double extension_value(int i, int j) const;
  // Bilinear interpolation at an arbitrary point; the extension applies beyond the grid.
  double interpolate(Vec2 x) const;
  double outside_value() const { return outside_; }
  void set_outside_value(double v) { outside_ = v; }
  Extension extension() const { return extension_; }
  Vec2 affine_slope() const { return affine_p_; }
  double affine_offset() const { return affine_c_; }
  double max_abs() const;
  double min_value() const;
  double max_value() const;
  // Throws DataError on non-finite values, ConfigError on bad geometry.
  void validate() const;

 private:
  Grid grid_;
  std::vector<double> values_;
  double outside_ = 0.0;
  Extension extension_ = Extension::Constant;
  Vec2 affine_p_;
  double affine_c_ = 0.0;
};

// m x m bilinear sub-samples of each node's cell, sorted, so that the fraction of the cell where
// u >= a (or u > a) is a binary search.
class SubcellSamples {
 public:
  SubcellSamples(const LevelSetField& field, int m);

  // Samples of one node split by the bilinear patch they fall in.
  struct Node {
    int n_sloped = 0;
    std::array<double, 32 * 32> sloped;  // samples from non-constant patches
    int n_flat = 0;
    std::array<double, 4> flat_value;    // constant patches, one entry per patch
    std::array<int, 4> flat_count;
  };

  int m() const { return m_; }
  double lo(std::size_t k) const { return lo_[k]; }
  double hi(std::size_t k) const { return hi_[k]; }
  bool flat(std::size_t k) const { return sloped_count_[k] == 0 && lo_[k] == hi_[k]; }
  // Share of the node's samples above a. A sample within tie_tolerance() of a counts fully (closed)
  // or not at all (open) when it lies in a constant patch, and counts one half when it lies on a
  // sloped patch, where {u = a} has zero area and rounding alone would pick the side.
  double fraction(std::size_t k, double a, bool closed) const;
  // Same for an arbitrary lattice node, including nodes beyond the grid.
  double fraction_at(int i, int j, double a, bool closed) const;
  const LevelSetField& field() const { return *field_; }
  double tie_tolerance() const { return tie_tol_; }

  // Sorted sloped samples of grid node k.
  const double* sloped_begin(std::size_t k) const { return sorted_.data() + sloped_start_[k]; }
  int sloped_count(std::size_t k) const { return sloped_count_[k]; }
  int flat_count(std::size_t k) const { return flat_n_[k]; }
  double flat_value(std::size_t k, int e) const { return flat_value_[flat_start_[k] + e]; }
  int flat_samples(std::size_t k, int e) const { return flat_samples_[flat_start_[k] + e]; }

  // Fills out[m*m] with the samples of lattice node (i, j).
  void samples_at(int i, int j, double* out) const;
  void collect(int i, int j, Node& out) const;

 private:
  const LevelSetField* field_;
  int m_;
  double tie_tol_;
  std::vector<double> offsets_;  // sample offsets in units of h
  std::vector<double> lo_, hi_;
  std::vector<std::int64_t> sloped_start_;
  std::vector<std::int32_t> sloped_count_;
  std::vector<double> sorted_;
  std::vector<std::int64_t> flat_start_;
  std::vector<std::uint8_t> flat_n_;
  std::vector<double> flat_value_;
  std::vector<std::int32_t> flat_samples_;
};

// Loads a field written by write_field_csv (header line with nx, ny, h, origin).
LevelSetField read_field_csv(const std::string& path);
void write_field_csv(const std::string& path, const LevelSetField& field, double t);

}  // namespace fracflow
