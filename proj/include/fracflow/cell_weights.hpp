#pragma once

#include <vector>

#include "fracflow/kernels.hpp"

namespace fracflow {

// nu-mass of every grid cell centered at lattice offset z = (di, dj) h, minus the ball B_delta,
// for |di| <= half_x and |dj| <= half_y, plus the analytic mass beyond the table box.
class CellWeightTable {
 public:
  CellWeightTable(KernelPtr kernel, double h, int half_x, int half_y, double delta, int kq = 4);

  double weight(int di, int dj) const {
    if (di < -half_x_ || di > half_x_ || dj < -half_y_ || dj > half_y_) return 0.0;
    return w_[static_cast<std::size_t>(dj + half_y_) * width() + static_cast<std::size_t>(di + half_x_)];
  }
  int half_x() const { return half_x_; }
  int half_y() const { return half_y_; }
  std::size_t width() const { return static_cast<std::size_t>(2 * half_x_ + 1); }
  std::size_t height() const { return static_cast<std::size_t>(2 * half_y_ + 1); }
  double h() const { return h_; }
  double delta() const { return delta_; }
  const KernelSpec& kernel() const { return *kernel_; }
  KernelPtr kernel_ptr() const { return kernel_; }
  const std::vector<double>& data() const { return w_; }

  // nu(R^N \ B_delta): the exact tail the table plus beyond-mass must reproduce.
  double tail_mass() const { return tail_; }
  double table_sum() const { return table_sum_; }
  double beyond_mass() const { return beyond_; }
  // nu{z outside the table box : p.z > 0} (open) or >= 0 (closed).
  double beyond_halfspace(Vec2 p, bool closed) const;
  // Sum of weights over offsets in [di0, di1] x [dj0, dj1], clipped to the table.
  double rect_sum(int di0, int di1, int dj0, int dj1) const;

 private:
  KernelPtr kernel_;
  double h_, delta_;
  int half_x_, half_y_;
  std::vector<double> w_;
  std::vector<double> prefix_;  // (width+1) x (height+1) inclusive prefix sums
  double tail_ = 0.0, table_sum_ = 0.0, beyond_ = 0.0;
};

// nu(box \ B_delta) for an axis-aligned box, by tensor Gauss when the box is far from the
// origin and from every radial breakpoint, otherwise by nested adaptive quadrature.
double box_mass(const KernelSpec& kernel, double x0, double x1, double y0, double y1, double delta, int kq);

}  // namespace fracflow
