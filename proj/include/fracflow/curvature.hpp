#pragma once

#include <memory>
#include <vector>

#include "fracflow/cell_weights.hpp"
#include "fracflow/field.hpp"
#include "fracflow/kernels.hpp"

namespace fracflow {

enum class Strictness { Upper, Lower };

struct CurvatureEval {
  double kappa_upper = 0.0;  // closed superlevel set, open front half-space
  double kappa_lower = 0.0;  // open superlevel set, closed front half-space
  double near_part = 0.0;    // identical for both envelopes (its boundary curves are nu-null)
  double far_upper = 0.0;
  double far_lower = 0.0;
  Vec2 gradient;
  Sym2 hessian;
  double delta = 0.0;
  bool degenerate = false;      // |p| below the gradient threshold; kappa fields are 0
  bool boundary = false;        // one-sided differences were used
  bool flat_fallback = false;   // quadratic fit unavailable, near part forced to 0
  bool plateau_fit = false;     // stencil met a constant plateau; gradient and Hessian come from its sloped side

  double kappa(Strictness s) const { return s == Strictness::Upper ? kappa_upper : kappa_lower; }
  double far_part(Strictness s) const { return s == Strictness::Upper ? far_upper : far_lower; }
};

// Per-field data shared by every node evaluation: sub-cell samples and the gradient threshold.
// Holds a reference to the field, which must outlive it.
class FieldContext {
 public:
  explicit FieldContext(const LevelSetField& field, int subcell = 8, double grad_factor = 1e-6);
  const LevelSetField& field() const { return *field_; }
  const SubcellSamples& samples() const { return samples_; }
  double grad_threshold() const { return grad_threshold_; }

 private:
  const LevelSetField* field_;
  SubcellSamples samples_;
  double grad_threshold_;
};

// Central differences inside, one-sided on the boundary (flag set).
Vec2 gradient_at(const LevelSetField& field, int i, int j, bool* boundary = nullptr);

// Second differences inside the grid; on the outermost ring, a least-squares quadratic fit over
// the in-grid part of the 5x5 stencil.
// Sets *fallback and returns 0 when the fit is rank deficient.
Sym2 hessian_fit(const LevelSetField& field, int i, int j, bool* fallback = nullptr);

// nu{z in B_delta : 0 <= -p.z <= z.Hz/2} - nu{z in B_delta : z.Hz/2 <= -p.z <= 0}
double near_field_kappa(Vec2 p, const Sym2& H, const KernelSpec& kernel, double delta);

// Evaluates kappa on a fixed grid; owns the cell-weight table for (grid, kernel, delta).
class CurvatureEvaluator {
 public:
  CurvatureEvaluator(const Grid& grid, KernelPtr kernel, double delta, int cell_order = 4);

  const Grid& grid() const { return grid_; }
  const CellWeightTable& table() const { return *table_; }
  const KernelSpec& kernel() const { return *kernel_; }
  KernelPtr kernel_ptr() const { return kernel_; }
  double delta() const { return delta_; }

  // Direct far-field sum with the given threshold (normally u at the node).
  double far_field(const FieldContext& ctx, int i, int j, double threshold, Vec2 p, Strictness s) const;
  // Mass of the cells of all grid nodes seen from node (i, j), and its complement.
  double in_grid_mass(int i, int j) const;
  double outside_mass(int i, int j) const { return table_->tail_mass() - in_grid_mass(i, j); }
  // Half-space tail subtracted by the far field.
  double halfspace(Vec2 p) const;

  CurvatureEval evaluate(const FieldContext& ctx, int i, int j) const;
  // Fills gradient, Hessian and the near part; far parts left at 0. Returns false if degenerate.
  bool local_part(const FieldContext& ctx, int i, int j, CurvatureEval& out) const;

 private:
  Grid grid_;
  KernelPtr kernel_;
  double delta_;
  std::shared_ptr<const CellWeightTable> table_;
};

// One-shot evaluation at a node (builds the table and samples; use CurvatureEvaluator for many nodes).
CurvatureEval kappa_at(const LevelSetField& field, int i, int j, KernelPtr kernel, double delta);

struct SignFormulaResult {
  double upper = 0.0;      // kappa* from the sign integral
  double lower = 0.0;      // kappa_* from the strict sign integral
  double raw_upper = 0.0;  // integral of sign*(u(x+z)-u(x)) c0(z) dz
  double raw_lower = 0.0;
};

// Whole-plane cell sums for bounded even kernels (no near/far split).
class SignFormulaEvaluator {
 public:
  SignFormulaEvaluator(const Grid& grid, KernelPtr kernel, int cell_order = 4);
  SignFormulaResult evaluate(const FieldContext& ctx, int i, int j) const;
  double mass() const { return table_->tail_mass(); }

 private:
  Grid grid_;
  KernelPtr kernel_;
  std::shared_ptr<const CellWeightTable> table_;
};

SignFormulaResult sign_formula_kappa(const LevelSetField& field, int i, int j, KernelPtr kernel);

struct ClassicalCurvature {
  double value = 0.0;
  bool degenerate = false;
};

// div(Du/|Du|) by second-order differences.
ClassicalCurvature classical_curvature(const LevelSetField& field, int i, int j, double grad_factor = 1e-6);

}  // namespace fracflow
