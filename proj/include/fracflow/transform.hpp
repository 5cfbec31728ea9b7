#pragma once

#include <memory>
#include <vector>

#include "fracflow/curvature.hpp"

namespace fracflow {

// FFT evaluation of the far field at many nodes at once, exact up to transform rounding.
//
// Samples on constant bilinear patches are grouped by value and each group is correlated with
// the weight table once. Sloped samples are counted above a ladder of levels by one correlation
// per level; each node then adds the samples lying between its own threshold and the next level,
// which only involves nodes whose sample range meets that slab.
class FarFieldTransform {
 public:
  // levels: number of slabs the sloped sample range is cut into.
  FarFieldTransform(std::shared_ptr<const CurvatureEvaluator> evaluator, int levels = 32);
  ~FarFieldTransform();
  FarFieldTransform(const FarFieldTransform&) = delete;
  FarFieldTransform& operator=(const FarFieldTransform&) = delete;

  // Far parts of both envelopes at grid nodes[k] with threshold thresholds[k].
  void evaluate(const FieldContext& ctx, const std::vector<std::size_t>& nodes, const std::vector<double>& thresholds,
                std::vector<double>& upper, std::vector<double>& lower) const;

  // Distinct constant-patch values above which the transform refuses to run.
  static constexpr int kMaxFlatValues = 16;

  const CurvatureEvaluator& evaluator() const { return *ev_; }
  int levels() const { return levels_; }

 private:
  struct Impl;
  std::shared_ptr<const CurvatureEvaluator> ev_;
  int levels_;
  std::unique_ptr<Impl> impl_;
};

// Far field with the threshold frozen at 0 at every grid node (indicator mode), row-major.
std::vector<double> transform_far_field(const LevelSetField& field, const FarFieldTransform& transform,
                                        Strictness strictness);

}  // namespace fracflow
