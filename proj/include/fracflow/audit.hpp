#pragma once

#include <string>
#include <vector>

#include "fracflow/kernels.hpp"

namespace fracflow {

// One sequence that should decay to zero for an admissible kernel.
struct AuditSequence {
  std::string name;
  std::vector<double> parameter;  // delta_k or r_j
  std::vector<double> value;
  bool monotone = false;          // nonincreasing after the first two entries
  double limit_estimate = 0.0;    // Aitken extrapolation of the tail, clipped at 0
  double plateau_ratio = 0.0;     // limit_estimate / value[0]
  bool pass = false;
};

struct AdmissibilityReport {
  std::string kernel;
  AuditSequence tail;                        // delta * nu(R^N \ B_delta)
  std::vector<double> directions;            // angles of the unit vectors e
  std::vector<AuditSequence> parabola;       // r * nu{z in B_1 : r|z.e| <= |z'|^2}, one per direction
  double worst_plateau_ratio = 0.0;
  double threshold = 1e-3;
  bool pass = false;
};

// Aitken delta-squared estimate of the limit of a sequence from its last three terms.
double aitken_limit(const std::vector<double>& s);

// Numerical proxy for the two limits required of an admissible measure:
// delta nu(R^N \ B_delta) -> 0 and r nu{parabolic region} -> 0, checked on delta_k = 2^-k and
// r_j = 2^-j (k, j = 0..12). A sequence fails when its extrapolated limit stays above
// threshold times its first value.
AdmissibilityReport admissibility_audit(const KernelSpec& kernel, int directions = 16, double threshold = 1e-3);

// Columns: check, direction, parameter, value, monotone, plateau_ratio, pass
void write_audit_csv(const std::string& path, const AdmissibilityReport& report);

}  // namespace fracflow
