#pragma once

#include <map>
#include <string>
#include <vector>

#include "exopinf/galerkin.hpp"

namespace exopinf {

/// ||inferred - reference||_F / ||reference||_F. Throws when the reference is
/// zero or the layouts differ.
double relative_operator_error(const AggregatedOperator& inferred, const AggregatedOperator& reference);
double relative_operator_error(const Matrix& inferred, const Matrix& reference);

/// sigma_max / sigma_min; +inf when sigma_min = 0.
double condition_number(const Matrix& m);

/// sum_{i,j,k} |h_ijk + h_jik + h_kji| where h_ijk is entry i of the quadratic
/// column for sorted(j,k), split evenly over the orderings of (j,k).
double energy_violation(const Matrix& quadratic_block, Index n);

/// ||A - A^T||_F / ||A||_F.
double symmetry_violation(const Matrix& a);

/// Ascending eigenvalues of -(A + A^T)/2.
Vector diffusion_spectrum(const Matrix& a);

inline constexpr double kBlockNormFloor = 1e-12;

struct DiagnosticsReport {
  std::string benchmark;
  Index n = 0;
  Index ensemble_size = 0;
  double dt = 0.0;
  double relative_operator_error = 0.0;
  double cond_p = 0.0;
  /// Relative error per block, keyed "A0", "A1", ..., "B". The denominator
  /// is floored at kBlockNormFloor * ||reference||_F.
  std::map<std::string, double> block_errors;
  // quadratic/linear structure; negative when the block is absent
  double energy_violation_inferred = -1.0;
  double energy_violation_intrusive = -1.0;
  double symmetry_violation_inferred = -1.0;
  double symmetry_violation_intrusive = -1.0;
  Vector spectrum_inferred;
  Vector spectrum_intrusive;
};

/// Compares an inferred operator with the intrusive one.
DiagnosticsReport diagnose(const AggregatedOperator& inferred, const AggregatedOperator& intrusive);

}  // namespace exopinf
