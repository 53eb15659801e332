#pragma once

#include "exopinf/tensor_poly.hpp"

namespace exopinf {

/// Column-orthonormal basis V (N x n) and the singular values of the
/// snapshot matrix it was computed from.
struct PodBasis {
  Matrix modes;
  Vector singular_values;

  Index n_modes() const { return modes.cols(); }
  Index full_dimension() const { return modes.rows(); }
  /// First n modes. Throws DimensionError when n is out of range.
  PodBasis truncated(Index n) const;
};

/// Leading left singular vectors of the raw state matrix (no centering, no
/// weighting). Each mode is sign-fixed so that its largest-magnitude entry is
/// positive (ties: lowest row). Singular values below 1e-13 sigma_1 count as
/// zero; requesting more modes than the numerical rank throws
/// RankDeficientError.
PodBasis pod_basis(const Matrix& states, Index n_max);

/// Number of singular values above 1e-13 times the largest.
Index numerical_rank(const Vector& singular_values);

}  // namespace exopinf
