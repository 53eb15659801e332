#include "exopinf/pod.hpp"

#include <cmath>

#include <Eigen/SVD>

#include "exopinf/errors.hpp"

namespace exopinf {

PodBasis PodBasis::truncated(Index n) const {
  if (n < 1 || n > n_modes()) {
    throw DimensionError("PodBasis::truncated: requested " + std::to_string(n) + " of " +
                         std::to_string(n_modes()) + " modes");
  }
  return {modes.leftCols(n), singular_values};
}

Index numerical_rank(const Vector& singular_values) {
  if (singular_values.size() == 0 || singular_values[0] <= 0.0) return 0;
  const double cutoff = 1e-13 * singular_values[0];
  Index rank = 0;
  while (rank < singular_values.size() && singular_values[rank] > cutoff) ++rank;
  return rank;
}

PodBasis pod_basis(const Matrix& states, Index n_max) {
  if (states.rows() < 1 || states.cols() < 1) throw DimensionError("pod_basis: empty snapshot matrix");
  if (n_max < 1 || n_max > std::min(states.rows(), states.cols())) {
    throw DimensionError("pod_basis: n_max must lie in 1..min(N, K+1)");
  }
  if (!states.allFinite()) throw Error("pod_basis: snapshot matrix contains non-finite entries");

  Eigen::BDCSVD<Matrix> svd(states, Eigen::ComputeThinU);
  const Vector sigma = svd.singularValues();
  const Index rank = numerical_rank(sigma);
  if (n_max > rank) {
    throw RankDeficientError("pod_basis: requested " + std::to_string(n_max) +
                                 " modes but the snapshots have numerical rank " + std::to_string(rank),
                             static_cast<std::size_t>(rank));
  }

  Matrix modes = svd.matrixU().leftCols(n_max);
  for (Index c = 0; c < n_max; ++c) {
    Index pivot = 0;
    double best = -1.0;
    for (Index r = 0; r < modes.rows(); ++r) {
      const double mag = std::abs(modes(r, c));
      if (mag > best) {
        best = mag;
        pivot = r;
      }
    }
    if (modes(pivot, c) < 0.0) modes.col(c) *= -1.0;
  }
  return {std::move(modes), sigma};
}

}  // namespace exopinf
