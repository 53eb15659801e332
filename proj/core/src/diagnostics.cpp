#include "exopinf/diagnostics.hpp"

#include <algorithm>
#include <limits>

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>

#include "exopinf/errors.hpp"

namespace exopinf {

double relative_operator_error(const Matrix& inferred, const Matrix& reference) {
  if (inferred.rows() != reference.rows() || inferred.cols() != reference.cols()) {
    throw DimensionError("relative_operator_error: shapes differ");
  }
  const double denom = reference.norm();
  if (denom == 0.0) throw Error("relative_operator_error: reference operator is zero");
  return (inferred - reference).norm() / denom;
}

double relative_operator_error(const AggregatedOperator& inferred, const AggregatedOperator& reference) {
  if (!(inferred.basis() == reference.basis())) throw DimensionError("relative_operator_error: layouts differ");
  return relative_operator_error(inferred.matrix(), reference.matrix());
}

double condition_number(const Matrix& m) {
  if (m.size() == 0 || m.isZero(0.0)) throw Error("condition_number: matrix is zero");
  const Vector sigma = Eigen::BDCSVD<Matrix>(m).singularValues();
  const double smallest = (m.rows() == m.cols()) ? sigma[sigma.size() - 1] : 0.0;
  return smallest > 0.0 ? sigma[0] / smallest : std::numeric_limits<double>::infinity();
}

double energy_violation(const Matrix& quadratic_block, Index n) {
  if (quadratic_block.rows() != n || quadratic_block.cols() != monomial_count(n, 2)) {
    throw DimensionError("energy_violation: block must be n x n(n+1)/2");
  }
  // h(i, j, k) for the symmetric Kronecker form
  auto h = [&](Index i, Index j, Index k) {
    const Index lo = std::min(j, k);
    const Index hi = std::max(j, k);
    const Index col = monomial_rank(MonomialTuple{static_cast<int>(lo), static_cast<int>(hi)}, n);
    return quadratic_block(i, col) / (lo == hi ? 1.0 : 2.0);
  };
  double total = 0.0;
  for (Index i = 0; i < n; ++i) {
    for (Index j = 0; j < n; ++j) {
      for (Index k = 0; k < n; ++k) total += std::abs(h(i, j, k) + h(j, i, k) + h(k, j, i));
    }
  }
  return total;
}

double symmetry_violation(const Matrix& a) {
  if (a.rows() != a.cols()) throw DimensionError("symmetry_violation: matrix must be square");
  const double denom = a.norm();
  if (denom == 0.0) throw Error("symmetry_violation: zero matrix");
  return (a - a.transpose()).norm() / denom;
}

Vector diffusion_spectrum(const Matrix& a) {
  if (a.rows() != a.cols()) throw DimensionError("diffusion_spectrum: matrix must be square");
  const Matrix sym = -0.5 * (a + a.transpose());
  return Eigen::SelfAdjointEigenSolver<Matrix>(sym, Eigen::EigenvaluesOnly).eigenvalues();
}

DiagnosticsReport diagnose(const AggregatedOperator& inferred, const AggregatedOperator& intrusive) {
  DiagnosticsReport r;
  r.n = inferred.n();
  r.relative_operator_error = relative_operator_error(inferred, intrusive);
  // a block that is round-off in the reference (e.g. A_2 at n = 1 for an
  // energy-preserving model) is measured against the whole operator instead
  const double whole = intrusive.matrix().norm();
  auto block_error = [whole](const Matrix& got, const Matrix& ref) {
    const double denom = std::max(ref.norm(), kBlockNormFloor * whole);
    const double diff = (got - ref).norm();
    return denom > 0.0 ? diff / denom : diff;
  };
  for (int d : intrusive.basis().degrees()) {
    r.block_errors["A" + std::to_string(d)] = block_error(inferred.degree_block(d), intrusive.degree_block(d));
  }
  if (intrusive.basis().n_inputs() > 0) r.block_errors["B"] = block_error(inferred.input_block(), intrusive.input_block());
  if (intrusive.basis().has_degree(2)) {
    r.energy_violation_inferred = energy_violation(inferred.degree_block(2), r.n);
    r.energy_violation_intrusive = energy_violation(intrusive.degree_block(2), r.n);
  }
  if (intrusive.basis().has_degree(1)) {
    r.symmetry_violation_inferred = symmetry_violation(inferred.degree_block(1));
    r.symmetry_violation_intrusive = symmetry_violation(intrusive.degree_block(1));
    r.spectrum_inferred = diffusion_spectrum(inferred.degree_block(1));
    r.spectrum_intrusive = diffusion_spectrum(intrusive.degree_block(1));
  }
  return r;
}

}  // namespace exopinf
