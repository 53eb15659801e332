#pragma once

#include "exopinf/fom.hpp"
#include "exopinf/pod.hpp"
#include "exopinf/tensor_poly.hpp"

namespace exopinf {

/// ROM operator O = [A_i for i in I ascending, B], n x n_f, acting on the
/// feature vector p(x, u) of its basis.
class AggregatedOperator {
 public:
  AggregatedOperator() = default;
  AggregatedOperator(MonomialBasis basis, Matrix matrix);

  const MonomialBasis& basis() const { return basis_; }
  const Matrix& matrix() const { return matrix_; }
  Index n() const { return basis_.n(); }

  /// n x n_i block multiplying x^i.
  Matrix degree_block(int degree) const;
  /// n x N_u block multiplying u.
  Matrix input_block() const;

  /// O p(x, u).
  Vector apply(const Vector& x, const Vector& u) const;

 private:
  MonomialBasis basis_;
  Matrix matrix_;
};

/// Intrusive Galerkin reduction V^T f(V x, u) assembled column by column from
/// the FOM's multilinear maps. The column for tuple (j_1..j_i) is
/// V^T H_i(v_j1, ..., v_ji) times the tuple's number of distinct orderings.
/// Throws Error when the FOM exposes no structured access.
AggregatedOperator reduce(const PolynomialFOM& fom, const Matrix& basis, unsigned threads = 0);

/// O p(x, u); same as op.apply.
Vector rom_rhs(const AggregatedOperator& op, const Vector& x, const Vector& u);

/// Time integration of the ROM with the same stepping rules as simulate().
SnapshotMatrix rom_simulate(const AggregatedOperator& op, const Vector& x0, const InputSignal& signal, double dt,
                            Index steps, TimeScheme scheme = TimeScheme::explicit_euler,
                            const NewtonOptions& newton = {});

/// The ROM viewed as a (small) polynomial FOM.
PolynomialFOM as_fom(const AggregatedOperator& op);

}  // namespace exopinf
