#include "exopinf/galerkin.hpp"

#include "exopinf/errors.hpp"
#include "exopinf/parallel.hpp"

namespace exopinf {

AggregatedOperator::AggregatedOperator(MonomialBasis basis, Matrix matrix)
    : basis_(std::move(basis)), matrix_(std::move(matrix)) {
  if (matrix_.rows() != basis_.n() || matrix_.cols() != basis_.n_features()) {
    throw DimensionError("AggregatedOperator: matrix is " + std::to_string(matrix_.rows()) + "x" +
                         std::to_string(matrix_.cols()) + ", layout needs " + std::to_string(basis_.n()) + "x" +
                         std::to_string(basis_.n_features()));
  }
  if (!matrix_.allFinite()) throw Error("AggregatedOperator: non-finite entries");
}

Matrix AggregatedOperator::degree_block(int degree) const {
  return matrix_.middleCols(basis_.block_offset(degree), basis_.block_size(degree));
}

Matrix AggregatedOperator::input_block() const { return matrix_.rightCols(basis_.n_inputs()); }

Vector AggregatedOperator::apply(const Vector& x, const Vector& u) const {
  return matrix_ * basis_.feature_vector(x, u);
}

AggregatedOperator reduce(const PolynomialFOM& fom, const Matrix& basis, unsigned threads) {
  if (!fom.has_structure()) {
    throw Error("reduce: FOM has no multilinear access; use exact_opinf to infer the operator instead");
  }
  if (basis.rows() != fom.dimension()) throw DimensionError("reduce: basis row count differs from FOM dimension");
  const Index n = basis.cols();
  MonomialBasis layout(n, fom.degrees(), fom.n_inputs());
  Matrix op(n, layout.n_features());

  std::vector<Vector> columns(static_cast<std::size_t>(n));
  for (Index j = 0; j < n; ++j) columns[static_cast<std::size_t>(j)] = basis.col(j);

  struct Job {
    int degree;
    MonomialTuple tuple;
    Index column;
  };
  std::vector<Job> jobs;
  jobs.reserve(static_cast<std::size_t>(layout.n_state_features()));
  for (int degree : layout.degrees()) {
    Index column = layout.block_offset(degree);
    for (auto& tuple : enumerate_monomials(n, degree)) jobs.push_back({degree, std::move(tuple), column++});
  }

  parallel_for(jobs.size(), threads, [&](std::size_t k) {
    const Job& job = jobs[k];
    Vector image;
    if (job.degree == 0) {
      image = fom.multilinear(0, {});
    } else {
      std::vector<Vector> args;
      args.reserve(job.tuple.indices.size());
      for (int j : job.tuple.indices) args.push_back(columns[static_cast<std::size_t>(j)]);
      image = fom.multilinear(job.degree, args);
    }
    op.col(job.column) = static_cast<double>(job.tuple.permutation_count()) * (basis.transpose() * image);
  });

  for (Index j = 0; j < fom.n_inputs(); ++j) {
    const Vector unit = Vector::Unit(fom.n_inputs(), j);
    op.col(layout.input_offset() + j) = basis.transpose() * fom.input_action(unit);
  }
  return {std::move(layout), std::move(op)};
}

Vector rom_rhs(const AggregatedOperator& op, const Vector& x, const Vector& u) { return op.apply(x, u); }

PolynomialFOM as_fom(const AggregatedOperator& op) {
  const Index n = op.n();
  const Index n_u = op.basis().n_inputs();
  return PolynomialFOM(n, op.basis().degrees(), n_u,
                       [op](const Vector& x, const Vector& u) { return op.apply(x, u); });
}

SnapshotMatrix rom_simulate(const AggregatedOperator& op, const Vector& x0, const InputSignal& signal, double dt,
                            Index steps, TimeScheme scheme, const NewtonOptions& newton) {
  return simulate(as_fom(op), x0, signal, dt, steps, scheme, newton);
}

}  // namespace exopinf
