#include "exopinf/exact_opinf.hpp"

#include <cmath>
#include <limits>
#include <sstream>

#include <Eigen/Cholesky>
#include <Eigen/LU>
#include <Eigen/QR>
#include <Eigen/SVD>

#include "exopinf/errors.hpp"
#include "exopinf/parallel.hpp"

namespace exopinf {

namespace {

double svd_condition(const Matrix& m) {
  const Vector sigma = Eigen::BDCSVD<Matrix>(m).singularValues();
  const double smallest = sigma[sigma.size() - 1];
  return smallest > 0.0 ? sigma[0] / smallest : std::numeric_limits<double>::infinity();
}

// V xbar as an ordered sum of basis columns; identical for every basis width
// that contains the referenced columns.
Vector initial_fom_state(const Matrix& basis, const RankEnsuringPair& pair) {
  Vector x0 = Vector::Zero(basis.rows());
  if (pair.provenance.kind == PairKind::state) {
    for (int j : pair.provenance.tuple.indices) x0 += basis.col(j);
  }
  return x0;
}

}  // namespace

std::string PairProvenance::to_string() const {
  if (kind == PairKind::input) return "u" + std::to_string(input_index + 1);
  return "x" + tuple.to_string();
}

PairProvenance PairProvenance::parse(const std::string& text) {
  PairProvenance out;
  if (text.size() >= 2 && text[0] == 'u') {
    out.kind = PairKind::input;
    try {
      out.input_index = std::stol(text.substr(1)) - 1;
    } catch (const std::exception&) {
      throw SchemaError("bad provenance '" + text + "'", 0);
    }
    if (out.input_index < 0) throw SchemaError("bad provenance '" + text + "'", 0);
    return out;
  }
  if (text.size() < 3 || text[0] != 'x' || text[1] != '(' || text.back() != ')') {
    throw SchemaError("bad provenance '" + text + "'", 0);
  }
  const std::string body = text.substr(2, text.size() - 3);
  std::istringstream is(body);
  std::string token;
  while (std::getline(is, token, ',')) {
    try {
      const int j = std::stoi(token) - 1;
      if (j < 0) throw SchemaError("bad provenance '" + text + "'", 0);
      out.tuple.indices.push_back(j);
    } catch (const std::invalid_argument&) {
      throw SchemaError("bad provenance '" + text + "'", 0);
    }
  }
  out.degree = out.tuple.degree();
  return out;
}

std::vector<Vector> rank_ensuring_states(Index n, const DegreeSet& degrees) {
  const MonomialBasis layout(n, degrees, 0);
  std::vector<Vector> states;
  states.reserve(static_cast<std::size_t>(layout.n_state_features()));
  for (int degree : layout.degrees()) {
    for (const auto& tuple : enumerate_monomials(n, degree)) {
      Vector x = Vector::Zero(n);
      for (int j : tuple.indices) x[j] += 1.0;
      states.push_back(std::move(x));
    }
  }
  return states;
}

std::vector<RankEnsuringPair> rank_ensuring_pairs(const MonomialBasis& basis) {
  const Index n = basis.n();
  std::vector<RankEnsuringPair> pairs;
  pairs.reserve(static_cast<std::size_t>(basis.n_features()));
  for (int degree : basis.degrees()) {
    for (auto& tuple : enumerate_monomials(n, degree)) {
      Vector x = Vector::Zero(n);
      for (int j : tuple.indices) x[j] += 1.0;
      PairProvenance prov{PairKind::state, degree, std::move(tuple), 0};
      pairs.push_back({std::move(x), Vector::Zero(basis.n_inputs()), std::move(prov)});
    }
  }
  for (Index j = 0; j < basis.n_inputs(); ++j) {
    PairProvenance prov{PairKind::input, 0, {}, j};
    pairs.push_back({Vector::Zero(n), Vector::Unit(basis.n_inputs(), j), std::move(prov)});
  }
  return pairs;
}

double estimate_dt(const SnapshotMatrix& pod_snapshots, const PodBasis& basis, const DegreeSet& degrees,
                   Index n_inputs) {
  pod_snapshots.validate();
  if (pod_snapshots.n_snapshots() < 2) throw Error("estimate_dt: need at least two snapshots");
  if (basis.n_modes() < 1) throw Error("estimate_dt: basis has no modes");
  if (basis.full_dimension() != pod_snapshots.states.rows()) {
    throw DimensionError("estimate_dt: basis and snapshots have different FOM dimension");
  }
  if (pod_snapshots.inputs.rows() != n_inputs) throw DimensionError("estimate_dt: input dimension mismatch");

  const MonomialBasis scalar_layout(1, degrees, n_inputs);
  const Vector v1 = basis.modes.col(0);
  const Vector projected = pod_snapshots.states.transpose() * v1;
  double largest = 0.0;
  bool any = false;
  for (Index k = 0; k + 1 < pod_snapshots.n_snapshots(); ++k) {
    const double step = pod_snapshots.times[static_cast<std::size_t>(k + 1)] -
                        pod_snapshots.times[static_cast<std::size_t>(k)];
    const double numerator = std::abs((projected[k + 1] - projected[k]) / step);
    const double denominator =
        scalar_layout.feature_vector(projected.segment(k, 1), pod_snapshots.inputs.col(k)).norm();
    if (denominator < 1e-300) continue;
    any = true;
    largest = std::max(largest, numerator / denominator);
  }
  if (!any) throw Error("estimate_dt: every quotient has a vanishing feature norm");
  if (!(largest > 0.0) || !std::isfinite(largest)) throw Error("estimate_dt: snapshots show no dynamics");
  return 1.0 / largest;
}

SnapshotEnsemble generate_ensemble(const PolynomialFOM& fom, const Matrix& basis, const MonomialBasis& layout,
                                   std::vector<RankEnsuringPair> pairs, double dt, unsigned threads) {
  if (!(dt > 0.0)) throw Error("generate_ensemble: dt must be positive");
  if (basis.rows() != fom.dimension()) throw DimensionError("generate_ensemble: basis rows differ from FOM dimension");
  if (basis.cols() != layout.n()) throw DimensionError("generate_ensemble: basis width differs from layout n");
  if (layout.n_inputs() != fom.n_inputs()) throw DimensionError("generate_ensemble: input dimension mismatch");

  SnapshotEnsemble ens;
  ens.basis = layout;
  ens.dt = dt;
  ens.reduced_basis = basis;
  const auto count = static_cast<Index>(pairs.size());
  ens.features.resize(layout.n_features(), count);
  ens.derivatives.resize(layout.n(), count);
  ens.fom_states.resize(fom.dimension(), count);

  parallel_for(pairs.size(), threads, [&](std::size_t s) {
    const auto& pair = pairs[s];
    const auto col = static_cast<Index>(s);
    const Vector x0 = initial_fom_state(basis, pair);
    Vector x1;
    try {
      x1 = explicit_euler_step(fom, x0, pair.input, dt);
    } catch (const NonFiniteError& e) {
      throw NonFiniteError("generate_ensemble: pair " + pair.provenance.to_string() + ": " + e.what(), e.state());
    }
    ens.fom_states.col(col) = x1;
    ens.derivatives.col(col) = basis.transpose() * ((x1 - x0) / dt);
    ens.features.col(col) = layout.feature_vector(pair.state, pair.input);
  });
  ens.fom_steps = count;
  ens.pairs = std::move(pairs);
  return ens;
}

InferenceResult infer(const MonomialBasis& layout, const Matrix& features, const Matrix& derivatives,
                      bool with_condition) {
  const Index nf = layout.n_features();
  if (features.rows() != nf || features.cols() != nf) {
    throw DimensionError("infer: feature matrix must be square n_f x n_f (n_f = " + std::to_string(nf) + ")");
  }
  if (derivatives.rows() != layout.n() || derivatives.cols() != nf) {
    throw DimensionError("infer: derivative matrix must be n x n_f");
  }

  const Eigen::PartialPivLU<Matrix> lu(features.transpose());
  const double scale = features.cwiseAbs().maxCoeff();
  const double smallest_pivot = lu.matrixLU().diagonal().cwiseAbs().minCoeff();
  if (!(smallest_pivot >= 1e-14 * scale)) {
    std::ostringstream os;
    os << "infer: feature matrix is numerically singular (pivot " << smallest_pivot << ", max entry " << scale
       << ")";
    throw SingularMatrixError(os.str());
  }
  Matrix op = lu.solve(derivatives.transpose()).transpose();

  const double cond = with_condition ? svd_condition(features) : std::numeric_limits<double>::quiet_NaN();
  InferenceResult out{AggregatedOperator(layout, op), cond, 0.0, nf};
  out.residual = (op * features - derivatives).norm();
  return out;
}

InferenceResult infer(const SnapshotEnsemble& ensemble, bool with_condition) {
  return infer(ensemble.basis, ensemble.features, ensemble.derivatives, with_condition);
}

InferenceResult exact_opinf(const PolynomialFOM& fom, const Matrix& basis, const DegreeSet& degrees,
                            Index n_inputs, double dt, unsigned threads) {
  const MonomialBasis layout(basis.cols(), degrees, n_inputs);
  return infer(generate_ensemble(fom, basis, layout, rank_ensuring_pairs(layout), dt, threads));
}

SnapshotEnsemble extend_ensemble(const SnapshotEnsemble& previous, const PolynomialFOM& fom,
                                 const Matrix& basis_plus, double dt, unsigned threads) {
  const Index n_old = previous.basis.n();
  const Index n_new = basis_plus.cols();
  if (n_new <= n_old) throw DimensionError("extend_ensemble: new dimension must exceed the old one");
  if (previous.reduced_basis.size() == 0 || previous.fom_states.size() == 0) {
    throw Error("extend_ensemble: previous ensemble carries no FOM states to reuse");
  }
  if (dt != previous.dt) throw Error("extend_ensemble: dt differs from the previous ensemble");
  if (basis_plus.rows() != previous.reduced_basis.rows()) throw DimensionError("extend_ensemble: FOM dimension differs");
  const double mismatch = (basis_plus.leftCols(n_old) - previous.reduced_basis).cwiseAbs().maxCoeff();
  if (mismatch > 1e-14) {
    std::ostringstream os;
    os << "extend_ensemble: leading basis columns differ from the previous basis by " << mismatch;
    throw Error(os.str());
  }

  const MonomialBasis layout = previous.basis.with_dimension(n_new);
  auto pairs = rank_ensuring_pairs(layout);

  // map each new pair onto an old column when the old ensemble has it
  std::vector<Index> source(pairs.size(), -1);
  std::vector<std::size_t> fresh;
  for (std::size_t s = 0; s < pairs.size(); ++s) {
    const auto& prov = pairs[s].provenance;
    if (prov.kind == PairKind::input) {
      source[s] = previous.basis.input_offset() + prov.input_index;
      continue;
    }
    const bool inside = std::all_of(prov.tuple.indices.begin(), prov.tuple.indices.end(),
                                    [n_old](int j) { return j < n_old; });
    if (inside) {
      source[s] = previous.basis.block_offset(prov.degree) + monomial_rank(prov.tuple, n_old);
    } else {
      fresh.push_back(s);
    }
  }

  std::vector<RankEnsuringPair> new_pairs;
  new_pairs.reserve(fresh.size());
  for (std::size_t s : fresh) new_pairs.push_back(pairs[s]);
  // FOM steps only for the pairs not covered by the previous ensemble
  SnapshotEnsemble generated = generate_ensemble(fom, basis_plus, layout, std::move(new_pairs), dt, threads);

  SnapshotEnsemble ens;
  ens.basis = layout;
  ens.dt = dt;
  ens.reduced_basis = basis_plus;
  const auto count = static_cast<Index>(pairs.size());
  ens.features.resize(layout.n_features(), count);
  ens.derivatives.resize(n_new, count);
  ens.fom_states.resize(basis_plus.rows(), count);

  std::size_t next_fresh = 0;
  for (std::size_t s = 0; s < pairs.size(); ++s) {
    const auto col = static_cast<Index>(s);
    if (source[s] >= 0) {
      const Vector x0 = initial_fom_state(basis_plus, pairs[s]);
      const Vector x1 = previous.fom_states.col(source[s]);
      ens.fom_states.col(col) = x1;
      ens.derivatives.col(col) = basis_plus.transpose() * ((x1 - x0) / dt);
      ens.features.col(col) = layout.feature_vector(pairs[s].state, pairs[s].input);
    } else {
      const auto g = static_cast<Index>(next_fresh++);
      ens.fom_states.col(col) = generated.fom_states.col(g);
      ens.derivatives.col(col) = generated.derivatives.col(g);
      ens.features.col(col) = generated.features.col(g);
    }
  }
  ens.fom_steps = static_cast<Index>(fresh.size());
  ens.pairs = std::move(pairs);
  return ens;
}

TrajectoryData project_trajectory(const SnapshotMatrix& snapshots, const Matrix& basis) {
  snapshots.validate();
  if (basis.rows() != snapshots.states.rows()) throw DimensionError("project_trajectory: basis row mismatch");
  const Index k = snapshots.n_snapshots() - 1;
  if (k < 1) throw Error("project_trajectory: need at least two snapshots");
  const Matrix reduced = basis.transpose() * snapshots.states;
  TrajectoryData out;
  out.states = reduced.leftCols(k);
  out.inputs = snapshots.inputs.leftCols(k);
  out.derivatives.resize(basis.cols(), k);
  for (Index c = 0; c < k; ++c) {
    const double step = snapshots.times[static_cast<std::size_t>(c + 1)] - snapshots.times[static_cast<std::size_t>(c)];
    out.derivatives.col(c) = (reduced.col(c + 1) - reduced.col(c)) / step;
  }
  return out;
}

LeastSquaresResult standard_opinf(const TrajectoryData& data, const MonomialBasis& layout, double regularization) {
  if (regularization < 0.0) throw Error("standard_opinf: regularization must be >= 0");
  const Index k = data.states.cols();
  if (k < 1) throw Error("standard_opinf: no snapshots");
  if (data.states.rows() != layout.n() || data.derivatives.rows() != layout.n() || data.derivatives.cols() != k ||
      data.inputs.rows() != layout.n_inputs() || data.inputs.cols() != k) {
    throw DimensionError("standard_opinf: trajectory data does not match the layout");
  }

  const Index nf = layout.n_features();
  Matrix features(nf, k);
  for (Index c = 0; c < k; ++c) features.col(c) = layout.feature_vector(data.states.col(c), data.inputs.col(c));

  const Vector sigma = Eigen::BDCSVD<Matrix>(features).singularValues();
  const double tol = static_cast<double>(std::max(nf, k)) * std::numeric_limits<double>::epsilon() *
                     (sigma.size() ? sigma[0] : 0.0);
  Index rank = 0;
  while (rank < sigma.size() && sigma[rank] > tol) ++rank;

  LeastSquaresResult out;
  out.rank = rank;
  out.rank_deficient = rank < nf;
  out.cond_p = (k >= nf && sigma[nf - 1] > 0.0) ? sigma[0] / sigma[nf - 1] : std::numeric_limits<double>::infinity();

  Matrix op_t;
  if (regularization > 0.0 || !out.rank_deficient) {
    Matrix gram = features * features.transpose();
    gram.diagonal().array() += regularization;
    op_t = gram.ldlt().solve(features * data.derivatives.transpose());
  } else {
    op_t = features.transpose().completeOrthogonalDecomposition().solve(data.derivatives.transpose());
  }
  out.op = AggregatedOperator(layout, op_t.transpose());
  return out;
}

}  // namespace exopinf
