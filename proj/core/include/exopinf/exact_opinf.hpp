#pragma once

// Exact operator inference.
//
// Instead of fitting operators to projected FOM trajectories, the FOM is
// queried with one explicit Euler step from each of n_f chosen reduced states
// and inputs:
//
//   degree-i states   sum of i unit vectors of R^n, one per canonical monomial
//   input pairs       zero state with the j-th unit input
//
// The resulting feature matrix P is square and invertible for every n, degree
// set and input dimension, so the inferred operator solves O P = Xdot exactly
// and coincides with the intrusive Galerkin operator up to round-off.

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "exopinf/fom.hpp"
#include "exopinf/galerkin.hpp"
#include "exopinf/pod.hpp"
#include "exopinf/tensor_poly.hpp"

namespace exopinf {

enum class PairKind { state, input };

/// Where a rank-ensuring pair comes from: a monomial of some degree, or an
/// input channel.
struct PairProvenance {
  PairKind kind = PairKind::state;
  int degree = 0;
  MonomialTuple tuple;
  Index input_index = 0;

  /// "x(1,1,2)" for states, "u3" for inputs (1-based).
  std::string to_string() const;
  static PairProvenance parse(const std::string& text);
  friend bool operator==(const PairProvenance&, const PairProvenance&) = default;
};

struct RankEnsuringPair {
  Vector state;
  Vector input;
  PairProvenance provenance;
};

/// Concatenation over ascending degrees of the sets "all sums of i unit
/// vectors", each ordered like enumerate_monomials. Degree 0 contributes the
/// zero state.
std::vector<Vector> rank_ensuring_states(Index n, const DegreeSet& degrees);

/// State pairs (zero input) followed by (0, e_j) for every input channel.
std::vector<RankEnsuringPair> rank_ensuring_pairs(const MonomialBasis& basis);

/// Single-step snapshot data and its feature matrix.
struct SnapshotEnsemble {
  MonomialBasis basis;
  std::vector<RankEnsuringPair> pairs;
  Matrix features;      // P, n_f x K
  Matrix derivatives;   // reduced time derivatives, n x K
  Matrix fom_states;    // x_1 for every pair, N x K (empty when loaded from file)
  Matrix reduced_basis; // V used for generation, N x n (empty when loaded from file)
  double dt = 0.0;
  /// FOM steps actually taken to produce this ensemble (reuse lowers it).
  Index fom_steps = 0;

  Index size() const { return static_cast<Index>(pairs.size()); }
};

/// Time step from the POD data:
///   dt = 1 / max_k |v1^T (x_{k+1}-x_k)/(t_{k+1}-t_k)| / ||p(v1^T x_k, u_k)||
/// with p built for n = 1. Quotients with ||p|| < 1e-300 are skipped.
double estimate_dt(const SnapshotMatrix& pod_snapshots, const PodBasis& basis, const DegreeSet& degrees,
                   Index n_inputs);

/// One explicit Euler step per pair from x0 = V xbar (evaluated as a sum of
/// basis columns) with input ubar. The pairs' FOM evaluations run on up to
/// `threads` workers; column order always follows pair order.
SnapshotEnsemble generate_ensemble(const PolynomialFOM& fom, const Matrix& basis, const MonomialBasis& layout,
                                   std::vector<RankEnsuringPair> pairs, double dt, unsigned threads = 0);

struct InferenceResult {
  AggregatedOperator op;
  double cond_p = 0.0;
  /// ||O P - Xdot||_F
  double residual = 0.0;
  Index ensemble_size = 0;
};

/// Solves O P = Xdot for square P with one LU factorization (partial
/// pivoting) of P^T. Throws SingularMatrixError when a pivot falls below
/// 1e-14 max|P|. cond(P) costs a full SVD; with with_condition = false it is
/// left as NaN.
InferenceResult infer(const MonomialBasis& layout, const Matrix& features, const Matrix& derivatives,
                      bool with_condition = true);
InferenceResult infer(const SnapshotEnsemble& ensemble, bool with_condition = true);

/// rank_ensuring_pairs -> generate_ensemble -> infer.
InferenceResult exact_opinf(const PolynomialFOM& fom, const Matrix& basis, const DegreeSet& degrees,
                            Index n_inputs, double dt, unsigned threads = 0);

/// Ensemble for the larger basis `basis_plus` that reuses every FOM step of
/// `previous` whose pair also exists at the larger dimension and only steps
/// the FOM for new pairs. The first n columns of basis_plus must match the
/// previous basis to 1e-14.
SnapshotEnsemble extend_ensemble(const SnapshotEnsemble& previous, const PolynomialFOM& fom,
                                 const Matrix& basis_plus, double dt, unsigned threads = 0);

/// Reduced trajectory data (x_k, u_k, finite-difference derivative).
struct TrajectoryData {
  Matrix states;       // n x K
  Matrix inputs;       // N_u x K
  Matrix derivatives;  // n x K
};

/// Projects FOM snapshots onto V and forms forward differences, dropping the
/// last snapshot.
TrajectoryData project_trajectory(const SnapshotMatrix& snapshots, const Matrix& basis);

struct LeastSquaresResult {
  AggregatedOperator op;
  Index rank = 0;
  double cond_p = 0.0;
  bool rank_deficient = false;
};

/// Standard operator inference: argmin sum_k ||O p_k - xdot_k||^2 + lambda ||O||_F^2
/// through the (shifted) normal equations. With lambda = 0 and rank-deficient
/// P the minimum-norm solution is returned and rank_deficient is set.
LeastSquaresResult standard_opinf(const TrajectoryData& data, const MonomialBasis& layout,
                                  double regularization = 0.0);

}  // namespace exopinf
