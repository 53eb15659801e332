#include <doctest.h>

#include <cmath>
#include <random>
#include <set>

#include "exopinf/diagnostics.hpp"
#include "exopinf/errors.hpp"
#include "exopinf/exact_opinf.hpp"
#include "random_fom.hpp"

using namespace exopinf;
using exopinf::testing::make_dense_fom;
using exopinf::testing::make_random_fom;
using exopinf::testing::random_matrix;
using exopinf::testing::random_orthonormal;
using exopinf::testing::random_vector;

namespace {

Vector vec(std::initializer_list<double> values) {
  Vector v(static_cast<Index>(values.size()));
  Index k = 0;
  for (double x : values) v[k++] = x;
  return v;
}

// Feature matrix of the n = 2, I = {1,2}, N_u = 2 example, written out by hand.
// Rows: x1, x2, x1^2, x1 x2, x2^2, u1, u2.
Matrix example_p() {
  Matrix p(7, 7);
  p << 1, 0, 2, 1, 0, 0, 0,  //
      0, 1, 0, 1, 2, 0, 0,   //
      1, 0, 4, 1, 0, 0, 0,   //
      0, 0, 0, 1, 0, 0, 0,   //
      0, 1, 0, 1, 4, 0, 0,   //
      0, 0, 0, 0, 0, 1, 0,   //
      0, 0, 0, 0, 0, 0, 1;
  return p;
}

Matrix feature_matrix(const MonomialBasis& layout, const std::vector<RankEnsuringPair>& pairs) {
  Matrix p(layout.n_features(), static_cast<Index>(pairs.size()));
  for (std::size_t s = 0; s < pairs.size(); ++s) p.col(static_cast<Index>(s)) = layout.feature_vector(pairs[s].state, pairs[s].input);
  return p;
}

}  // namespace

TEST_CASE("rank_ensuring_states") {
  const auto states = rank_ensuring_states(2, {1, 2});
  REQUIRE(states.size() == 5);
  CHECK(states[0] == vec({1, 0}));
  CHECK(states[1] == vec({0, 1}));
  CHECK(states[2] == vec({2, 0}));
  CHECK(states[3] == vec({1, 1}));
  CHECK(states[4] == vec({0, 2}));

  const auto zero = rank_ensuring_states(3, {0});
  REQUIRE(zero.size() == 1);
  CHECK(zero[0] == Vector::Zero(3));

  const auto two = rank_ensuring_states(3, {2});
  REQUIRE(two.size() == 6);
  std::set<std::vector<double>> distinct;
  for (const auto& s : two) {
    CHECK(s.sum() == 2.0);
    CHECK(s.minCoeff() >= 0.0);
    distinct.insert(std::vector<double>(s.data(), s.data() + s.size()));
  }
  CHECK(distinct.size() == 6);
}

TEST_CASE("rank_ensuring_pairs") {
  const MonomialBasis layout(2, {1, 2}, 2);
  const auto pairs = rank_ensuring_pairs(layout);
  REQUIRE(pairs.size() == 7);
  CHECK(pairs[3].provenance.to_string() == "x(1,2)");
  CHECK(pairs[5].provenance.to_string() == "u1");
  CHECK(pairs[6].input == vec({0, 1}));
  CHECK(pairs[6].state == Vector::Zero(2));
  CHECK(feature_matrix(layout, pairs) == example_p());

  for (const auto& pair : pairs) CHECK(PairProvenance::parse(pair.provenance.to_string()) == pair.provenance);
  CHECK_THROWS_AS(PairProvenance::parse("y(1)"), SchemaError);

  CHECK(rank_ensuring_pairs(MonomialBasis(14, {1, 2, 3}, 1)).size() == 680);
  CHECK(rank_ensuring_pairs(MonomialBasis(7, {3, 8}, 0)).size() == 3087);
}

TEST_CASE("state pairs follow the feature layout") {
  const MonomialBasis layout(3, {0, 1, 3}, 1);
  const auto pairs = rank_ensuring_pairs(layout);
  Index s = 0;
  for (int d : layout.degrees()) {
    for (const auto& tuple : enumerate_monomials(3, d)) {
      CHECK(pairs[static_cast<std::size_t>(s)].provenance.tuple == tuple);
      CHECK(pairs[static_cast<std::size_t>(s)].provenance.degree == d);
      ++s;
    }
  }
  CHECK(s == layout.n_state_features());
}

TEST_CASE("infer") {
  std::mt19937_64 rng(1);
  const MonomialBasis layout(2, {1, 2}, 2);
  SUBCASE("identity feature matrix") {
    const Matrix xdot = random_matrix(2, 7, rng);
    const auto result = infer(layout, Matrix::Identity(7, 7), xdot);
    CHECK(result.op.matrix() == xdot);
    CHECK(result.cond_p == doctest::Approx(1.0));
  }
  SUBCASE("worked example feature matrix") {
    const Matrix truth = random_matrix(2, 7, rng);
    const auto result = infer(layout, example_p(), truth * example_p());
    CHECK(relative_operator_error(result.op.matrix(), truth) < 1e-13);
    CHECK(result.residual < 1e-13);
    CHECK(std::isfinite(result.cond_p));
    CHECK(std::isnan(infer(layout, example_p(), truth * example_p(), false).cond_p));
  }
  SUBCASE("singular and misshapen inputs") {
    Matrix p = example_p();
    p.col(6) = p.col(5);
    CHECK_THROWS_AS(infer(layout, p, Matrix::Zero(2, 7)), SingularMatrixError);
    CHECK_THROWS_AS(infer(layout, Matrix::Identity(6, 6), Matrix::Zero(2, 6)), DimensionError);
  }
}

TEST_CASE("generate_ensemble") {
  std::mt19937_64 rng(2);
  SUBCASE("zero FOM") {
    const PolynomialFOM zero(4, {1, 2}, 1, [](const Vector& x, const Vector&) { return Vector::Zero(x.size()); });
    const MonomialBasis layout(2, {1, 2}, 1);
    const auto ens = generate_ensemble(zero, random_orthonormal(4, 2, rng), layout, rank_ensuring_pairs(layout), 0.1);
    CHECK(ens.derivatives.isZero(0.0));
    CHECK(ens.size() == layout.n_features());
    CHECK(ens.fom_steps == ens.size());
  }
  SUBCASE("linear FOM with identity basis: dt cancels") {
    const Matrix a = random_matrix(3, 3, rng);
    const auto dense = make_dense_fom(3, {1}, 0, {{1, a}}, Matrix(3, 0));
    const MonomialBasis layout(3, {1}, 0);
    for (double dt : {1e-3, 1.0, 10.0}) {
      const auto ens = generate_ensemble(dense.fom, Matrix::Identity(3, 3), layout, rank_ensuring_pairs(layout), dt);
      CHECK((ens.derivatives.col(0) - a.col(0)).norm() <= 1e-12 * a.norm());
    }
  }
  SUBCASE("derivatives equal V^T f(V xbar, ubar)") {
    const auto dense = make_random_fom(6, {1, 2}, 1, rng);
    const Matrix v = random_orthonormal(6, 3, rng);
    const MonomialBasis layout(3, {1, 2}, 1);
    const auto pairs = rank_ensuring_pairs(layout);
    const auto ens = generate_ensemble(dense.fom, v, layout, pairs, 1e-2);
    Matrix want(3, ens.size());
    for (std::size_t s = 0; s < pairs.size(); ++s) {
      want.col(static_cast<Index>(s)) = v.transpose() * dense.fom.eval_rhs(v * pairs[s].state, pairs[s].input);
    }
    CHECK(relative_operator_error(ens.derivatives, want) < 1e-12);
  }
  SUBCASE("non-finite output names the pair") {
    const PolynomialFOM bad(2, {1}, 0, [](const Vector& x, const Vector&) {
      return Vector(x[1] != 0.0 ? Vector::Constant(2, INFINITY) : x);
    });
    const MonomialBasis layout(2, {1}, 0);
    try {
      generate_ensemble(bad, Matrix::Identity(2, 2), layout, rank_ensuring_pairs(layout), 0.1, 1);
      FAIL("expected NonFiniteError");
    } catch (const NonFiniteError& e) {
      CHECK(std::string(e.what()).find("x(2)") != std::string::npos);
    }
  }
  SUBCASE("thread count does not change the result") {
    const auto dense = make_random_fom(8, {1, 2, 3}, 2, rng);
    const Matrix v = random_orthonormal(8, 4, rng);
    const MonomialBasis layout(4, {1, 2, 3}, 2);
    const auto one = generate_ensemble(dense.fom, v, layout, rank_ensuring_pairs(layout), 0.05, 1);
    const auto four = generate_ensemble(dense.fom, v, layout, rank_ensuring_pairs(layout), 0.05, 4);
    CHECK(one.derivatives == four.derivatives);
    CHECK(one.fom_states == four.fom_states);
  }
}

TEST_CASE("exact_opinf recovers the intrusive operator") {
  std::mt19937_64 rng(3);
  SUBCASE("zero FOM") {
    const auto dense = make_dense_fom(4, {1, 2}, 0, {{1, Matrix::Zero(4, 4)}, {2, Matrix::Zero(4, 10)}}, Matrix(4, 0));
    const auto result = exact_opinf(dense.fom, random_orthonormal(4, 2, rng), {1, 2}, 0, 0.1);
    CHECK(result.op.matrix().isZero(0.0));
  }
  SUBCASE("I = {0,1,2}, N_u = 2, N = 8, n = 4") {
    const auto dense = make_random_fom(8, {0, 1, 2}, 2, rng);
    const Matrix v = random_orthonormal(8, 4, rng);
    const auto intrusive = reduce(dense.fom, v);
    const double dt = 1.0 / intrusive.matrix().norm();
    const auto result = exact_opinf(dense.fom, v, {0, 1, 2}, 2, dt);
    CHECK(relative_operator_error(result.op, intrusive) < 1e-11);
    CHECK(result.ensemble_size == 1 + 4 + 10 + 2);
  }
  SUBCASE("random FOMs") {
    for (int trial = 0; trial < 20; ++trial) {
      const Index big_n = std::uniform_int_distribution<Index>(2, 10)(rng);
      const Index n = std::uniform_int_distribution<Index>(1, std::min<Index>(5, big_n))(rng);
      const Index n_u = std::uniform_int_distribution<Index>(0, 2)(rng);
      DegreeSet degrees;
      const unsigned mask = std::uniform_int_distribution<unsigned>(1, 15)(rng);
      for (int d = 0; d <= 3; ++d) {
        if (mask & (1u << d)) degrees.push_back(d);
      }
      const auto dense = make_random_fom(big_n, degrees, n_u, rng);
      const Matrix v = random_orthonormal(big_n, n, rng);
      const auto intrusive = reduce(dense.fom, v);
      const auto result = exact_opinf(dense.fom, v, degrees, n_u, 1.0 / intrusive.matrix().norm());
      CAPTURE(trial);
      CHECK(relative_operator_error(result.op, intrusive) < 1e-10);
    }
  }
  SUBCASE("dt invariance") {
    const auto dense = make_random_fom(6, {1, 2}, 1, rng);
    const Matrix v = random_orthonormal(6, 3, rng);
    const double base = 1.0 / reduce(dense.fom, v).matrix().norm();
    for (double scale : {1e-3, 1e-1, 1.0, 1e2}) {
      const auto a = exact_opinf(dense.fom, v, {1, 2}, 1, scale * base);
      const auto b = exact_opinf(dense.fom, v, {1, 2}, 1, 10.0 * scale * base);
      CHECK(relative_operator_error(a.op, b.op) < 1e-8);
    }
  }
  SUBCASE("degenerate degree set {0}") {
    const Vector c = random_vector(5, rng);
    const auto dense = make_dense_fom(5, {0}, 0, {{0, Matrix(c)}}, Matrix(5, 0));
    const Matrix v = random_orthonormal(5, 2, rng);
    const auto result = exact_opinf(dense.fom, v, {0}, 0, 0.5);
    REQUIRE(result.op.matrix().cols() == 1);
    CHECK((result.op.matrix().col(0) - v.transpose() * c).norm() < 1e-14);
  }
}

TEST_CASE("extend_ensemble reuses nested pairs") {
  std::mt19937_64 rng(4);
  const auto dense = make_random_fom(6, {1, 2}, 1, rng);
  const Matrix v = random_orthonormal(6, 3, rng);
  const double dt = 0.05;

  SUBCASE("n = 1 -> 2, I = {1}") {
    const auto lin = make_random_fom(6, {1}, 0, rng);
    const MonomialBasis layout(1, {1}, 0);
    const auto small = generate_ensemble(lin.fom, v.leftCols(1), layout, rank_ensuring_pairs(layout), dt);
    const auto ext = extend_ensemble(small, lin.fom, v.leftCols(2), dt);
    CHECK(ext.size() == 2);
    CHECK(ext.fom_steps == 1);
  }
  SUBCASE("n = 2 -> 3, I = {1,2}: bit-identical to fresh generation") {
    const auto lin = make_random_fom(6, {1, 2}, 0, rng);
    const MonomialBasis small_layout(2, {1, 2}, 0);
    const auto small = generate_ensemble(lin.fom, v.leftCols(2), small_layout, rank_ensuring_pairs(small_layout), dt);
    const auto ext = extend_ensemble(small, lin.fom, v, dt);
    CHECK(ext.size() == 9);
    CHECK(ext.size() - ext.fom_steps == 5);

    const MonomialBasis layout(3, {1, 2}, 0);
    const auto fresh = generate_ensemble(lin.fom, v, layout, rank_ensuring_pairs(layout), dt);
    CHECK(ext.features == fresh.features);
    CHECK(ext.derivatives == fresh.derivatives);
    CHECK(ext.fom_states == fresh.fom_states);
    for (std::size_t s = 0; s < fresh.pairs.size(); ++s) CHECK(ext.pairs[s].provenance == fresh.pairs[s].provenance);
  }
  SUBCASE("inputs are reused too") {
    const MonomialBasis layout(2, {1, 2}, 1);
    const auto small = generate_ensemble(dense.fom, v.leftCols(2), layout, rank_ensuring_pairs(layout), dt);
    const auto ext = extend_ensemble(small, dense.fom, v, dt);
    CHECK(ext.size() - ext.fom_steps == 6);
    const auto fresh = exact_opinf(dense.fom, v, {1, 2}, 1, dt);
    CHECK(infer(ext).op.matrix() == fresh.op.matrix());
  }
  SUBCASE("mismatched basis or dt") {
    const MonomialBasis layout(2, {1, 2}, 1);
    const auto small = generate_ensemble(dense.fom, v.leftCols(2), layout, rank_ensuring_pairs(layout), dt);
    Matrix other = v;
    other(0, 0) += 1e-10;
    CHECK_THROWS_AS(extend_ensemble(small, dense.fom, other, dt), Error);
    CHECK_THROWS_AS(extend_ensemble(small, dense.fom, v, 2 * dt), Error);
    CHECK_THROWS_AS(extend_ensemble(small, dense.fom, v.leftCols(2), dt), DimensionError);
  }
}

TEST_CASE("estimate_dt") {
  SnapshotMatrix snaps;
  snaps.states = Matrix::Zero(2, 4);
  for (Index k = 0; k < 4; ++k) {
    snaps.states(0, k) = 1.0 + static_cast<double>(k);
    snaps.times.push_back(0.1 * static_cast<double>(k));
  }
  snaps.inputs = Matrix(0, 4);
  PodBasis basis{Matrix::Identity(2, 1), Vector::Ones(1)};
  // |ds/dt| = 10 everywhere; ||p|| = s, smallest at k = 0 where s = 1
  CHECK(estimate_dt(snaps, basis, {1}, 0) == doctest::Approx(0.1));

  snaps.states.setZero();
  CHECK_THROWS_AS(estimate_dt(snaps, basis, {1}, 0), Error);
}

TEST_CASE("standard operator inference") {
  std::mt19937_64 rng(5);
  const MonomialBasis layout(2, {1, 2}, 1);
  const Matrix truth = random_matrix(2, 6, rng, 0.3) - (Matrix(2, 6) << 1, 0, 0, 0, 0, 0, 0, 1, 0, 0, 0, 0).finished();
  const AggregatedOperator op(layout, truth);

  SUBCASE("exact ROM trajectory recovers the operator") {
    const InputSignal signal{1, [](double t) { return Vector::Constant(1, std::sin(3.0 * t) + 0.5 * std::cos(7.0 * t)); }};
    const auto traj = rom_simulate(op, random_vector(2, rng, 0.5), signal, 1e-2, 300);
    const auto fitted = standard_opinf(project_trajectory(traj, Matrix::Identity(2, 2)), layout);
    CHECK_FALSE(fitted.rank_deficient);
    CHECK(fitted.rank == 6);
    CHECK(relative_operator_error(fitted.op, op) < 1e-10);

    const auto ridge = standard_opinf(project_trajectory(traj, Matrix::Identity(2, 2)), layout, 1e-3);
    CHECK(relative_operator_error(ridge.op, op) > 1e-10);
  }
  SUBCASE("single snapshot is rank deficient") {
    TrajectoryData data{random_matrix(2, 1, rng), random_matrix(1, 1, rng), random_matrix(2, 1, rng)};
    const auto fitted = standard_opinf(data, layout);
    CHECK(fitted.rank_deficient);
    CHECK(fitted.rank == 1);
    // minimum-norm solution still fits the one sample
    CHECK((fitted.op.apply(data.states.col(0), data.inputs.col(0)) - data.derivatives.col(0)).norm() < 1e-12);
  }
  SUBCASE("project_trajectory drops the last snapshot") {
    const auto traj = rom_simulate(op, random_vector(2, rng), InputSignal::zero(1), 0.1, 5);
    const auto data = project_trajectory(traj, Matrix::Identity(2, 2));
    CHECK(data.states.cols() == 5);
    CHECK(data.derivatives.col(0) == Vector((traj.states.col(1) - traj.states.col(0)) / 0.1));
  }
}
