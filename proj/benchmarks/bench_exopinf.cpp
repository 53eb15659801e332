#include <benchmark/benchmark.h>

#include <random>

#include <Eigen/QR>

#include "exopinf/exopinf.hpp"

using namespace exopinf;

namespace {

Matrix orthonormal(Index rows, Index cols, unsigned seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal;
  Matrix a(rows, cols);
  for (Index j = 0; j < cols; ++j)
    for (Index i = 0; i < rows; ++i) a(i, j) = normal(rng);
  return Eigen::HouseholderQR<Matrix>(a).householderQ() * Matrix::Identity(rows, cols);
}

void BM_CompressState(benchmark::State& state) {
  const Index n = state.range(0);
  const int degree = static_cast<int>(state.range(1));
  const Vector x = Vector::LinSpaced(n, 0.1, 1.0);
  for (auto _ : state) benchmark::DoNotOptimize(compress_state(x, degree));
  state.counters["n_i"] = static_cast<double>(monomial_count(n, degree));
}
BENCHMARK(BM_CompressState)->Args({14, 2})->Args({14, 3})->Args({7, 8});

void BM_GenerateEnsemble(benchmark::State& state) {
  const Benchmark bench = build_chafee_infante();
  const Index n = state.range(0);
  const Matrix v = orthonormal(bench.fom.dimension(), n, 1);
  const MonomialBasis layout(n, bench.spec.degrees, bench.spec.n_inputs);
  const auto pairs = rank_ensuring_pairs(layout);
  for (auto _ : state) benchmark::DoNotOptimize(generate_ensemble(bench.fom, v, layout, pairs, 1e-4, 1));
  state.counters["pairs"] = static_cast<double>(pairs.size());
}
BENCHMARK(BM_GenerateEnsemble)->Arg(4)->Arg(8)->Arg(14)->Unit(benchmark::kMillisecond);

void BM_Reduce(benchmark::State& state) {
  const Benchmark bench = build_chafee_infante();
  const Matrix v = orthonormal(bench.fom.dimension(), state.range(0), 2);
  for (auto _ : state) benchmark::DoNotOptimize(reduce(bench.fom, v, 1));
}
BENCHMARK(BM_Reduce)->Arg(4)->Arg(8)->Arg(14)->Unit(benchmark::kMillisecond);

void BM_Infer(benchmark::State& state) {
  const Index n = state.range(0);
  const MonomialBasis layout(n, {1, 2, 3}, 1);
  const auto pairs = rank_ensuring_pairs(layout);
  Matrix p(layout.n_features(), static_cast<Index>(pairs.size()));
  for (std::size_t s = 0; s < pairs.size(); ++s) p.col(static_cast<Index>(s)) = layout.feature_vector(pairs[s].state, pairs[s].input);
  const Matrix xdot = Matrix::Ones(n, p.cols());
  const bool with_condition = state.range(1) != 0;
  for (auto _ : state) benchmark::DoNotOptimize(infer(layout, p, xdot, with_condition));
  state.counters["n_f"] = static_cast<double>(p.cols());
}
BENCHMARK(BM_Infer)->Args({8, 0})->Args({14, 0})->Args({14, 1})->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
