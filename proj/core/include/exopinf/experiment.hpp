#pragma once

// End-to-end benchmark runs: POD data, dt estimate, then for every ROM
// dimension the intrusive operator and the exactly inferred one, compared.

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "exopinf/benchmarks.hpp"
#include "exopinf/diagnostics.hpp"
#include "exopinf/exact_opinf.hpp"
#include "exopinf/pod.hpp"

namespace exopinf {

struct ExperimentOptions {
  unsigned threads = 0;
  /// Empty: 1..spec.n_max.
  std::vector<Index> dimensions;
  std::optional<double> dt_override;
  /// Also fit standard operator inference to the projected POD trajectory.
  bool baseline = false;
  /// Keep every ensemble (needed for nestedness checks).
  bool keep_ensembles = false;
  std::function<void(const std::string&)> log;
};

struct DimensionResult {
  DiagnosticsReport report;
  AggregatedOperator inferred;
  AggregatedOperator intrusive;
  double inference_residual = 0.0;
  std::optional<double> baseline_error;
  std::optional<SnapshotEnsemble> ensemble;
  double seconds = 0.0;
};

struct ExperimentResult {
  Benchmark benchmark;
  SnapshotMatrix pod_snapshots;
  PodBasis pod;
  double dt_estimate = 0.0;
  double dt = 0.0;
  double pod_seconds = 0.0;
  std::vector<DimensionResult> dimensions;
};

ExperimentResult run_experiment(const BenchmarkSpec& spec, const ExperimentOptions& options = {});

/// Energy violation divided by ||O||_F. Scaling by ||A_2||_F alone breaks
/// down at n = 1, where A_2 vanishes identically for energy-preserving models.
double scaled_energy_violation(const AggregatedOperator& op);

/// Acceptance thresholds for the benchmark, one message per failed check
/// ("<check> n=<n>: <value> >= <limit>"). Empty means pass.
std::vector<std::string> threshold_failures(const ExperimentResult& result);

}  // namespace exopinf
