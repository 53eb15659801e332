#include "cli.hpp"

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <ostream>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "exopinf/exopinf.hpp"

namespace exopinf::cli {
namespace {

namespace fs = std::filesystem;
using nlohmann::json;

std::ofstream open_output(const fs::path& path) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path);
  if (!out) throw Error("cannot write " + path.string());
  return out;
}

void write_table(const fs::path& path, const std::string& kind, const std::vector<std::string>& header,
                 const std::vector<std::vector<double>>& rows) {
  auto out = open_output(path);
  out << "# exopinf " << kind << " v" << kFileSchemaVersion << '\n';
  for (std::size_t c = 0; c < header.size(); ++c) out << (c ? "," : "") << header[c];
  out << '\n';
  for (const auto& row : rows) {
    for (std::size_t c = 0; c < row.size(); ++c) out << (c ? "," : "") << format_double(row[c]);
    out << '\n';
  }
}

DegreeSet parse_degrees(const std::string& text) {
  DegreeSet degrees;
  for (const auto& token : split_csv_line(text)) {
    try {
      std::size_t used = 0;
      const int d = std::stoi(token, &used);
      if (used != token.size() || d < 0) throw std::invalid_argument(token);
      degrees.push_back(d);
    } catch (const std::exception&) {
      throw SchemaError("degree list must be non-negative integers, got '" + text + "'", 0);
    }
  }
  if (degrees.empty()) throw SchemaError("empty degree list", 0);
  return degrees;
}

std::string join_degrees(const DegreeSet& degrees) {
  std::string out;
  for (int d : degrees) out += (out.empty() ? "" : ",") + std::to_string(d);
  return out;
}

json report_json(const DiagnosticsReport& r) {
  json j;
  j["n"] = r.n;
  j["relative_operator_error"] = r.relative_operator_error;
  j["block_errors"] = r.block_errors;
  if (r.energy_violation_inferred >= 0.0) {
    j["energy_violation"] = {{"inferred", r.energy_violation_inferred}, {"intrusive", r.energy_violation_intrusive}};
  }
  if (r.symmetry_violation_inferred >= 0.0) {
    j["symmetry_violation"] = {{"inferred", r.symmetry_violation_inferred},
                               {"intrusive", r.symmetry_violation_intrusive}};
    j["spectrum"] = {{"inferred", std::vector<double>(r.spectrum_inferred.begin(), r.spectrum_inferred.end())},
                     {"intrusive", std::vector<double>(r.spectrum_intrusive.begin(), r.spectrum_intrusive.end())}};
  }
  return j;
}

BenchmarkSpec load_spec(const std::string& name, const std::string& config_path) {
  BenchmarkSpec spec = default_spec(name);
  if (!config_path.empty()) spec = apply_overrides(spec, KeyValueConfig::load(config_path));
  return spec;
}

// ---------------------------------------------------------------- experiment

struct ExperimentArgs {
  std::string benchmark;
  std::string config;
  std::string output = "results";
  int n_min = 1;
  int n_max = 0;
  double dt = 0.0;
  bool baseline = false;
  bool force = false;
  bool save_data = false;
  std::string boundary;
};

void write_experiment_csvs(const fs::path& dir, const ExperimentResult& result, bool baseline) {
  const auto& spec = result.benchmark.spec;

  std::vector<std::string> header{"n", "ensemble_size", "relative_error"};
  const auto& first = result.dimensions.front().report.block_errors;
  for (const auto& [block, value] : first) header.push_back("error_" + block);
  if (baseline) header.push_back("baseline_error");
  std::vector<std::vector<double>> errors, cond;
  for (const auto& dim : result.dimensions) {
    const auto& r = dim.report;
    std::vector<double> row{static_cast<double>(r.n), static_cast<double>(r.ensemble_size),
                            r.relative_operator_error};
    for (const auto& [block, value] : r.block_errors) row.push_back(value);
    if (baseline) row.push_back(dim.baseline_error.value_or(NAN));
    errors.push_back(std::move(row));
    cond.push_back({static_cast<double>(r.n), r.cond_p});
  }
  write_table(dir / "operator_errors.csv", "operator-errors", header, errors);
  write_table(dir / "cond_P.csv", "cond-p", {"n", "cond_p"}, cond);
  write_table(dir / "dt_estimate.csv", "dt-estimate", {"dt_estimate", "dt_used"}, {{result.dt_estimate, result.dt}});

  if (spec.name != "burgers") return;
  std::vector<std::vector<double>> energy, symmetry, spectra;
  for (const auto& dim : result.dimensions) {
    const auto& r = dim.report;
    const auto n = static_cast<double>(r.n);
    energy.push_back({n, scaled_energy_violation(dim.inferred), scaled_energy_violation(dim.intrusive),
                      r.energy_violation_inferred, r.energy_violation_intrusive});
    symmetry.push_back({n, r.symmetry_violation_inferred, r.symmetry_violation_intrusive});
    for (Index k = 0; k < r.spectrum_inferred.size(); ++k) {
      spectra.push_back({n, static_cast<double>(k + 1), r.spectrum_intrusive[k], r.spectrum_inferred[k]});
    }
  }
  write_table(dir / "energy_violation.csv", "energy-violation",
              {"n", "inferred_scaled", "intrusive_scaled", "inferred", "intrusive"}, energy);
  write_table(dir / "symmetry_violation.csv", "symmetry-violation", {"n", "inferred", "intrusive"}, symmetry);
  write_table(dir / "spectra.csv", "spectra", {"n", "k", "intrusive", "inferred"}, spectra);
}

int cmd_experiment(const ExperimentArgs& a, unsigned threads, std::ostream& out, std::ostream& err) {
  BenchmarkSpec spec = load_spec(a.benchmark, a.config);
  if (!a.boundary.empty()) {
    KeyValueConfig boundary;
    boundary.set("right_boundary", a.boundary);
    spec = apply_overrides(spec, boundary);
  }
  const Index documented = spec.n_max;
  const Index n_max = a.n_max > 0 ? a.n_max : documented;
  if (a.n_min < 1 || a.n_min > n_max) throw DimensionError("need 1 <= --n-min <= --n-max");
  if (n_max > documented) {
    if (!a.force) {
      throw DimensionError("--n-max " + std::to_string(n_max) + " exceeds the documented range 1.." +
                           std::to_string(documented) + " for " + spec.name + " (use --force)");
    }
    spec.n_max = n_max;
  }

  ExperimentOptions options;
  options.threads = threads;
  options.baseline = a.baseline;
  if (a.dt > 0.0) options.dt_override = a.dt;
  for (Index n = a.n_min; n <= n_max; ++n) options.dimensions.push_back(n);
  options.log = [&err](const std::string& msg) { err << msg << '\n'; };

  const ExperimentResult result = run_experiment(spec, options);
  const fs::path dir = fs::path(a.output);
  write_experiment_csvs(dir, result, a.baseline);
  if (a.save_data) {
    save_snapshots((dir / "pod_snapshots.csv").string(), result.pod_snapshots);
    save_pod((dir / "pod_modes.csv").string(), (dir / "singular_values.csv").string(), result.pod);
  }

  const auto failures = threshold_failures(result);
  json summary{{"benchmark", spec.name},
               {"n", options.dimensions},
               {"dt_estimate", result.dt_estimate},
               {"dt", result.dt},
               {"passed", failures.empty()},
               {"failures", failures}};
  open_output(dir / "failures.json") << summary.dump(2) << '\n';

  for (const auto& f : failures) out << "FAIL " << f << '\n';
  out << spec.name << ": " << (failures.empty() ? "all thresholds passed" : std::to_string(failures.size()) + " threshold(s) failed")
      << " (results in " << dir.string() << ")\n";
  return failures.empty() ? kOk : kThresholdFailure;
}

// ---------------------------------------------------------------- infer

struct InferArgs {
  std::string ensemble;
  std::string benchmark;
  std::string config;
  std::string basis;
  int n = 0;
  std::string degrees;
  int inputs = -1;
  double dt = 0.0;
  std::string output = "operator.csv";
  std::string save_ensemble;
};

int cmd_infer(const InferArgs& a, unsigned threads, std::ostream& out) {
  InferenceResult result;
  if (!a.ensemble.empty()) {
    if (!a.benchmark.empty()) throw SchemaError("give either --ensemble or --benchmark, not both", 0);
    const SnapshotEnsemble ensemble = load_ensemble(a.ensemble);
    result = infer(ensemble);
  } else {
    if (a.benchmark.empty()) throw SchemaError("infer needs --ensemble or --benchmark", 0);
    const BenchmarkSpec spec = load_spec(a.benchmark, a.config);
    const Benchmark bench = build_benchmark(spec);
    const DegreeSet degrees = a.degrees.empty() ? spec.degrees : parse_degrees(a.degrees);
    const Index n_inputs = a.inputs >= 0 ? a.inputs : spec.n_inputs;

    Matrix basis;
    double dt = a.dt;
    if (!a.basis.empty()) {
      std::ifstream in(a.basis);
      if (!in) throw SchemaError("cannot open " + a.basis, 0);
      basis = read_pod_modes(in);
      if (a.n > 0) {
        if (a.n > basis.cols()) throw DimensionError("--n exceeds the number of basis columns");
        basis = basis.leftCols(a.n).eval();
      }
      if (dt <= 0.0) throw SchemaError("--dt is required with an external --basis", 0);
    } else {
      if (a.n < 1) throw SchemaError("--n is required when the basis comes from the benchmark", 0);
      const auto snaps = simulate(bench.fom, bench.x0, bench.signal, spec.dt_pod, spec.pod_steps(), spec.pod_scheme);
      const PodBasis pod = pod_basis(snaps.states, a.n);
      basis = pod.modes;
      if (dt <= 0.0) dt = estimate_dt(snaps, pod, degrees, n_inputs);
    }
    if (basis.rows() != bench.fom.dimension()) {
      throw DimensionError("basis has " + std::to_string(basis.rows()) + " rows, FOM dimension is " +
                           std::to_string(bench.fom.dimension()));
    }
    const MonomialBasis layout(basis.cols(), degrees, n_inputs);
    const SnapshotEnsemble ensemble = generate_ensemble(bench.fom, basis, layout, rank_ensuring_pairs(layout), dt, threads);
    if (!a.save_ensemble.empty()) save_ensemble(a.save_ensemble, ensemble);
    result = infer(ensemble);
  }
  save_operator(a.output, result.op);
  out << "n=" << result.op.n() << " degrees=" << join_degrees(result.op.basis().degrees())
      << " inputs=" << result.op.basis().n_inputs() << " ensemble_size=" << result.ensemble_size
      << " cond_p=" << format_double(result.cond_p) << " residual=" << format_double(result.residual) << '\n';
  out << "wrote " << a.output << " and " << a.output << ".json\n";
  return kOk;
}

// ---------------------------------------------------------------- pod

struct PodArgs {
  std::string snapshots;
  int n = 0;
  std::string modes = "pod_modes.csv";
  std::string sigma = "singular_values.csv";
};

int cmd_pod(const PodArgs& a, std::ostream& out) {
  const SnapshotMatrix snaps = load_snapshots(a.snapshots);
  const PodBasis pod = pod_basis(snaps.states, a.n);
  save_pod(a.modes, a.sigma, pod);
  out << "numerical_rank=" << numerical_rank(pod.singular_values) << " n=" << pod.n_modes() << '\n';
  return kOk;
}

// ---------------------------------------------------------------- diagnose

struct DiagnoseArgs {
  std::string inferred;
  std::string reference;
  std::string output;
};

int cmd_diagnose(const DiagnoseArgs& a, std::ostream& out) {
  const AggregatedOperator inferred = load_operator(a.inferred);
  const AggregatedOperator reference = load_operator(a.reference);
  json j = report_json(diagnose(inferred, reference));
  if (reference.basis().has_degree(2)) {
    j["energy_violation_scaled"] = {{"inferred", scaled_energy_violation(inferred)},
                                    {"intrusive", scaled_energy_violation(reference)}};
  }
  if (a.output.empty()) {
    out << j.dump(2) << '\n';
  } else {
    open_output(a.output) << j.dump(2) << '\n';
    out << "relative_operator_error=" << format_double(j["relative_operator_error"].get<double>()) << '\n';
  }
  return kOk;
}

}  // namespace

unsigned resolve_threads(int flag_value, const char* env_value) {
  if (flag_value >= 0) return static_cast<unsigned>(flag_value);
  if (env_value && *env_value) {
    char* end = nullptr;
    const long v = std::strtol(env_value, &end, 10);
    if (*end != '\0' || v < 0) throw SchemaError(std::string("EXACTOPINF_THREADS must be a non-negative integer, got '") + env_value + "'", 0);
    return static_cast<unsigned>(v);
  }
  return 0;
}

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Exact operator inference for polynomial reduced-order models", "exopinf"};
  app.require_subcommand(1);
  int threads_flag = -1;
  app.add_option("--threads", threads_flag, "Worker threads for FOM queries (0 = all cores; default EXACTOPINF_THREADS)");

  ExperimentArgs ex;
  auto* experiment = app.add_subcommand("experiment", "Run a benchmark over a range of ROM dimensions");
  experiment->add_option("benchmark", ex.benchmark, "chafee-infante | shallow-ice | burgers")->required();
  experiment->add_option("--config", ex.config, "key = value file with model overrides")->check(CLI::ExistingFile);
  experiment->add_option("-o,--output", ex.output, "Output directory")->capture_default_str();
  experiment->add_option("--n-min", ex.n_min, "Smallest ROM dimension")->capture_default_str();
  experiment->add_option("--n-max", ex.n_max, "Largest ROM dimension (default: the benchmark's)");
  experiment->add_option("--dt", ex.dt, "Single-step dt instead of the estimate");
  experiment->add_option("--boundary", ex.boundary, "Right boundary variant")->check(CLI::IsMember({"neumann", "frozen"}));
  experiment->add_flag("--baseline", ex.baseline, "Also fit standard operator inference to the POD trajectory");
  experiment->add_flag("--force", ex.force, "Allow n beyond the documented range");
  experiment->add_flag("--save-data", ex.save_data, "Write POD snapshots, modes and singular values");

  InferArgs in;
  auto* infer_cmd = app.add_subcommand("infer", "Infer a reduced operator from single-step snapshot data");
  infer_cmd->add_option("--ensemble", in.ensemble, "Ensemble CSV (skips FOM queries)");
  infer_cmd->add_option("--benchmark", in.benchmark, "Built-in FOM to query");
  infer_cmd->add_option("--config", in.config, "key = value file with model overrides")->check(CLI::ExistingFile);
  infer_cmd->add_option("--basis", in.basis, "POD modes CSV (default: POD of the benchmark trajectory)");
  infer_cmd->add_option("-n,--n", in.n, "ROM dimension");
  infer_cmd->add_option("--degrees", in.degrees, "Degree set, e.g. 1,2");
  infer_cmd->add_option("--inputs", in.inputs, "Number of inputs");
  infer_cmd->add_option("--dt", in.dt, "Single-step dt (default: estimate from the POD data)");
  infer_cmd->add_option("-o,--output", in.output, "Operator CSV (sidecar <path>.json)")->capture_default_str();
  infer_cmd->add_option("--save-ensemble", in.save_ensemble, "Also write the generated ensemble");

  PodArgs po;
  auto* pod_cmd = app.add_subcommand("pod", "POD basis of a snapshot matrix");
  pod_cmd->add_option("snapshots", po.snapshots, "Snapshot CSV")->required();
  pod_cmd->add_option("-n,--n", po.n, "Number of modes")->required()->check(CLI::PositiveNumber);
  pod_cmd->add_option("--modes", po.modes, "Modes output")->capture_default_str();
  pod_cmd->add_option("--sigma", po.sigma, "Singular values output")->capture_default_str();

  DiagnoseArgs di;
  auto* diagnose_cmd = app.add_subcommand("diagnose", "Compare an inferred operator with a reference");
  diagnose_cmd->add_option("inferred", di.inferred, "Inferred operator CSV")->required();
  diagnose_cmd->add_option("reference", di.reference, "Reference (intrusive) operator CSV")->required();
  diagnose_cmd->add_option("-o,--output", di.output, "JSON output (default: stdout)");

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::CallForHelp& e) {
    out << app.help();
    return kOk;
  } catch (const CLI::CallForAllHelp& e) {
    out << app.help("", CLI::AppFormatMode::All);
    return kOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << '\n';
    return kUsageError;
  }

  try {
    const unsigned threads = resolve_threads(threads_flag, std::getenv("EXACTOPINF_THREADS"));
    if (experiment->parsed()) return cmd_experiment(ex, threads, out, err);
    if (infer_cmd->parsed()) return cmd_infer(in, threads, out);
    if (pod_cmd->parsed()) return cmd_pod(po, out);
    return cmd_diagnose(di, out);
  } catch (const SchemaError& e) {
    err << "schema error: " << e.what() << '\n';
    return kUsageError;
  } catch (const DimensionError& e) {
    err << "error: " << e.what() << '\n';
    return kUsageError;
  } catch (const RankDeficientError& e) {
    err << "rank deficient: " << e.what() << " (numerical rank " << e.numerical_rank() << ")\n";
    return kRankDeficient;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kRuntimeError;
  }
}

}  // namespace exopinf::cli
