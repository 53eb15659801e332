#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>

#include <unistd.h>

#include "cli.hpp"
#include "exopinf/exopinf.hpp"
#include "random_fom.hpp"

using namespace exopinf;
using exopinf::cli::run_cli;
namespace fs = std::filesystem;

namespace {

struct Run {
  int code;
  std::string out;
  std::string err;
};

Run run(const std::vector<std::string>& args) {
  std::ostringstream out, err;
  const int code = run_cli(args, out, err);
  return {code, out.str(), err.str()};
}

class TempDir {
 public:
  TempDir() {
    static int counter = 0;
    path_ = fs::temp_directory_path() / ("exopinf_cli_" + std::to_string(::getpid()) + "_" + std::to_string(counter++));
    fs::remove_all(path_);
    fs::create_directories(path_);
  }
  ~TempDir() { fs::remove_all(path_); }
  std::string operator/(const std::string& name) const { return (path_ / name).string(); }

 private:
  fs::path path_;
};

// Numeric rows of a CSV written by the tool (version line and header skipped).
std::vector<std::vector<double>> read_rows(const std::string& path, std::vector<std::string>* header = nullptr) {
  std::ifstream in(path);
  REQUIRE(in);
  std::string line;
  std::getline(in, line);
  std::getline(in, line);
  if (header) *header = split_csv_line(line);
  std::vector<std::vector<double>> rows;
  while (std::getline(in, line)) {
    std::vector<double> row;
    for (const auto& f : split_csv_line(line)) row.push_back(std::stod(f));
    rows.push_back(row);
  }
  return rows;
}

std::string slurp(const std::string& path) {
  std::ifstream in(path);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

TEST_CASE("usage") {
  CHECK(run({"--help"}).code == 0);
  CHECK(run({}).code == 2);
  CHECK(run({"fly"}).code == 2);
  CHECK(run({"experiment"}).code == 2);
  CHECK(run({"experiment", "no-such-model"}).code == 2);
  CHECK(run({"experiment", "burgers", "--boundary", "periodic"}).code == 2);
}

TEST_CASE("thread resolution") {
  CHECK(cli::resolve_threads(3, "5") == 3);
  CHECK(cli::resolve_threads(-1, "5") == 5);
  CHECK(cli::resolve_threads(-1, nullptr) == 0);
  CHECK(cli::resolve_threads(-1, "") == 0);
  CHECK_THROWS_AS(cli::resolve_threads(-1, "many"), SchemaError);
}

TEST_CASE("experiment burgers writes structure diagnostics and passes") {
  TempDir dir;
  const Run r = run({"--threads", "2", "experiment", "burgers", "--n-max", "10", "-o", dir / "out"});
  CHECK(r.code == 0);
  for (const char* file : {"operator_errors.csv", "cond_P.csv", "dt_estimate.csv", "energy_violation.csv",
                           "symmetry_violation.csv", "spectra.csv", "failures.json"}) {
    CHECK(fs::exists(dir / ("out/" + std::string(file))));
  }
  std::vector<std::string> header;
  const auto spectra = read_rows(dir / "out/spectra.csv", &header);
  CHECK(header == std::vector<std::string>{"n", "k", "intrusive", "inferred"});
  CHECK(spectra.size() == 55);  // 1 + 2 + ... + 10
  for (const auto& row : spectra) CHECK(std::abs(row[2] - row[3]) < 1e-10);

  const auto errors = read_rows(dir / "out/operator_errors.csv");
  CHECK(errors.size() == 10);
  for (const auto& row : errors) CHECK(row[2] < 1e-9);

  SUBCASE("byte-identical on a rerun, independent of threads") {
    CHECK(run({"--threads", "1", "experiment", "burgers", "-o", dir / "again"}).code == 0);
    for (const char* file : {"operator_errors.csv", "cond_P.csv", "dt_estimate.csv", "spectra.csv"}) {
      CHECK(slurp(dir / ("out/" + std::string(file))) == slurp(dir / ("again/" + std::string(file))));
    }
  }
}

TEST_CASE("experiment range checks") {
  TempDir dir;
  CHECK(run({"experiment", "burgers", "--n-max", "11", "-o", dir / "x"}).code == 2);
  CHECK(run({"experiment", "burgers", "--n-min", "4", "--n-max", "3", "-o", dir / "x"}).code == 2);
  const Run forced = run({"experiment", "burgers", "--n-min", "11", "--n-max", "11", "--force", "-o", dir / "x"});
  CHECK(forced.code == 0);
  CHECK(read_rows(dir / "x/operator_errors.csv").size() == 1);
}

TEST_CASE("experiment chafee-infante reports every n and lists failures") {
  TempDir dir;
  const Run r = run({"experiment", "chafee-infante", "--baseline", "-o", dir / "ci"});
  std::vector<std::string> header;
  const auto errors = read_rows(dir / "ci/operator_errors.csv", &header);
  CHECK(header.back() == "baseline_error");
  REQUIRE(errors.size() == 14);
  for (const auto& row : errors) CHECK(row[2] < 1e-9);
  CHECK(errors.back()[1] == 680.0);
  // the only threshold the run misses is the dt estimate
  CHECK(r.code == 1);
  CHECK(r.out.find("FAIL dt_estimate") != std::string::npos);
  const std::string failures = slurp(dir / "ci/failures.json");
  CHECK(failures.find("\"passed\": false") != std::string::npos);
}

TEST_CASE("experiment shallow-ice ensemble size") {
  TempDir dir;
  run({"experiment", "shallow-ice", "--n-min", "7", "-o", dir / "ice"});
  const auto errors = read_rows(dir / "ice/operator_errors.csv");
  REQUIRE(errors.size() == 1);
  CHECK(errors[0][0] == 7.0);
  CHECK(errors[0][1] == 3087.0);
  CHECK(errors[0][2] < 1e-6);
}

TEST_CASE("config overrides and schema errors") {
  TempDir dir;
  {
    std::ofstream cfg(dir / "good.cfg");
    cfg << "# smaller run\nT = 0.1\n";
  }
  CHECK(run({"experiment", "burgers", "--config", dir / "good.cfg", "--n-max", "3", "-o", dir / "c"}).code == 0);
  {
    std::ofstream cfg(dir / "bad.cfg");
    cfg << "T = 0.1\nwidth = 3\n";
  }
  const Run bad = run({"experiment", "burgers", "--config", dir / "bad.cfg", "-o", dir / "c"});
  CHECK(bad.code == 2);
  CHECK(bad.err.find("line 2") != std::string::npos);
}

TEST_CASE("infer on a built-in benchmark") {
  TempDir dir;
  const Run r = run({"infer", "--benchmark", "burgers", "-n", "5", "-o", dir / "op.csv", "--save-ensemble",
                     dir / "ens.csv"});
  REQUIRE(r.code == 0);
  const AggregatedOperator from_file = load_operator(dir / "op.csv");

  // same computation through the library
  const Benchmark bench = build_burgers();
  const auto& spec = bench.spec;
  const auto snaps = simulate(bench.fom, bench.x0, bench.signal, spec.dt_pod, spec.pod_steps(), spec.pod_scheme);
  const PodBasis pod = pod_basis(snaps.states, 5);
  const double dt = estimate_dt(snaps, pod, spec.degrees, spec.n_inputs);
  const auto direct = exact_opinf(bench.fom, pod.modes, spec.degrees, spec.n_inputs, dt);
  CHECK(from_file.matrix() == direct.op.matrix());

  SUBCASE("ensemble file reproduces the operator") {
    REQUIRE(run({"infer", "--ensemble", dir / "ens.csv", "-o", dir / "op2.csv"}).code == 0);
    CHECK(load_operator(dir / "op2.csv").matrix() == from_file.matrix());
  }
  SUBCASE("external basis") {
    save_pod(dir / "modes.csv", dir / "sigma.csv", pod);
    REQUIRE(run({"infer", "--benchmark", "burgers", "--basis", dir / "modes.csv", "-n", "3", "--dt",
                 format_double(dt), "-o", dir / "op3.csv"})
                .code == 0);
    const auto small = exact_opinf(bench.fom, pod.modes.leftCols(3), spec.degrees, spec.n_inputs, dt);
    CHECK(load_operator(dir / "op3.csv").matrix() == small.op.matrix());
    CHECK(run({"infer", "--benchmark", "shallow-ice", "--basis", dir / "modes.csv", "--dt", "0.1", "-o",
               dir / "op4.csv"})
              .code == 2);
  }
  SUBCASE("diagnose two operator files") {
    const Run d = run({"diagnose", dir / "op.csv", dir / "op.csv"});
    CHECK(d.code == 0);
    CHECK(d.out.find("\"relative_operator_error\": 0.0") != std::string::npos);
  }
}

TEST_CASE("infer rejects malformed ensemble files") {
  TempDir dir;
  REQUIRE(run({"infer", "--benchmark", "burgers", "-n", "2", "-o", dir / "op.csv", "--save-ensemble", dir / "ens.csv"})
              .code == 0);
  // drop the last column of the first data row
  std::ifstream in(dir / "ens.csv");
  std::vector<std::string> lines;
  for (std::string line; std::getline(in, line);) lines.push_back(line);
  REQUIRE(lines.size() > 3);
  lines[2] = lines[2].substr(0, lines[2].rfind(','));
  {
    std::ofstream out(dir / "bad.csv");
    for (const auto& line : lines) out << line << '\n';
  }
  const Run r = run({"infer", "--ensemble", dir / "bad.csv", "-o", dir / "op2.csv"});
  CHECK(r.code == 2);
  CHECK(r.err.find("line 3") != std::string::npos);
  CHECK(run({"infer", "-o", dir / "op.csv"}).code == 2);
}

TEST_CASE("pod subcommand") {
  TempDir dir;
  SUBCASE("identity snapshots give e_1") {
    SnapshotMatrix s;
    s.states = Matrix::Identity(3, 3);
    s.states(0, 0) = 2.0;
    s.inputs = Matrix(0, 3);
    s.times = {0.0, 1.0, 2.0};
    save_snapshots(dir / "s.csv", s);
    const Run r = run({"pod", dir / "s.csv", "-n", "1", "--modes", dir / "m.csv", "--sigma", dir / "sv.csv"});
    CHECK(r.code == 0);
    std::ifstream in(dir / "m.csv");
    CHECK((read_pod_modes(in) - Matrix::Identity(3, 1)).norm() < 1e-15);
  }
  SUBCASE("rank-one data") {
    SnapshotMatrix s;
    s.states = Matrix::Ones(4, 3);
    s.inputs = Matrix(0, 3);
    s.times = {0.0, 1.0, 2.0};
    save_snapshots(dir / "s.csv", s);
    const Run r = run({"pod", dir / "s.csv", "-n", "2", "--modes", dir / "m.csv", "--sigma", dir / "sv.csv"});
    CHECK(r.code == 3);
    CHECK(r.err.find("numerical rank 1") != std::string::npos);
  }
  SUBCASE("random 20x50 matches the library") {
    std::mt19937_64 rng(7);
    SnapshotMatrix s;
    s.states = exopinf::testing::random_matrix(20, 50, rng);
    s.inputs = Matrix(0, 50);
    for (int k = 0; k < 50; ++k) s.times.push_back(k);
    save_snapshots(dir / "s.csv", s);
    REQUIRE(run({"pod", dir / "s.csv", "-n", "6", "--modes", dir / "m.csv", "--sigma", dir / "sv.csv"}).code == 0);
    const PodBasis loaded = load_pod(dir / "m.csv", dir / "sv.csv");
    const PodBasis direct = pod_basis(s.states, 6);
    CHECK(loaded.modes == direct.modes);
    CHECK(loaded.singular_values == direct.singular_values);
  }
  SUBCASE("missing file") { CHECK(run({"pod", dir / "none.csv", "-n", "1"}).code == 2); }
}
