#pragma once

// File formats. Every CSV starts with a "# exopinf <kind> v<version>" comment
// line, then a header row; numbers are written with 17 significant digits so
// that a write/read cycle is bit-exact.
//
//   snapshot matrix   t,u_1..u_Nu,x_1..x_N          one row per time stamp
//   POD modes         v_1..v_n                      one row per FOM entry
//   singular values   k,sigma
//   operator          one row per ROM equation, columns named after features
//                     (x1, x1*x2, u1, ...); JSON sidecar <path>.json with
//                     n, degrees, n_inputs, layout_version
//   ensemble          provenance,xbar_1..n,ubar_1..Nu,xdot_1..n; the version
//                     line also carries n, degrees, n_inputs and dt

#include <iosfwd>
#include <string>
#include <vector>

#include "exopinf/exact_opinf.hpp"
#include "exopinf/fom.hpp"
#include "exopinf/galerkin.hpp"
#include "exopinf/pod.hpp"

namespace exopinf {

inline constexpr int kFileSchemaVersion = 1;

/// %.17g formatting.
std::string format_double(double value);

void write_snapshots(std::ostream& out, const SnapshotMatrix& snapshots);
SnapshotMatrix read_snapshots(std::istream& in);

void write_pod_modes(std::ostream& out, const PodBasis& basis);
void write_singular_values(std::ostream& out, const Vector& sigma);
Matrix read_pod_modes(std::istream& in);
Vector read_singular_values(std::istream& in);

/// Feature names in layout order, e.g. x1, x1*x2, u1.
std::vector<std::string> feature_names(const MonomialBasis& layout);

void write_operator(std::ostream& csv, std::ostream& sidecar, const AggregatedOperator& op);
AggregatedOperator read_operator(std::istream& csv, std::istream& sidecar);

void write_ensemble(std::ostream& out, const SnapshotEnsemble& ensemble);
/// Rebuilds pairs, P and Xdot. FOM states and the basis are not stored.
SnapshotEnsemble read_ensemble(std::istream& in);

// Path-based conveniences; they throw SchemaError when a file cannot be opened.
void save_snapshots(const std::string& path, const SnapshotMatrix& snapshots);
SnapshotMatrix load_snapshots(const std::string& path);
void save_pod(const std::string& modes_path, const std::string& sigma_path, const PodBasis& basis);
PodBasis load_pod(const std::string& modes_path, const std::string& sigma_path);
/// Writes <path> and <path>.json.
void save_operator(const std::string& path, const AggregatedOperator& op);
AggregatedOperator load_operator(const std::string& path);
void save_ensemble(const std::string& path, const SnapshotEnsemble& ensemble);
SnapshotEnsemble load_ensemble(const std::string& path);

/// Splits one CSV line on commas (no quoting).
std::vector<std::string> split_csv_line(const std::string& line);

}  // namespace exopinf
