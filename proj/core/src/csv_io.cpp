#include "exopinf/csv_io.hpp"

#include <cerrno>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <map>
#include <sstream>

#include <json.hpp>

#include "exopinf/errors.hpp"

namespace exopinf {

namespace {

class LineReader {
 public:
  explicit LineReader(std::istream& in) : in_(in) {}

  bool next(std::string& line) {
    while (std::getline(in_, line)) {
      ++number_;
      if (!line.empty() && line.back() == '\r') line.pop_back();
      if (!line.empty()) return true;
    }
    return false;
  }
  std::size_t number() const { return number_; }

  /// Reads "# exopinf <kind> v<version> [key=value ...]" and returns the keys.
  std::map<std::string, std::string> expect_version(const std::string& kind) {
    std::string line;
    if (!next(line)) throw SchemaError("empty " + kind + " file", number_);
    std::istringstream is(line);
    std::string hash, tag, found_kind, version;
    is >> hash >> tag >> found_kind >> version;
    if (hash != "#" || tag != "exopinf" || found_kind != kind) {
      throw SchemaError("expected '# exopinf " + kind + " v" + std::to_string(kFileSchemaVersion) + "'", number_);
    }
    if (version != "v" + std::to_string(kFileSchemaVersion)) {
      throw SchemaError("unsupported " + kind + " schema version '" + version + "'", number_);
    }
    std::map<std::string, std::string> keys;
    std::string token;
    while (is >> token) {
      const auto eq = token.find('=');
      if (eq == std::string::npos) throw SchemaError("malformed header token '" + token + "'", number_);
      keys[token.substr(0, eq)] = token.substr(eq + 1);
    }
    return keys;
  }

  std::vector<std::string> header() {
    std::string line;
    if (!next(line)) throw SchemaError("missing header row", number_ + 1);
    return split_csv_line(line);
  }

  double parse_double(const std::string& token) const {
    const char* begin = token.c_str();
    char* end = nullptr;
    errno = 0;
    const double value = std::strtod(begin, &end);
    if (end == begin || *end != '\0') throw SchemaError("not a number: '" + token + "'", number_);
    return value;
  }

  /// Next data row with exactly `width` numeric fields; false at end of input.
  bool numeric_row(std::size_t width, std::vector<double>& values) {
    std::string line;
    if (!next(line)) return false;
    const auto fields = split_csv_line(line);
    if (fields.size() != width) {
      throw SchemaError("expected " + std::to_string(width) + " columns, found " + std::to_string(fields.size()),
                        number_);
    }
    values.resize(width);
    for (std::size_t k = 0; k < width; ++k) values[k] = parse_double(fields[k]);
    return true;
  }

 private:
  std::istream& in_;
  std::size_t number_ = 0;
};

std::ifstream open_in(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw SchemaError("cannot open '" + path + "' for reading", 0);
  return in;
}

std::ofstream open_out(const std::string& path) {
  std::ofstream out(path);
  if (!out) throw SchemaError("cannot open '" + path + "' for writing", 0);
  return out;
}

void write_row(std::ostream& out, const std::vector<double>& values) {
  for (std::size_t k = 0; k < values.size(); ++k) {
    if (k) out << ',';
    out << format_double(values[k]);
  }
  out << '\n';
}

std::string join(const std::vector<std::string>& names) {
  std::string out;
  for (std::size_t k = 0; k < names.size(); ++k) {
    if (k) out += ',';
    out += names[k];
  }
  return out;
}

Index prefix_count(const std::vector<std::string>& header, const std::string& prefix, std::size_t start) {
  Index count = 0;
  while (start + static_cast<std::size_t>(count) < header.size() &&
         header[start + static_cast<std::size_t>(count)] == prefix + std::to_string(count + 1)) {
    ++count;
  }
  return count;
}

}  // namespace

std::string format_double(double value) {
  char buffer[32];
  std::snprintf(buffer, sizeof buffer, "%.17g", value);
  return buffer;
}

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> fields;
  std::string field;
  std::istringstream is(line);
  while (std::getline(is, field, ',')) {
    const auto first = field.find_first_not_of(" \t");
    const auto last = field.find_last_not_of(" \t");
    fields.push_back(first == std::string::npos ? std::string() : field.substr(first, last - first + 1));
  }
  if (!line.empty() && line.back() == ',') fields.emplace_back();
  return fields;
}

void write_snapshots(std::ostream& out, const SnapshotMatrix& snapshots) {
  snapshots.validate();
  out << "# exopinf snapshot-matrix v" << kFileSchemaVersion << '\n';
  std::vector<std::string> header{"t"};
  for (Index j = 0; j < snapshots.inputs.rows(); ++j) header.push_back("u_" + std::to_string(j + 1));
  for (Index j = 0; j < snapshots.states.rows(); ++j) header.push_back("x_" + std::to_string(j + 1));
  out << join(header) << '\n';
  std::vector<double> row;
  for (Index k = 0; k < snapshots.n_snapshots(); ++k) {
    row.clear();
    row.push_back(snapshots.times[static_cast<std::size_t>(k)]);
    for (Index j = 0; j < snapshots.inputs.rows(); ++j) row.push_back(snapshots.inputs(j, k));
    for (Index j = 0; j < snapshots.states.rows(); ++j) row.push_back(snapshots.states(j, k));
    write_row(out, row);
  }
}

SnapshotMatrix read_snapshots(std::istream& in) {
  LineReader reader(in);
  reader.expect_version("snapshot-matrix");
  const auto header = reader.header();
  if (header.empty() || header[0] != "t") throw SchemaError("first column must be 't'", reader.number());
  const Index n_u = prefix_count(header, "u_", 1);
  const Index n = prefix_count(header, "x_", 1 + static_cast<std::size_t>(n_u));
  if (n < 1 || static_cast<std::size_t>(1 + n_u + n) != header.size()) {
    throw SchemaError("header must be t,u_1..u_Nu,x_1..x_N", reader.number());
  }
  std::vector<std::vector<double>> rows;
  std::vector<double> values;
  while (reader.numeric_row(header.size(), values)) rows.push_back(values);
  if (rows.empty()) throw SchemaError("snapshot file has no data rows", reader.number());

  SnapshotMatrix out;
  const auto k = static_cast<Index>(rows.size());
  out.states.resize(n, k);
  out.inputs.resize(n_u, k);
  out.times.resize(rows.size());
  for (Index c = 0; c < k; ++c) {
    const auto& r = rows[static_cast<std::size_t>(c)];
    out.times[static_cast<std::size_t>(c)] = r[0];
    for (Index j = 0; j < n_u; ++j) out.inputs(j, c) = r[static_cast<std::size_t>(1 + j)];
    for (Index j = 0; j < n; ++j) out.states(j, c) = r[static_cast<std::size_t>(1 + n_u + j)];
  }
  try {
    out.validate();
  } catch (const DimensionError& e) {
    throw SchemaError(e.what(), 0);
  }
  return out;
}

void write_pod_modes(std::ostream& out, const PodBasis& basis) {
  out << "# exopinf pod-modes v" << kFileSchemaVersion << '\n';
  std::vector<std::string> header;
  for (Index j = 0; j < basis.n_modes(); ++j) header.push_back("v_" + std::to_string(j + 1));
  out << join(header) << '\n';
  std::vector<double> row(static_cast<std::size_t>(basis.n_modes()));
  for (Index r = 0; r < basis.full_dimension(); ++r) {
    for (Index c = 0; c < basis.n_modes(); ++c) row[static_cast<std::size_t>(c)] = basis.modes(r, c);
    write_row(out, row);
  }
}

void write_singular_values(std::ostream& out, const Vector& sigma) {
  out << "# exopinf singular-values v" << kFileSchemaVersion << '\n' << "k,sigma\n";
  for (Index k = 0; k < sigma.size(); ++k) out << k + 1 << ',' << format_double(sigma[k]) << '\n';
}

Matrix read_pod_modes(std::istream& in) {
  LineReader reader(in);
  reader.expect_version("pod-modes");
  const auto header = reader.header();
  const Index n = prefix_count(header, "v_", 0);
  if (n < 1 || static_cast<std::size_t>(n) != header.size()) throw SchemaError("header must be v_1..v_n", reader.number());
  std::vector<std::vector<double>> rows;
  std::vector<double> values;
  while (reader.numeric_row(header.size(), values)) rows.push_back(values);
  Matrix modes(static_cast<Index>(rows.size()), n);
  for (std::size_t r = 0; r < rows.size(); ++r) {
    for (Index c = 0; c < n; ++c) modes(static_cast<Index>(r), c) = rows[r][static_cast<std::size_t>(c)];
  }
  return modes;
}

Vector read_singular_values(std::istream& in) {
  LineReader reader(in);
  reader.expect_version("singular-values");
  const auto header = reader.header();
  if (header != std::vector<std::string>{"k", "sigma"}) throw SchemaError("header must be k,sigma", reader.number());
  std::vector<double> sigma;
  std::vector<double> values;
  while (reader.numeric_row(2, values)) sigma.push_back(values[1]);
  return Eigen::Map<const Vector>(sigma.data(), static_cast<Index>(sigma.size()));
}

std::vector<std::string> feature_names(const MonomialBasis& layout) {
  std::vector<std::string> names;
  for (int degree : layout.degrees()) {
    for (const auto& tuple : enumerate_monomials(layout.n(), degree)) {
      if (tuple.indices.empty()) {
        names.emplace_back("1");
        continue;
      }
      std::string name;
      for (std::size_t k = 0; k < tuple.indices.size(); ++k) {
        if (k) name += '*';
        name += "x" + std::to_string(tuple.indices[k] + 1);
      }
      names.push_back(std::move(name));
    }
  }
  for (Index j = 0; j < layout.n_inputs(); ++j) names.push_back("u" + std::to_string(j + 1));
  return names;
}

void write_operator(std::ostream& csv, std::ostream& sidecar, const AggregatedOperator& op) {
  const auto& layout = op.basis();
  nlohmann::json meta;
  meta["format"] = "exopinf-aggregated-operator";
  meta["layout_version"] = kFileSchemaVersion;
  meta["n"] = layout.n();
  meta["degrees"] = layout.degrees();
  meta["n_inputs"] = layout.n_inputs();
  meta["n_features"] = layout.n_features();
  sidecar << meta.dump(2) << '\n';

  csv << "# exopinf aggregated-operator v" << kFileSchemaVersion << '\n';
  csv << join(feature_names(layout)) << '\n';
  std::vector<double> row(static_cast<std::size_t>(layout.n_features()));
  for (Index r = 0; r < op.matrix().rows(); ++r) {
    for (Index c = 0; c < op.matrix().cols(); ++c) row[static_cast<std::size_t>(c)] = op.matrix()(r, c);
    write_row(csv, row);
  }
}

AggregatedOperator read_operator(std::istream& csv, std::istream& sidecar) {
  nlohmann::json meta;
  try {
    sidecar >> meta;
  } catch (const nlohmann::json::exception& e) {
    throw SchemaError(std::string("operator sidecar is not valid JSON: ") + e.what(), 0);
  }
  MonomialBasis layout;
  try {
    if (meta.at("layout_version").get<int>() != kFileSchemaVersion) {
      throw SchemaError("unsupported operator layout version", 0);
    }
    layout = MonomialBasis(meta.at("n").get<Index>(), meta.at("degrees").get<DegreeSet>(),
                           meta.at("n_inputs").get<Index>());
  } catch (const nlohmann::json::exception& e) {
    throw SchemaError(std::string("operator sidecar: ") + e.what(), 0);
  }

  LineReader reader(csv);
  reader.expect_version("aggregated-operator");
  const auto header = reader.header();
  if (header != feature_names(layout)) throw SchemaError("operator header does not match sidecar layout", reader.number());
  Matrix m(layout.n(), layout.n_features());
  std::vector<double> values;
  Index r = 0;
  while (reader.numeric_row(header.size(), values)) {
    if (r >= layout.n()) throw SchemaError("too many operator rows", reader.number());
    for (Index c = 0; c < m.cols(); ++c) m(r, c) = values[static_cast<std::size_t>(c)];
    ++r;
  }
  if (r != layout.n()) throw SchemaError("expected " + std::to_string(layout.n()) + " operator rows", reader.number());
  return {layout, m};
}

void write_ensemble(std::ostream& out, const SnapshotEnsemble& ensemble) {
  const auto& layout = ensemble.basis;
  out << "# exopinf snapshot-ensemble v" << kFileSchemaVersion << " n=" << layout.n()
      << " degrees=" << format_degree_set(layout.degrees()) << " n_inputs=" << layout.n_inputs()
      << " dt=" << format_double(ensemble.dt) << '\n';
  std::vector<std::string> header{"provenance"};
  for (Index j = 0; j < layout.n(); ++j) header.push_back("xbar_" + std::to_string(j + 1));
  for (Index j = 0; j < layout.n_inputs(); ++j) header.push_back("ubar_" + std::to_string(j + 1));
  for (Index j = 0; j < layout.n(); ++j) header.push_back("xdot_" + std::to_string(j + 1));
  out << join(header) << '\n';
  for (Index s = 0; s < ensemble.size(); ++s) {
    const auto& pair = ensemble.pairs[static_cast<std::size_t>(s)];
    out << '"' << pair.provenance.to_string() << '"';
    for (Index j = 0; j < layout.n(); ++j) out << ',' << format_double(pair.state[j]);
    for (Index j = 0; j < layout.n_inputs(); ++j) out << ',' << format_double(pair.input[j]);
    for (Index j = 0; j < layout.n(); ++j) out << ',' << format_double(ensemble.derivatives(j, s));
    out << '\n';
  }
}

SnapshotEnsemble read_ensemble(std::istream& in) {
  LineReader reader(in);
  const auto keys = reader.expect_version("snapshot-ensemble");
  for (const char* key : {"n", "degrees", "n_inputs", "dt"}) {
    if (!keys.contains(key)) throw SchemaError(std::string("ensemble header lacks '") + key + "'", reader.number());
  }
  SnapshotEnsemble ens;
  try {
    ens.basis = MonomialBasis(std::stol(keys.at("n")), parse_degree_set(keys.at("degrees")), std::stol(keys.at("n_inputs")));
    ens.dt = std::stod(keys.at("dt"));
  } catch (const std::logic_error&) {
    throw SchemaError("malformed ensemble header values", reader.number());
  }
  const auto& layout = ens.basis;
  const auto header = reader.header();
  const auto width = static_cast<std::size_t>(1 + 2 * layout.n() + layout.n_inputs());
  if (header.size() != width || header[0] != "provenance") {
    throw SchemaError("ensemble header must be provenance,xbar_*,ubar_*,xdot_*", reader.number());
  }

  std::string line;
  std::vector<Vector> derivs;
  while (reader.next(line)) {
    // the provenance field is quoted because it contains commas
    if (line.empty() || line[0] != '"') throw SchemaError("provenance must be quoted", reader.number());
    const auto close = line.find('"', 1);
    if (close == std::string::npos || close + 1 >= line.size() || line[close + 1] != ',') {
      throw SchemaError("unterminated provenance", reader.number());
    }
    RankEnsuringPair pair;
    try {
      pair.provenance = PairProvenance::parse(line.substr(1, close - 1));
    } catch (const SchemaError& e) {
      throw SchemaError(e.what(), reader.number());
    }
    const auto fields = split_csv_line(line.substr(close + 2));
    if (fields.size() != width - 1) {
      throw SchemaError("expected " + std::to_string(width) + " columns, found " + std::to_string(fields.size() + 1),
                        reader.number());
    }
    pair.state.resize(layout.n());
    pair.input.resize(layout.n_inputs());
    Vector xdot(layout.n());
    std::size_t f = 0;
    for (Index j = 0; j < layout.n(); ++j) pair.state[j] = reader.parse_double(fields[f++]);
    for (Index j = 0; j < layout.n_inputs(); ++j) pair.input[j] = reader.parse_double(fields[f++]);
    for (Index j = 0; j < layout.n(); ++j) xdot[j] = reader.parse_double(fields[f++]);
    ens.pairs.push_back(std::move(pair));
    derivs.push_back(std::move(xdot));
  }

  const auto k = static_cast<Index>(ens.pairs.size());
  ens.features.resize(layout.n_features(), k);
  ens.derivatives.resize(layout.n(), k);
  for (Index s = 0; s < k; ++s) {
    const auto& pair = ens.pairs[static_cast<std::size_t>(s)];
    ens.features.col(s) = layout.feature_vector(pair.state, pair.input);
    ens.derivatives.col(s) = derivs[static_cast<std::size_t>(s)];
  }
  return ens;
}

void save_snapshots(const std::string& path, const SnapshotMatrix& snapshots) {
  auto out = open_out(path);
  write_snapshots(out, snapshots);
}

SnapshotMatrix load_snapshots(const std::string& path) {
  auto in = open_in(path);
  return read_snapshots(in);
}

void save_pod(const std::string& modes_path, const std::string& sigma_path, const PodBasis& basis) {
  auto modes = open_out(modes_path);
  write_pod_modes(modes, basis);
  auto sigma = open_out(sigma_path);
  write_singular_values(sigma, basis.singular_values);
}

PodBasis load_pod(const std::string& modes_path, const std::string& sigma_path) {
  auto modes = open_in(modes_path);
  PodBasis out{read_pod_modes(modes), Vector()};
  if (!sigma_path.empty()) {
    auto sigma = open_in(sigma_path);
    out.singular_values = read_singular_values(sigma);
  }
  return out;
}

void save_operator(const std::string& path, const AggregatedOperator& op) {
  auto csv = open_out(path);
  auto sidecar = open_out(path + ".json");
  write_operator(csv, sidecar, op);
}

AggregatedOperator load_operator(const std::string& path) {
  auto csv = open_in(path);
  auto sidecar = open_in(path + ".json");
  return read_operator(csv, sidecar);
}

void save_ensemble(const std::string& path, const SnapshotEnsemble& ensemble) {
  auto out = open_out(path);
  write_ensemble(out, ensemble);
}

SnapshotEnsemble load_ensemble(const std::string& path) {
  auto in = open_in(path);
  return read_ensemble(in);
}

}  // namespace exopinf
