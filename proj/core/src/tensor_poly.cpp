#include "exopinf/tensor_poly.hpp"

#include <algorithm>
#include <numeric>
#include <sstream>

#include "exopinf/errors.hpp"

namespace exopinf {

namespace {

// Checked C(n+i-1, i) in 64 bits; gcd reduction keeps every intermediate equal
// to a binomial coefficient, so overflow is reported only when the result
// itself does not fit.
std::uint64_t checked_multiset_count(std::uint64_t n, std::uint64_t degree) {
  std::uint64_t result = 1;
  for (std::uint64_t k = 1; k <= degree; ++k) {
    std::uint64_t num = n - 1 + k;
    std::uint64_t den = k;
    const std::uint64_t g = std::gcd(result, den);
    result /= g;
    den /= g;
    num /= den;  // exact: den is coprime to result and divides result*num
    std::uint64_t next = 0;
    if (__builtin_mul_overflow(result, num, &next)) {
      throw OverflowError("monomial_count overflows 64 bits for n=" + std::to_string(n) +
                          ", degree=" + std::to_string(degree));
    }
    result = next;
  }
  return result;
}

void append_products(const Eigen::Ref<const Vector>& x, int remaining, Index start, double prefix,
                     double*& out) {
  if (remaining == 0) {
    *out++ = prefix;
    return;
  }
  for (Index j = start; j < x.size(); ++j) append_products(x, remaining - 1, j, prefix * x[j], out);
}

}  // namespace

std::uint64_t MonomialTuple::permutation_count() const {
  std::uint64_t count = 1;
  std::uint64_t placed = 0;
  std::size_t k = 0;
  while (k < indices.size()) {
    std::size_t run = 1;
    while (k + run < indices.size() && indices[k + run] == indices[k]) ++run;
    // multiply by C(placed + run, run)
    for (std::size_t r = 1; r <= run; ++r) {
      count = count * (placed + r) / r;
    }
    placed += run;
    k += run;
  }
  return count;
}

std::string MonomialTuple::to_string() const {
  std::ostringstream os;
  os << '(';
  for (std::size_t k = 0; k < indices.size(); ++k) {
    if (k) os << ',';
    os << indices[k] + 1;
  }
  os << ')';
  return os.str();
}

Index monomial_count(Index n, int degree) {
  if (n < 1) throw DimensionError("monomial_count: n must be >= 1");
  if (degree < 0) throw DimensionError("monomial_count: degree must be >= 0");
  const std::uint64_t count =
      checked_multiset_count(static_cast<std::uint64_t>(n), static_cast<std::uint64_t>(degree));
  if (count > static_cast<std::uint64_t>(std::numeric_limits<Index>::max())) {
    throw OverflowError("monomial_count exceeds index range");
  }
  return static_cast<Index>(count);
}

std::vector<MonomialTuple> enumerate_monomials(Index n, int degree) {
  const Index count = monomial_count(n, degree);
  std::vector<MonomialTuple> out;
  out.reserve(static_cast<std::size_t>(count));
  std::vector<int> idx(static_cast<std::size_t>(degree), 0);
  for (;;) {
    out.emplace_back(idx);
    // odometer over non-decreasing tuples
    int pos = degree - 1;
    while (pos >= 0 && idx[static_cast<std::size_t>(pos)] == n - 1) --pos;
    if (pos < 0) break;
    const int v = idx[static_cast<std::size_t>(pos)] + 1;
    for (int p = pos; p < degree; ++p) idx[static_cast<std::size_t>(p)] = v;
  }
  return out;
}

Index monomial_rank(const MonomialTuple& tuple, Index n) {
  const int degree = tuple.degree();
  Index rank = 0;
  int low = 0;
  for (int p = 0; p < degree; ++p) {
    const int value = tuple.indices[static_cast<std::size_t>(p)];
    if (value < low || value >= n) throw DimensionError("monomial_rank: tuple not canonical for n");
    const int tail = degree - p - 1;
    // tuples that agree so far but place a smaller value at position p
    for (int v = low; v < value; ++v) rank += monomial_count(n - v, tail);
    low = value;
  }
  return rank;
}

Vector compress_state(const Eigen::Ref<const Vector>& x, int degree) {
  if (x.size() < 1) throw DimensionError("compress_state: empty state");
  Vector out(monomial_count(x.size(), degree));
  double* cursor = out.data();
  append_products(x, degree, 0, 1.0, cursor);
  return out;
}

Vector kron_expand(const Eigen::Ref<const Vector>& compressed, Index n, int degree) {
  if (degree < 1) throw DimensionError("kron_expand: degree must be >= 1");
  const SelectionMaps maps(n, degree);
  if (compressed.size() != maps.compressed_size()) {
    throw DimensionError("kron_expand: compressed vector has wrong length");
  }
  return maps.expand(compressed);
}

SelectionMaps::SelectionMaps(Index n, int degree) : n_(n), degree_(degree) {
  if (degree < 1) throw DimensionError("SelectionMaps: degree must be >= 1");
  const Index n_i = monomial_count(n, degree);
  Index kron = 1;
  for (int k = 0; k < degree; ++k) {
    if (__builtin_mul_overflow(kron, n, &kron)) throw OverflowError("SelectionMaps: n^i overflows");
  }
  kept_slot_.assign(static_cast<std::size_t>(n_i), 0);
  monomial_of_slot_.assign(static_cast<std::size_t>(kron), 0);

  std::vector<int> digits(static_cast<std::size_t>(degree), 0);
  std::vector<int> sorted(digits.size());
  for (Index slot = 0; slot < kron; ++slot) {
    // row-major digits of slot: first factor is the most significant
    Index rest = slot;
    for (int p = degree - 1; p >= 0; --p) {
      digits[static_cast<std::size_t>(p)] = static_cast<int>(rest % n);
      rest /= n;
    }
    sorted = digits;
    std::sort(sorted.begin(), sorted.end());
    const Index m = monomial_rank(MonomialTuple(sorted), n);
    monomial_of_slot_[static_cast<std::size_t>(slot)] = m;
    if (sorted == digits) kept_slot_[static_cast<std::size_t>(m)] = slot;
  }
}

Vector SelectionMaps::compress(const Eigen::Ref<const Vector>& kron) const {
  if (kron.size() != kron_size()) throw DimensionError("SelectionMaps::compress: wrong length");
  Vector out(compressed_size());
  for (Index m = 0; m < out.size(); ++m) out[m] = kron[kept_slot(m)];
  return out;
}

Vector SelectionMaps::expand(const Eigen::Ref<const Vector>& compressed) const {
  if (compressed.size() != compressed_size()) throw DimensionError("SelectionMaps::expand: wrong length");
  Vector out(kron_size());
  for (Index s = 0; s < out.size(); ++s) out[s] = compressed[monomial_of_slot(s)];
  return out;
}

Eigen::SparseMatrix<int> SelectionMaps::compress_matrix() const {
  std::vector<Eigen::Triplet<int>> entries;
  entries.reserve(kept_slot_.size());
  for (Index m = 0; m < compressed_size(); ++m) entries.emplace_back(m, kept_slot(m), 1);
  Eigen::SparseMatrix<int> out(compressed_size(), kron_size());
  out.setFromTriplets(entries.begin(), entries.end());
  return out;
}

Eigen::SparseMatrix<int> SelectionMaps::expand_matrix() const {
  std::vector<Eigen::Triplet<int>> entries;
  entries.reserve(monomial_of_slot_.size());
  for (Index s = 0; s < kron_size(); ++s) entries.emplace_back(s, monomial_of_slot(s), 1);
  Eigen::SparseMatrix<int> out(kron_size(), compressed_size());
  out.setFromTriplets(entries.begin(), entries.end());
  return out;
}

MonomialBasis::MonomialBasis(Index n, DegreeSet degrees, Index n_inputs)
    : n_(n), degrees_(std::move(degrees)), n_inputs_(n_inputs) {
  if (n < 1) throw DimensionError("MonomialBasis: n must be >= 1");
  if (n_inputs < 0) throw DimensionError("MonomialBasis: input dimension must be >= 0");
  std::sort(degrees_.begin(), degrees_.end());
  if (std::adjacent_find(degrees_.begin(), degrees_.end()) != degrees_.end()) {
    throw DimensionError("MonomialBasis: duplicate degree in " + format_degree_set(degrees_));
  }
  if (!degrees_.empty() && degrees_.front() < 0) throw DimensionError("MonomialBasis: negative degree");
  for (int d : degrees_) {
    offsets_.push_back(n_state_features_);
    sizes_.push_back(monomial_count(n, d));
    n_state_features_ += sizes_.back();
  }
}

bool MonomialBasis::has_degree(int degree) const {
  return std::binary_search(degrees_.begin(), degrees_.end(), degree);
}

Index MonomialBasis::block_offset(int degree) const {
  const auto it = std::lower_bound(degrees_.begin(), degrees_.end(), degree);
  if (it == degrees_.end() || *it != degree) {
    throw DimensionError("degree " + std::to_string(degree) + " not in " + format_degree_set(degrees_));
  }
  return offsets_[static_cast<std::size_t>(it - degrees_.begin())];
}

Index MonomialBasis::block_size(int degree) const {
  const auto it = std::lower_bound(degrees_.begin(), degrees_.end(), degree);
  if (it == degrees_.end() || *it != degree) {
    throw DimensionError("degree " + std::to_string(degree) + " not in " + format_degree_set(degrees_));
  }
  return sizes_[static_cast<std::size_t>(it - degrees_.begin())];
}

Vector MonomialBasis::feature_vector(const Eigen::Ref<const Vector>& x,
                                     const Eigen::Ref<const Vector>& u) const {
  if (x.size() != n_) {
    throw DimensionError("feature_vector: state has length " + std::to_string(x.size()) + ", expected " +
                         std::to_string(n_));
  }
  if (u.size() != n_inputs_) {
    throw DimensionError("feature_vector: input has length " + std::to_string(u.size()) + ", expected " +
                         std::to_string(n_inputs_));
  }
  Vector out(n_features());
  for (std::size_t b = 0; b < degrees_.size(); ++b) {
    out.segment(offsets_[b], sizes_[b]) = compress_state(x, degrees_[b]);
  }
  out.tail(n_inputs_) = u;
  return out;
}

std::string format_degree_set(std::span<const int> degrees) {
  std::ostringstream os;
  os << '{';
  for (std::size_t k = 0; k < degrees.size(); ++k) {
    if (k) os << ',';
    os << degrees[k];
  }
  os << '}';
  return os.str();
}

DegreeSet parse_degree_set(const std::string& text) {
  std::string cleaned;
  for (char c : text) cleaned += (c == '{' || c == '}' || c == ',' || c == ';') ? ' ' : c;
  std::istringstream is(cleaned);
  DegreeSet out;
  std::string token;
  while (is >> token) {
    std::size_t used = 0;
    int value = 0;
    try {
      value = std::stoi(token, &used);
    } catch (const std::exception&) {
      throw SchemaError("invalid degree '" + token + "'", 0);
    }
    if (used != token.size() || value < 0) throw SchemaError("invalid degree '" + token + "'", 0);
    out.push_back(value);
  }
  std::sort(out.begin(), out.end());
  if (std::adjacent_find(out.begin(), out.end()) != out.end()) {
    throw SchemaError("duplicate degree in '" + text + "'", 0);
  }
  return out;
}

}  // namespace exopinf
