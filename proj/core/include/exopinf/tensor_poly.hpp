#pragma once

// Compressed monomial indexing.
//
// A state x in R^n has C(n+i-1, i) distinct degree-i monomials. They are
// stored as "compressed" vectors x^i whose entries follow one canonical
// ordering: lexicographic over non-decreasing index tuples. The aggregated
// feature vector stacks the compressed blocks for every degree in the degree
// set (ascending), followed by the raw input u. For n = 2, I = {1,2} and two
// inputs this gives p = [x1, x2, x1^2, x1 x2, x2^2, u1, u2].
//
// Tuple indices are 0-based in code and 1-based in every file format.

#include <compare>
#include <cstdint>
#include <initializer_list>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Core>
#include <Eigen/SparseCore>

namespace exopinf {

using Index = Eigen::Index;
using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

/// Sorted degree set of a polynomial right-hand side.
using DegreeSet = std::vector<int>;

/// Non-decreasing index tuple (j_1 <= ... <= j_i) naming one monomial.
struct MonomialTuple {
  std::vector<int> indices;

  MonomialTuple() = default;
  explicit MonomialTuple(std::vector<int> idx) : indices(std::move(idx)) {}
  MonomialTuple(std::initializer_list<int> idx) : indices(idx) {}

  int degree() const { return static_cast<int>(indices.size()); }
  /// Number of distinct orderings of the tuple (multinomial coefficient).
  std::uint64_t permutation_count() const;
  /// 1-based text form, e.g. "(1,1,2)".
  std::string to_string() const;

  friend bool operator==(const MonomialTuple&, const MonomialTuple&) = default;
  friend auto operator<=>(const MonomialTuple&, const MonomialTuple&) = default;
};

/// C(n+i-1, i). Throws OverflowError instead of wrapping.
Index monomial_count(Index n, int degree);

/// All degree-i monomials of an n-vector in canonical order.
std::vector<MonomialTuple> enumerate_monomials(Index n, int degree);

/// Position of `tuple` in enumerate_monomials(n, tuple.degree()).
Index monomial_rank(const MonomialTuple& tuple, Index n);

/// x^i: products of x over every canonical tuple. Degree 0 gives [1].
Vector compress_state(const Eigen::Ref<const Vector>& x, int degree);

/// x^{i⊗} from x^i: every Kronecker slot receives the value of its sorted
/// monomial. Requires degree >= 1.
Vector kron_expand(const Eigen::Ref<const Vector>& compressed, Index n, int degree);

/// The 0/1 selection maps between Kronecker powers and compressed vectors.
/// The kept Kronecker row for a monomial is the one whose (row-major) index
/// tuple is already non-decreasing.
class SelectionMaps {
 public:
  SelectionMaps(Index n, int degree);

  Index n() const { return n_; }
  int degree() const { return degree_; }
  Index compressed_size() const { return static_cast<Index>(kept_slot_.size()); }
  Index kron_size() const { return static_cast<Index>(monomial_of_slot_.size()); }

  /// Kronecker slot kept for compressed entry m.
  Index kept_slot(Index m) const { return kept_slot_[static_cast<std::size_t>(m)]; }
  /// Compressed entry that Kronecker slot s is folded onto.
  Index monomial_of_slot(Index s) const { return monomial_of_slot_[static_cast<std::size_t>(s)]; }

  Vector compress(const Eigen::Ref<const Vector>& kron) const;
  Vector expand(const Eigen::Ref<const Vector>& compressed) const;

  /// n_i x n^i integer matrix (one 1 per row).
  Eigen::SparseMatrix<int> compress_matrix() const;
  /// n^i x n_i integer matrix (one 1 per row).
  Eigen::SparseMatrix<int> expand_matrix() const;

 private:
  Index n_;
  int degree_;
  std::vector<Index> kept_slot_;
  std::vector<Index> monomial_of_slot_;
};

/// Layout of the aggregated feature vector p(x, u).
class MonomialBasis {
 public:
  MonomialBasis() = default;
  /// `degrees` may be given in any order; duplicates and negatives are rejected.
  MonomialBasis(Index n, DegreeSet degrees, Index n_inputs);

  Index n() const { return n_; }
  const DegreeSet& degrees() const { return degrees_; }
  Index n_inputs() const { return n_inputs_; }
  /// Number of state features, sum of n_i.
  Index n_state_features() const { return n_state_features_; }
  /// Total feature count n_f = n_p + N_u.
  Index n_features() const { return n_state_features_ + n_inputs_; }

  bool has_degree(int degree) const;
  Index block_offset(int degree) const;
  Index block_size(int degree) const;
  Index input_offset() const { return n_state_features_; }

  /// Feature vector: compressed blocks for every degree (ascending), then u.
  Vector feature_vector(const Eigen::Ref<const Vector>& x, const Eigen::Ref<const Vector>& u) const;
  /// Same basis with a different state dimension.
  MonomialBasis with_dimension(Index n) const { return {n, degrees_, n_inputs_}; }

  friend bool operator==(const MonomialBasis& a, const MonomialBasis& b) {
    return a.n_ == b.n_ && a.degrees_ == b.degrees_ && a.n_inputs_ == b.n_inputs_;
  }

 private:
  Index n_ = 0;
  DegreeSet degrees_;
  Index n_inputs_ = 0;
  std::vector<Index> offsets_;
  std::vector<Index> sizes_;
  Index n_state_features_ = 0;
};

/// Text form "{1,2,3}" of a degree set.
std::string format_degree_set(std::span<const int> degrees);
/// Parses "1,2,3", "{1,2,3}" or "1 2 3".
DegreeSet parse_degree_set(const std::string& text);

}  // namespace exopinf
