#pragma once

// Gappy multivariate polynomial interpolation on unit-vector lattices.
//
// A gappy polynomial on R^n uses only monomials whose total degree lies in a
// degree set I (gaps allowed). Interpolating at the nodes "all sums of i unit
// vectors, i in I" is uniquely solvable; its matrix is exactly the state block
// of the exact-inference feature matrix.

#include <vector>

#include "exopinf/tensor_poly.hpp"

namespace exopinf {

struct GappyProblem {
  Index n = 1;
  DegreeSet degrees;
  /// Interpolation values, one per node of rank_ensuring_states(n, degrees).
  Vector values;
};

/// n_p x n_p matrix whose column j holds the compressed monomials of node j.
Matrix interpolation_matrix(Index n, const DegreeSet& degrees);

/// Coefficients in canonical monomial order. Throws SingularMatrixError if the
/// system turns out singular.
Vector gappy_interpolate(const GappyProblem& problem);

/// Value of the gappy polynomial with coefficients c at x.
double evaluate_gappy(Index n, const DegreeSet& degrees, const Vector& coefficients, const Vector& x);

/// Points sum_k lambda_k X_k with non-negative integers lambda summing to l.
/// `vertices` are the m+1 columns X_0..X_m; throws DimensionError when they
/// do not span an m-dimensional affine hull.
std::vector<Vector> lattice_nodes(int l, const Matrix& vertices);

/// Univariate gappy polynomial p supported on {i - i_star : i in I} with
/// p(i_star) = 1 and p(i) = 0 for the other i in I. Coefficients follow the
/// ascending shifted degrees. Requires i_star = min(I).
Vector univariate_specific(const DegreeSet& degrees, int i_star);

/// Direct solve of the univariate gappy problem p(x_j) = f_j, p supported on
/// I (ascending coefficients). Nodes must be pairwise distinct.
Vector univariate_interpolate(const DegreeSet& degrees, const Vector& nodes, const Vector& values);

/// Same problem assembled from specific interpolants: with I_k the k smallest
/// degrees, p_k in span(I_k) vanishes at x_1..x_{k-1} and is 1 at x_k; the
/// lower-triangular unit-diagonal system A c = f with A_jk = p_k(x_j) gives
/// p = sum_k c_k p_k.
Vector univariate_interpolate_triangular(const DegreeSet& degrees, const Vector& nodes, const Vector& values);

double evaluate_univariate(const DegreeSet& degrees, const Vector& coefficients, double x);

}  // namespace exopinf
