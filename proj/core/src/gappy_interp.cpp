#include "exopinf/gappy_interp.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include <Eigen/LU>
#include <Eigen/QR>

#include "exopinf/errors.hpp"

namespace exopinf {

namespace {

Matrix univariate_vandermonde(const DegreeSet& degrees, const Vector& nodes) {
  Matrix v(nodes.size(), static_cast<Index>(degrees.size()));
  for (Index r = 0; r < nodes.size(); ++r) {
    for (std::size_t c = 0; c < degrees.size(); ++c) v(r, static_cast<Index>(c)) = std::pow(nodes[r], degrees[c]);
  }
  return v;
}

Vector checked_solve(const Matrix& a, const Vector& b, const char* who) {
  const Eigen::PartialPivLU<Matrix> lu(a);
  const double scale = a.cwiseAbs().maxCoeff();
  const double pivot = lu.matrixLU().diagonal().cwiseAbs().minCoeff();
  if (!(pivot >= 1e-14 * scale)) {
    std::ostringstream os;
    os << who << ": interpolation system is singular (pivot " << pivot << ")";
    throw SingularMatrixError(os.str());
  }
  return lu.solve(b);
}

}  // namespace

Matrix interpolation_matrix(Index n, const DegreeSet& degrees) {
  const MonomialBasis layout(n, degrees, 0);
  Matrix out(layout.n_state_features(), layout.n_state_features());
  const Vector no_input(0);
  Index col = 0;
  for (int degree : layout.degrees()) {
    for (const auto& tuple : enumerate_monomials(n, degree)) {
      Vector node = Vector::Zero(n);
      for (int j : tuple.indices) node[j] += 1.0;
      out.col(col++) = layout.feature_vector(node, no_input);
    }
  }
  return out;
}

Vector gappy_interpolate(const GappyProblem& problem) {
  const Matrix m = interpolation_matrix(problem.n, problem.degrees);
  if (problem.values.size() != m.rows()) throw DimensionError("gappy_interpolate: wrong number of values");
  if (!problem.values.allFinite()) throw Error("gappy_interpolate: non-finite values");
  // p(q_j) = sum_a c_a q_j^a  <=>  M^T c = b
  return checked_solve(m.transpose(), problem.values, "gappy_interpolate");
}

double evaluate_gappy(Index n, const DegreeSet& degrees, const Vector& coefficients, const Vector& x) {
  const MonomialBasis layout(n, degrees, 0);
  return coefficients.dot(layout.feature_vector(x, Vector(0)));
}

std::vector<Vector> lattice_nodes(int l, const Matrix& vertices) {
  if (l < 0) throw DimensionError("lattice_nodes: l must be >= 0");
  const Index m = vertices.cols() - 1;
  if (m < 0) throw DimensionError("lattice_nodes: need at least one vertex");
  if (m > 0) {
    Matrix edges(vertices.rows(), m);
    for (Index k = 0; k < m; ++k) edges.col(k) = vertices.col(k + 1) - vertices.col(0);
    Eigen::ColPivHouseholderQR<Matrix> qr(edges);
    qr.setThreshold(1e-12);
    if (qr.rank() != m) throw DimensionError("lattice_nodes: vertices form a degenerate simplex");
  }

  // weights lambda_0..lambda_m >= 0 with sum l, generated as monomials of
  // degree l in m+1 variables (tuple entry k counts one unit of lambda_k)
  std::vector<Vector> nodes;
  for (const auto& tuple : enumerate_monomials(m + 1, l)) {
    Vector p = Vector::Zero(vertices.rows());
    for (int k : tuple.indices) p += vertices.col(k);
    nodes.push_back(std::move(p));
  }
  return nodes;
}

Vector univariate_specific(const DegreeSet& degrees, int i_star) {
  if (degrees.empty()) throw DimensionError("univariate_specific: empty degree set");
  DegreeSet sorted = degrees;
  std::sort(sorted.begin(), sorted.end());
  if (sorted.front() != i_star) throw DimensionError("univariate_specific: i_star must be the smallest degree");
  DegreeSet shifted;
  Vector nodes(static_cast<Index>(sorted.size()));
  Vector values = Vector::Zero(nodes.size());
  for (std::size_t k = 0; k < sorted.size(); ++k) {
    shifted.push_back(sorted[k] - i_star);
    nodes[static_cast<Index>(k)] = sorted[k];
  }
  values[0] = 1.0;
  return univariate_interpolate(shifted, nodes, values);
}

Vector univariate_interpolate(const DegreeSet& degrees, const Vector& nodes, const Vector& values) {
  if (static_cast<Index>(degrees.size()) != nodes.size() || nodes.size() != values.size()) {
    throw DimensionError("univariate_interpolate: need one node and one value per degree");
  }
  return checked_solve(univariate_vandermonde(degrees, nodes), values, "univariate_interpolate");
}

Vector univariate_interpolate_triangular(const DegreeSet& degrees, const Vector& nodes, const Vector& values) {
  const auto m = static_cast<Index>(degrees.size());
  if (nodes.size() != m || values.size() != m) {
    throw DimensionError("univariate_interpolate_triangular: need one node and one value per degree");
  }
  DegreeSet sorted = degrees;
  std::sort(sorted.begin(), sorted.end());

  // p_k: supported on the k+1 smallest degrees, zero at x_0..x_{k-1}, one at x_k
  Matrix specific = Matrix::Zero(m, m);  // column k = coefficients of p_k over `sorted`
  for (Index k = 0; k < m; ++k) {
    const DegreeSet first(sorted.begin(), sorted.begin() + k + 1);
    Vector target = Vector::Zero(k + 1);
    target[k] = 1.0;
    specific.col(k).head(k + 1) = univariate_interpolate(first, nodes.head(k + 1), target);
  }

  Matrix a = univariate_vandermonde(sorted, nodes) * specific;  // a(j,k) = p_k(x_j)
  // a is unit lower triangular up to round-off; forward substitution
  Vector c(m);
  for (Index j = 0; j < m; ++j) {
    double rhs = values[j];
    for (Index k = 0; k < j; ++k) rhs -= a(j, k) * c[k];
    c[j] = rhs / a(j, j);
  }
  Vector sorted_coeffs = specific * c;

  // back to the caller's degree order
  Vector out(m);
  for (Index k = 0; k < m; ++k) {
    const auto pos = std::find(sorted.begin(), sorted.end(), degrees[static_cast<std::size_t>(k)]) - sorted.begin();
    out[k] = sorted_coeffs[pos];
  }
  return out;
}

double evaluate_univariate(const DegreeSet& degrees, const Vector& coefficients, double x) {
  double sum = 0.0;
  for (std::size_t k = 0; k < degrees.size(); ++k) sum += coefficients[static_cast<Index>(k)] * std::pow(x, degrees[k]);
  return sum;
}

}  // namespace exopinf
