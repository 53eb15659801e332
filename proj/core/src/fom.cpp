#include "exopinf/fom.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include <Eigen/LU>
#include <Eigen/SparseCore>
#include <Eigen/SparseLU>

#include "exopinf/errors.hpp"

namespace exopinf {

namespace {

bool all_finite(const Vector& v) { return v.allFinite(); }

// Forward-difference Jacobian of f(., u) at y, as a sparse matrix. With a
// declared band, columns that cannot share a row are perturbed together.
Eigen::SparseMatrix<double> fd_jacobian(const PolynomialFOM& fom, const Vector& y, const Vector& u,
                                        const Vector& f0) {
  const Index n = fom.dimension();
  std::vector<Eigen::Triplet<double>> entries;

  const auto& band = fom.jacobian_band();
  Index colors = n;
  if (band) {
    colors = 2 * band->half_bandwidth + 1;
    if (band->periodic) {
      while (colors <= n / 2 && n % colors != 0) ++colors;
      if (colors > n / 2) colors = n;
    }
    colors = std::min(colors, n);
  }

  auto in_band = [&](Index r, Index c) {
    if (!band || colors == n) return true;
    Index d = std::abs(r - c);
    if (band->periodic) d = std::min(d, n - d);
    return d <= band->half_bandwidth;
  };

  Vector shifted = y;
  Vector steps(n);
  for (Index j = 0; j < n; ++j) steps[j] = 1e-7 * (1.0 + std::abs(y[j]));

  for (Index color = 0; color < colors; ++color) {
    for (Index c = color; c < n; c += colors) shifted[c] += steps[c];
    const Vector diff = fom.eval_rhs(shifted, u) - f0;
    for (Index c = color; c < n; c += colors) {
      shifted[c] = y[c];
      if (colors == n) {
        for (Index r = 0; r < n; ++r) {
          if (diff[r] != 0.0) entries.emplace_back(r, c, diff[r] / steps[c]);
        }
      } else {
        const Index b = band->half_bandwidth;
        for (Index off = -b; off <= b; ++off) {
          Index r = c + off;
          if (band->periodic) {
            r = (r % n + n) % n;
          } else if (r < 0 || r >= n) {
            continue;
          }
          if (in_band(r, c)) entries.emplace_back(r, c, diff[r] / steps[c]);
        }
      }
    }
  }
  Eigen::SparseMatrix<double> jac(n, n);
  jac.setFromTriplets(entries.begin(), entries.end());
  return jac;
}

}  // namespace

PolynomialFOM::PolynomialFOM(Index dimension, DegreeSet degrees, Index n_inputs, RhsFunction rhs)
    : dimension_(dimension), degrees_(std::move(degrees)), n_inputs_(n_inputs), rhs_(std::move(rhs)) {
  if (dimension < 1) throw DimensionError("PolynomialFOM: dimension must be >= 1");
  if (n_inputs < 0) throw DimensionError("PolynomialFOM: input dimension must be >= 0");
  if (!rhs_) throw Error("PolynomialFOM: right-hand side evaluator is required");
  std::sort(degrees_.begin(), degrees_.end());
  if (std::adjacent_find(degrees_.begin(), degrees_.end()) != degrees_.end()) {
    throw DimensionError("PolynomialFOM: duplicate degree");
  }
}

Vector PolynomialFOM::eval_rhs(const Vector& x, const Vector& u) const {
  if (x.size() != dimension_) throw DimensionError("eval_rhs: state has wrong length");
  if (u.size() != n_inputs_) throw DimensionError("eval_rhs: input has wrong length");
  Vector out = rhs_(x, u);
  if (out.size() != dimension_) throw DimensionError("eval_rhs: evaluator returned wrong length");
  if (!all_finite(out)) throw NonFiniteError("eval_rhs: non-finite right-hand side", x);
  return out;
}

PolynomialFOM& PolynomialFOM::set_multilinear(int degree, MultilinearMap map) {
  if (!std::binary_search(degrees_.begin(), degrees_.end(), degree)) {
    throw DimensionError("set_multilinear: degree " + std::to_string(degree) + " not in degree set");
  }
  multilinear_[degree] = std::move(map);
  return *this;
}

PolynomialFOM& PolynomialFOM::set_input_map(InputMap map) {
  input_map_ = std::move(map);
  return *this;
}

PolynomialFOM& PolynomialFOM::set_jacobian_band(JacobianBand band) {
  band_ = band;
  return *this;
}

bool PolynomialFOM::has_structure() const {
  for (int d : degrees_) {
    if (!multilinear_.contains(d)) return false;
  }
  return n_inputs_ == 0 || static_cast<bool>(input_map_);
}

Vector PolynomialFOM::multilinear(int degree, std::span<const Vector> args) const {
  const auto it = multilinear_.find(degree);
  if (it == multilinear_.end()) {
    throw Error("no multilinear map for degree " + std::to_string(degree));
  }
  if (static_cast<int>(args.size()) != degree) throw DimensionError("multilinear: wrong argument count");
  for (const Vector& a : args) {
    if (a.size() != dimension_) throw DimensionError("multilinear: argument has wrong length");
  }
  return it->second(args);
}

Vector PolynomialFOM::input_action(const Vector& u) const {
  if (u.size() != n_inputs_) throw DimensionError("input_action: input has wrong length");
  if (n_inputs_ == 0) return Vector::Zero(dimension_);
  if (!input_map_) throw Error("no input map supplied");
  return input_map_(u);
}

std::string to_string(TimeScheme scheme) {
  return scheme == TimeScheme::explicit_euler ? "explicit_euler" : "implicit_euler";
}

TimeScheme parse_time_scheme(const std::string& text) {
  if (text == "explicit_euler" || text == "explicit") return TimeScheme::explicit_euler;
  if (text == "implicit_euler" || text == "implicit") return TimeScheme::implicit_euler;
  throw SchemaError("unknown time scheme '" + text + "'", 0);
}

void SnapshotMatrix::validate() const {
  const auto cols = static_cast<std::size_t>(states.cols());
  if (times.size() != cols || static_cast<std::size_t>(inputs.cols()) != cols) {
    throw DimensionError("SnapshotMatrix: column counts disagree");
  }
  for (std::size_t k = 1; k < times.size(); ++k) {
    if (!(times[k] > times[k - 1])) throw DimensionError("SnapshotMatrix: times must increase strictly");
  }
}

Vector explicit_euler_step(const PolynomialFOM& fom, const Vector& x, const Vector& u, double dt) {
  if (!(dt > 0.0)) throw Error("explicit_euler_step: dt must be positive");
  Vector out = x + dt * fom.eval_rhs(x, u);
  if (!out.allFinite()) throw NonFiniteError("explicit_euler_step: non-finite state", x);
  return out;
}

Vector implicit_euler_step(const PolynomialFOM& fom, const Vector& x, const Vector& u, double dt,
                           const NewtonOptions& newton) {
  if (!(dt > 0.0)) throw Error("implicit_euler_step: dt must be positive");
  const Index n = fom.dimension();
  const double target = newton.tolerance * (1.0 + x.norm());

  Vector y = x;
  Vector f = fom.eval_rhs(y, u);
  Vector residual = y - x - dt * f;
  double res_norm = residual.norm();

  Eigen::SparseMatrix<double> identity(n, n);
  identity.setIdentity();

  for (int iter = 0; iter < newton.max_iterations; ++iter) {
    if (res_norm < target) return y;

    Eigen::SparseMatrix<double> system = identity - dt * fd_jacobian(fom, y, u, f);
    system.makeCompressed();
    Eigen::SparseLU<Eigen::SparseMatrix<double>> lu;
    lu.compute(system);
    if (lu.info() != Eigen::Success) {
      throw ConvergenceError("implicit_euler_step: singular Newton matrix", res_norm);
    }
    const Vector delta = lu.solve(-residual);

    // backtracking on the residual norm
    double alpha = 1.0;
    for (;;) {
      const Vector trial = y + alpha * delta;
      bool ok = trial.allFinite();
      Vector trial_f;
      Vector trial_res;
      if (ok) {
        try {
          trial_f = fom.eval_rhs(trial, u);
          trial_res = trial - x - dt * trial_f;
        } catch (const NonFiniteError&) {
          ok = false;
        }
      }
      if (ok && (trial_res.norm() < res_norm || alpha < 1.0 / 1024)) {
        y = trial;
        f = std::move(trial_f);
        residual = std::move(trial_res);
        res_norm = residual.norm();
        break;
      }
      if (alpha < 1.0 / 1024) {
        throw ConvergenceError("implicit_euler_step: line search produced non-finite iterate", res_norm);
      }
      alpha *= 0.5;
    }
  }
  if (res_norm < target) return y;
  std::ostringstream os;
  os << "implicit_euler_step: Newton did not converge in " << newton.max_iterations
     << " iterations (residual " << res_norm << ", target " << target << ")";
  throw ConvergenceError(os.str(), res_norm);
}

SnapshotMatrix simulate(const PolynomialFOM& fom, const Vector& x0, const InputSignal& signal, double dt,
                        Index steps, TimeScheme scheme, const NewtonOptions& newton) {
  if (steps < 0) throw Error("simulate: negative step count");
  if (!(dt > 0.0)) throw Error("simulate: dt must be positive");
  if (x0.size() != fom.dimension()) throw DimensionError("simulate: initial state has wrong length");
  if (signal.n_inputs != fom.n_inputs()) throw DimensionError("simulate: signal has wrong input dimension");

  SnapshotMatrix out;
  out.states.resize(fom.dimension(), steps + 1);
  out.inputs.resize(fom.n_inputs(), steps + 1);
  out.times.resize(static_cast<std::size_t>(steps + 1));

  Vector x = x0;
  for (Index k = 0; k <= steps; ++k) {
    const double t = static_cast<double>(k) * dt;
    const Vector u = signal(t);
    if (u.size() != fom.n_inputs()) throw DimensionError("simulate: signal returned wrong length");
    out.states.col(k) = x;
    out.inputs.col(k) = u;
    out.times[static_cast<std::size_t>(k)] = t;
    if (k == steps) break;
    const std::string where = "simulate: step " + std::to_string(k) + ": ";
    try {
      x = scheme == TimeScheme::explicit_euler ? explicit_euler_step(fom, x, u, dt)
                                               : implicit_euler_step(fom, x, u, dt, newton);
    } catch (const NonFiniteError& e) {
      throw NonFiniteError(where + e.what(), e.state());
    } catch (const ConvergenceError& e) {
      throw ConvergenceError(where + e.what(), e.last_residual());
    }
  }
  return out;
}

Vector homogeneous_part(const PolynomialFOM& fom, int degree, const Vector& x) {
  const DegreeSet& degrees = fom.degrees();
  const auto it = std::find(degrees.begin(), degrees.end(), degree);
  if (it == degrees.end()) return Vector::Zero(fom.dimension());
  const auto m = static_cast<Index>(degrees.size());

  // f(t x, 0) = sum_d t^d A_d x^d  at t = 1..m
  Matrix vandermonde(m, m);
  Matrix values(m, fom.dimension());
  const Vector zero_input = Vector::Zero(fom.n_inputs());
  for (Index r = 0; r < m; ++r) {
    const double t = static_cast<double>(r + 1);
    for (Index c = 0; c < m; ++c) vandermonde(r, c) = std::pow(t, degrees[static_cast<std::size_t>(c)]);
    values.row(r) = fom.eval_rhs(t * x, zero_input).transpose();
  }
  const Matrix parts = vandermonde.partialPivLu().solve(values);
  return parts.row(it - degrees.begin()).transpose();
}

Vector polarize(const PolynomialFOM& fom, int degree, std::span<const Vector> args) {
  if (degree < 1 || degree > 8) throw DimensionError("polarize: degree must be in 1..8");
  if (static_cast<int>(args.size()) != degree) throw DimensionError("polarize: wrong argument count");
  Vector sum = Vector::Zero(fom.dimension());
  double factorial = 1.0;
  for (int k = 2; k <= degree; ++k) factorial *= k;
  for (unsigned mask = 1; mask < (1u << degree); ++mask) {
    Vector point = Vector::Zero(fom.dimension());
    int size = 0;
    for (int j = 0; j < degree; ++j) {
      if (mask & (1u << j)) {
        point += args[static_cast<std::size_t>(j)];
        ++size;
      }
    }
    const double sign = ((degree - size) % 2 == 0) ? 1.0 : -1.0;
    sum += sign * homogeneous_part(fom, degree, point);
  }
  return sum / factorial;
}

}  // namespace exopinf
