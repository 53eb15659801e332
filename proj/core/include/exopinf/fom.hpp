#pragma once

// Full-order polynomial models  dx/dt = sum_{i in I} A_i x^i + B u.
//
// Inference only ever touches the black-box right-hand side. The structured
// view (symmetric i-linear maps H_i with H_i(x,...,x) = A_i x^i, and u -> B u)
// is optional and exists so that intrusive Galerkin reduction can serve as
// ground truth without forming A_i densely.

#include <functional>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "exopinf/tensor_poly.hpp"

namespace exopinf {

using RhsFunction = std::function<Vector(const Vector& x, const Vector& u)>;
/// Symmetric multilinear map; receives exactly `degree` arguments.
using MultilinearMap = std::function<Vector(std::span<const Vector> args)>;
using InputMap = std::function<Vector(const Vector& u)>;

/// Optional description of the Jacobian sparsity. Entries (r, c) with
/// |r - c| > half_bandwidth are zero, except that `periodic` lets the band wrap.
struct JacobianBand {
  Index half_bandwidth = 0;
  bool periodic = false;
};

class PolynomialFOM {
 public:
  PolynomialFOM(Index dimension, DegreeSet degrees, Index n_inputs, RhsFunction rhs);

  Index dimension() const { return dimension_; }
  const DegreeSet& degrees() const { return degrees_; }
  Index n_inputs() const { return n_inputs_; }

  /// f(x, u). Throws DimensionError on size mismatch and NonFiniteError when
  /// the result contains inf/nan.
  Vector eval_rhs(const Vector& x, const Vector& u) const;

  PolynomialFOM& set_multilinear(int degree, MultilinearMap map);
  PolynomialFOM& set_input_map(InputMap map);
  PolynomialFOM& set_jacobian_band(JacobianBand band);

  /// True when every degree in the set has a multilinear map and, if N_u > 0,
  /// an input map is present.
  bool has_structure() const;
  bool has_multilinear(int degree) const { return multilinear_.contains(degree); }
  /// H_i(v_1, ..., v_i). Throws when no map was supplied for the degree.
  Vector multilinear(int degree, std::span<const Vector> args) const;
  /// B u. Throws when no input map was supplied.
  Vector input_action(const Vector& u) const;
  const std::optional<JacobianBand>& jacobian_band() const { return band_; }

 private:
  Index dimension_;
  DegreeSet degrees_;
  Index n_inputs_;
  RhsFunction rhs_;
  std::map<int, MultilinearMap> multilinear_;
  InputMap input_map_;
  std::optional<JacobianBand> band_;
};

/// Input signal sampled with a zero-order hold at each step's left endpoint.
struct InputSignal {
  Index n_inputs = 0;
  std::function<Vector(double t)> value;

  Vector operator()(double t) const { return value ? value(t) : Vector::Zero(n_inputs); }
  static InputSignal zero(Index n_inputs) { return {n_inputs, nullptr}; }
};

enum class TimeScheme { explicit_euler, implicit_euler };

std::string to_string(TimeScheme scheme);
TimeScheme parse_time_scheme(const std::string& text);

struct NewtonOptions {
  double tolerance = 1e-10;
  int max_iterations = 50;
};

/// Columns of states/inputs correspond to entries of times.
struct SnapshotMatrix {
  Matrix states;   // N x (K+1)
  std::vector<double> times;
  Matrix inputs;   // N_u x (K+1)

  Index n_snapshots() const { return states.cols(); }
  /// Throws DimensionError when column counts disagree or times do not increase.
  void validate() const;
};

Vector explicit_euler_step(const PolynomialFOM& fom, const Vector& x, const Vector& u, double dt);

/// Solves y = x + dt f(y, u) with damped Newton and a forward-difference
/// Jacobian (step 1e-7 (1 + |x_j|)). The Jacobian is colored by the FOM's band
/// when one is declared. Throws ConvergenceError with the last residual.
Vector implicit_euler_step(const PolynomialFOM& fom, const Vector& x, const Vector& u, double dt,
                           const NewtonOptions& newton = {});

/// K uniform steps from x0. Step failures are rethrown with the step index.
SnapshotMatrix simulate(const PolynomialFOM& fom, const Vector& x0, const InputSignal& signal, double dt,
                        Index steps, TimeScheme scheme = TimeScheme::explicit_euler,
                        const NewtonOptions& newton = {});

/// A_i x^i extracted from the black box by evaluating f(t x, 0) at t = 1..|I|
/// and solving the Vandermonde system over the degree set. Zero for i not in I.
Vector homogeneous_part(const PolynomialFOM& fom, int degree, const Vector& x);

/// H_i(v_1..v_i) by the polarization identity over homogeneous_part.
/// Degree must be between 1 and 8.
Vector polarize(const PolynomialFOM& fom, int degree, std::span<const Vector> args);

}  // namespace exopinf
