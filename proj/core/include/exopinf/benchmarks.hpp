#pragma once

// The three one-dimensional PDE test problems, discretized by finite
// differences into polynomial FOMs with structured multilinear maps.
//
//   chafee_infante  x_t = x_xx - x^3 + x on (0,1), x(0,t) = u(t), x_xi(1,t) = 0
//   shallow_ice     x_t = c1 x^2 x_xi + c2 x^5 (x_xi)^2 x_xi on [0,1000], Neumann
//   burgers         x_t = -x x_xi + nu x_xx on (-1,1), periodic

#include <string>
#include <vector>

#include "exopinf/config.hpp"
#include "exopinf/fom.hpp"

namespace exopinf {

enum class RightBoundary {
  neumann,  // ghost value equals the last unknown
  frozen,   // last unknown has zero time derivative
};

struct BenchmarkSpec {
  std::string name;
  Index dimension = 0;
  double domain_length = 0.0;
  double dt_pod = 0.0;
  double horizon = 0.0;
  DegreeSet degrees;
  Index n_inputs = 0;
  Index n_max = 0;
  TimeScheme pod_scheme = TimeScheme::explicit_euler;

  // Model constants; unused ones are ignored by the builder.
  double c1 = 0.0;
  double c2 = 0.0;
  double viscosity = 1.0;
  double input_amplitude = 0.0;
  RightBoundary right_boundary = RightBoundary::neumann;

  double mesh_width() const { return domain_length / static_cast<double>(dimension); }
  /// Number of POD time steps, round(T / dt).
  Index pod_steps() const;
  /// Throws SchemaError when a field is out of range.
  void validate() const;
};

/// Reference setups. Accepts "chafee_infante"/"chafee-infante", etc.
BenchmarkSpec default_spec(const std::string& name);
std::vector<std::string> benchmark_names();

/// Applies overrides from a config file. Recognized keys: benchmark, N, dt, T,
/// n_max, c1, c2, viscosity, u_amplitude, right_boundary.
BenchmarkSpec apply_overrides(BenchmarkSpec spec, const KeyValueConfig& config);

struct Benchmark {
  BenchmarkSpec spec;
  PolynomialFOM fom;
  InputSignal signal;
  Vector x0;
  std::vector<double> grid;
};

Benchmark build_chafee_infante(const BenchmarkSpec& spec = default_spec("chafee_infante"));
Benchmark build_shallow_ice(const BenchmarkSpec& spec = default_spec("shallow_ice"));
Benchmark build_burgers(const BenchmarkSpec& spec = default_spec("burgers"));
/// Dispatches on spec.name.
Benchmark build_benchmark(const BenchmarkSpec& spec);

double shallow_ice_initial_height(double xi);
double burgers_initial_state(double xi);

}  // namespace exopinf
