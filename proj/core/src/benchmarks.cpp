#include "exopinf/benchmarks.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <numbers>

#include "exopinf/errors.hpp"

namespace exopinf {

namespace {

std::string canonical_name(std::string name) {
  std::replace(name.begin(), name.end(), '-', '_');
  return name;
}

// Central first difference with ghost values equal to the boundary unknowns.
void neumann_derivative(const Vector& x, double dxi, Vector& out) {
  const Index n = x.size();
  out.resize(n);
  const double scale = 0.5 / dxi;
  if (n == 1) {
    out[0] = 0.0;
    return;
  }
  out[0] = (x[1] - x[0]) * scale;
  for (Index j = 1; j + 1 < n; ++j) out[j] = (x[j + 1] - x[j - 1]) * scale;
  out[n - 1] = (x[n - 1] - x[n - 2]) * scale;
}

void periodic_derivative(const Vector& x, double dxi, Vector& out) {
  const Index n = x.size();
  out.resize(n);
  const double scale = 0.5 / dxi;
  for (Index j = 0; j < n; ++j) out[j] = (x[(j + 1) % n] - x[(j + n - 1) % n]) * scale;
}

void periodic_laplacian(const Vector& x, double dxi, Vector& out) {
  const Index n = x.size();
  out.resize(n);
  const double scale = 1.0 / (dxi * dxi);
  for (Index j = 0; j < n; ++j) out[j] = (x[(j + 1) % n] - 2.0 * x[j] + x[(j + n - 1) % n]) * scale;
}

// Symmetrization of  coeff * prod_{k not in S} a_k * prod_{k in S} D a_k  over
// every choice of |S| = n_deriv derivative slots.
Vector symmetrized_derivative_product(std::span<const Vector> args, int n_deriv, double coeff,
                                      double dxi) {
  const int degree = static_cast<int>(args.size());
  const Index n = args.front().size();
  std::vector<Vector> derivs(args.size());
  for (std::size_t k = 0; k < args.size(); ++k) neumann_derivative(args[k], dxi, derivs[k]);

  Vector sum = Vector::Zero(n);
  Vector term(n);
  int subsets = 0;
  for (unsigned mask = 0; mask < (1u << degree); ++mask) {
    if (std::popcount(mask) != n_deriv) continue;
    ++subsets;
    term.setOnes();
    for (int k = 0; k < degree; ++k) {
      const auto& factor = (mask & (1u << k)) ? derivs[static_cast<std::size_t>(k)]
                                               : args[static_cast<std::size_t>(k)];
      term.array() *= factor.array();
    }
    sum += term;
  }
  return (coeff / subsets) * sum;
}

std::vector<double> cell_centers(Index n, double dxi, double origin) {
  std::vector<double> grid(static_cast<std::size_t>(n));
  for (Index j = 0; j < n; ++j) grid[static_cast<std::size_t>(j)] = origin + (static_cast<double>(j) + 0.5) * dxi;
  return grid;
}

}  // namespace

Index BenchmarkSpec::pod_steps() const { return static_cast<Index>(std::llround(horizon / dt_pod)); }

void BenchmarkSpec::validate() const {
  if (dimension < 2) throw SchemaError(name + ": N must be >= 2", 0);
  if (!(dt_pod > 0.0)) throw SchemaError(name + ": dt must be positive", 0);
  if (!(horizon > 0.0)) throw SchemaError(name + ": T must be positive", 0);
  if (n_max < 1) throw SchemaError(name + ": n_max must be >= 1", 0);
  if (!(domain_length > 0.0)) throw SchemaError(name + ": domain length must be positive", 0);
}

BenchmarkSpec default_spec(const std::string& raw_name) {
  const std::string name = canonical_name(raw_name);
  BenchmarkSpec spec;
  spec.name = name;
  if (name == "chafee_infante") {
    spec.dimension = 128;
    spec.domain_length = 1.0;  // mesh width 2^-7
    spec.dt_pod = 1e-5;
    spec.horizon = 0.1;
    spec.degrees = {1, 2, 3};
    spec.n_inputs = 1;
    spec.n_max = 14;
    spec.input_amplitude = 10.0;
  } else if (name == "shallow_ice") {
    spec.dimension = 512;
    spec.domain_length = 1000.0;  // mesh width 1000 / 2^9
    spec.dt_pod = 1e-3;
    spec.horizon = 2.0;
    spec.degrees = {3, 8};
    spec.n_inputs = 0;
    spec.n_max = 7;
    spec.pod_scheme = TimeScheme::implicit_euler;
    spec.c1 = 8.9e-13;
    spec.c2 = 2.8e7;
  } else if (name == "burgers") {
    spec.dimension = 128;
    spec.domain_length = 2.0;  // mesh width 2^-6
    spec.dt_pod = 1e-4;
    spec.horizon = 1.0;
    spec.degrees = {1, 2};
    spec.n_inputs = 0;
    spec.n_max = 10;
    spec.viscosity = 1.0;
  } else {
    throw SchemaError("unknown benchmark '" + raw_name + "'", 0);
  }
  return spec;
}

std::vector<std::string> benchmark_names() { return {"chafee_infante", "shallow_ice", "burgers"}; }

BenchmarkSpec apply_overrides(BenchmarkSpec spec, const KeyValueConfig& config) {
  config.require_known_keys("benchmark,N,dt,T,n_max,c1,c2,viscosity,u_amplitude,right_boundary");
  if (auto name = config.get_string("benchmark"); name && canonical_name(*name) != spec.name) {
    spec = default_spec(*name);
  }
  if (auto v = config.get_integer("N")) spec.dimension = static_cast<Index>(*v);
  if (auto v = config.get_double("dt")) spec.dt_pod = *v;
  if (auto v = config.get_double("T")) spec.horizon = *v;
  if (auto v = config.get_integer("n_max")) spec.n_max = static_cast<Index>(*v);
  if (auto v = config.get_double("c1")) spec.c1 = *v;
  if (auto v = config.get_double("c2")) spec.c2 = *v;
  if (auto v = config.get_double("viscosity")) spec.viscosity = *v;
  if (auto v = config.get_double("u_amplitude")) spec.input_amplitude = *v;
  if (auto v = config.get_string("right_boundary")) {
    if (*v == "neumann") {
      spec.right_boundary = RightBoundary::neumann;
    } else if (*v == "frozen") {
      spec.right_boundary = RightBoundary::frozen;
    } else {
      throw SchemaError("right_boundary must be 'neumann' or 'frozen'", 0);
    }
  }
  spec.validate();
  return spec;
}

Benchmark build_chafee_infante(const BenchmarkSpec& spec) {
  spec.validate();
  const Index n = spec.dimension;
  const double dxi = spec.mesh_width();
  const double inv_h2 = 1.0 / (dxi * dxi);
  const bool frozen = spec.right_boundary == RightBoundary::frozen;

  // Dirichlet value u enters node 0's stencil; ghost x_{N+1} = x_N on the right.
  auto diffusion_plus_identity = [n, inv_h2, frozen](const Vector& x) {
    Vector out(n);
    for (Index j = 0; j < n; ++j) {
      const double left = j > 0 ? x[j - 1] : 0.0;
      const double right = j + 1 < n ? x[j + 1] : x[j];
      out[j] = (left - 2.0 * x[j] + right) * inv_h2 + x[j];
    }
    if (frozen) out[n - 1] = 0.0;
    return out;
  };
  auto input_action = [n, inv_h2](const Vector& u) {
    Vector out = Vector::Zero(n);
    out[0] = u[0] * inv_h2;
    return out;
  };

  auto rhs = [=](const Vector& x, const Vector& u) {
    Vector out = diffusion_plus_identity(x);
    out.array() -= x.array().cube();
    out[0] += u[0] * inv_h2;
    if (frozen) out[n - 1] = 0.0;
    return out;
  };

  PolynomialFOM fom(n, spec.degrees, 1, rhs);
  fom.set_multilinear(1, [=](std::span<const Vector> a) { return diffusion_plus_identity(a[0]); });
  fom.set_multilinear(2, [n](std::span<const Vector>) -> Vector { return Vector::Zero(n); });
  fom.set_multilinear(3, [n, frozen](std::span<const Vector> a) -> Vector {
    Vector out = -(a[0].array() * a[1].array() * a[2].array()).matrix();
    if (frozen) out[n - 1] = 0.0;
    return out;
  });
  fom.set_input_map(input_action);
  fom.set_jacobian_band({1, false});

  const double amplitude = spec.input_amplitude;
  InputSignal signal{1, [amplitude](double t) {
                       Vector u(1);
                       u[0] = amplitude * (std::sin(std::numbers::pi * t) + 1.0);
                       return u;
                     }};
  return {spec, std::move(fom), std::move(signal), Vector::Zero(n), cell_centers(n, dxi, 0.0)};
}

double shallow_ice_initial_height(double xi) {
  const double s = xi / 2000.0;
  return 1e-2 + 630.0 * std::pow(s + 0.25, 4) * std::pow(s - 0.75, 4);
}

Benchmark build_shallow_ice(const BenchmarkSpec& spec) {
  spec.validate();
  const Index n = spec.dimension;
  const double dxi = spec.mesh_width();
  const double c1 = spec.c1;
  const double c2 = spec.c2;

  auto rhs = [=](const Vector& x, const Vector&) {
    Vector dx;
    neumann_derivative(x, dxi, dx);
    const auto xa = x.array();
    const auto da = dx.array();
    return Vector(c1 * xa.square() * da + c2 * xa.pow(5) * da.cube());
  };

  PolynomialFOM fom(n, spec.degrees, 0, rhs);
  fom.set_multilinear(3, [=](std::span<const Vector> a) { return symmetrized_derivative_product(a, 1, c1, dxi); });
  fom.set_multilinear(8, [=](std::span<const Vector> a) { return symmetrized_derivative_product(a, 3, c2, dxi); });
  fom.set_jacobian_band({1, false});

  auto grid = cell_centers(n, dxi, 0.0);
  Vector x0(n);
  for (Index j = 0; j < n; ++j) x0[j] = shallow_ice_initial_height(grid[static_cast<std::size_t>(j)]);
  return {spec, std::move(fom), InputSignal::zero(0), std::move(x0), std::move(grid)};
}

double burgers_initial_state(double xi) { return -std::sin(std::numbers::pi * xi / 2.0); }

Benchmark build_burgers(const BenchmarkSpec& spec) {
  spec.validate();
  const Index n = spec.dimension;
  const double dxi = spec.mesh_width();
  const double nu = spec.viscosity;

  auto diffusion = [=](const Vector& x) {
    Vector out;
    periodic_laplacian(x, dxi, out);
    return Vector(nu * out);
  };
  // split skew form: -(1/3) (D(a b) + (a Db + b Da) / 2)
  auto convection = [=](const Vector& a, const Vector& b) {
    Vector da, db, dab;
    periodic_derivative(a, dxi, da);
    periodic_derivative(b, dxi, db);
    periodic_derivative(Vector(a.array() * b.array()), dxi, dab);
    return Vector(-(1.0 / 3.0) * (dab.array() + 0.5 * (a.array() * db.array() + b.array() * da.array())));
  };

  auto rhs = [=](const Vector& x, const Vector&) { return Vector(diffusion(x) + convection(x, x)); };

  PolynomialFOM fom(n, spec.degrees, 0, rhs);
  fom.set_multilinear(1, [=](std::span<const Vector> a) { return diffusion(a[0]); });
  fom.set_multilinear(2, [=](std::span<const Vector> a) { return convection(a[0], a[1]); });
  fom.set_jacobian_band({1, true});

  std::vector<double> grid(static_cast<std::size_t>(n));
  Vector x0(n);
  for (Index j = 0; j < n; ++j) {
    grid[static_cast<std::size_t>(j)] = -1.0 + static_cast<double>(j) * dxi;
    x0[j] = burgers_initial_state(grid[static_cast<std::size_t>(j)]);
  }
  return {spec, std::move(fom), InputSignal::zero(0), std::move(x0), std::move(grid)};
}

Benchmark build_benchmark(const BenchmarkSpec& spec) {
  if (spec.name == "chafee_infante") return build_chafee_infante(spec);
  if (spec.name == "shallow_ice") return build_shallow_ice(spec);
  if (spec.name == "burgers") return build_burgers(spec);
  throw SchemaError("unknown benchmark '" + spec.name + "'", 0);
}

}  // namespace exopinf
