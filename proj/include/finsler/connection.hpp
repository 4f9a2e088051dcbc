#pragma once

// Geodesic spray, nonlinear connection, horizontal Cartan coefficients and
// the fixed-step integrators built on them.

#include <array>
#include <cmath>
#include <string>
#include <vector>

#include "finsler/errors.hpp"
#include "finsler/kernel.hpp"
#include "finsler/local_geometry.hpp"
#include "finsler/tensor.hpp"

namespace finsler {

struct SprayData {
  Vector G;  // G^i
  Matrix N;  // N^i_j = dG^i/dy^j
};

struct CartanCoefficients {
  Tensor3 gamma;  // Gamma*^i_jk, symmetric in (j, k)
};

inline SprayData spray(const MetricKernel& kernel, const ReferenceElement& z) {
  LocalGeometry geo = local_geometry(kernel, z, 3);
  return {std::move(geo.G), std::move(geo.N)};
}

inline CartanCoefficients cartan_coefficients(const MetricKernel& kernel, const ReferenceElement& z) {
  return {local_geometry(kernel, z, 3).gamma};
}

/// A base vector field known to first order at a point: value Y^i and
/// jacobian(i, j) = dY^i/dx^j.
struct VectorFieldJet {
  Vector value;
  Matrix jacobian;
};

/// Gamma*^i_jk X^j Y^k.
inline Vector contract_gamma(const Tensor3& gamma, const Vector& X, const Vector& Y) {
  const int n = gamma.dim();
  Vector out = Vector::Zero(n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      for (int k = 0; k < n; ++k) out[i] += gamma(i, j, k) * X[j] * Y[k];
  return out;
}

/// Horizontal covariant derivative (nabla_{hX} Y)^i = X^j dY^i/dx^j + Gamma*^i_jk X^j Y^k,
/// coefficients taken at z.
inline Vector covariant_derivative_h(const MetricKernel& kernel, const ReferenceElement& z, const Vector& X,
                                     const VectorFieldJet& Y) {
  const Tensor3 gamma = cartan_coefficients(kernel, z).gamma;
  return Y.jacobian * X + contract_gamma(gamma, X, Y.value);
}

/// Discretized geodesic: nodes t_i = i * t_end / steps.
struct GeodesicPath {
  double t_end = 0.0;
  int steps = 0;
  std::vector<double> t;
  std::vector<Vector> x;
  std::vector<Vector> y;  // velocity dx/dt
};

namespace detail {

inline Vector geodesic_acceleration(const MetricKernel& kernel, const Vector& x, const Vector& y, double t) {
  if (!kernel.contains(x, y)) throw DomainExitError("geodesic left the kernel domain", t);
  return -2.0 * local_geometry(kernel, ReferenceElement(x, y), 2).G;
}

inline void check_steps(int steps) {
  if (steps < 16) throw std::invalid_argument("integrator: steps must be >= 16");
}

}  // namespace detail

/// Solves x'' = -2 G(x, x') with classical RK4 on a fixed grid.
inline GeodesicPath integrate_geodesic(const MetricKernel& kernel, const Vector& x0, const Vector& y0, double t_end,
                                       int steps) {
  detail::check_steps(steps);
  if (!kernel.contains(x0, y0)) throw DomainError("integrate_geodesic: initial element outside kernel domain");
  GeodesicPath path{t_end, steps, {}, {}, {}};
  const double h = t_end / steps;
  Vector x = x0, y = y0;
  path.t.push_back(0.0);
  path.x.push_back(x);
  path.y.push_back(y);
  for (int s = 0; s < steps; ++s) {
    const double t = s * h;
    const Vector k1x = y;
    const Vector k1y = detail::geodesic_acceleration(kernel, x, y, t);
    const Vector k2x = y + 0.5 * h * k1y;
    const Vector k2y = detail::geodesic_acceleration(kernel, x + 0.5 * h * k1x, k2x, t + 0.5 * h);
    const Vector k3x = y + 0.5 * h * k2y;
    const Vector k3y = detail::geodesic_acceleration(kernel, x + 0.5 * h * k2x, k3x, t + 0.5 * h);
    const Vector k4x = y + h * k3y;
    const Vector k4y = detail::geodesic_acceleration(kernel, x + h * k3x, k4x, t + h);
    x += h / 6.0 * (k1x + 2.0 * k2x + 2.0 * k3x + k4x);
    y += h / 6.0 * (k1y + 2.0 * k2y + 2.0 * k3y + k4y);
    if (!kernel.contains(x, y)) throw DomainExitError("geodesic left the kernel domain", t + h);
    path.t.push_back((s + 1) * h);
    path.x.push_back(x);
    path.y.push_back(y);
  }
  return path;
}

/// Solves V' + Gamma*(x, x')(x', V) = 0 along `path`, reference direction x'(t).
/// The geodesic is re-integrated jointly with V from the path's initial data,
/// on the same grid, so midpoint stages see consistent positions. Returns V at
/// every node of the path.
inline std::vector<Vector> parallel_transport(const MetricKernel& kernel, const GeodesicPath& path, const Vector& V0) {
  detail::check_steps(path.steps);
  if (path.x.empty()) throw std::invalid_argument("parallel_transport: empty path");
  const int n = kernel.dim();
  if (V0.size() != n) throw DimensionError("parallel_transport: V0 dimension differs from kernel");

  auto rhs = [&](const Vector& x, const Vector& y, const Vector& V, double t, Vector& ax, Vector& aV) {
    if (!kernel.contains(x, y)) throw DomainExitError("transport path left the kernel domain", t);
    const LocalGeometry geo = local_geometry(kernel, ReferenceElement(x, y), 3);
    ax = -2.0 * geo.G;
    aV = -contract_gamma(geo.gamma, y, V);
  };

  const double h = path.t_end / path.steps;
  Vector x = path.x.front(), y = path.y.front(), V = V0;
  std::vector<Vector> out{V};
  Vector a1, b1, a2, b2, a3, b3, a4, b4;
  for (int s = 0; s < path.steps; ++s) {
    const double t = s * h;
    rhs(x, y, V, t, a1, b1);
    const Vector y2 = y + 0.5 * h * a1;
    rhs(x + 0.5 * h * y, y2, V + 0.5 * h * b1, t + 0.5 * h, a2, b2);
    const Vector y3 = y + 0.5 * h * a2;
    rhs(x + 0.5 * h * y2, y3, V + 0.5 * h * b2, t + 0.5 * h, a3, b3);
    const Vector y4 = y + h * a3;
    rhs(x + h * y3, y4, V + h * b3, t + h, a4, b4);
    x += h / 6.0 * (y + 2.0 * y2 + 2.0 * y3 + y4);
    y += h / 6.0 * (a1 + 2.0 * a2 + 2.0 * a3 + a4);
    V += h / 6.0 * (b1 + 2.0 * b2 + 2.0 * b3 + b4);
    out.push_back(V);
  }
  return out;
}

}  // namespace finsler
