#pragma once

// hh-curvature of the Cartan connection and the quantities built on it.
//
// Index convention: (R(X, Y) Z)^i = R^i_jkl Z^j X^k Y^l with
//   R^i_jkl = delta_k Gamma^i_jl - delta_l Gamma^i_jk
//           + Gamma^m_jl Gamma^i_mk - Gamma^m_jk Gamma^i_ml + C^i_jm Omega^m_kl,
//   Omega^m_kl = delta_k N^m_l - delta_l N^m_k,
// so that g(R(X, Y) Y, X) > 0 on the round sphere. Flag curvature uses the
// connection-free spray curvature R^i_k, which equals R^i_jkl y^j y^l.

#include <cmath>
#include <vector>

#include "finsler/errors.hpp"
#include "finsler/kernel.hpp"
#include "finsler/local_geometry.hpp"
#include "finsler/metric.hpp"

namespace finsler {

inline constexpr double kDegenerateFlagThreshold = 1e-12;
inline constexpr double kFrameTolerance = 1e-8;

struct CurvatureOperator {
  Tensor4 R;       // R^i_jkl
  Matrix R_spray;  // R^i_k
};

inline CurvatureOperator hh_curvature(const MetricKernel& kernel, const ReferenceElement& z) {
  LocalGeometry geo = local_geometry(kernel, z, 4);
  return {std::move(geo.R), std::move(geo.R_spray)};
}

inline Matrix riemann_spray(const MetricKernel& kernel, const ReferenceElement& z) {
  return local_geometry(kernel, z, 4).R_spray;
}

/// R(X, Y) Z.
inline Vector apply(const Tensor4& R, const Vector& X, const Vector& Y, const Vector& Z) {
  const int n = R.dim();
  Vector out = Vector::Zero(n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      if (Z[j] == 0.0) continue;
      for (int k = 0; k < n; ++k)
        for (int l = 0; l < n; ++l) out[i] += R(i, j, k, l) * Z[j] * X[k] * Y[l];
    }
  return out;
}

namespace detail {

inline double plane_area2(const FundamentalTensor& g, const Vector& X, const Vector& Y) {
  const double gxy = inner(g, X, Y);
  const double den = inner(g, X, X) * inner(g, Y, Y) - gxy * gxy;
  if (!(den >= kDegenerateFlagThreshold)) throw DegenerateFlagError("degenerate 2-plane");
  return den;
}

inline void require_orthonormal(const FundamentalTensor& g, const std::vector<Vector>& frame, const char* where) {
  const double dev = max_gram_deviation(g, frame);
  if (!(dev <= kFrameTolerance)) throw FrameError(std::string(where) + ": frame is not g-orthonormal", dev);
}

}  // namespace detail

/// K(x, y, X) = g(R_y X, X) / (|X|^2 |y|^2 - g(X, y)^2) from a depth-4 geometry.
inline double flag_curvature(const LocalGeometry& geo, const Vector& X) {
  const FundamentalTensor g = fundamental_tensor(geo);
  const double den = detail::plane_area2(g, X, geo.at.y);
  return inner(g, geo.R_spray * X, X) / den;
}

inline double flag_curvature(const MetricKernel& kernel, const ReferenceElement& z, const Vector& X) {
  return flag_curvature(local_geometry(kernel, z, 4), X);
}

/// K2(z, X, Y) = g(R(X, Y) Y, X) / (|X|^2 |Y|^2 - g(X, Y)^2).
inline double sectional_curvature_k2(const LocalGeometry& geo, const Vector& X, const Vector& Y) {
  const FundamentalTensor g = fundamental_tensor(geo);
  const double den = detail::plane_area2(g, X, Y);
  return inner(g, apply(geo.R, X, Y, Y), X) / den;
}

inline double sectional_curvature_k2(const MetricKernel& kernel, const ReferenceElement& z, const Vector& X,
                                     const Vector& Y) {
  return sectional_curvature_k2(local_geometry(kernel, z, 4), X, Y);
}

/// max over frame triples of |R(X,Y)Z - K (g(Y,Z) X - g(X,Z) Y)|_g.
inline double schur_residual(const LocalGeometry& geo, double K, const std::vector<Vector>& frame) {
  const FundamentalTensor g = fundamental_tensor(geo);
  detail::require_orthonormal(g, frame, "schur_residual");
  double worst = 0.0;
  for (const Vector& X : frame)
    for (const Vector& Y : frame)
      for (const Vector& Z : frame) {
        const Vector d = apply(geo.R, X, Y, Z) - K * (inner(g, Y, Z) * X - inner(g, X, Z) * Y);
        worst = std::max(worst, norm(g, d));
      }
  return worst;
}

inline double schur_residual(const MetricKernel& kernel, const ReferenceElement& z, double K,
                             const std::vector<Vector>& frame) {
  return schur_residual(local_geometry(kernel, z, 4), K, frame);
}

/// g(R(X, Y) Z, X) for a g-orthonormal triple.
inline double lemma_identity(const LocalGeometry& geo, const Vector& X, const Vector& Y, const Vector& Z) {
  const FundamentalTensor g = fundamental_tensor(geo);
  detail::require_orthonormal(g, {X, Y, Z}, "lemma_identity");
  return inner(g, apply(geo.R, X, Y, Z), X);
}

inline double lemma_identity(const MetricKernel& kernel, const ReferenceElement& z, const Vector& X, const Vector& Y,
                             const Vector& Z) {
  return lemma_identity(local_geometry(kernel, z, 4), X, Y, Z);
}

struct PolarizationResult {
  double lhs = 0.0;               // g(R(X,Y)Y, X)
  double rhs = 0.0;               // g(R(X,Z)Z, X)
  double residual = 0.0;          // |g(R(X,Y')Z', X)|
  double rotated_deviation = 0.0; // Gram deviation of (X, Y', Z')
};

/// Rotates (Y, Z) by 45 degrees, Y' = (Y+Z)/sqrt2, Z' = (Y-Z)/sqrt2, and
/// evaluates both sides of g(R(X,Y)Y,X) = g(R(X,Z)Z,X).
inline PolarizationResult polarization_check(const LocalGeometry& geo, const Vector& X, const Vector& Y,
                                             const Vector& Z) {
  const FundamentalTensor g = fundamental_tensor(geo);
  detail::require_orthonormal(g, {X, Y, Z}, "polarization_check");
  const Vector Yp = (Y + Z) / std::sqrt(2.0);
  const Vector Zp = (Y - Z) / std::sqrt(2.0);
  PolarizationResult r;
  r.rotated_deviation = max_gram_deviation(g, {X, Yp, Zp});
  r.lhs = inner(g, apply(geo.R, X, Y, Y), X);
  r.rhs = inner(g, apply(geo.R, X, Z, Z), X);
  r.residual = std::abs(inner(g, apply(geo.R, X, Yp, Zp), X));
  return r;
}

inline PolarizationResult polarization_check(const MetricKernel& kernel, const ReferenceElement& z, const Vector& X,
                                             const Vector& Y, const Vector& Z) {
  return polarization_check(local_geometry(kernel, z, 4), X, Y, Z);
}

}  // namespace finsler
