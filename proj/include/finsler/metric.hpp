#pragma once

#include <cmath>
#include <vector>

#include "finsler/errors.hpp"
#include "finsler/kernel.hpp"
#include "finsler/local_geometry.hpp"
#include "finsler/tensor.hpp"

namespace finsler {

/// g_ij(x, y) = 1/2 Hessian_y F^2 with its inverse.
struct FundamentalTensor {
  Matrix g;
  Matrix g_inv;
  ReferenceElement at;

  int dim() const noexcept { return static_cast<int>(g.rows()); }
};

inline FundamentalTensor fundamental_tensor(const MetricKernel& kernel, const ReferenceElement& z) {
  LocalGeometry geo = local_geometry(kernel, z, 2);
  return {std::move(geo.g), std::move(geo.g_inv), z};
}

inline FundamentalTensor fundamental_tensor(const LocalGeometry& geo) { return {geo.g, geo.g_inv, geo.at}; }

/// C_ijk = 1/4 d^3 F^2 / dy^i dy^j dy^k.
inline Tensor3 cartan_tensor(const MetricKernel& kernel, const ReferenceElement& z) {
  return local_geometry(kernel, z, 3).C;
}

inline double inner(const FundamentalTensor& g, const Vector& X, const Vector& Y) { return X.dot(g.g * Y); }

inline double norm(const FundamentalTensor& g, const Vector& X) { return std::sqrt(inner(g, X, X)); }

/// Largest |<e_i, e_j> - delta_ij| over the frame.
inline double max_gram_deviation(const FundamentalTensor& g, const std::vector<Vector>& frame) {
  double dev = 0.0;
  for (std::size_t i = 0; i < frame.size(); ++i)
    for (std::size_t j = 0; j < frame.size(); ++j)
      dev = std::max(dev, std::abs(inner(g, frame[i], frame[j]) - (i == j ? 1.0 : 0.0)));
  return dev;
}

/// g-orthonormalizes `vectors` in order (modified Gram-Schmidt, two passes).
/// Throws DependentInputError when a pivot falls below 1e-12 of its input norm.
inline std::vector<Vector> gram_schmidt(const FundamentalTensor& g, const std::vector<Vector>& vectors) {
  std::vector<Vector> out;
  out.reserve(vectors.size());
  for (std::size_t k = 0; k < vectors.size(); ++k) {
    const Vector& v = vectors[k];
    if (v.size() != g.dim()) throw DimensionError("gram_schmidt: vector dimension differs from metric");
    const double scale = norm(g, v);
    Vector w = v;
    for (int pass = 0; pass < 2; ++pass)
      for (const Vector& e : out) w -= inner(g, e, w) * e;
    const double pivot = norm(g, w);
    if (!(scale > 0.0) || !(pivot > 1e-12 * scale))
      throw DependentInputError("gram_schmidt: input vector " + std::to_string(k) + " is linearly dependent");
    out.push_back(w / pivot);
  }
  return out;
}

}  // namespace finsler
