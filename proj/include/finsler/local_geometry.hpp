#pragma once

// All direction-dependent tensors at one reference element z = (x, y),
// computed from a single jet of F^2 in the 2n variables (x, y).
//
// With F^2 expanded to order `depth`, derived quantities are themselves jets
// of lower order, so their derivatives are exact:
//
//   g_ij  = 1/2 d^2 F^2 / dy^i dy^j                          order depth-2
//   G^i   = 1/4 g^il (y^k d^2F^2/dy^l dx^k - dF^2/dx^l)       order depth-2
//   N^i_j = dG^i/dy^j,  C_ijk = 1/2 dg_ij/dy^k                order depth-3
//   delta_j g_kl = dg_kl/dx^j - 2 N^m_j C_klm
//   Gamma^i_jk = 1/2 g^il (delta_j g_lk + delta_k g_jl - delta_l g_jk)
//
// and at depth 4 the hh-curvature and spray curvature (see curvature.hpp).
// Depth 2 is enough for the geodesic equation, 3 for the connection, 4 for
// curvature.

#include <string>
#include <vector>

#include "finsler/errors.hpp"
#include "finsler/jet.hpp"
#include "finsler/kernel.hpp"
#include "finsler/tensor.hpp"

namespace finsler {

struct LocalGeometry {
  ReferenceElement at;
  int depth = 0;
  double F = 0.0;
  Matrix g;
  Matrix g_inv;
  Vector G;                // spray coefficients
  Matrix N;                // nonlinear connection N^i_j       (depth >= 3)
  Tensor3 C;               // lowered Cartan tensor C_ijk      (depth >= 3)
  Tensor3 gamma;           // horizontal Cartan Gamma^i_jk     (depth >= 3)
  Tensor4 R;               // hh-curvature R^i_jkl             (depth == 4)
  Matrix R_spray;          // spray curvature R^i_k            (depth == 4)
};

namespace detail {

using JetMatrix = std::vector<Jet>;  // row-major n*n

inline std::size_t at2(int n, int i, int j) { return static_cast<std::size_t>(i * n + j); }
inline std::size_t at3(int n, int i, int j, int k) { return static_cast<std::size_t>((i * n + j) * n + k); }

inline JetMatrix matmul(const JetMatrix& a, const JetMatrix& b, int n) {
  JetMatrix out;
  out.reserve(a.size());
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      Jet s = a[at2(n, i, 0)] * b[at2(n, 0, j)];
      for (int k = 1; k < n; ++k) s = s + a[at2(n, i, k)] * b[at2(n, k, j)];
      out.push_back(s);
    }
  return out;
}

/// Inverse of a jet matrix by the Neumann series around its value:
/// (A0 + H)^{-1} = sum_m (-A0^{-1} H)^m A0^{-1}, exact through the jet order.
inline JetMatrix inverse(const JetMatrix& a, const Matrix& a0_inv, int n) {
  const int nv = a[0].num_vars();
  const int order = a[0].order();
  JetMatrix step, base;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      base.push_back(Jet::constant(nv, order, a0_inv(i, j)));
    }
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      Jet s = Jet(nv, order);
      for (int k = 0; k < n; ++k) {
        Jet h = a[at2(n, k, j)] - a[at2(n, k, j)].value();
        s = s + h * (-a0_inv(i, k));
      }
      step.push_back(s);
    }
  JetMatrix result = base;
  JetMatrix term = base;
  for (int m = 1; m <= order; ++m) {
    term = matmul(step, term, n);
    for (std::size_t e = 0; e < result.size(); ++e) result[e] = result[e] + term[e];
  }
  return result;
}

/// Factorizes g, throwing MetricDegeneracyError on a non-positive pivot.
inline void require_positive_definite(const Matrix& g, const std::string& where) {
  Eigen::LDLT<Matrix> ldlt(g);
  bool ok = ldlt.info() == Eigen::Success && ldlt.isPositive();
  if (ok) {
    const auto d = ldlt.vectorD();
    for (Eigen::Index i = 0; i < d.size(); ++i) ok = ok && d[i] > 0.0;
  }
  if (!ok || !g.allFinite()) {
    Eigen::SelfAdjointEigenSolver<Matrix> eig(g, Eigen::EigenvaluesOnly);
    const double lambda = g.allFinite() ? eig.eigenvalues().minCoeff() : std::nan("");
    throw MetricDegeneracyError(where + ": fundamental tensor is not positive definite", lambda);
  }
}

}  // namespace detail

inline LocalGeometry local_geometry(const MetricKernel& kernel, const ReferenceElement& z, int depth) {
  using detail::at2;
  using detail::at3;
  if (depth < 2 || depth > kMaxJetOrder) throw std::invalid_argument("local_geometry: depth must be in [2, 4]");
  const int n = kernel.dim();
  if (z.x.size() != n) throw DimensionError("local_geometry: reference element dimension differs from kernel");
  if (!kernel.contains(z))
    throw DomainError(std::string(to_string(kernel.kind())) + ": reference element outside kernel domain");

  const int nv = 2 * n;
  std::vector<double> point(static_cast<std::size_t>(nv));
  for (int i = 0; i < n; ++i) {
    point[static_cast<std::size_t>(i)] = z.x[i];
    point[static_cast<std::size_t>(n + i)] = z.y[i];
  }
  const Jet F2 = lift(
      [&](JetSpan v) {
        const Jet f = kernel.finsler(v.subspan(0, static_cast<std::size_t>(n)),
                                     v.subspan(static_cast<std::size_t>(n), static_cast<std::size_t>(n)));
        return f * f;
      },
      point, depth);

  LocalGeometry out{z, depth};
  out.F = std::sqrt(F2.value());

  // Order depth-2 quantities.
  detail::JetMatrix g(static_cast<std::size_t>(n * n), Jet(nv, depth - 2));
  detail::JetMatrix M(static_cast<std::size_t>(n * n), Jet(nv, depth - 2));  // M[l][k] = d2F2/dy^l dx^k
  std::vector<Jet> dF2x;
  std::vector<Jet> dF2y;
  for (int i = 0; i < n; ++i) {
    dF2x.push_back(derivative(F2, i));
    dF2y.push_back(derivative(F2, n + i));
  }
  for (int i = 0; i < n; ++i) {
    for (int j = i; j < n; ++j) {
      const Jet gij = derivative(dF2y[static_cast<std::size_t>(i)], n + j) * 0.5;
      g[at2(n, i, j)] = gij;
      g[at2(n, j, i)] = gij;
    }
    for (int k = 0; k < n; ++k) M[at2(n, i, k)] = derivative(dF2y[static_cast<std::size_t>(i)], k);
  }
  out.g = Matrix(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) out.g(i, j) = g[at2(n, i, j)].value();
  detail::require_positive_definite(out.g, to_string(kernel.kind()));
  out.g_inv = out.g.ldlt().solve(Matrix::Identity(n, n));
  out.g_inv = 0.5 * (out.g_inv + out.g_inv.transpose()).eval();
  const detail::JetMatrix g_inv = detail::inverse(g, out.g_inv, n);

  std::vector<Jet> G;
  for (int i = 0; i < n; ++i) {
    Jet s(nv, depth - 2);
    for (int l = 0; l < n; ++l) {
      Jet rhs = dF2x[static_cast<std::size_t>(l)] * -1.0;
      for (int k = 0; k < n; ++k) rhs = rhs + M[at2(n, l, k)] * Jet::variable(nv, depth - 2, n + k, z.y[k]);
      s = s + g_inv[at2(n, i, l)] * rhs;
    }
    G.push_back(s * 0.25);
  }
  out.G = Vector(n);
  for (int i = 0; i < n; ++i) out.G[i] = G[static_cast<std::size_t>(i)].value();
  if (depth < 3) return out;

  // Order depth-3 quantities.
  const int o3 = depth - 3;
  detail::JetMatrix N;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) N.push_back(derivative(G[static_cast<std::size_t>(i)], n + j));
  std::vector<Jet> C(static_cast<std::size_t>(n * n * n), Jet(nv, o3));
  for (int i = 0; i < n; ++i)
    for (int j = i; j < n; ++j)
      for (int k = j; k < n; ++k) {
        const Jet c = derivative(g[at2(n, i, j)], n + k) * 0.5;
        for (auto [a, b, d] : {std::array{i, j, k}, std::array{i, k, j}, std::array{j, i, k},
                               std::array{j, k, i}, std::array{k, i, j}, std::array{k, j, i}})
          C[at3(n, a, b, d)] = c;
      }
  // delta[j][k][l] = delta_j g_kl
  std::vector<Jet> delta(static_cast<std::size_t>(n * n * n), Jet(nv, o3));
  for (int j = 0; j < n; ++j)
    for (int k = 0; k < n; ++k)
      for (int l = k; l < n; ++l) {
        Jet d = derivative(g[at2(n, k, l)], j);
        for (int m = 0; m < n; ++m) d = d - N[at2(n, m, j)] * C[at3(n, k, l, m)] * 2.0;
        delta[at3(n, j, k, l)] = d;
        delta[at3(n, j, l, k)] = d;
      }
  std::vector<Jet> gamma(static_cast<std::size_t>(n * n * n), Jet(nv, o3));
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      for (int k = j; k < n; ++k) {
        Jet s(nv, o3);
        for (int l = 0; l < n; ++l)
          s = s + g_inv[at2(n, i, l)] * (delta[at3(n, j, l, k)] + delta[at3(n, k, j, l)] - delta[at3(n, l, j, k)]);
        s = s * 0.5;
        gamma[at3(n, i, j, k)] = s;
        gamma[at3(n, i, k, j)] = s;
      }

  out.N = Matrix(n, n);
  out.C = Tensor3(n);
  out.gamma = Tensor3(n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      out.N(i, j) = N[at2(n, i, j)].value();
      for (int k = 0; k < n; ++k) {
        out.C(i, j, k) = C[at3(n, i, j, k)].value();
        out.gamma(i, j, k) = gamma[at3(n, i, j, k)].value();
      }
    }
  if (depth < 4) return out;

  // Horizontal derivative of an order-1 jet: delta_k f = df/dx^k - N^m_k df/dy^m.
  auto horizontal = [&](const Jet& f, int k) {
    double d = derivative(f, k).value();
    for (int m = 0; m < n; ++m) d -= out.N(m, k) * derivative(f, n + m).value();
    return d;
  };

  // Omega^m_kl = delta_k N^m_l - delta_l N^m_k
  Tensor3 omega(n);
  for (int m = 0; m < n; ++m)
    for (int k = 0; k < n; ++k)
      for (int l = k + 1; l < n; ++l) {
        const double w = horizontal(N[at2(n, m, l)], k) - horizontal(N[at2(n, m, k)], l);
        omega(m, k, l) = w;
        omega(m, l, k) = -w;
      }
  // dgamma(i, j, l, k) = delta_k Gamma^i_jl
  Tensor4 dgamma(n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      for (int l = j; l < n; ++l)
        for (int k = 0; k < n; ++k) {
          const double d = horizontal(gamma[at3(n, i, j, l)], k);
          dgamma(i, j, l, k) = d;
          dgamma(i, l, j, k) = d;
        }
  Tensor3 C_up(n);  // C^i_jm
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      for (int m = 0; m < n; ++m) {
        double s = 0.0;
        for (int l = 0; l < n; ++l) s += out.g_inv(i, l) * out.C(l, j, m);
        C_up(i, j, m) = s;
      }
  out.R = Tensor4(n);
  const Tensor3& Gm = out.gamma;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      for (int k = 0; k < n; ++k)
        for (int l = k + 1; l < n; ++l) {
          double r = dgamma(i, j, l, k) - dgamma(i, j, k, l);
          for (int m = 0; m < n; ++m) {
            r += Gm(m, j, l) * Gm(i, m, k) - Gm(m, j, k) * Gm(i, m, l);
            r += C_up(i, j, m) * omega(m, k, l);
          }
          out.R(i, j, k, l) = r;
          out.R(i, j, l, k) = -r;
        }

  // R^i_k = 2 dG^i/dx^k - y^j d2G^i/dx^j dy^k + 2 G^j d2G^i/dy^j dy^k - N^i_j N^j_k
  out.R_spray = Matrix(n, n);
  for (int i = 0; i < n; ++i) {
    const Jet& Gi = G[static_cast<std::size_t>(i)];
    for (int k = 0; k < n; ++k) {
      const Jet dGi_dyk = derivative(Gi, n + k);
      double r = 2.0 * derivative(Gi, k).value();
      for (int j = 0; j < n; ++j) {
        r -= z.y[j] * derivative(dGi_dyk, j).value();
        r += 2.0 * out.G[j] * derivative(dGi_dyk, n + j).value();
        r -= out.N(i, j) * out.N(j, k);
      }
      out.R_spray(i, k) = r;
    }
  }
  return out;
}

}  // namespace finsler
