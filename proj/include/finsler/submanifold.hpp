#pragma once

// Geometry of an immersed submanifold S -> (M, F).
//
// Every ambient tensor is evaluated at z = (x(u), dx(v)) where v is a
// parameter-space direction, so the reference direction is tangent to S.
//
// Conventions:
//  * Tangent fields Y are extended by holding their parameter components
//    constant; the Gauss formula is then exact from the immersion's jets.
//  * Normal fields (W, eta) depend on the reference element through the
//    direction-dependent normal space. They are differentiated along the
//    horizontal lift of a tangent vector X: the base point moves as u + s a
//    while the reference direction moves as y - s N(z) X. This is the curve
//    whose velocity is the horizontal lift, and it is what makes
//    g(alpha(X, Y), W) = g(A_W X, Y) hold exactly. The s-derivative uses a
//    five-point central stencil (error O(h^4), h = 1e-3).
//  * Mean curvature is the trace over a g_z-orthonormal tangent frame divided
//    by k = dim S.
//  * On hypersurfaces the normal is oriented outward when the immersion
//    supplies an outward field, otherwise so that det[dx | n] > 0.

#include <cmath>
#include <functional>
#include <optional>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "finsler/connection.hpp"
#include "finsler/errors.hpp"
#include "finsler/jet.hpp"
#include "finsler/kernel.hpp"
#include "finsler/local_geometry.hpp"
#include "finsler/metric.hpp"

namespace finsler {

using ImmersionMap = std::function<std::vector<Jet>(JetSpan u)>;
using OutwardField = std::function<Vector(const Vector& x)>;
using ParameterSampler = std::function<Vector(std::mt19937_64& rng)>;

/// x(u), dx (n x k) and d2x (H[a](i, b) = d2 x^i / du^a du^b) at one parameter point.
struct ImmersionJets {
  Vector x;
  Matrix J;
  std::vector<Matrix> H;
};

class Immersion {
public:
  Immersion(std::string kind, nlohmann::json params, int dim_sub, MetricKernel ambient, ImmersionMap map,
            ParameterSampler sampler, OutwardField outward = {})
      : kind_(std::move(kind)), params_(std::move(params)), dim_sub_(dim_sub), ambient_(std::move(ambient)),
        map_(std::move(map)), sampler_(std::move(sampler)), outward_(std::move(outward)) {
    if (dim_sub_ < 1 || dim_sub_ >= ambient_.dim())
      throw DimensionError("immersion: require 1 <= dim S < dim M");
  }

  const std::string& kind() const noexcept { return kind_; }
  const nlohmann::json& params() const noexcept { return params_; }
  int dim_sub() const noexcept { return dim_sub_; }
  int ambient_dim() const noexcept { return ambient_.dim(); }
  const MetricKernel& ambient() const noexcept { return ambient_; }
  bool has_outward() const noexcept { return static_cast<bool>(outward_); }
  Vector outward(const Vector& x) const { return outward_(x); }
  Vector sample_parameter(std::mt19937_64& rng) const { return sampler_(rng); }

  std::vector<Jet> map(JetSpan u) const {
    auto x = map_(u);
    if (static_cast<int>(x.size()) != ambient_.dim()) throw ImmersionError("immersion map returned wrong dimension");
    return x;
  }

  Vector position(const Vector& u) const { return jets(u, false).x; }

  /// Position, differential and second derivatives; throws ImmersionError on rank loss.
  ImmersionJets jets(const Vector& u, bool check_rank = true) const {
    if (u.size() != dim_sub_) throw DimensionError("immersion: parameter dimension mismatch");
    const int k = dim_sub_, n = ambient_.dim();
    std::vector<Jet> vars;
    for (int a = 0; a < k; ++a) vars.push_back(Jet::variable(k, 2, a, u[a]));
    const std::vector<Jet> x = map(vars);
    ImmersionJets out{Vector(n), Matrix(n, k), std::vector<Matrix>(static_cast<std::size_t>(k), Matrix(n, k))};
    for (int i = 0; i < n; ++i) {
      const Jet& xi = x[static_cast<std::size_t>(i)];
      out.x[i] = xi.value();
      for (int a = 0; a < k; ++a) {
        const Jet d = derivative(xi, a);
        out.J(i, a) = d.value();
        for (int b = 0; b < k; ++b) out.H[static_cast<std::size_t>(a)](i, b) = derivative(d, b).value();
      }
    }
    if (check_rank) {
      Eigen::JacobiSVD<Matrix> svd(out.J);
      const auto s = svd.singularValues();
      if (!(s[0] > 0.0) || !(s[k - 1] > 1e-10 * s[0]))
        throw ImmersionError("immersion: differential is rank deficient at the parameter point");
    }
    return out;
  }

private:
  std::string kind_;
  nlohmann::json params_;
  int dim_sub_;
  MetricKernel ambient_;
  ImmersionMap map_;
  ParameterSampler sampler_;
  OutwardField outward_;
};

/// Round sphere |x - center| = radius of dimension n-1, hyperspherical angles
/// x_1 = c_1 + r cos u_1, x_2 = c_2 + r sin u_1 cos u_2, ..., x_n = c_n + r sin u_1 ... sin u_{n-1}.
inline Immersion sphere_immersion(MetricKernel ambient, double radius, Vector center) {
  const int n = ambient.dim();
  if (!(radius > 0.0)) throw SpecError("params.radius", "must be positive");
  if (center.size() != n) throw SpecError("params.center", "length must equal ambient dim");
  auto map = [n, radius, center](JetSpan u) {
    std::vector<Jet> x;
    Jet prod = Jet::constant(u[0].num_vars(), u[0].order(), radius);
    for (int i = 0; i < n; ++i) {
      if (i < n - 1) {
        x.push_back(prod * cos(u[static_cast<std::size_t>(i)]) + center[i]);
        prod = prod * sin(u[static_cast<std::size_t>(i)]);
      } else {
        x.push_back(prod + center[i]);
      }
    }
    return x;
  };
  auto sampler = [n](std::mt19937_64& rng) {
    std::uniform_real_distribution<double> polar(0.35, 2.8), azimuth(0.0, 6.283185307179586);
    Vector u(n - 1);
    for (int a = 0; a < n - 1; ++a) u[a] = (a + 1 < n - 1) ? polar(rng) : azimuth(rng);
    return u;
  };
  std::vector<double> c(center.data(), center.data() + center.size());
  return Immersion("sphere", {{"radius", radius}, {"center", c}}, n - 1, std::move(ambient), map, sampler,
                   [center](const Vector& x) { return Vector(x - center); });
}

/// Affine k-plane origin + sum_a u_a basis_a.
inline Immersion plane_immersion(MetricKernel ambient, Vector origin, std::vector<Vector> basis) {
  const int n = ambient.dim();
  if (origin.size() != n) throw SpecError("params.origin", "length must equal ambient dim");
  if (basis.empty()) throw SpecError("params.basis", "must be non-empty");
  for (const auto& b : basis)
    if (b.size() != n) throw SpecError("params.basis", "vectors must have ambient dim");
  const int k = static_cast<int>(basis.size());
  auto map = [n, k, origin, basis](JetSpan u) {
    std::vector<Jet> x;
    for (int i = 0; i < n; ++i) {
      Jet s = Jet::constant(u[0].num_vars(), u[0].order(), origin[i]);
      for (int a = 0; a < k; ++a) s = s + u[static_cast<std::size_t>(a)] * basis[static_cast<std::size_t>(a)][i];
      x.push_back(s);
    }
    return x;
  };
  nlohmann::json jb = nlohmann::json::array();
  for (const auto& b : basis) jb.push_back(std::vector<double>(b.data(), b.data() + b.size()));
  return Immersion("plane",
                   {{"origin", std::vector<double>(origin.data(), origin.data() + origin.size())}, {"basis", jb}}, k,
                   std::move(ambient), map, detail::box_sampler(k, 1.0));
}

/// Cylinder x^2 + y^2 = radius^2 in a 3-dimensional chart, (u1, u2) -> (r cos u1, r sin u1, u2).
inline Immersion cylinder_immersion(MetricKernel ambient, double radius) {
  if (ambient.dim() != 3) throw SpecError("ambient.dim", "cylinder requires a 3-dimensional ambient");
  if (!(radius > 0.0)) throw SpecError("params.radius", "must be positive");
  auto map = [radius](JetSpan u) {
    return std::vector<Jet>{cos(u[0]) * radius, sin(u[0]) * radius, u[1] + 0.0};
  };
  auto sampler = [](std::mt19937_64& rng) {
    std::uniform_real_distribution<double> a(0.0, 6.283185307179586), h(-1.0, 1.0);
    const double u0 = a(rng);
    return Vector{{u0, h(rng)}};
  };
  return Immersion("cylinder", {{"radius", radius}}, 2, std::move(ambient), map, sampler,
                   [](const Vector& x) { return Vector{{x[0], x[1], 0.0}}; });
}

/// One monomial term coef * prod_a u_a^powers[a].
struct PolynomialTerm {
  double coef = 0.0;
  std::vector<int> powers;
};

/// x^i(u) = sum of terms in components[i].
inline Immersion polynomial_immersion(MetricKernel ambient, int dim_sub,
                                      std::vector<std::vector<PolynomialTerm>> components) {
  const int n = ambient.dim();
  if (static_cast<int>(components.size()) != n) throw SpecError("params.components", "need one entry per ambient coordinate");
  for (const auto& comp : components)
    for (const auto& t : comp) {
      if (static_cast<int>(t.powers.size()) != dim_sub)
        throw SpecError("params.components.powers", "length must equal dim_sub");
      for (int p : t.powers)
        if (p < 0) throw SpecError("params.components.powers", "must be non-negative");
    }
  auto map = [components](JetSpan u) {
    std::vector<Jet> x;
    for (const auto& comp : components) {
      Jet s(u[0].num_vars(), u[0].order());
      for (const auto& t : comp) {
        Jet m = Jet::constant(u[0].num_vars(), u[0].order(), t.coef);
        for (std::size_t a = 0; a < t.powers.size(); ++a)
          for (int p = 0; p < t.powers[a]; ++p) m = m * u[a];
        s = s + m;
      }
      x.push_back(s);
    }
    return x;
  };
  nlohmann::json jc = nlohmann::json::array();
  for (const auto& comp : components) {
    nlohmann::json terms = nlohmann::json::array();
    for (const auto& t : comp) terms.push_back({{"coef", t.coef}, {"powers", t.powers}});
    jc.push_back(terms);
  }
  return Immersion("custom-polynomial", {{"dim_sub", dim_sub}, {"components", jc}}, dim_sub, std::move(ambient), map,
                   detail::box_sampler(dim_sub, 0.5));
}

/// Parameter point u with tangent direction v; the ambient reference element is (x(u), dx v).
struct SubReferenceElement {
  Vector u;
  Vector v;

  SubReferenceElement(Vector u_, Vector v_) : u(std::move(u_)), v(std::move(v_)) {
    if (u.size() != v.size()) throw std::invalid_argument("sub reference element: u and v differ in dimension");
    if (!(v.norm() >= kDirectionEpsilon)) throw DomainError("sub reference element: v must be non-zero");
  }
};

/// g_z-orthonormal tangent and normal frames at z.
struct SplitFrame {
  std::vector<Vector> tangent;
  std::vector<Vector> normal;
  FundamentalTensor g;
};

/// Induced fundamental tensor on parameters, dx^T g_z dx, plus the pulled-back
/// drift one-form when the ambient is the Randers example.
struct InducedMetric {
  FundamentalTensor tensor;
  std::optional<Vector> beta_bar;
};

enum class Extension { parameter_constant, perturbed };

namespace detail {

inline constexpr double kFieldStep = 1e-3;

struct SubFrame {
  Vector u;
  ImmersionJets jets;
  LocalGeometry geo;
  FundamentalTensor g;
  std::vector<Vector> tangent;
  std::vector<Vector> tangent_param;
  std::vector<Vector> normal;
};

inline Vector project_normal(const SubFrame& f, const Vector& v) {
  Vector out = Vector::Zero(v.size());
  for (const Vector& n : f.normal) out += inner(f.g, v, n) * n;
  return out;
}

inline Vector project_tangent(const SubFrame& f, const Vector& v) {
  Vector out = Vector::Zero(v.size());
  for (const Vector& t : f.tangent) out += inner(f.g, v, t) * t;
  return out;
}

/// Frames at parameter u with an arbitrary ambient reference direction y.
inline SubFrame frame_at(const Immersion& imm, const Vector& u, const Vector& y) {
  ImmersionJets jets = imm.jets(u);
  const ReferenceElement z(jets.x, y);
  if (!imm.ambient().contains(z)) throw DomainError("submanifold: reference element outside ambient domain");
  LocalGeometry geo = local_geometry(imm.ambient(), z, 3);
  FundamentalTensor g = fundamental_tensor(geo);
  const int n = imm.ambient_dim(), k = imm.dim_sub();

  std::vector<Vector> cols;
  for (int a = 0; a < k; ++a) cols.push_back(jets.J.col(a));
  std::vector<Vector> tangent = gram_schmidt(g, cols);
  const auto qr = jets.J.colPivHouseholderQr();
  std::vector<Vector> tangent_param;
  for (const Vector& t : tangent) tangent_param.push_back(qr.solve(t));

  // Normal frame: greedy g-Gram-Schmidt over the coordinate axes, largest pivot first.
  std::vector<Vector> basis = tangent;
  std::vector<Vector> normal;
  std::vector<bool> used(static_cast<std::size_t>(n), false);
  while (static_cast<int>(normal.size()) < n - k) {
    int best = -1;
    double best_ratio = 0.0;
    Vector best_w;
    for (int m = 0; m < n; ++m) {
      if (used[static_cast<std::size_t>(m)]) continue;
      Vector w = Vector::Unit(n, m);
      for (int pass = 0; pass < 2; ++pass)
        for (const Vector& e : basis) w -= inner(g, e, w) * e;
      const double ratio = norm(g, w) / norm(g, Vector::Unit(n, m));
      if (ratio > best_ratio) {
        best_ratio = ratio;
        best = m;
        best_w = w;
      }
    }
    if (best < 0 || !(best_ratio > 1e-8)) throw ImmersionError("submanifold: cannot complete normal frame");
    used[static_cast<std::size_t>(best)] = true;
    best_w /= norm(g, best_w);
    basis.push_back(best_w);
    normal.push_back(best_w);
  }
  if (n - k == 1) {
    Vector& nn = normal.front();
    double orientation;
    if (imm.has_outward()) {
      orientation = inner(g, nn, imm.outward(jets.x));
    } else {
      Matrix frame(n, n);
      frame.leftCols(k) = jets.J;
      frame.col(k) = nn;
      orientation = frame.determinant();
    }
    if (orientation < 0.0) nn = -nn;
  }
  return {u, std::move(jets), std::move(geo), std::move(g), std::move(tangent), std::move(tangent_param),
          std::move(normal)};
}

inline SubFrame frame_at(const Immersion& imm, const SubReferenceElement& sub) {
  if (sub.u.size() != imm.dim_sub()) throw DimensionError("submanifold: parameter dimension mismatch");
  const ImmersionJets jets = imm.jets(sub.u);
  return frame_at(imm, sub.u, Vector(jets.J * sub.v));
}

/// Ambient covariant derivative of the tangent field with parameter components
/// B along parameter direction A, before projection.
inline Vector tangent_derivative(const SubFrame& f, const Vector& A, const Vector& B, Extension ext) {
  const int k = static_cast<int>(A.size());
  Vector d = Vector::Zero(f.jets.x.size());
  for (int a = 0; a < k; ++a) d += A[a] * (f.jets.H[static_cast<std::size_t>(a)] * B);
  if (ext == Extension::perturbed) {
    // Y2(u') = Y(u') + <rho, u' - u> dx(u') e_last vanishes at u; adds a tangent vector.
    double rho_a = 0.0;
    for (int a = 0; a < k; ++a) rho_a += (1.0 + 0.5 * a) * A[a];
    d += rho_a * f.jets.J.col(k - 1);
  }
  return d + contract_gamma(f.geo.gamma, Vector(f.jets.J * A), Vector(f.jets.J * B));
}

inline Vector alpha_param(const SubFrame& f, const Vector& A, const Vector& B, Extension ext) {
  return project_normal(f, tangent_derivative(f, A, B, ext));
}

inline Vector mean_curvature(const SubFrame& f) {
  Vector eta = Vector::Zero(f.jets.x.size());
  for (const Vector& a : f.tangent_param) eta += alpha_param(f, a, a, Extension::parameter_constant);
  return eta / static_cast<double>(f.tangent_param.size());
}

/// d/ds field(frame at (u + s a, y - s N X)) at s = 0 with X = dx a.
template <class Field>
Vector horizontal_field_derivative(const Immersion& imm, const SubFrame& f, const Vector& a, Field&& field) {
  const Vector dy = -(f.geo.N * (f.jets.J * a));
  auto at = [&](double s) -> Vector {
    return field(frame_at(imm, Vector(f.u + s * a), Vector(f.geo.at.y + s * dy)));
  };
  const double h = kFieldStep;
  return (8.0 * (at(h) - at(-h)) - (at(2 * h) - at(-2 * h))) / (12.0 * h);
}

/// Components of W in the normal frame; throws NormalityError when W has a tangent part.
inline Vector normal_components(const SubFrame& f, const Vector& W) {
  if (W.size() != f.jets.x.size()) throw DimensionError("submanifold: normal vector has wrong dimension");
  const double tang = norm(f.g, project_tangent(f, W));
  if (!(tang <= 1e-8 * std::max(1.0, norm(f.g, W))))
    throw NormalityError("submanifold: vector is not g_z-normal to S");
  Vector c(static_cast<int>(f.normal.size()));
  for (std::size_t a = 0; a < f.normal.size(); ++a) c[static_cast<int>(a)] = inner(f.g, W, f.normal[a]);
  return c;
}

/// Matrix A(j, i) = g(A_W t_i, t_j) over the tangent frame.
inline Matrix shape_matrix(const Immersion& imm, const SubFrame& f, const Vector& W, Extension ext) {
  const Vector c = normal_components(f, W);
  const int k = imm.dim_sub();
  auto extended = [&](const SubFrame& g) {
    Vector w = Vector::Zero(W.size());
    for (int a = 0; a < c.size(); ++a) w += c[a] * g.normal[static_cast<std::size_t>(a)];
    return w;
  };
  Matrix A(k, k);
  for (int i = 0; i < k; ++i) {
    const Vector& a = f.tangent_param[static_cast<std::size_t>(i)];
    Vector dW = horizontal_field_derivative(imm, f, a, extended);
    // The perturbed extension adds <rho, u' - u> n_1, whose derivative is a normal vector.
    if (ext == Extension::perturbed) dW += a.sum() * f.normal.front();
    const Vector AWt = -project_tangent(f, Vector(dW + contract_gamma(f.geo.gamma, f.tangent[static_cast<std::size_t>(i)], W)));
    for (int j = 0; j < k; ++j) A(j, i) = inner(f.g, AWt, f.tangent[static_cast<std::size_t>(j)]);
  }
  return A;
}

inline Vector to_parameter(const SubFrame& f, const Vector& X) {
  if (X.size() != f.jets.x.size()) throw DimensionError("submanifold: tangent vector has wrong dimension");
  const double off = norm(f.g, project_normal(f, X));
  if (!(off <= 1e-8 * std::max(1.0, norm(f.g, X)))) throw TangencyError("submanifold: vector is not tangent to S");
  return f.jets.J.colPivHouseholderQr().solve(project_tangent(f, X));
}

}  // namespace detail

inline SplitFrame split_frame(const Immersion& imm, const SubReferenceElement& sub) {
  detail::SubFrame f = detail::frame_at(imm, sub);
  return {std::move(f.tangent), std::move(f.normal), std::move(f.g)};
}

inline InducedMetric induced_metric(const Immersion& imm, const SubReferenceElement& sub) {
  if (sub.u.size() != imm.dim_sub()) throw DimensionError("induced_metric: parameter dimension mismatch");
  const ImmersionJets jets = imm.jets(sub.u);
  const ReferenceElement z(jets.x, Vector(jets.J * sub.v));
  if (!imm.ambient().contains(z)) throw DomainError("induced_metric: reference element outside ambient domain");
  const FundamentalTensor g = fundamental_tensor(imm.ambient(), z);
  const Matrix h = jets.J.transpose() * g.g * jets.J;
  detail::require_positive_definite(h, "induced_metric");
  InducedMetric out{FundamentalTensor{h, h.inverse(), ReferenceElement(sub.u, sub.v)}, std::nullopt};
  if (imm.ambient().kind() == KernelKind::randers_example) {
    const double b = imm.ambient().params().at("b").get<double>();
    out.beta_bar = Vector(b * (jets.J.transpose() * jets.x) / jets.x.norm());
  }
  return out;
}

/// Normal part of nabla_X Y for tangent X, Y.
inline Vector second_fundamental_form(const Immersion& imm, const SubReferenceElement& sub, const Vector& X,
                                      const Vector& Y, Extension ext = Extension::parameter_constant) {
  const detail::SubFrame f = detail::frame_at(imm, sub);
  return detail::alpha_param(f, detail::to_parameter(f, X), detail::to_parameter(f, Y), ext);
}

/// Shape operator A_W as a k x k matrix on the g_z-orthonormal tangent frame of split_frame.
inline Matrix shape_operator(const Immersion& imm, const SubReferenceElement& sub, const Vector& W,
                             Extension ext = Extension::parameter_constant) {
  return detail::shape_matrix(imm, detail::frame_at(imm, sub), W, ext);
}

inline Vector mean_curvature(const Immersion& imm, const SubReferenceElement& sub) {
  return detail::mean_curvature(detail::frame_at(imm, sub));
}

/// max_ij |alpha(t_i, t_j) - delta_ij eta|_g.
inline double umbilicity_residual(const Immersion& imm, const SubReferenceElement& sub) {
  const detail::SubFrame f = detail::frame_at(imm, sub);
  const Vector eta = detail::mean_curvature(f);
  double worst = 0.0;
  const auto& tp = f.tangent_param;
  for (std::size_t i = 0; i < tp.size(); ++i)
    for (std::size_t j = 0; j < tp.size(); ++j) {
      Vector d = detail::alpha_param(f, tp[i], tp[j], Extension::parameter_constant);
      if (i == j) d -= eta;
      worst = std::max(worst, norm(f.g, d));
    }
  return worst;
}

/// max_i |normal part of nabla_{t_i} eta|_g.
inline double normal_parallelism_residual(const Immersion& imm, const SubReferenceElement& sub) {
  const detail::SubFrame f = detail::frame_at(imm, sub);
  const Vector eta = detail::mean_curvature(f);
  double worst = 0.0;
  for (std::size_t i = 0; i < f.tangent_param.size(); ++i) {
    const Vector d = detail::horizontal_field_derivative(
        imm, f, f.tangent_param[i], [](const detail::SubFrame& g) { return detail::mean_curvature(g); });
    const Vector dn = detail::project_normal(f, Vector(d + contract_gamma(f.geo.gamma, f.tangent[i], eta)));
    worst = std::max(worst, norm(f.g, dn));
  }
  return worst;
}

/// max over i, j and normal frame vectors n of |g(alpha(t_i, t_j), n) - g(A_n t_i, t_j)|.
inline double weingarten_duality_residual(const Immersion& imm, const SubReferenceElement& sub,
                                          Extension ext = Extension::parameter_constant) {
  const detail::SubFrame f = detail::frame_at(imm, sub);
  const int k = imm.dim_sub();
  double worst = 0.0;
  for (const Vector& n : f.normal) {
    const Matrix A = detail::shape_matrix(imm, f, n, ext);
    for (int i = 0; i < k; ++i)
      for (int j = 0; j < k; ++j) {
        const Vector al = detail::alpha_param(f, f.tangent_param[static_cast<std::size_t>(i)],
                                              f.tangent_param[static_cast<std::size_t>(j)], ext);
        worst = std::max(worst, std::abs(inner(f.g, al, n) - A(j, i)));
      }
  }
  return worst;
}

}  // namespace finsler
