#pragma once

// Finsler metric kernels F(x, y) on a single coordinate chart.
//
// Every kernel evaluates F on jets, so all y- and x-derivatives used by the
// geometry layers come from one code path. Built-in kinds and their formulas
// (|.| and <.,.> are Euclidean in the chart):
//
//   euclidean          F = |y|
//   riemannian         F = sqrt(g_ij(x) y^i y^j), g supplied as a jet callback;
//                      round_sphere(r): g = 4 r^4 / (r^2 + |x|^2)^2 * I
//   ellipsoid          riemannian graph chart of w = sqrt(1 - sum x_i^2/a_i^2):
//                      g = I + grad w grad w^T  (unit height semi-axis)
//   randers_example    F = |y| + b <x, y> / |x|,  0 < |b| < 1,  x != 0
//   funk_ball          F = (sqrt((1-|x|^2)|y|^2 + <x,y>^2) + <x,y>) / (1-|x|^2)
//   klein_ball         F =  sqrt((1-|x|^2)|y|^2 + <x,y>^2) / (1-|x|^2)
//   quartic_minkowski  F = (sum_k (y^k)^4)^(1/4)

#include <cmath>
#include <functional>
#include <random>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "finsler/errors.hpp"
#include "finsler/jet.hpp"
#include "finsler/tensor.hpp"

namespace finsler {

enum class KernelKind { euclidean, riemannian, randers_example, funk_ball, klein_ball, quartic_minkowski, ellipsoid };

inline const char* to_string(KernelKind kind) {
  switch (kind) {
    case KernelKind::euclidean: return "euclidean";
    case KernelKind::riemannian: return "riemannian";
    case KernelKind::randers_example: return "randers_example";
    case KernelKind::funk_ball: return "funk_ball";
    case KernelKind::klein_ball: return "klein_ball";
    case KernelKind::quartic_minkowski: return "quartic_minkowski";
    case KernelKind::ellipsoid: return "ellipsoid";
  }
  return "unknown";
}

/// Smallest admissible |y| for a reference element.
inline constexpr double kDirectionEpsilon = 1e-8;

using JetSpan = std::span<const Jet>;
using FinslerFunction = std::function<Jet(JetSpan x, JetSpan y)>;
using DomainPredicate = std::function<bool(const Vector& x, const Vector& y)>;
using PointSampler = std::function<Vector(std::mt19937_64& rng)>;
/// Chart metric g_ij(x), row-major n*n jets.
using MetricField = std::function<std::vector<Jet>(JetSpan x)>;

/// Point-direction pair (x, y) at which direction-dependent tensors live.
struct ReferenceElement {
  Vector x;
  Vector y;

  ReferenceElement(Vector x_, Vector y_) : x(std::move(x_)), y(std::move(y_)) {
    if (x.size() != y.size()) throw std::invalid_argument("reference element: x and y differ in dimension");
    if (!(y.norm() >= kDirectionEpsilon)) throw DomainError("reference element: |y| below direction epsilon");
  }
};

class MetricKernel {
public:
  MetricKernel(KernelKind kind, int dim, nlohmann::json params, FinslerFunction finsler, DomainPredicate domain,
               PointSampler sampler)
      : kind_(kind), dim_(dim), params_(std::move(params)), finsler_(std::move(finsler)),
        domain_(std::move(domain)), sampler_(std::move(sampler)) {
    if (dim_ < 1) throw std::invalid_argument("metric kernel: dim must be positive");
  }

  KernelKind kind() const noexcept { return kind_; }
  int dim() const noexcept { return dim_; }
  const nlohmann::json& params() const noexcept { return params_; }

  /// F on jets; the caller is responsible for domain checks.
  Jet finsler(JetSpan x, JetSpan y) const { return finsler_(x, y); }

  /// F(x, y) as a number.
  double operator()(const Vector& x, const Vector& y) const {
    if (!contains(x, y)) throw DomainError(std::string(to_string(kind_)) + ": (x, y) outside kernel domain");
    std::vector<Jet> xs, ys;
    for (int i = 0; i < dim_; ++i) {
      xs.push_back(Jet::constant(1, 0, x[i]));
      ys.push_back(Jet::constant(1, 0, y[i]));
    }
    return finsler_(xs, ys).value();
  }

  bool contains(const Vector& x, const Vector& y) const {
    if (x.size() != dim_ || y.size() != dim_) return false;
    if (!(y.norm() >= kDirectionEpsilon)) return false;
    return domain_(x, y);
  }

  bool contains(const ReferenceElement& z) const { return contains(z.x, z.y); }

  /// A base point drawn from the kernel's documented sampling region (a
  /// compact subset of the domain used by property tests and suites).
  Vector sample_point(std::mt19937_64& rng) const { return sampler_(rng); }

private:
  KernelKind kind_;
  int dim_;
  nlohmann::json params_;
  FinslerFunction finsler_;
  DomainPredicate domain_;
  PointSampler sampler_;
};

namespace detail {

inline Jet dot(JetSpan a, JetSpan b) {
  Jet s = a[0] * b[0];
  for (std::size_t i = 1; i < a.size(); ++i) s = s + a[i] * b[i];
  return s;
}

inline PointSampler box_sampler(int dim, double half_width) {
  return [dim, half_width](std::mt19937_64& rng) {
    std::uniform_real_distribution<double> u(-half_width, half_width);
    Vector x(dim);
    for (int i = 0; i < dim; ++i) x[i] = u(rng);
    return x;
  };
}

/// Uniform in the ball of radius `radius`, optionally bounded away from the origin.
inline PointSampler ball_sampler(int dim, double radius, double min_radius = 0.0) {
  return [=](std::mt19937_64& rng) {
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    for (;;) {
      Vector x(dim);
      for (int i = 0; i < dim; ++i) x[i] = u(rng);
      const double r = x.norm();
      if (r <= 1.0 && r * radius >= min_radius) return Vector(x * radius);
    }
  };
}

}  // namespace detail

inline MetricKernel euclidean(int dim) {
  return MetricKernel(
      KernelKind::euclidean, dim, nlohmann::json::object(),
      [](JetSpan, JetSpan y) { return sqrt(detail::dot(y, y)); },
      [](const Vector&, const Vector&) { return true; }, detail::box_sampler(dim, 1.0));
}

/// Riemannian kernel from a chart metric callback.
inline MetricKernel riemannian(int dim, MetricField metric, DomainPredicate domain, PointSampler sampler,
                               nlohmann::json params = nlohmann::json::object()) {
  auto f = [dim, metric = std::move(metric)](JetSpan x, JetSpan y) {
    const std::vector<Jet> g = metric(x);
    Jet q = g[0] * y[0] * y[0];
    bool first = true;
    for (int i = 0; i < dim; ++i)
      for (int j = 0; j < dim; ++j) {
        if (first) {
          first = false;
          continue;
        }
        q = q + g[static_cast<std::size_t>(i * dim + j)] * y[static_cast<std::size_t>(i)] *
                    y[static_cast<std::size_t>(j)];
      }
    return sqrt(q);
  };
  return MetricKernel(KernelKind::riemannian, dim, std::move(params), std::move(f), std::move(domain),
                      std::move(sampler));
}

/// Round sphere of radius r in a stereographic chart (constant curvature 1/r^2).
inline MetricKernel round_sphere(int dim, double radius) {
  if (!(radius > 0.0)) throw SpecError("params.radius", "must be positive");
  auto metric = [dim, radius](JetSpan x) {
    const double r2 = radius * radius;
    const Jet conf = 4.0 * r2 * r2 * reciprocal(pow(r2 + detail::dot(x, x), 2.0));
    std::vector<Jet> g;
    const Jet zero = conf * 0.0;
    for (int i = 0; i < dim; ++i)
      for (int j = 0; j < dim; ++j) g.push_back(i == j ? conf : zero);
    return g;
  };
  return riemannian(dim, metric, [](const Vector&, const Vector&) { return true; },
                    detail::box_sampler(dim, 1.5 * radius),
                    nlohmann::json{{"chart", "round_sphere"}, {"radius", radius}});
}

/// Ellipsoid sum_i x_i^2/a_i^2 + w^2 = 1 in the graph chart over x; dim = semi_axes.size().
inline MetricKernel ellipsoid(std::vector<double> semi_axes) {
  const int dim = static_cast<int>(semi_axes.size());
  if (dim < 1) throw SpecError("params.semi_axes", "must be non-empty");
  for (double a : semi_axes)
    if (!(a > 0.0)) throw SpecError("params.semi_axes", "entries must be positive");
  auto level = [semi_axes](const Vector& x) {
    double s = 0.0;
    for (std::size_t i = 0; i < semi_axes.size(); ++i) s += x[static_cast<Eigen::Index>(i)] * x[static_cast<Eigen::Index>(i)] / (semi_axes[i] * semi_axes[i]);
    return s;
  };
  auto f = [semi_axes, dim](JetSpan x, JetSpan y) {
    Jet s = x[0] * x[0] / (semi_axes[0] * semi_axes[0]);
    for (int i = 1; i < dim; ++i) {
      const double a = semi_axes[static_cast<std::size_t>(i)];
      s = s + x[static_cast<std::size_t>(i)] * x[static_cast<std::size_t>(i)] / (a * a);
    }
    const Jet inv_w = reciprocal(sqrt(1.0 - s));
    // grad w . y = -sum_i x_i y_i / (a_i^2 w)
    Jet dw = x[0] * y[0] / (semi_axes[0] * semi_axes[0]);
    for (int i = 1; i < dim; ++i) {
      const double a = semi_axes[static_cast<std::size_t>(i)];
      dw = dw + x[static_cast<std::size_t>(i)] * y[static_cast<std::size_t>(i)] / (a * a);
    }
    dw = dw * inv_w;
    return sqrt(detail::dot(y, y) + dw * dw);
  };
  auto sampler = [semi_axes, dim](std::mt19937_64& rng) {
    Vector unit = detail::ball_sampler(dim, 0.7)(rng);
    for (int i = 0; i < dim; ++i) unit[i] *= semi_axes[static_cast<std::size_t>(i)];
    return unit;
  };
  return MetricKernel(KernelKind::ellipsoid, dim, nlohmann::json{{"semi_axes", semi_axes}}, f,
                      [level](const Vector& x, const Vector&) { return level(x) < 1.0; }, sampler);
}

/// Randers space |y| + b <x, y>/|x| (closed drift one-form b d|x|).
inline MetricKernel randers_example(int dim, double b) {
  if (!(std::abs(b) > 0.0 && std::abs(b) < 1.0)) throw SpecError("params.b", "require 0 < |b| < 1");
  auto f = [b](JetSpan x, JetSpan y) {
    return sqrt(detail::dot(y, y)) + b * detail::dot(x, y) * reciprocal(sqrt(detail::dot(x, x)));
  };
  return MetricKernel(KernelKind::randers_example, dim, nlohmann::json{{"b", b}}, f,
                      [](const Vector& x, const Vector&) { return x.norm() > 0.0; },
                      detail::ball_sampler(dim, 1.5, 0.5));
}

inline MetricKernel funk_ball(int dim) {
  auto f = [](JetSpan x, JetSpan y) {
    const Jet c = 1.0 - detail::dot(x, x);
    const Jet xy = detail::dot(x, y);
    return (sqrt(c * detail::dot(y, y) + xy * xy) + xy) * reciprocal(c);
  };
  return MetricKernel(KernelKind::funk_ball, dim, nlohmann::json::object(), f,
                      [](const Vector& x, const Vector&) { return x.squaredNorm() < 1.0; },
                      detail::ball_sampler(dim, 0.6));
}

inline MetricKernel klein_ball(int dim) {
  auto f = [](JetSpan x, JetSpan y) {
    const Jet c = 1.0 - detail::dot(x, x);
    const Jet xy = detail::dot(x, y);
    return sqrt(c * detail::dot(y, y) + xy * xy) * reciprocal(c);
  };
  return MetricKernel(KernelKind::klein_ball, dim, nlohmann::json::object(), f,
                      [](const Vector& x, const Vector&) { return x.squaredNorm() < 1.0; },
                      detail::ball_sampler(dim, 0.6));
}

inline MetricKernel quartic_minkowski(int dim) {
  auto f = [](JetSpan, JetSpan y) {
    Jet s = y[0] * y[0] * y[0] * y[0];
    for (std::size_t k = 1; k < y.size(); ++k) s = s + y[k] * y[k] * y[k] * y[k];
    return pow(s, 0.25);
  };
  return MetricKernel(KernelKind::quartic_minkowski, dim, nlohmann::json::object(), f,
                      [](const Vector&, const Vector&) { return true; }, detail::box_sampler(dim, 1.0));
}

}  // namespace finsler
