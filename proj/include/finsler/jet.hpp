#pragma once

// Truncated multivariate Taylor arithmetic (forward-mode, up to order 4).
//
// A Jet in `n` variables of order `p` stores the Taylor coefficients
//   c[m] = (1/m!) d^m f(point)
// for every multi-index m with |m| <= p. Coefficients are dense and ordered
// graded-lexicographically: by total degree, then by exponent vector in
// descending lexicographic order. For two variables (a, b):
//
//   index : 0  1  2  3    4    5    6    7      8      9   ...
//   mono  : 1  a  b  a^2  ab   b^2  a^3  a^2b   ab^2   b^3 ...
//
// Because the ordering is graded, a jet of order p is exactly the prefix of
// the order-4 coefficient array, so jets of different orders share one basis.
// Golden tests index coefficients with this layout.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <map>
#include <memory>
#include <mutex>
#include <numeric>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "finsler/errors.hpp"

namespace finsler {

inline constexpr int kMaxJetOrder = 4;

class MonomialBasis {
public:
  struct Product {
    std::uint32_t lhs;
    std::uint32_t rhs;
    std::uint32_t out;
  };
  static constexpr std::uint32_t npos = 0xffffffffu;

  /// Shared basis for `num_vars` variables, built once and cached.
  static const MonomialBasis& get(int num_vars) {
    if (num_vars < 1) throw std::invalid_argument("jet: num_vars must be positive");
    static std::mutex mutex;
    static std::map<int, std::unique_ptr<MonomialBasis>> cache;
    std::lock_guard lock(mutex);
    auto& slot = cache[num_vars];
    if (!slot) slot.reset(new MonomialBasis(num_vars));
    return *slot;
  }

  int num_vars() const noexcept { return num_vars_; }

  /// Number of monomials of total degree <= order.
  std::size_t size(int order) const { return size_upto_.at(static_cast<std::size_t>(order)); }

  const std::vector<int>& exponents(std::size_t k) const { return exponents_[k]; }
  int degree(std::size_t k) const { return degree_[k]; }

  /// m! for monomial k.
  double factorial_weight(std::size_t k) const { return weight_[k]; }

  std::size_t index(std::span<const int> multi) const {
    auto it = lookup_.find(std::vector<int>(multi.begin(), multi.end()));
    if (it == lookup_.end()) throw std::out_of_range("jet: multi-index not in basis");
    return it->second;
  }

  /// Index of monomial k times variable v, or npos when that exceeds kMaxJetOrder.
  std::uint32_t shift(int v, std::size_t k) const { return shift_[static_cast<std::size_t>(v)][k]; }

  /// Products sorted by output index; entries with out < size(p) are exactly
  /// those needed for a product truncated at order p.
  const std::vector<Product>& products() const noexcept { return products_; }

private:
  explicit MonomialBasis(int num_vars) : num_vars_(num_vars) {
    std::vector<int> current(static_cast<std::size_t>(num_vars), 0);
    for (int d = 0; d <= kMaxJetOrder; ++d) {
      enumerate(current, 0, d);
      size_upto_[static_cast<std::size_t>(d)] = exponents_.size();
    }
    for (std::size_t k = 0; k < exponents_.size(); ++k) {
      lookup_.emplace(exponents_[k], k);
      degree_.push_back(std::accumulate(exponents_[k].begin(), exponents_[k].end(), 0));
      double w = 1.0;
      for (int e : exponents_[k])
        for (int f = 2; f <= e; ++f) w *= f;
      weight_.push_back(w);
    }
    shift_.assign(static_cast<std::size_t>(num_vars), std::vector<std::uint32_t>(exponents_.size(), npos));
    for (int v = 0; v < num_vars; ++v) {
      for (std::size_t k = 0; k < exponents_.size(); ++k) {
        if (degree_[k] >= kMaxJetOrder) continue;
        auto e = exponents_[k];
        ++e[static_cast<std::size_t>(v)];
        shift_[static_cast<std::size_t>(v)][k] = static_cast<std::uint32_t>(lookup_.at(e));
      }
    }
    for (std::size_t i = 0; i < exponents_.size(); ++i) {
      for (std::size_t j = 0; j < exponents_.size(); ++j) {
        if (degree_[i] + degree_[j] > kMaxJetOrder) continue;
        std::vector<int> e(exponents_[i]);
        for (std::size_t v = 0; v < e.size(); ++v) e[v] += exponents_[j][v];
        products_.push_back({static_cast<std::uint32_t>(i), static_cast<std::uint32_t>(j),
                             static_cast<std::uint32_t>(lookup_.at(e))});
      }
    }
    std::stable_sort(products_.begin(), products_.end(),
                     [](const Product& a, const Product& b) { return a.out < b.out; });
  }

  // Exponent vectors of total degree `remaining` over variables [var, n), lex-descending.
  void enumerate(std::vector<int>& current, int var, int remaining) {
    if (var == num_vars_ - 1) {
      current[static_cast<std::size_t>(var)] = remaining;
      exponents_.push_back(current);
      current[static_cast<std::size_t>(var)] = 0;
      return;
    }
    for (int e = remaining; e >= 0; --e) {
      current[static_cast<std::size_t>(var)] = e;
      enumerate(current, var + 1, remaining - e);
    }
    current[static_cast<std::size_t>(var)] = 0;
  }

  int num_vars_;
  std::array<std::size_t, kMaxJetOrder + 1> size_upto_{};
  std::vector<std::vector<int>> exponents_;
  std::vector<int> degree_;
  std::vector<double> weight_;
  std::map<std::vector<int>, std::size_t> lookup_;
  std::vector<std::vector<std::uint32_t>> shift_;
  std::vector<Product> products_;
};

/// Truncated Taylor expansion of a scalar field. Immutable value type.
class Jet {
public:
  /// Zero jet.
  Jet(int num_vars, int order)
      : basis_(&MonomialBasis::get(num_vars)), order_(check_order(order)),
        coeffs_(basis_->size(order), 0.0) {}

  static Jet constant(int num_vars, int order, double value) {
    Jet j(num_vars, order);
    j.coeffs_[0] = value;
    return j;
  }

  /// The coordinate function `var` expanded at `value`.
  static Jet variable(int num_vars, int order, int var, double value) {
    if (var < 0 || var >= num_vars) throw std::out_of_range("jet: variable index out of range");
    Jet j = constant(num_vars, order, value);
    if (order >= 1) j.coeffs_[static_cast<std::size_t>(var) + 1] = 1.0;
    return j;
  }

  int num_vars() const noexcept { return basis_->num_vars(); }
  int order() const noexcept { return order_; }
  double value() const noexcept { return coeffs_[0]; }
  std::span<const double> coeffs() const noexcept { return coeffs_; }
  const MonomialBasis& basis() const noexcept { return *basis_; }

  /// Raw Taylor coefficient for a multi-index (zero past the truncation order is
  /// not representable; asking for it throws).
  double coeff(std::span<const int> multi) const {
    check_degree(multi);
    return coeffs_[basis_->index(multi)];
  }

  Jet truncated(int order) const {
    if (order > order_) throw OrderExceededError("jet: cannot raise truncation order");
    Jet j(num_vars(), order);
    std::copy_n(coeffs_.begin(), j.coeffs_.size(), j.coeffs_.begin());
    return j;
  }

  friend Jet operator+(const Jet& a, const Jet& b) { return combine(a, b, 1.0); }
  friend Jet operator-(const Jet& a, const Jet& b) { return combine(a, b, -1.0); }

  friend Jet operator*(const Jet& a, const Jet& b) {
    check_compatible(a, b);
    Jet r(a.num_vars(), std::min(a.order_, b.order_));
    const std::size_t limit = r.coeffs_.size();
    for (const auto& p : a.basis_->products()) {
      if (p.out >= limit) break;
      r.coeffs_[p.out] += a.coeffs_[p.lhs] * b.coeffs_[p.rhs];
    }
    return r;
  }

  friend Jet operator-(const Jet& a) { return a * -1.0; }

  friend Jet operator+(const Jet& a, double s) {
    Jet r(a);
    r.coeffs_[0] += s;
    return r;
  }
  friend Jet operator+(double s, const Jet& a) { return a + s; }
  friend Jet operator-(const Jet& a, double s) { return a + (-s); }
  friend Jet operator-(double s, const Jet& a) { return (-a) + s; }
  friend Jet operator*(const Jet& a, double s) {
    Jet r(a);
    for (double& c : r.coeffs_) c *= s;
    return r;
  }
  friend Jet operator*(double s, const Jet& a) { return a * s; }
  friend Jet operator/(const Jet& a, double s) { return a * (1.0 / s); }

  friend Jet reciprocal(const Jet& a);
  friend Jet operator/(const Jet& a, const Jet& b) { return a * reciprocal(b); }
  friend Jet operator/(double s, const Jet& b) { return reciprocal(b) * s; }

  /// f(a) for a univariate f given by its Taylor coefficients at a.value():
  /// sum_m taylor[m] (a - a0)^m, truncated at a.order().
  friend Jet compose(const Jet& a, std::span<const double> taylor) {
    Jet h(a);
    h.coeffs_[0] = 0.0;
    const int top = std::min<int>(a.order_, static_cast<int>(taylor.size()) - 1);
    Jet r = constant(a.num_vars(), a.order_, taylor[static_cast<std::size_t>(top)]);
    for (int m = top - 1; m >= 0; --m) r = r * h + taylor[static_cast<std::size_t>(m)];
    return r;
  }

  /// d/dx_var; the result has order one lower.
  friend Jet derivative(const Jet& a, int var) {
    if (a.order_ < 1) throw OrderExceededError("jet: derivative of an order-0 jet");
    if (var < 0 || var >= a.num_vars()) throw std::out_of_range("jet: variable index out of range");
    Jet r(a.num_vars(), a.order_ - 1);
    for (std::size_t k = 0; k < r.coeffs_.size(); ++k) {
      const auto up = a.basis_->shift(var, k);
      r.coeffs_[k] = (a.basis_->exponents(k)[static_cast<std::size_t>(var)] + 1) * a.coeffs_[up];
    }
    return r;
  }

private:
  static int check_order(int order) {
    if (order < 0 || order > kMaxJetOrder)
      throw std::invalid_argument("jet: order must be in [0, " + std::to_string(kMaxJetOrder) + "]");
    return order;
  }

  void check_degree(std::span<const int> multi) const {
    if (static_cast<int>(multi.size()) != num_vars())
      throw std::invalid_argument("jet: multi-index length differs from num_vars");
    int deg = 0;
    for (int e : multi) {
      if (e < 0) throw std::invalid_argument("jet: negative exponent");
      deg += e;
    }
    if (deg > order_)
      throw OrderExceededError("jet: multi-index of degree " + std::to_string(deg) +
                               " exceeds order " + std::to_string(order_));
  }

  static void check_compatible(const Jet& a, const Jet& b) {
    if (a.basis_ != b.basis_) throw std::invalid_argument("jet: mismatched variable count");
  }

  static Jet combine(const Jet& a, const Jet& b, double sign) {
    check_compatible(a, b);
    Jet r(a.num_vars(), std::min(a.order_, b.order_));
    for (std::size_t k = 0; k < r.coeffs_.size(); ++k) r.coeffs_[k] = a.coeffs_[k] + sign * b.coeffs_[k];
    return r;
  }

  const MonomialBasis* basis_;
  int order_;
  std::vector<double> coeffs_;
};

inline Jet reciprocal(const Jet& a) {
  const double a0 = a.value();
  if (a0 == 0.0) throw DomainError("jet: division by a jet with zero constant term");
  std::array<double, kMaxJetOrder + 1> t{};
  double p = 1.0 / a0;
  for (int m = 0; m <= kMaxJetOrder; ++m) {
    t[static_cast<std::size_t>(m)] = (m % 2 == 0 ? p : -p);
    p /= a0;
  }
  return compose(a, t);
}

/// a^e for real e; requires a positive constant term.
inline Jet pow(const Jet& a, double e) {
  const double a0 = a.value();
  if (!(a0 > 0.0)) throw DomainError("jet: pow of a non-positive value");
  std::array<double, kMaxJetOrder + 1> t{};
  double binom = 1.0;
  for (int m = 0; m <= kMaxJetOrder; ++m) {
    t[static_cast<std::size_t>(m)] = binom * std::pow(a0, e - m);
    binom *= (e - m) / (m + 1);
  }
  return compose(a, t);
}

inline Jet sqrt(const Jet& a) {
  if (!(a.value() > 0.0)) throw DomainError("jet: sqrt of a non-positive value");
  return pow(a, 0.5);
}

inline Jet exp(const Jet& a) {
  std::array<double, kMaxJetOrder + 1> t{};
  double f = std::exp(a.value());
  for (int m = 0; m <= kMaxJetOrder; ++m) {
    t[static_cast<std::size_t>(m)] = f;
    f /= (m + 1);
  }
  return compose(a, t);
}

inline Jet log(const Jet& a) {
  const double a0 = a.value();
  if (!(a0 > 0.0)) throw DomainError("jet: log of a non-positive value");
  std::array<double, kMaxJetOrder + 1> t{};
  t[0] = std::log(a0);
  double p = 1.0;
  for (int m = 1; m <= kMaxJetOrder; ++m) {
    p /= a0;
    t[static_cast<std::size_t>(m)] = (m % 2 == 1 ? p : -p) / m;
  }
  return compose(a, t);
}

inline Jet sin(const Jet& a) {
  const double s = std::sin(a.value()), c = std::cos(a.value());
  const std::array<double, kMaxJetOrder + 1> t{s, c, -s / 2.0, -c / 6.0, s / 24.0};
  return compose(a, t);
}

inline Jet cos(const Jet& a) {
  const double s = std::sin(a.value()), c = std::cos(a.value());
  const std::array<double, kMaxJetOrder + 1> t{c, -s, -c / 2.0, s / 6.0, c / 24.0};
  return compose(a, t);
}

/// Partial derivative d^m f = m! c[m].
inline double partial(const Jet& jet, std::span<const int> multi) {
  const double c = jet.coeff(multi);
  return c * jet.basis().factorial_weight(jet.basis().index(multi));
}

inline double partial(const Jet& jet, std::initializer_list<int> multi) {
  return partial(jet, std::span<const int>(multi.begin(), multi.size()));
}

/// Expands `field` (callable on std::span<const Jet>, returning Jet) at `point`.
template <class Field>
Jet lift(Field&& field, std::span<const double> point, int order) {
  const int n = static_cast<int>(point.size());
  std::vector<Jet> vars;
  vars.reserve(point.size());
  for (int i = 0; i < n; ++i) vars.push_back(Jet::variable(n, order, i, point[static_cast<std::size_t>(i)]));
  Jet out = field(std::span<const Jet>(vars));
  if (out.num_vars() != n) throw std::logic_error("jet: field returned a jet in the wrong variables");
  return out;
}

}  // namespace finsler
