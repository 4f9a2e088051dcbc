#include <cmath>
#include <numbers>
#include <random>
#include <vector>

#include <gtest/gtest.h>

#include "finsler/jet.hpp"
#include "support/oracles.hpp"

using finsler::Jet;
using finsler::JetSpan;

namespace {

Jet x1sq_x2(JetSpan x) { return x[0] * x[0] * x[1]; }

std::vector<std::vector<int>> multi_indices(int n, int max_order) {
  const auto& basis = finsler::MonomialBasis::get(n);
  std::vector<std::vector<int>> out;
  for (std::size_t k = 0; k < basis.size(max_order); ++k) out.push_back(basis.exponents(k));
  return out;
}

}  // namespace

TEST(Jet, CoefficientCountIsBinomial) {
  for (int n = 1; n <= 6; ++n)
    for (int p = 0; p <= 4; ++p) {
      const Jet j(n, p);
      double binom = 1.0;
      for (int i = 1; i <= p; ++i) binom = binom * (n + i) / i;
      EXPECT_EQ(j.coeffs().size(), static_cast<std::size_t>(std::lround(binom))) << n << " " << p;
    }
}

TEST(Jet, GradedLexLayout) {
  const auto& b = finsler::MonomialBasis::get(2);
  const std::vector<std::vector<int>> expected{{0, 0}, {1, 0}, {0, 1}, {2, 0}, {1, 1}, {0, 2},
                                               {3, 0}, {2, 1}, {1, 2}, {0, 3}};
  for (std::size_t k = 0; k < expected.size(); ++k) EXPECT_EQ(b.exponents(k), expected[k]);
}

TEST(Jet, PolynomialCoefficients) {
  const std::vector<double> p{2.0, 3.0};
  const Jet j = finsler::lift(x1sq_x2, p, 2);
  EXPECT_DOUBLE_EQ(j.coeff(std::vector<int>{2, 0}), 3.0);
  EXPECT_DOUBLE_EQ(finsler::partial(j, {2, 0}), 6.0);
  EXPECT_DOUBLE_EQ(finsler::partial(j, {0, 0}), 12.0);
  EXPECT_DOUBLE_EQ(j.value(), 12.0);
  EXPECT_DOUBLE_EQ(finsler::partial(j, {1, 1}), 4.0);
}

TEST(Jet, ConstantField) {
  const std::vector<double> p{0.3, -1.0, 2.0};
  const Jet j = finsler::lift([](JetSpan x) { return x[0] * 0.0 + 5.0; }, p, 4);
  EXPECT_DOUBLE_EQ(j.coeffs()[0], 5.0);
  for (std::size_t k = 1; k < j.coeffs().size(); ++k) EXPECT_EQ(j.coeffs()[k], 0.0);
}

TEST(Jet, SinExpAllPartialsToOrderFour) {
  auto field = [](JetSpan x) { return finsler::sin(x[0]) * finsler::exp(x[1]); };
  auto ref = [](const oracle::RVec& x) { return std::sin(x[0]) * std::exp(x[1]); };
  const std::vector<double> p{0.7, -0.2};
  const Jet j = finsler::lift(field, p, 4);
  for (const auto& m : multi_indices(2, 4)) {
    const double fd = static_cast<double>(oracle::richardson(ref, {0.7L, -0.2L}, m, 2e-2L));
    EXPECT_LE(oracle::rel_err(finsler::partial(j, m), fd), 1e-6) << m[0] << "," << m[1];
  }
}

TEST(Jet, MixedPartialOfExpProduct) {
  const std::vector<double> p{1.0, 1.0};
  const Jet j = finsler::lift([](JetSpan x) { return finsler::exp(x[0] * x[1]); }, p, 2);
  EXPECT_NEAR(finsler::partial(j, {1, 1}), 2.0 * std::numbers::e, 1e-13);
  auto ref = [](const oracle::RVec& x) { return std::exp(x[0] * x[1]); };
  const double fd = static_cast<double>(oracle::richardson(ref, {1.0L, 1.0L}, {1, 1}, 2e-2L));
  EXPECT_LE(oracle::rel_err(finsler::partial(j, {1, 1}), fd), 1e-9);
}

TEST(Jet, PartialBeyondOrderThrows) {
  const std::vector<double> p{2.0, 3.0};
  const Jet j = finsler::lift(x1sq_x2, p, 2);
  EXPECT_THROW(finsler::partial(j, {2, 1}), finsler::OrderExceededError);
  EXPECT_THROW(Jet(2, 5), std::invalid_argument);
  EXPECT_THROW(Jet(2, -1), std::invalid_argument);
  EXPECT_THROW(derivative(Jet(2, 0), 0), finsler::OrderExceededError);
}

TEST(Jet, DivisionByZeroConstantTermThrows) {
  const Jet x = Jet::variable(1, 3, 0, 0.0);
  EXPECT_THROW(1.0 / x, finsler::DomainError);
  EXPECT_THROW(finsler::sqrt(x), finsler::DomainError);
  EXPECT_THROW(finsler::log(x - 1.0), finsler::DomainError);
}

TEST(Jet, LinearityOfLift) {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (int trial = 0; trial < 20; ++trial) {
    // random cubic polynomials in 3 variables
    std::vector<double> cf(20), cg(20);
    for (auto& c : cf) c = u(rng);
    for (auto& c : cg) c = u(rng);
    auto poly = [](const std::vector<double>& c) {
      return [c](JetSpan x) {
        const auto& basis = finsler::MonomialBasis::get(3);
        Jet s = x[0] * 0.0;
        for (std::size_t k = 0; k < c.size(); ++k) {
          Jet m = x[0] * 0.0 + 1.0;
          const auto& e = basis.exponents(k);
          for (int v = 0; v < 3; ++v)
            for (int p = 0; p < e[static_cast<std::size_t>(v)]; ++p) m = m * x[static_cast<std::size_t>(v)];
          s = s + c[k] * m;
        }
        return s;
      };
    };
    const double a = u(rng), b = u(rng);
    const std::vector<double> p{u(rng), u(rng), u(rng)};
    const Jet jf = finsler::lift(poly(cf), p, 4), jg = finsler::lift(poly(cg), p, 4);
    const Jet jsum = finsler::lift([&](JetSpan x) { return a * poly(cf)(x) + b * poly(cg)(x); }, p, 4);
    for (std::size_t k = 0; k < jsum.coeffs().size(); ++k)
      EXPECT_NEAR(jsum.coeffs()[k], a * jf.coeffs()[k] + b * jg.coeffs()[k], 1e-12);
  }
}

TEST(Jet, ProductIsTruncatedConvolution) {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  const int n = 3, order = 4;
  const auto& basis = finsler::MonomialBasis::get(n);
  for (int trial = 0; trial < 10; ++trial) {
    const std::vector<double> p{u(rng), u(rng), u(rng)};
    auto f = [](JetSpan x) { return finsler::sin(x[0] + x[1] * x[2]); };
    auto g = [](JetSpan x) { return finsler::exp(x[0] - 0.5 * x[2]) * x[1]; };
    const Jet jf = finsler::lift(f, p, order), jg = finsler::lift(g, p, order);
    const Jet jfg = finsler::lift([&](JetSpan x) { return f(x) * g(x); }, p, order);
    for (std::size_t out = 0; out < basis.size(order); ++out) {
      double conv = 0.0;
      for (std::size_t i = 0; i < basis.size(order); ++i)
        for (std::size_t j = 0; j < basis.size(order); ++j) {
          std::vector<int> e(3);
          for (int v = 0; v < 3; ++v)
            e[static_cast<std::size_t>(v)] = basis.exponents(i)[static_cast<std::size_t>(v)] +
                                             basis.exponents(j)[static_cast<std::size_t>(v)];
          if (e == basis.exponents(out)) conv += jf.coeffs()[i] * jg.coeffs()[j];
        }
      EXPECT_NEAR(jfg.coeffs()[out], conv, 1e-12);
    }
  }
}

TEST(Jet, DerivativeLowersOrder) {
  const std::vector<double> p{0.4, 0.9};
  const Jet j = finsler::lift([](JetSpan x) { return finsler::cos(x[0]) * x[1] * x[1]; }, p, 4);
  const Jet d = derivative(j, 1);
  EXPECT_EQ(d.order(), 3);
  EXPECT_NEAR(d.value(), 2.0 * std::cos(0.4) * 0.9, 1e-15);
  EXPECT_NEAR(finsler::partial(d, {1, 1}), -2.0 * std::sin(0.4), 1e-14);
}

TEST(Jet, RandomFieldsMatchFiniteDifferencesToOrderThree) {
  std::mt19937_64 rng(2024);
  std::uniform_real_distribution<double> u(-0.5, 0.5);
  double worst = 0.0;
  for (int field = 0; field < 50; ++field) {
    const int n = 1 + field % 3;
    const auto expr = oracle::Expr::random(rng, n, 3);
    std::vector<double> p(static_cast<std::size_t>(n));
    for (auto& v : p) v = u(rng);
    const Jet j = finsler::lift([&](JetSpan x) { return expr->eval(std::vector<Jet>(x.begin(), x.end())); }, p, 3);
    const oracle::RVec pr(p.begin(), p.end());
    auto ref = [&](const oracle::RVec& x) { return expr->eval(x); };
    for (const auto& m : multi_indices(n, 3)) {
      const double fd = static_cast<double>(oracle::richardson(ref, pr, m, 2e-2L));
      worst = std::max(worst, oracle::rel_err(finsler::partial(j, m), fd));
    }
  }
  EXPECT_LE(worst, 1e-6);
}
