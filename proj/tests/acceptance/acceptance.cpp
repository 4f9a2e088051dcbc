// Acceptance run: one line per criterion, non-zero exit if any fails.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <numbers>
#include <random>
#include <string>
#include <vector>

#include "finsler/finsler.hpp"
#include "support/kernels.hpp"
#include "support/oracles.hpp"

using namespace finsler;
using nlohmann::json;
using testing_support::random_element;

namespace {

struct Outcome {
  bool pass = true;
  std::string detail;

  void require(bool ok, const std::string& what) {
    if (!ok) {
      pass = false;
      if (!detail.empty()) detail += "; ";
      detail += what;
    }
  }
};

std::string sci(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3g", v);
  return buf;
}

std::vector<std::vector<int>> multi_indices(int n, int order) {
  const auto& basis = MonomialBasis::get(n);
  std::vector<std::vector<int>> out;
  for (std::size_t k = 0; k < basis.size(order); ++k) out.push_back(basis.exponents(k));
  return out;
}

json metric_doc(const std::string& kind, int dim, json params = json::object()) {
  return {{"kind", kind}, {"dim", dim}, {"params", std::move(params)}};
}

struct NamedSpec {
  std::string name;
  json spec;
  double K;
};

// Kernels with constant flag curvature and the value they should report.
std::vector<NamedSpec> constant_flag_specs() {
  return {{"euclidean", metric_doc("euclidean", 3), 0.0},
          {"quartic_minkowski", metric_doc("quartic_minkowski", 3), 0.0},
          {"round_sphere_r1", metric_doc("round_sphere", 3, {{"radius", 1.0}}), 1.0},
          {"round_sphere_r2", metric_doc("round_sphere", 3, {{"radius", 2.0}}), 0.25},
          {"funk_ball", metric_doc("funk_ball", 3), -0.25},
          {"klein_ball", metric_doc("klein_ball", 3), -1.0}};
}

const json kEllipsoid = metric_doc("ellipsoid", 3, {{"semi_axes", {1.0, 1.0, 0.5}}});

VerificationReport suite(const std::string& name, const json& metric, int samples, std::uint64_t seed,
                         const json& immersion = json()) {
  SuiteConfig c;
  c.suite = name;
  c.metric = metric;
  c.immersion = immersion;
  c.samples = samples;
  c.seed = seed;
  return run_suite(c);
}

Outcome jets() {
  Outcome o;
  std::mt19937_64 rng(2024);
  std::uniform_real_distribution<double> u(-0.5, 0.5);
  double worst = 0.0;
  for (int field = 0; field < 50; ++field) {
    const int n = 1 + field % 3;
    const auto expr = oracle::Expr::random(rng, n, 3);
    std::vector<double> p(static_cast<std::size_t>(n));
    for (auto& v : p) v = u(rng);
    const Jet j = lift([&](JetSpan x) { return expr->eval(std::vector<Jet>(x.begin(), x.end())); }, p, 3);
    auto ref = [&](const oracle::RVec& x) { return expr->eval(x); };
    for (const auto& m : multi_indices(n, 3)) {
      const double fd = static_cast<double>(oracle::richardson(ref, oracle::RVec(p.begin(), p.end()), m, 2e-2L));
      worst = std::max(worst, oracle::rel_err(partial(j, m), fd));
    }
  }
  o.require(worst <= 1e-6, "worst relative error " + sci(worst));
  if (o.pass) o.detail = "50 fields, worst relative error " + sci(worst);
  return o;
}

Outcome metric_axioms() {
  Outcome o;
  std::mt19937_64 rng(6);
  std::uniform_real_distribution<double> lambda(0.01, 10.0);
  double worst = 0.0;
  for (const auto& [name, k] : testing_support::builtin_kernels()) {
    for (int s = 0; s < 100; ++s) {
      const ReferenceElement z = random_element(k, rng);
      const double F = k(z.x, z.y), l = lambda(rng);
      const double hom = std::abs(k(z.x, Vector(l * z.y)) - l * F) / (l * F);
      const auto g = fundamental_tensor(k, z);
      const double euler = std::abs(z.y.dot(g.g * z.y) - F * F) / (F * F);
      const double min_eig = Eigen::SelfAdjointEigenSolver<Matrix>(g.g).eigenvalues().minCoeff();
      worst = std::max({worst, hom, euler});
      if (!(min_eig > 0.0)) o.require(false, name + " not positive definite");
    }
  }
  o.require(worst <= 1e-8, "worst homogeneity/Euler deviation " + sci(worst));
  if (o.pass) o.detail = "8 kernels x 100 elements, worst relative deviation " + sci(worst);
  return o;
}

Outcome riemannian_reduction() {
  Outcome o;
  std::mt19937_64 rng(3);
  struct Case {
    std::string name;
    MetricKernel kernel;
    oracle::ChartMetric chart;
  };
  const std::vector<Case> cases{{"round_sphere", round_sphere(3, 1.0), oracle::sphere_chart(3, 1.0L)},
                                {"ellipsoid", ellipsoid({1.0, 1.0, 0.5}), oracle::ellipsoid_chart({1.0L, 1.0L, 0.5L})}};
  double worst = 0.0;
  for (const auto& c : cases) {
    for (int s = 0; s < 10; ++s) {
      const ReferenceElement z = random_element(c.kernel, rng);
      const auto ref = oracle::chart_geometry(c.chart, z.x);
      const LocalGeometry geo = local_geometry(c.kernel, z, 4);
      for (int i = 0; i < 3; ++i) {
        oracle::Real G = 0;
        for (int j = 0; j < 3; ++j)
          for (int k = 0; k < 3; ++k) {
            G += ref.Gamma(i, j, k) * z.y[j] * z.y[k] / 2;
            worst = std::max(worst, std::abs(geo.gamma(i, j, k) - static_cast<double>(ref.Gamma(i, j, k))));
            for (int l = 0; l < 3; ++l)
              worst = std::max(worst, std::abs(geo.R(i, j, k, l) - static_cast<double>(ref.R(i, j, k, l))));
          }
        worst = std::max(worst, std::abs(geo.G[i] - static_cast<double>(G)) / std::max(1.0, geo.G.norm()));
      }
    }
  }
  o.require(worst <= 1e-6, "worst deviation " + sci(worst));
  if (o.pass) o.detail = "sphere and ellipsoid, worst deviation " + sci(worst);
  return o;
}

Outcome constant_flag() {
  Outcome o;
  std::string summary;
  for (const auto& s : constant_flag_specs()) {
    const VerificationReport r = suite("constant-flag", s.spec, 100, 7);
    const double spread = r.check("flag_spread")->residual, mean = *r.stat("flag_mean");
    o.require(spread <= 1e-6, s.name + " spread " + sci(spread));
    o.require(std::abs(mean - s.K) <= 1e-6, s.name + " mean " + sci(mean));
    summary += s.name + "=" + sci(mean) + " ";
  }
  const double ell = suite("constant-flag", kEllipsoid, 100, 7).check("flag_spread")->residual;
  o.require(ell >= 1e-2, "ellipsoid spread " + sci(ell));
  if (o.pass) o.detail = summary + "ellipsoid spread " + sci(ell);
  return o;
}

Outcome schur() {
  Outcome o;
  double worst = 0.0;
  for (const auto& s : constant_flag_specs()) {
    const double r = suite("schur", s.spec, 100, 5).check("schur_residual_max")->residual;
    worst = std::max(worst, r);
    o.require(r <= 1e-6, s.name + " residual " + sci(r));
  }
  const double ell = suite("schur", kEllipsoid, 100, 5).check("schur_residual_max")->residual;
  o.require(ell >= 1e-2, "ellipsoid residual " + sci(ell));
  if (o.pass) o.detail = "worst residual " + sci(worst) + ", ellipsoid " + sci(ell);
  return o;
}

Outcome lemma() {
  Outcome o;
  double worst = 0.0;
  for (const auto& s : constant_flag_specs()) {
    const double r = suite("lemma-identity", s.spec, 100, 6).check("lemma_identity_max")->residual;
    worst = std::max(worst, r);
    o.require(r <= 1e-6, s.name + " max " + sci(r));
  }
  const double ell = suite("lemma-identity", kEllipsoid, 100, 6).check("lemma_identity_max")->residual;
  o.require(ell >= 1e-3, "ellipsoid witness " + sci(ell));
  if (o.pass) o.detail = "worst " + sci(worst) + ", ellipsoid witness " + sci(ell);
  return o;
}

Outcome polarization() {
  Outcome o;
  double worst = 0.0, rotated = 0.0;
  for (const auto& s : constant_flag_specs()) {
    const VerificationReport r = suite("polarization", s.spec, 100, 8);
    const double d = r.check("polarization_max")->residual;
    worst = std::max(worst, d);
    rotated = std::max(rotated, r.check("rotated_orthonormality")->residual);
    o.require(d <= 1e-6, s.name + " |lhs - rhs| " + sci(d));
  }
  for (const json& spec : {kEllipsoid, metric_doc("randers_example", 3, {{"b", 0.3}})})
    rotated = std::max(rotated, suite("polarization", spec, 100, 8).check("rotated_orthonormality")->residual);
  o.require(rotated <= 1e-10, "rotated pair deviation " + sci(rotated));
  if (o.pass) o.detail = "worst " + sci(worst) + ", rotated deviation " + sci(rotated);
  return o;
}

Outcome umbilic_example() {
  Outcome o;
  const json randers = metric_doc("randers_example", 3, {{"b", 0.3}});
  const json sphere = {{"kind", "sphere"}, {"params", {{"radius", 1.0}, {"center", {0.0, 0.0, 0.0}}}}};
  const VerificationReport r = suite("umbilic-example", randers, 100, 1, sphere);
  for (const auto& c : r.checks) o.require(c.pass, c.name + " " + sci(c.residual));
  const double cyl = suite("negative-controls", json(), 50, 1).check("umbilicity")->residual;
  o.require(cyl >= 0.4, "cylinder umbilicity " + sci(cyl));
  if (o.pass) o.detail = "all checks pass, cylinder umbilicity " + sci(cyl);
  return o;
}

Outcome weingarten() {
  Outcome o;
  const std::vector<Immersion> cases{
      sphere_immersion(euclidean(3), 1.0, Vector::Zero(3)),
      sphere_immersion(randers_example(3, 0.3), 1.0, Vector::Zero(3)),
      sphere_immersion(funk_ball(3), 0.4, Vector::Zero(3)),
      sphere_immersion(euclidean(4), 2.0, Vector::Zero(4)),
      cylinder_immersion(euclidean(3), 1.0),
      polynomial_immersion(euclidean(3), 2, {{{1.0, {1, 0}}}, {{1.0, {0, 1}}}, {{0.5, {2, 0}}, {-0.5, {0, 2}}}}),
      plane_immersion(klein_ball(4), Vector::Zero(4), {Vector(0.5 * Vector::Unit(4, 0)), Vector(0.5 * Vector::Unit(4, 2))})};
  double worst = 0.0;
  for (const Immersion& imm : cases) {
    const auto rec = detail::run_samples(13, 10, [&](std::mt19937_64& rng, SampleRecord& r) {
      const SubReferenceElement sub(imm.sample_parameter(rng), random_vector(rng, imm.dim_sub()));
      r.values.emplace_back("duality", weingarten_duality_residual(imm, sub));
    });
    const double w = detail::max_of(detail::column(rec, "duality"));
    o.require(w <= 1e-6, imm.kind() + " residual " + sci(w));
    worst = std::max(worst, w);
  }
  if (o.pass) o.detail = "7 immersions, worst residual " + sci(worst);
  return o;
}

Outcome geodesics() {
  Outcome o;
  std::mt19937_64 rng(10);
  double drift = 0.0;
  for (const auto& [name, k] : testing_support::builtin_kernels()) {
    int done = 0;
    for (int attempt = 0; done < 3 && attempt < 30; ++attempt) {
      const Vector x0 = k.sample_point(rng);
      Vector y0 = random_vector(rng, k.dim());
      if (!k.contains(x0, y0)) continue;
      y0 *= 0.25 / k(x0, y0);
      try {
        const GeodesicPath p = integrate_geodesic(k, x0, y0, 2.0, 512);
        for (std::size_t i = 0; i < p.x.size(); ++i) drift = std::max(drift, std::abs(k(p.x[i], p.y[i]) - 0.25));
        ++done;
      } catch (const DomainExitError&) {
      }
    }
    o.require(done == 3, name + " could not complete 3 paths");
  }
  o.require(drift <= 1e-6, "F drift " + sci(drift));

  const MetricKernel sphere3 = round_sphere(3, 1.0);
  const Vector x0{{0.4, -0.2, 0.1}}, y0{{0.3, 0.8, -0.5}};
  const Vector exact = oracle::GreatCircle(x0, y0, 1.0).x(2.0);
  const double e1 = (integrate_geodesic(sphere3, x0, y0, 2.0, 64).x.back() - exact).norm();
  const double e2 = (integrate_geodesic(sphere3, x0, y0, 2.0, 128).x.back() - exact).norm();
  const double order = std::log2(e1 / e2);
  o.require(order > 3.6 && order < 4.4, "observed order " + sci(order));

  const MetricKernel sphere2 = round_sphere(2, 1.0);
  const Vector a{{0.5, 0.0}};
  const Vector v = Vector{{0.0, 1.0}} / sphere2(a, Vector{{0.0, 1.0}});
  const double closure = (integrate_geodesic(sphere2, a, v, 2.0 * std::numbers::pi, 1024).x.back() - a).norm();
  o.require(closure <= 1e-4, "closure " + sci(closure));
  if (o.pass) o.detail = "F drift " + sci(drift) + ", order " + sci(order) + ", closure " + sci(closure);
  return o;
}

Outcome determinism() {
  Outcome o;
  const json funk = metric_doc("funk_ball", 3);
  const json randers = metric_doc("randers_example", 3, {{"b", 0.3}});
  const json sphere = {{"kind", "sphere"}, {"params", {{"radius", 1.0}}}};
  int compared = 0;
  for (const std::string name : suite_names()) {
    const json metric = name == "umbilic-example" ? randers : name == "negative-controls" ? json() : funk;
    const json imm = name == "umbilic-example" ? sphere : json();
    const VerificationReport a = suite(name, metric, 10, 99, imm), b = suite(name, metric, 10, 99, imm);
    o.require(report_to_json(a).dump() == report_to_json(b).dump(), name + " JSON differs");
    o.require(report_to_csv(a) == report_to_csv(b), name + " CSV differs");
    ++compared;
  }
  if (o.pass) o.detail = std::to_string(compared) + " suites byte-identical across repeated runs";
  return o;
}

}  // namespace

int main() {
  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria{
      {"jet oracle equivalence", jets},
      {"metric axioms", metric_axioms},
      {"Riemannian reduction", riemannian_reduction},
      {"constant flag curvature", constant_flag},
      {"Schur form", schur},
      {"mixed-term identity", lemma},
      {"polarization", polarization},
      {"Randers sphere end-to-end", umbilic_example},
      {"Weingarten duality", weingarten},
      {"geodesics", geodesics},
      {"determinism", determinism}};
  int failed = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    const auto start = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = criteria[i].second();
    } catch (const std::exception& e) {
      o.pass = false;
      o.detail = std::string("exception: ") + e.what();
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    std::printf("criterion %2zu %s: %s (%s) [%.1fs]\n", i + 1, o.pass ? "PASS" : "FAIL", criteria[i].first.c_str(),
                o.detail.c_str(), secs);
    std::fflush(stdout);
    if (!o.pass) ++failed;
  }
  std::printf("%d of %zu criteria passed\n", static_cast<int>(criteria.size()) - failed, criteria.size());
  return failed == 0 ? 0 : 1;
}
