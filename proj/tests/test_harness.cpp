#include <cmath>
#include <random>

#include <gtest/gtest.h>

#include "finsler/harness.hpp"
#include "support/kernels.hpp"

using namespace finsler;
using nlohmann::json;

namespace {

const json kEuclidean3 = {{"kind", "euclidean"}, {"dim", 3}, {"params", json::object()}};
const json kFunk3 = {{"kind", "funk_ball"}, {"dim", 3}, {"params", json::object()}};
const json kRanders3 = {{"kind", "randers_example"}, {"dim", 3}, {"params", {{"b", 0.3}}}};

SuiteConfig config(const std::string& suite, json metric, int samples, std::uint64_t seed) {
  SuiteConfig c;
  c.suite = suite;
  c.metric = std::move(metric);
  c.samples = samples;
  c.seed = seed;
  return c;
}

}  // namespace

TEST(OrthonormalTriple, GramIsIdentity) {
  std::mt19937_64 rng(1);
  for (const auto& [name, k] : testing_support::builtin_kernels()) {
    for (int s = 0; s < 20; ++s) {
      const ReferenceElement z = testing_support::random_element(k, rng);
      const auto t = sample_orthonormal_triple(k, z, rng);
      EXPECT_LE(max_gram_deviation(fundamental_tensor(k, z), {t[0], t[1], t[2]}), 1e-10) << name;
    }
  }
}

TEST(OrthonormalTriple, SameSeedSameTripleBitwise) {
  const MetricKernel k = randers_example(3, 0.3);
  const ReferenceElement z(Vector{{1.0, 0.2, -0.3}}, Vector{{0.1, 1.0, 0.0}});
  std::mt19937_64 a(42), b(42);
  const auto ta = sample_orthonormal_triple(k, z, a);
  const auto tb = sample_orthonormal_triple(k, z, b);
  for (int i = 0; i < 3; ++i)
    for (int c = 0; c < 3; ++c) EXPECT_EQ(ta[static_cast<std::size_t>(i)][c], tb[static_cast<std::size_t>(i)][c]);
}

TEST(OrthonormalTriple, ParallelDrawsAreResampled) {
  const MetricKernel k = funk_ball(3);
  const FundamentalTensor g = fundamental_tensor(k, ReferenceElement(Vector{{0.2, 0.1, 0.0}}, Vector::Unit(3, 0)));
  // The stub returns the same vector (up to scale) for its first nine draws.
  int calls = 0;
  std::mt19937_64 rng(3);
  auto stub = [&]() -> Vector {
    ++calls;
    if (calls <= 9) return static_cast<double>(calls) * Vector{{1.0, 2.0, 3.0}};
    return random_vector(rng, 3);
  };
  const auto t = sample_orthonormal_triple(g, stub);
  EXPECT_GE(calls, 12);
  EXPECT_LE(max_gram_deviation(g, {t[0], t[1], t[2]}), 1e-10);

  auto always_parallel = [] { return Vector{{1.0, 2.0, 3.0}}; };
  EXPECT_THROW(sample_orthonormal_triple(g, always_parallel, 5), DependentInputError);
}

TEST(OrthonormalTriple, NeedsDimensionThree) {
  const MetricKernel k = euclidean(2);
  std::mt19937_64 rng(4);
  EXPECT_THROW(sample_orthonormal_triple(k, ReferenceElement(Vector::Zero(2), Vector::Unit(2, 0)), rng),
               DimensionError);
  EXPECT_THROW(run_suite(config("lemma-identity", {{"kind", "euclidean"}, {"dim", 2}}, 5, 1)), DimensionError);
}

TEST(RunSuite, DeterministicFieldForField) {
  for (const std::string suite : {"constant-flag", "polarization"}) {
    const auto cfg = config(suite, kRanders3, 20, 11);
    const json a = report_to_json(run_suite(cfg));
    const json b = report_to_json(run_suite(cfg));
    EXPECT_EQ(a.dump(), b.dump()) << suite;
    EXPECT_EQ(report_to_csv(run_suite(cfg)), report_to_csv(run_suite(cfg))) << suite;
  }
  const json c = report_to_json(run_suite(config("constant-flag", kRanders3, 20, 12)));
  EXPECT_NE(c.dump(), report_to_json(run_suite(config("constant-flag", kRanders3, 20, 11))).dump());
}

TEST(RunSuite, LemmaIdentityOnEuclideanIsExactlyZero) {
  const VerificationReport r = run_suite(config("lemma-identity", kEuclidean3, 30, 5));
  ASSERT_NE(r.check("lemma_identity_max"), nullptr);
  EXPECT_EQ(r.check("lemma_identity_max")->residual, 0.0);
  EXPECT_TRUE(r.pass);
}

TEST(RunSuite, ConstantFlagOnFunk) {
  const VerificationReport r = run_suite(config("constant-flag", kFunk3, 100, 7));
  EXPECT_TRUE(r.pass);
  EXPECT_NEAR(*r.stat("flag_mean"), -0.25, 1e-6);
  EXPECT_LE(r.check("flag_spread")->residual, 1e-6);
  EXPECT_EQ(r.skipped(), 0);
}

TEST(RunSuite, SchurOnSphereChart) {
  const json sphere2 = {{"kind", "riemannian"}, {"dim", 3}, {"params", {{"chart", "round_sphere"}, {"radius", 2.0}}}};
  const VerificationReport r = run_suite(config("schur", sphere2, 30, 3));
  EXPECT_TRUE(r.pass);
  EXPECT_NEAR(*r.stat("K_estimate"), 0.25, 1e-6);
}

TEST(RunSuite, NegativeControlsFailTheirThresholds) {
  SuiteConfig cfg = config("negative-controls", json(), 40, 9);
  const VerificationReport r = run_suite(cfg);
  EXPECT_TRUE(r.pass);
  for (const auto& c : r.checks) {
    EXPECT_EQ(c.bound, Bound::min) << c.name;
    EXPECT_TRUE(c.pass) << c.name << " " << c.residual;
  }
  EXPECT_GE(r.check("umbilicity")->residual, 0.4);
  // The same checks on a constant-curvature space must not clear the floors.
  cfg.metric = kFunk3;
  cfg.immersion = {{"kind", "sphere"},
                   {"params", {{"radius", 1.0}}},
                   {"ambient", kEuclidean3}};
  const VerificationReport v = run_suite(cfg);
  EXPECT_FALSE(v.pass);
  EXPECT_FALSE(v.check("flag_spread")->pass);
  EXPECT_FALSE(v.check("umbilicity")->pass);
}

TEST(RunSuite, EllipsoidFailsConstantFlag) {
  const json ell = {{"kind", "ellipsoid"}, {"dim", 3}, {"params", {{"semi_axes", {1.0, 1.0, 0.5}}}}};
  const VerificationReport r = run_suite(config("constant-flag", ell, 50, 2));
  EXPECT_FALSE(r.pass);
  EXPECT_GE(r.check("flag_spread")->residual, 1e-2);
}

TEST(RunSuite, UmbilicExampleOnEuclideanSphere) {
  SuiteConfig cfg = config("umbilic-example", kEuclidean3, 20, 1);
  cfg.immersion = {{"kind", "sphere"}, {"params", {{"radius", 2.0}}}};
  const VerificationReport r = run_suite(cfg);
  EXPECT_TRUE(r.pass);
  EXPECT_NEAR(*r.stat("eta_norm_mean"), 0.5, 1e-8);
  EXPECT_EQ(r.check("beta_bar_max"), nullptr);
  EXPECT_EQ(r.immersion.at("ambient"), metric_to_json(euclidean(3)));
}

TEST(RunSuite, ImmersionAmbientSuppliesTheMetric) {
  SuiteConfig cfg = config("umbilic-example", json(), 5, 1);
  cfg.immersion = {{"kind", "sphere"}, {"params", {{"radius", 1.0}}}, {"ambient", kEuclidean3}};
  EXPECT_TRUE(run_suite(cfg).pass);
  cfg.metric = kFunk3;
  EXPECT_THROW(run_suite(cfg), SpecError);
}

TEST(RunSuite, SamplesOutsideTheDomainAreSkippedAndReported) {
  // A radius-2 sphere does not fit in the unit Funk ball.
  SuiteConfig cfg = config("umbilic-example", kFunk3, 4, 1);
  cfg.immersion = {{"kind", "sphere"}, {"params", {{"radius", 2.0}}}};
  const VerificationReport r = run_suite(cfg);
  EXPECT_EQ(r.skipped(), 4);
  EXPECT_FALSE(r.pass);
  for (const auto& rec : r.records) {
    EXPECT_EQ(rec.attempts, kMaxRedraws + 1);
    EXPECT_FALSE(rec.reason.empty());
  }
  const json j = report_to_json(r);
  EXPECT_EQ(j.at("skipped").size(), 4u);
  EXPECT_TRUE(j.at("checks")[0].at("residual").is_null());
}

TEST(RunSuite, ValidationErrorsNameTheField) {
  auto field_of = [](const SuiteConfig& c) {
    try {
      run_suite(c);
    } catch (const SpecError& e) {
      return e.field();
    }
    return std::string("<none>");
  };
  EXPECT_EQ(field_of(config("bogus", kFunk3, 5, 1)), "suite");
  EXPECT_EQ(field_of(config("schur", kFunk3, 0, 1)), "samples");
  SuiteConfig c = config("schur", kFunk3, 5, 1);
  c.default_tol = 0.0;
  EXPECT_EQ(field_of(c), "tol");
  c = config("schur", kFunk3, 5, 1);
  c.tol["schur_residual_max"] = -1.0;
  EXPECT_EQ(field_of(c), "tol.schur_residual_max");
  EXPECT_EQ(field_of(config("schur", json(), 5, 1)), "metric");
  EXPECT_EQ(field_of(config("schur", {{"kind", "funk_ball"}}, 5, 1)), "dim");
}

TEST(RunSuite, ToleranceOverridesApply) {
  SuiteConfig c = config("constant-flag", kFunk3, 10, 7);
  c.tol["flag_spread"] = 1e-30;
  const VerificationReport r = run_suite(c);
  EXPECT_EQ(r.check("flag_spread")->tol, 1e-30);
  EXPECT_EQ(r.pass, r.check("flag_spread")->residual <= 1e-30);
}

TEST(Report, JsonRoundTripIsLossless) {
  const VerificationReport r = run_suite(config("polarization", kFunk3, 10, 3));
  const json j = report_to_json(r);
  const json again = report_to_json(report_from_json(json::parse(j.dump())));
  EXPECT_EQ(j, again);
  for (const auto& key : {"suite", "metric", "seed", "samples", "checks", "pass"}) EXPECT_TRUE(j.contains(key)) << key;
  EXPECT_EQ(j.at("checks")[0].at("residual").get<double>(), r.checks[0].residual);
}

TEST(Report, CsvHasOneRowPerSample) {
  const VerificationReport r = run_suite(config("constant-flag", kFunk3, 7, 3));
  const std::string csv = report_to_csv(r);
  EXPECT_EQ(std::count(csv.begin(), csv.end(), '\n'), 8);
  EXPECT_EQ(csv.substr(0, csv.find('\n')), "index,attempts,skipped,flag");
}

// Umbilic submanifolds that verify only occur in spaces that also pass the
// constant-flag suite. Checked as an implication over the example spaces.
TEST(UmbilicConsistency, VerifiedUmbilicExampleImpliesConstantFlag) {
  const std::vector<std::pair<json, json>> cases{
      {kEuclidean3, {{"kind", "sphere"}, {"params", {{"radius", 1.0}}}}},
      {kEuclidean3, {{"kind", "plane"}, {"params", {{"origin", {0.0, 0.0, 0.0}}, {"basis", {{1.0, 0.0, 0.0}, {0.0, 1.0, 0.0}}}}}}},
      {kRanders3, {{"kind", "sphere"}, {"params", {{"radius", 1.0}}}}}};
  int verified = 0;
  for (const auto& [metric, imm] : cases) {
    SuiteConfig u = config("umbilic-example", metric, 20, 1);
    u.immersion = imm;
    if (!run_suite(u).pass) continue;
    ++verified;
    EXPECT_TRUE(run_suite(config("constant-flag", metric, 50, 1)).pass) << metric.dump();
  }
  EXPECT_GE(verified, 2);
}
