#pragma once

// Verification suites and their reports.
//
// Every sample i draws from its own generator seeded by (seed, i), so a
// report depends only on the configuration. A sample whose draw lands
// outside a domain (or on a degenerate flag) is redrawn from the same stream
// up to 10 times and then recorded as skipped.
//
// Checks carry a bound: "max" checks pass when residual <= tol, "min" checks
// (negative controls) pass when residual >= tol.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <limits>
#include <map>
#include <optional>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "finsler/curvature.hpp"
#include "finsler/errors.hpp"
#include "finsler/kernel.hpp"
#include "finsler/local_geometry.hpp"
#include "finsler/metric.hpp"
#include "finsler/spec_io.hpp"
#include "finsler/submanifold.hpp"

namespace finsler {

inline const std::vector<std::string>& suite_names() {
  static const std::vector<std::string> names{"constant-flag", "lemma-identity", "polarization",
                                              "schur",         "umbilic-example", "negative-controls"};
  return names;
}

struct SuiteConfig {
  std::string suite;
  nlohmann::json metric;     // null only for negative-controls (defaults to the ellipsoid)
  nlohmann::json immersion;  // null unless the suite uses one
  int samples = 100;
  std::uint64_t seed = 0;
  double default_tol = 1e-6;
  double default_floor = 1e-3;
  std::map<std::string, double> tol;  // per-check overrides
};

enum class Bound { max, min };

struct CheckRecord {
  std::string name;
  double residual = 0.0;
  double tol = 0.0;
  bool pass = false;
  Bound bound = Bound::max;
};

struct SampleRecord {
  int index = 0;
  int attempts = 0;
  bool skipped = false;
  std::string reason;  // last error when skipped
  std::vector<std::pair<std::string, double>> values;
};

struct VerificationReport {
  std::string suite;
  nlohmann::json metric;
  nlohmann::json immersion;
  std::uint64_t seed = 0;
  int samples = 0;
  std::vector<CheckRecord> checks;
  std::vector<std::pair<std::string, double>> stats;
  std::vector<SampleRecord> records;
  bool pass = false;

  int skipped() const {
    return static_cast<int>(std::count_if(records.begin(), records.end(), [](const auto& r) { return r.skipped; }));
  }

  const CheckRecord* check(const std::string& name) const {
    for (const auto& c : checks)
      if (c.name == name) return &c;
    return nullptr;
  }

  std::optional<double> stat(const std::string& name) const {
    for (const auto& [k, v] : stats)
      if (k == name) return v;
    return std::nullopt;
  }
};

inline constexpr int kMaxRedraws = 10;

/// Generator for sample `index` of a run seeded with `seed`.
inline std::mt19937_64 sample_rng(std::uint64_t seed, int index) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(index)};
  return std::mt19937_64(seq);
}

inline Vector random_vector(std::mt19937_64& rng, int n) {
  std::normal_distribution<double> normal(0.0, 1.0);
  Vector v(n);
  for (int i = 0; i < n; ++i) v[i] = normal(rng);
  return v;
}

/// Three g-orthonormal vectors from `draw()`, redrawing while the normalized
/// Gram determinant of the raw draws is below 1e-6.
template <class Draw>
std::array<Vector, 3> sample_orthonormal_triple(const FundamentalTensor& g, Draw&& draw, int max_attempts = 100) {
  if (g.dim() < 3) throw DimensionError("sample_orthonormal_triple: dimension must be at least 3");
  for (int attempt = 0; attempt < max_attempts; ++attempt) {
    const std::array<Vector, 3> v{draw(), draw(), draw()};
    Eigen::Matrix3d gram;
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j)
        gram(i, j) = inner(g, v[static_cast<std::size_t>(i)], v[static_cast<std::size_t>(j)]) /
                     (norm(g, v[static_cast<std::size_t>(i)]) * norm(g, v[static_cast<std::size_t>(j)]));
    if (!(gram.determinant() >= 1e-6)) continue;
    const auto e = gram_schmidt(g, {v[0], v[1], v[2]});
    return {e[0], e[1], e[2]};
  }
  throw DependentInputError("sample_orthonormal_triple: draws stayed nearly dependent");
}

inline std::array<Vector, 3> sample_orthonormal_triple(const MetricKernel& kernel, const ReferenceElement& z,
                                                       std::mt19937_64& rng) {
  if (kernel.dim() < 3) throw DimensionError("sample_orthonormal_triple: dimension must be at least 3");
  const FundamentalTensor g = fundamental_tensor(kernel, z);
  return sample_orthonormal_triple(g, [&] { return random_vector(rng, kernel.dim()); });
}

/// A full g-orthonormal basis from random draws.
inline std::vector<Vector> random_orthonormal_frame(const FundamentalTensor& g, std::mt19937_64& rng) {
  std::vector<Vector> v;
  for (int i = 0; i < g.dim(); ++i) v.push_back(random_vector(rng, g.dim()));
  return gram_schmidt(g, v);
}

namespace detail {

inline bool redrawable(const std::exception_ptr& e) {
  try {
    std::rethrow_exception(e);
  } catch (const DomainError&) {
    return true;
  } catch (const DomainExitError&) {
    return true;
  } catch (const DegenerateFlagError&) {
    return true;
  } catch (const DependentInputError&) {
    return true;
  } catch (const MetricDegeneracyError&) {
    return true;
  } catch (const ImmersionError&) {
    return true;
  } catch (...) {
    return false;
  }
}

/// Runs `body(rng, record)` for each sample with redraws; `body` fills record.values.
template <class Body>
std::vector<SampleRecord> run_samples(std::uint64_t seed, int samples, Body&& body) {
  std::vector<SampleRecord> out;
  for (int i = 0; i < samples; ++i) {
    std::mt19937_64 rng = sample_rng(seed, i);
    SampleRecord rec;
    rec.index = i;
    for (;;) {
      ++rec.attempts;
      rec.values.clear();
      try {
        body(rng, rec);
        break;
      } catch (const std::exception& e) {
        if (!redrawable(std::current_exception())) throw;
        rec.reason = e.what();
        if (rec.attempts > kMaxRedraws) {
          rec.skipped = true;
          rec.values.clear();
          break;
        }
      }
    }
    if (!rec.skipped) rec.reason.clear();
    out.push_back(std::move(rec));
  }
  return out;
}

inline std::vector<double> column(const std::vector<SampleRecord>& records, const std::string& name) {
  std::vector<double> out;
  for (const auto& r : records)
    for (const auto& [k, v] : r.values)
      if (k == name) out.push_back(v);
  return out;
}

inline double max_of(const std::vector<double>& v) {
  if (v.empty()) return std::numeric_limits<double>::quiet_NaN();
  return *std::max_element(v.begin(), v.end());
}

inline double spread_of(const std::vector<double>& v) {
  if (v.empty()) return std::numeric_limits<double>::quiet_NaN();
  const auto [lo, hi] = std::minmax_element(v.begin(), v.end());
  return *hi - *lo;
}

inline double mean_of(const std::vector<double>& v) {
  if (v.empty()) return std::numeric_limits<double>::quiet_NaN();
  double s = 0.0;
  for (double x : v) s += x;
  return s / static_cast<double>(v.size());
}

class ReportBuilder {
public:
  explicit ReportBuilder(const SuiteConfig& cfg) : cfg_(cfg) {}

  void check(const std::string& name, double residual, Bound bound) {
    double tol;
    if (auto it = cfg_.tol.find(name); it != cfg_.tol.end()) {
      tol = it->second;
    } else if (name == "beta_bar_max") {
      tol = 1e-14;  // "vanishes exactly": rounding level
    } else if (name == "rotated_orthonormality") {
      tol = 1e-10;
    } else {
      tol = bound == Bound::max ? cfg_.default_tol : cfg_.default_floor;
    }
    const bool pass = bound == Bound::max ? residual <= tol : residual >= tol;
    report.checks.push_back({name, residual, tol, pass, bound});
  }

  void stat(const std::string& name, double value) { report.stats.emplace_back(name, value); }

  VerificationReport finish(std::vector<SampleRecord> records) {
    report.records = std::move(records);
    report.pass = !report.checks.empty() &&
                  std::all_of(report.checks.begin(), report.checks.end(), [](const auto& c) { return c.pass; });
    return std::move(report);
  }

  VerificationReport report;

private:
  const SuiteConfig& cfg_;
};

inline ReferenceElement random_element(const MetricKernel& kernel, std::mt19937_64& rng) {
  const Vector x = kernel.sample_point(rng);
  const Vector y = random_vector(rng, kernel.dim());
  ReferenceElement z(x, y);
  if (!kernel.contains(z)) throw DomainError("sampled element outside kernel domain");
  return z;
}

/// Flag samples: value "flag" per sample.
inline std::vector<SampleRecord> flag_samples(const MetricKernel& kernel, std::uint64_t seed, int samples) {
  return run_samples(seed, samples, [&](std::mt19937_64& rng, SampleRecord& rec) {
    const ReferenceElement z = random_element(kernel, rng);
    const Vector X = random_vector(rng, kernel.dim());
    rec.values.emplace_back("flag", flag_curvature(local_geometry(kernel, z, 4), X));
  });
}

/// Schur residual with K = mean flag curvature of `flags`; values "schur".
inline std::vector<SampleRecord> schur_samples(const MetricKernel& kernel, std::uint64_t seed, int samples, double K) {
  return run_samples(seed, samples, [&](std::mt19937_64& rng, SampleRecord& rec) {
    const ReferenceElement z = random_element(kernel, rng);
    const LocalGeometry geo = local_geometry(kernel, z, 4);
    const auto frame = random_orthonormal_frame(fundamental_tensor(geo), rng);
    rec.values.emplace_back("schur", schur_residual(geo, K, frame));
  });
}

inline std::vector<SampleRecord> lemma_samples(const MetricKernel& kernel, std::uint64_t seed, int samples) {
  return run_samples(seed, samples, [&](std::mt19937_64& rng, SampleRecord& rec) {
    const ReferenceElement z = random_element(kernel, rng);
    const LocalGeometry geo = local_geometry(kernel, z, 4);
    const auto g = fundamental_tensor(geo);
    const auto t = sample_orthonormal_triple(g, [&] { return random_vector(rng, kernel.dim()); });
    rec.values.emplace_back("lemma", std::abs(lemma_identity(geo, t[0], t[1], t[2])));
  });
}

inline std::vector<SampleRecord> umbilic_samples(const Immersion& imm, std::uint64_t seed, int samples,
                                                 bool with_beta, std::optional<double> expected_eta) {
  return run_samples(seed, samples, [&](std::mt19937_64& rng, SampleRecord& rec) {
    const Vector u = imm.sample_parameter(rng);
    const SubReferenceElement sub(u, random_vector(rng, imm.dim_sub()));
    const SubFrame f = frame_at(imm, sub);
    if (with_beta) {
      const InducedMetric im = induced_metric(imm, sub);
      rec.values.emplace_back("beta_bar", im.beta_bar ? im.beta_bar->cwiseAbs().maxCoeff() : 0.0);
    }
    rec.values.emplace_back("umbilicity", umbilicity_residual(imm, sub));
    const double eta = norm(f.g, mean_curvature(f));
    rec.values.emplace_back("eta_norm", eta);
    if (expected_eta) rec.values.emplace_back("eta_deviation", std::abs(eta - *expected_eta));
    rec.values.emplace_back("parallelism", normal_parallelism_residual(imm, sub));
  });
}

inline std::optional<double> sphere_eta(const Immersion& imm) {
  if (imm.kind() != "sphere") return std::nullopt;
  return 1.0 / imm.params().at("radius").get<double>();
}

inline void validate(const SuiteConfig& cfg) {
  const auto& names = suite_names();
  if (std::find(names.begin(), names.end(), cfg.suite) == names.end())
    throw SpecError("suite", "unknown suite \"" + cfg.suite + "\"");
  if (cfg.samples < 1) throw SpecError("samples", "must be at least 1");
  if (!(cfg.default_tol > 0.0)) throw SpecError("tol", "must be positive");
  if (!(cfg.default_floor > 0.0)) throw SpecError("floor", "must be positive");
  for (const auto& [k, v] : cfg.tol)
    if (!(v > 0.0)) throw SpecError("tol." + k, "must be positive");
  const bool ambient_given = cfg.immersion.is_object() && cfg.immersion.contains("ambient");
  if (cfg.metric.is_null() && cfg.suite != "negative-controls" && !(cfg.suite == "umbilic-example" && ambient_given))
    throw SpecError("metric", "missing");
}

/// The immersion of an umbilic-example run: the config's document with the
/// suite metric as ambient, or the unit sphere about the origin.
inline nlohmann::json resolve_immersion(const SuiteConfig& cfg) {
  if (cfg.immersion.is_null())
    return {{"kind", "sphere"}, {"params", {{"radius", 1.0}}}, {"ambient", cfg.metric}};
  nlohmann::json imm = cfg.immersion;
  if (!imm.is_object()) throw SpecError("immersion", "must be a JSON object");
  if (imm.contains("ambient") && !cfg.metric.is_null() &&
      metric_to_json(metric_from_json(imm.at("ambient"))) != metric_to_json(metric_from_json(cfg.metric)))
    throw SpecError("ambient", "immersion ambient conflicts with the suite metric");
  if (!imm.contains("ambient")) imm["ambient"] = cfg.metric;
  return imm;
}

}  // namespace detail

inline VerificationReport run_suite(const SuiteConfig& cfg) {
  detail::validate(cfg);
  detail::ReportBuilder b(cfg);
  b.report.suite = cfg.suite;
  b.report.seed = cfg.seed;
  b.report.samples = cfg.samples;
  const std::uint64_t seed = cfg.seed;
  const int n = cfg.samples;

  if (cfg.suite == "umbilic-example") {
    const nlohmann::json imm_spec = detail::resolve_immersion(cfg);
    const Immersion imm = immersion_from_json(imm_spec);
    b.report.metric = metric_to_json(imm.ambient());
    b.report.immersion = immersion_to_json(imm);
    const bool with_beta = imm.ambient().kind() == KernelKind::randers_example;
    const auto expected = detail::sphere_eta(imm);
    auto rec = detail::umbilic_samples(imm, seed, n, with_beta, expected);
    if (with_beta) b.check("beta_bar_max", detail::max_of(detail::column(rec, "beta_bar")), Bound::max);
    b.check("umbilicity_max", detail::max_of(detail::column(rec, "umbilicity")), Bound::max);
    if (expected) b.check("eta_norm_deviation", detail::max_of(detail::column(rec, "eta_deviation")), Bound::max);
    b.check("normal_parallelism_max", detail::max_of(detail::column(rec, "parallelism")), Bound::max);
    b.stat("eta_norm_mean", detail::mean_of(detail::column(rec, "eta_norm")));
    return b.finish(std::move(rec));
  }

  if (cfg.suite == "negative-controls") {
    const MetricKernel kernel = cfg.metric.is_null() ? ellipsoid({1.0, 1.0, 0.5}) : metric_from_json(cfg.metric);
    const Immersion imm = cfg.immersion.is_null()
                              ? cylinder_immersion(euclidean(3), 1.0)
                              : immersion_from_json(cfg.immersion);
    b.report.metric = metric_to_json(kernel);
    b.report.immersion = immersion_to_json(imm);
    auto flags = detail::flag_samples(kernel, seed, n);
    const double K = detail::mean_of(detail::column(flags, "flag"));
    auto schur = detail::schur_samples(kernel, seed, n, K);
    auto lemma = detail::lemma_samples(kernel, seed, n);
    auto umb = detail::umbilic_samples(imm, seed, n, false, std::nullopt);
    b.check("flag_spread", detail::spread_of(detail::column(flags, "flag")), Bound::min);
    b.check("schur_residual", detail::max_of(detail::column(schur, "schur")), Bound::min);
    b.check("lemma_witness", detail::max_of(detail::column(lemma, "lemma")), Bound::min);
    b.check("umbilicity", detail::max_of(detail::column(umb, "umbilicity")), Bound::min);
    b.stat("K_estimate", K);
    // One record per sample index, merging the four passes.
    for (std::size_t i = 0; i < flags.size(); ++i) {
      for (const auto* extra : {&schur, &lemma, &umb}) {
        const SampleRecord& r = (*extra)[i];
        flags[i].values.insert(flags[i].values.end(), r.values.begin(), r.values.end());
        flags[i].attempts = std::max(flags[i].attempts, r.attempts);
        if (r.skipped) {
          flags[i].skipped = true;
          flags[i].reason = r.reason;
        }
      }
    }
    return b.finish(std::move(flags));
  }

  const MetricKernel kernel = metric_from_json(cfg.metric);
  b.report.metric = metric_to_json(kernel);

  if (cfg.suite == "constant-flag") {
    auto rec = detail::flag_samples(kernel, seed, n);
    const auto flags = detail::column(rec, "flag");
    b.check("flag_spread", detail::spread_of(flags), Bound::max);
    b.stat("flag_mean", detail::mean_of(flags));
    b.stat("flag_min", flags.empty() ? std::nan("") : *std::min_element(flags.begin(), flags.end()));
    b.stat("flag_max", detail::max_of(flags));
    return b.finish(std::move(rec));
  }

  if (cfg.suite == "schur") {
    const double K = detail::mean_of(detail::column(detail::flag_samples(kernel, seed, n), "flag"));
    auto rec = detail::schur_samples(kernel, seed, n, K);
    b.check("schur_residual_max", detail::max_of(detail::column(rec, "schur")), Bound::max);
    b.stat("K_estimate", K);
    return b.finish(std::move(rec));
  }

  if (kernel.dim() < 3) throw DimensionError(cfg.suite + ": requires dimension at least 3");

  if (cfg.suite == "lemma-identity") {
    auto rec = detail::lemma_samples(kernel, seed, n);
    b.check("lemma_identity_max", detail::max_of(detail::column(rec, "lemma")), Bound::max);
    return b.finish(std::move(rec));
  }

  // polarization
  auto rec = detail::run_samples(seed, n, [&](std::mt19937_64& rng, SampleRecord& r) {
    const ReferenceElement z = detail::random_element(kernel, rng);
    const LocalGeometry geo = local_geometry(kernel, z, 4);
    const auto t = sample_orthonormal_triple(fundamental_tensor(geo), [&] { return random_vector(rng, kernel.dim()); });
    const PolarizationResult p = polarization_check(geo, t[0], t[1], t[2]);
    r.values.emplace_back("lhs_minus_rhs", std::abs(p.lhs - p.rhs));
    r.values.emplace_back("rotated_residual", p.residual);
    r.values.emplace_back("rotated_deviation", p.rotated_deviation);
  });
  b.check("polarization_max", detail::max_of(detail::column(rec, "lhs_minus_rhs")), Bound::max);
  b.check("rotated_orthonormality", detail::max_of(detail::column(rec, "rotated_deviation")), Bound::max);
  b.stat("rotated_residual_max", detail::max_of(detail::column(rec, "rotated_residual")));
  return b.finish(std::move(rec));
}

// ---- report serialization -------------------------------------------------

namespace detail {

inline nlohmann::json finite_or_null(double v) { return std::isfinite(v) ? nlohmann::json(v) : nlohmann::json(); }

inline double from_json_number(const nlohmann::json& v) {
  return v.is_null() ? std::numeric_limits<double>::quiet_NaN() : v.get<double>();
}

}  // namespace detail

inline nlohmann::json report_to_json(const VerificationReport& r) {
  nlohmann::json checks = nlohmann::json::array();
  for (const auto& c : r.checks)
    checks.push_back({{"name", c.name},
                      {"residual", detail::finite_or_null(c.residual)},
                      {"tol", c.tol},
                      {"pass", c.pass},
                      {"bound", c.bound == Bound::max ? "max" : "min"}});
  nlohmann::json stats = nlohmann::json::object();
  for (const auto& [k, v] : r.stats) stats[k] = detail::finite_or_null(v);
  nlohmann::json skipped = nlohmann::json::array();
  for (const auto& s : r.records)
    if (s.skipped) skipped.push_back({{"index", s.index}, {"reason", s.reason}});
  nlohmann::json out = {{"suite", r.suite}, {"metric", r.metric}, {"seed", r.seed}, {"samples", r.samples},
                        {"checks", checks}, {"stats", stats},     {"skipped", skipped}, {"pass", r.pass}};
  if (!r.immersion.is_null()) out["immersion"] = r.immersion;
  return out;
}

/// Inverse of report_to_json for the summary fields (per-sample values are not serialized).
inline VerificationReport report_from_json(const nlohmann::json& j) {
  VerificationReport r;
  r.suite = j.at("suite").get<std::string>();
  r.metric = j.at("metric");
  if (j.contains("immersion")) r.immersion = j.at("immersion");
  r.seed = j.at("seed").get<std::uint64_t>();
  r.samples = j.at("samples").get<int>();
  for (const auto& c : j.at("checks"))
    r.checks.push_back({c.at("name").get<std::string>(), detail::from_json_number(c.at("residual")),
                        c.at("tol").get<double>(), c.at("pass").get<bool>(),
                        c.at("bound").get<std::string>() == "min" ? Bound::min : Bound::max});
  for (const auto& [k, v] : j.at("stats").items()) r.stats.emplace_back(k, detail::from_json_number(v));
  for (const auto& s : j.at("skipped")) {
    SampleRecord rec;
    rec.index = s.at("index").get<int>();
    rec.skipped = true;
    rec.reason = s.at("reason").get<std::string>();
    r.records.push_back(std::move(rec));
  }
  r.pass = j.at("pass").get<bool>();
  return r;
}

/// Per-sample values as CSV: index,attempts,skipped,<value columns in first-seen order>.
inline std::string report_to_csv(const VerificationReport& r) {
  std::vector<std::string> cols;
  for (const auto& s : r.records)
    for (const auto& [k, v] : s.values)
      if (std::find(cols.begin(), cols.end(), k) == cols.end()) cols.push_back(k);
  std::string out = "index,attempts,skipped";
  for (const auto& c : cols) out += "," + c;
  out += "\n";
  char buf[64];
  for (const auto& s : r.records) {
    out += std::to_string(s.index) + "," + std::to_string(s.attempts) + "," + (s.skipped ? "1" : "0");
    for (const auto& c : cols) {
      out += ",";
      for (const auto& [k, v] : s.values)
        if (k == c) {
          std::snprintf(buf, sizeof buf, "%.17g", v);
          out += buf;
          break;
        }
    }
    out += "\n";
  }
  return out;
}

}  // namespace finsler
