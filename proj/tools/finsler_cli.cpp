// finsler: command-line front end.
//
// Exit codes: 0 success/pass, 1 check failure, 2 usage or spec error,
// 3 domain or numerical error.

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "finsler/finsler.hpp"

namespace {

using namespace finsler;

enum Exit { kOk = 0, kCheckFailed = 1, kUsage = 2, kNumerical = 3 };

enum class LogLevel { quiet, info, debug };

LogLevel log_level() {
  const char* env = std::getenv("FINSLER_LOG");
  if (!env) return LogLevel::info;
  const std::string v = env;
  if (v == "quiet") return LogLevel::quiet;
  if (v == "debug") return LogLevel::debug;
  return LogLevel::info;
}

void log(LogLevel level, const std::string& msg) {
  if (log_level() >= level && level != LogLevel::quiet) std::cerr << msg << '\n';
}

/// 12 significant digits; integral values keep a trailing ".0" so output reads as real.
std::string fmt(double v) {
  if (v == 0.0) v = 0.0;  // drop the sign of -0
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.12g", v);
  std::string s = buf;
  if (std::isfinite(v) && s.find_first_of(".e") == std::string::npos) s += ".0";
  return s;
}

std::string fmt(const Vector& v) {
  std::string s;
  for (int i = 0; i < v.size(); ++i) s += (i ? "," : "") + fmt(v[i]);
  return s;
}

Vector parse_csv_vector(const std::string& text, const std::string& flag) {
  std::vector<double> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    char* end = nullptr;
    const double v = std::strtod(item.c_str(), &end);
    if (item.empty() || end == item.c_str() || *end != '\0' || !std::isfinite(v))
      throw SpecError(flag, "expected comma-separated decimals, got \"" + text + "\"");
    out.push_back(v);
  }
  if (out.empty()) throw SpecError(flag, "empty vector");
  return Eigen::Map<Vector>(out.data(), static_cast<Eigen::Index>(out.size()));
}

Vector vector_flag(const std::string& text, const std::string& flag, int dim) {
  Vector v = parse_csv_vector(text, flag);
  if (v.size() != dim)
    throw SpecError(flag, "expected " + std::to_string(dim) + " components, got " + std::to_string(v.size()));
  return v;
}

/// Writes to `path`, or standard output for "-".
void write_output(const std::string& path, const std::string& text) {
  if (path == "-") {
    std::cout << text;
    return;
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw SpecError("--out", "cannot open \"" + path + "\" for writing");
  out << text;
}

struct CurvatureArgs {
  std::string metric, x, y, X, Y;
};

int cmd_curvature(const CurvatureArgs& a) {
  if (!a.Y.empty() && a.X.empty()) throw SpecError("--Y", "requires --X");
  const MetricKernel kernel = metric_from_json(read_json_file(a.metric));
  const int n = kernel.dim();
  const ReferenceElement z(vector_flag(a.x, "--x", n), vector_flag(a.y, "--y", n));
  if (!kernel.contains(z)) throw DomainError("(x, y) lies outside the metric's domain");
  const LocalGeometry geo = local_geometry(kernel, z, 4);
  if (a.X.empty()) {
    std::cout << "riemann_spray\n";
    for (int i = 0; i < n; ++i) std::cout << fmt(Vector(geo.R_spray.row(i).transpose())) << '\n';
    return kOk;
  }
  const Vector X = vector_flag(a.X, "--X", n);
  if (a.Y.empty()) {
    std::cout << fmt(flag_curvature(geo, X)) << '\n';
    return kOk;
  }
  const Vector Y = vector_flag(a.Y, "--Y", n);
  std::cout << "flag_curvature " << fmt(flag_curvature(geo, X)) << '\n';
  std::cout << "sectional_curvature_k2 " << fmt(sectional_curvature_k2(geo, X, Y)) << '\n';
  return kOk;
}

struct GeodesicArgs {
  std::string metric, x0, y0, out = "-";
  double t = 1.0;
  int steps = 256;
};

int cmd_geodesic(const GeodesicArgs& a) {
  const MetricKernel kernel = metric_from_json(read_json_file(a.metric));
  const int n = kernel.dim();
  const Vector x0 = vector_flag(a.x0, "--x0", n), y0 = vector_flag(a.y0, "--y0", n);
  if (a.steps < 16) throw SpecError("--steps", "must be at least 16");
  const GeodesicPath path = integrate_geodesic(kernel, x0, y0, a.t, a.steps);
  std::string csv = "step,t";
  for (int i = 0; i < n; ++i) csv += ",x" + std::to_string(i);
  for (int i = 0; i < n; ++i) csv += ",y" + std::to_string(i);
  csv += ",F\n";
  for (std::size_t s = 0; s < path.t.size(); ++s) {
    csv += std::to_string(s) + "," + fmt(path.t[s]);
    for (int i = 0; i < n; ++i) csv += "," + fmt(path.x[s][i]);
    for (int i = 0; i < n; ++i) csv += "," + fmt(path.y[s][i]);
    csv += "," + fmt(kernel(path.x[s], path.y[s])) + "\n";
  }
  write_output(a.out, csv);
  log(LogLevel::info, "geodesic: " + std::to_string(a.steps) + " steps to t=" + fmt(a.t));
  return kOk;
}

/// The immersion document with its ambient reconciled against --metric.
nlohmann::json immersion_document(const std::string& immersion_path, const std::string& metric_path) {
  nlohmann::json imm = read_json_file(immersion_path);
  if (!imm.is_object()) throw SpecError("immersion", "must be a JSON object");
  if (metric_path.empty()) {
    if (!imm.contains("ambient")) throw SpecError("ambient", "missing; pass --metric or add it to the immersion");
    return imm;
  }
  const nlohmann::json metric = read_json_file(metric_path);
  if (imm.contains("ambient") &&
      metric_to_json(metric_from_json(imm.at("ambient"))) != metric_to_json(metric_from_json(metric)))
    throw SpecError("ambient", "immersion ambient conflicts with --metric");
  imm["ambient"] = metric;
  return imm;
}

struct SubmanifoldArgs {
  std::string metric, immersion, u, v;
};

int cmd_submanifold(const SubmanifoldArgs& a) {
  const Immersion imm = immersion_from_json(immersion_document(a.immersion, a.metric));
  const int k = imm.dim_sub();
  const SubReferenceElement sub(vector_flag(a.u, "--u", k), vector_flag(a.v, "--v", k));
  const SplitFrame frame = split_frame(imm, sub);
  const Vector eta = mean_curvature(imm, sub);
  std::cout << "eta " << fmt(eta) << '\n';
  std::cout << "eta_norm " << fmt(norm(frame.g, eta)) << '\n';
  std::cout << "umbilicity_residual " << fmt(umbilicity_residual(imm, sub)) << '\n';
  std::cout << "normal_parallelism_residual " << fmt(normal_parallelism_residual(imm, sub)) << '\n';
  std::cout << "weingarten_duality_residual " << fmt(weingarten_duality_residual(imm, sub)) << '\n';
  const InducedMetric im = induced_metric(imm, sub);
  if (im.beta_bar) std::cout << "beta_bar " << fmt(*im.beta_bar) << '\n';
  return kOk;
}

struct VerifyArgs {
  std::string suite, metric, immersion, out, csv;
  int samples = 100;
  std::uint64_t seed = 0;
  double tol = 1e-6, floor = 1e-3;
};

int cmd_verify(const VerifyArgs& a) {
  const bool uses_immersion = a.suite == "umbilic-example" || a.suite == "negative-controls";
  if (!a.immersion.empty() && !uses_immersion)
    throw SpecError("--immersion", "suite \"" + a.suite + "\" takes no immersion");
  if (!a.out.empty() && a.out == a.csv) throw SpecError("--csv", "must differ from --out");
  if (a.out == "-" && a.csv == "-") throw SpecError("--csv", "only one output may stream to stdout");

  SuiteConfig cfg;
  cfg.suite = a.suite;
  if (!a.metric.empty()) cfg.metric = read_json_file(a.metric);
  if (!a.immersion.empty()) {
    cfg.immersion = read_json_file(a.immersion);
    if (!cfg.metric.is_null() && a.suite == "umbilic-example")
      cfg.immersion = immersion_document(a.immersion, a.metric);
  }
  cfg.samples = a.samples;
  cfg.seed = a.seed;
  cfg.default_tol = a.tol;
  cfg.default_floor = a.floor;

  const VerificationReport report = run_suite(cfg);
  if (!a.out.empty()) write_output(a.out, report_to_json(report).dump(2) + "\n");
  if (!a.csv.empty()) write_output(a.csv, report_to_csv(report));

  std::ostringstream summary;
  for (const auto& c : report.checks)
    summary << c.name << ' ' << fmt(c.residual) << (c.bound == Bound::max ? " <= " : " >= ") << fmt(c.tol) << ' '
            << (c.pass ? "PASS" : "FAIL") << '\n';
  for (const auto& [k, v] : report.stats) summary << k << ' ' << fmt(v) << '\n';
  if (report.skipped() > 0) summary << "skipped " << report.skipped() << '\n';
  summary << (report.pass ? "PASS" : "FAIL") << '\n';
  // With JSON on stdout the summary moves to the diagnostic stream.
  if (a.out == "-" || a.csv == "-")
    log(LogLevel::info, summary.str());
  else
    std::cout << summary.str();
  if (log_level() == LogLevel::debug)
    for (const auto& r : report.records) {
      std::string line = "sample " + std::to_string(r.index) + " attempts " + std::to_string(r.attempts);
      for (const auto& [k, v] : r.values) line += " " + k + "=" + fmt(v);
      if (r.skipped) line += " skipped: " + r.reason;
      log(LogLevel::debug, line);
    }
  return report.pass ? kOk : kCheckFailed;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Numerical Finsler geometry: curvature, geodesics, submanifolds and verification suites"};
  app.require_subcommand(1);

  CurvatureArgs ca;
  auto* curv = app.add_subcommand("curvature", "Flag curvature at (x, y); spray curvature matrix without --X");
  curv->add_option("--metric", ca.metric, "Metric spec (JSON file)")->required();
  curv->add_option("--x", ca.x, "Base point, comma-separated")->required();
  curv->add_option("--y", ca.y, "Flag pole, comma-separated")->required();
  curv->add_option("--X", ca.X, "Transverse edge of the flag");
  curv->add_option("--Y", ca.Y, "Second edge; also prints the sectional curvature K2(X, Y)");

  GeodesicArgs ga;
  auto* geod = app.add_subcommand("geodesic", "Integrate a geodesic and write the path as CSV");
  geod->add_option("--metric", ga.metric, "Metric spec (JSON file)")->required();
  geod->add_option("--x0", ga.x0, "Initial point")->required();
  geod->add_option("--y0", ga.y0, "Initial velocity")->required();
  geod->add_option("--t", ga.t, "End time")->capture_default_str();
  geod->add_option("--steps", ga.steps, "Fixed RK4 steps (>= 16)")->capture_default_str();
  geod->add_option("--out", ga.out, "CSV path, '-' for stdout")->capture_default_str();

  SubmanifoldArgs sa;
  auto* subm = app.add_subcommand("submanifold", "Mean curvature and umbilicity residuals at (u, v)");
  subm->add_option("--metric", sa.metric, "Ambient metric spec; optional when the immersion names its ambient");
  subm->add_option("--immersion", sa.immersion, "Immersion spec (JSON file)")->required();
  subm->add_option("--u", sa.u, "Parameter point")->required();
  subm->add_option("--v", sa.v, "Parameter direction (reference direction dx(v))")->required();

  VerifyArgs va;
  auto* ver = app.add_subcommand("verify", "Run a verification suite");
  ver->add_option("--suite", va.suite, "Suite name")->required()->check(CLI::IsMember(suite_names()));
  ver->add_option("--metric", va.metric, "Metric spec (JSON file); optional for negative-controls");
  ver->add_option("--immersion", va.immersion, "Immersion spec (umbilic-example, negative-controls)");
  ver->add_option("--samples", va.samples, "Number of samples")->capture_default_str();
  ver->add_option("--seed", va.seed, "Seed")->capture_default_str();
  ver->add_option("--tol", va.tol, "Tolerance for positive checks")->capture_default_str();
  ver->add_option("--floor", va.floor, "Minimum residual for negative controls")->capture_default_str();
  ver->add_option("--out", va.out, "Report JSON path, '-' for stdout");
  ver->add_option("--csv", va.csv, "Per-sample residuals as CSV, '-' for stdout");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kUsage;
  }

  try {
    if (*curv) return cmd_curvature(ca);
    if (*geod) return cmd_geodesic(ga);
    if (*subm) return cmd_submanifold(sa);
    return cmd_verify(va);
  } catch (const SpecError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kUsage;
  } catch (const DimensionError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kUsage;
  } catch (const TangencyError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kUsage;
  } catch (const NormalityError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kUsage;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kUsage;
  } catch (const finsler::Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kNumerical;
  }
}
