#pragma once

// Metric-spec and immersion-spec JSON documents.
//
//   metric:    {"kind": K, "dim": n, "params": {...}}
//     euclidean | funk_ball | klein_ball | quartic_minkowski   no params
//     randers_example                                           {"b": b}, 0 < |b| < 1
//     round_sphere                                              {"radius": r}
//     riemannian                                                {"chart": "round_sphere", "radius": r}
//     ellipsoid                                                 {"semi_axes": [a_1, ...]}, dim optional
//
//   immersion: {"kind": K, "params": {...}, "ambient": metric}
//     sphere             {"radius": r, "center": [..]}  center defaults to the origin
//     plane              {"origin": [..], "basis": [[..], ..]}
//     cylinder           {"radius": r}                  3-dimensional ambient
//     custom-polynomial  {"dim_sub": k, "components": [[{"coef": c, "powers": [..]}, ..], ..]}
//
// Errors are SpecError with the dotted path of the offending field.

#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "finsler/errors.hpp"
#include "finsler/kernel.hpp"
#include "finsler/submanifold.hpp"

namespace finsler {

namespace detail {

inline const nlohmann::json& require(const nlohmann::json& obj, const std::string& key, const std::string& path) {
  if (!obj.is_object() || !obj.contains(key)) throw SpecError(path + key, "missing");
  return obj.at(key);
}

inline double number(const nlohmann::json& v, const std::string& field) {
  if (!v.is_number()) throw SpecError(field, "must be a number");
  return v.get<double>();
}

inline int integer(const nlohmann::json& v, const std::string& field) {
  if (!v.is_number_integer()) throw SpecError(field, "must be an integer");
  return v.get<int>();
}

inline std::vector<double> numbers(const nlohmann::json& v, const std::string& field) {
  if (!v.is_array()) throw SpecError(field, "must be an array of numbers");
  std::vector<double> out;
  for (std::size_t i = 0; i < v.size(); ++i) out.push_back(number(v[i], field + "[" + std::to_string(i) + "]"));
  return out;
}

inline Vector to_vector(const std::vector<double>& v) {
  return Eigen::Map<const Vector>(v.data(), static_cast<Eigen::Index>(v.size()));
}

inline const nlohmann::json& params_of(const nlohmann::json& spec) {
  static const nlohmann::json empty = nlohmann::json::object();
  if (!spec.contains("params")) return empty;
  const auto& p = spec.at("params");
  if (!p.is_object()) throw SpecError("params", "must be an object");
  return p;
}

}  // namespace detail

inline MetricKernel metric_from_json(const nlohmann::json& spec) {
  if (!spec.is_object()) throw SpecError("metric", "must be a JSON object");
  const auto& kind_v = detail::require(spec, "kind", "");
  if (!kind_v.is_string()) throw SpecError("kind", "must be a string");
  const std::string kind = kind_v.get<std::string>();
  const nlohmann::json& params = detail::params_of(spec);

  if (kind == "ellipsoid") {
    const auto axes = detail::numbers(detail::require(params, "semi_axes", "params."), "params.semi_axes");
    if (spec.contains("dim") && detail::integer(spec.at("dim"), "dim") != static_cast<int>(axes.size()))
      throw SpecError("dim", "must equal the number of semi_axes");
    return ellipsoid(axes);
  }

  const int dim = detail::integer(detail::require(spec, "dim", ""), "dim");
  if (dim < 1) throw SpecError("dim", "must be positive");

  if (kind == "euclidean") return euclidean(dim);
  if (kind == "funk_ball") return funk_ball(dim);
  if (kind == "klein_ball") return klein_ball(dim);
  if (kind == "quartic_minkowski") return quartic_minkowski(dim);
  if (kind == "randers_example")
    return randers_example(dim, detail::number(detail::require(params, "b", "params."), "params.b"));
  if (kind == "round_sphere") {
    const double r = params.contains("radius") ? detail::number(params.at("radius"), "params.radius") : 1.0;
    return round_sphere(dim, r);
  }
  if (kind == "riemannian") {
    const auto& chart = detail::require(params, "chart", "params.");
    if (!chart.is_string() || chart.get<std::string>() != "round_sphere")
      throw SpecError("params.chart", "only \"round_sphere\" can be built from a document");
    const double r = params.contains("radius") ? detail::number(params.at("radius"), "params.radius") : 1.0;
    return round_sphere(dim, r);
  }
  throw SpecError("kind", "unknown metric kind \"" + kind + "\"");
}

inline nlohmann::json metric_to_json(const MetricKernel& kernel) {
  return {{"kind", to_string(kernel.kind())}, {"dim", kernel.dim()}, {"params", kernel.params()}};
}

/// `ambient_override` replaces (or supplies) the document's "ambient" entry.
inline Immersion immersion_from_json(const nlohmann::json& spec, const nlohmann::json* ambient_override = nullptr) {
  if (!spec.is_object()) throw SpecError("immersion", "must be a JSON object");
  const auto& kind_v = detail::require(spec, "kind", "");
  if (!kind_v.is_string()) throw SpecError("kind", "must be a string");
  const std::string kind = kind_v.get<std::string>();
  const nlohmann::json& params = detail::params_of(spec);

  MetricKernel ambient = [&] {
    if (ambient_override) return metric_from_json(*ambient_override);
    try {
      return metric_from_json(detail::require(spec, "ambient", ""));
    } catch (const SpecError& e) {
      if (e.field() == "ambient") throw;
      throw SpecError("ambient." + e.field(), std::string(e.what()).substr(e.field().size() + 2));
    }
  }();
  const int n = ambient.dim();

  if (kind == "sphere") {
    const double r = detail::number(detail::require(params, "radius", "params."), "params.radius");
    Vector center = Vector::Zero(n);
    if (params.contains("center")) center = detail::to_vector(detail::numbers(params.at("center"), "params.center"));
    return sphere_immersion(std::move(ambient), r, center);
  }
  if (kind == "plane") {
    const Vector origin = detail::to_vector(detail::numbers(detail::require(params, "origin", "params."), "params.origin"));
    const auto& b = detail::require(params, "basis", "params.");
    if (!b.is_array()) throw SpecError("params.basis", "must be an array of vectors");
    std::vector<Vector> basis;
    for (std::size_t i = 0; i < b.size(); ++i)
      basis.push_back(detail::to_vector(detail::numbers(b[i], "params.basis[" + std::to_string(i) + "]")));
    return plane_immersion(std::move(ambient), origin, basis);
  }
  if (kind == "cylinder") {
    return cylinder_immersion(std::move(ambient),
                              detail::number(detail::require(params, "radius", "params."), "params.radius"));
  }
  if (kind == "custom-polynomial") {
    const int k = detail::integer(detail::require(params, "dim_sub", "params."), "params.dim_sub");
    const auto& comps = detail::require(params, "components", "params.");
    if (!comps.is_array()) throw SpecError("params.components", "must be an array");
    std::vector<std::vector<PolynomialTerm>> components;
    for (std::size_t i = 0; i < comps.size(); ++i) {
      const std::string path = "params.components[" + std::to_string(i) + "]";
      if (!comps[i].is_array()) throw SpecError(path, "must be an array of terms");
      std::vector<PolynomialTerm> terms;
      for (std::size_t t = 0; t < comps[i].size(); ++t) {
        const std::string tp = path + "[" + std::to_string(t) + "].";
        PolynomialTerm term;
        term.coef = detail::number(detail::require(comps[i][t], "coef", tp), tp + "coef");
        const auto& pw = detail::require(comps[i][t], "powers", tp);
        if (!pw.is_array()) throw SpecError(tp + "powers", "must be an array of integers");
        for (const auto& p : pw) term.powers.push_back(detail::integer(p, tp + "powers"));
        terms.push_back(std::move(term));
      }
      components.push_back(std::move(terms));
    }
    return polynomial_immersion(std::move(ambient), k, std::move(components));
  }
  throw SpecError("kind", "unknown immersion kind \"" + kind + "\"");
}

inline nlohmann::json immersion_to_json(const Immersion& imm) {
  return {{"kind", imm.kind()}, {"params", imm.params()}, {"ambient", metric_to_json(imm.ambient())}};
}

/// Reads a JSON document; parse failures become SpecError naming the file.
inline nlohmann::json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw SpecError(path, "cannot open file");
  try {
    return nlohmann::json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw SpecError(path, std::string("invalid JSON: ") + e.what());
  }
}

}  // namespace finsler
