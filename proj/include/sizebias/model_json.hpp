#ifndef SIZEBIAS_MODEL_JSON_HPP
#define SIZEBIAS_MODEL_JSON_HPP

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "sizebias/models.hpp"

namespace sizebias {

using Json = nlohmann::ordered_json;

inline const char* statistic_name(Statistic kind) {
  return kind == Statistic::ge ? "ge" : "ne";
}

inline Statistic parse_statistic(const std::string& s) {
  if (s == "ge") return Statistic::ge;
  if (s == "ne") return Statistic::ne;
  throw std::invalid_argument("statistic must be \"ge\" or \"ne\"");
}

namespace detail {

inline void check_keys(const Json& j, std::initializer_list<const char*> allowed,
                       const char* what) {
  for (auto it = j.begin(); it != j.end(); ++it) {
    bool known = false;
    for (const char* key : allowed)
      if (it.key() == key) {
        known = true;
        break;
      }
    if (!known)
      throw std::invalid_argument(std::string(what) + ": unknown key \"" + it.key() + "\"");
  }
}

inline const Json& require_key(const Json& j, const char* key, const char* what) {
  const auto it = j.find(key);
  if (it == j.end())
    throw std::invalid_argument(std::string(what) + ": missing \"" + key + "\"");
  return *it;
}

inline double as_double(const Json& j, const char* what) {
  if (!j.is_number())
    throw std::invalid_argument(std::string(what) + ": expected a number");
  return j.get<double>();
}

inline long as_long(const Json& j, const char* what) {
  if (!j.is_number_integer() && !j.is_number_unsigned())
    throw std::invalid_argument(std::string(what) + ": expected an integer");
  return j.get<long>();
}

inline std::uint64_t as_seed(const Json& j, const char* what) {
  if (j.is_number_unsigned()) return j.get<std::uint64_t>();
  if (j.is_number_integer()) {
    const auto v = j.get<std::int64_t>();
    if (v >= 0) return static_cast<std::uint64_t>(v);
  }
  throw std::invalid_argument(std::string(what) + ": seed must be a nonnegative integer");
}

// Scalar entries broadcast to length n; arrays must match n exactly.
inline std::vector<double> as_double_vector(const Json& j, std::size_t n, const char* what) {
  if (j.is_number()) return std::vector<double>(n, j.get<double>());
  if (!j.is_array())
    throw std::invalid_argument(std::string(what) + ": expected a number or an array");
  if (j.size() != n)
    throw std::invalid_argument(std::string(what) + ": expected " + std::to_string(n) +
                                " entries, got " + std::to_string(j.size()));
  std::vector<double> out;
  out.reserve(n);
  for (const auto& x : j) out.push_back(as_double(x, what));
  return out;
}

inline std::vector<long> as_long_vector(const Json& j, std::size_t n, const char* what) {
  if (j.is_number_integer() || j.is_number_unsigned())
    return std::vector<long>(n, j.get<long>());
  if (!j.is_array())
    throw std::invalid_argument(std::string(what) + ": expected an integer or an array");
  if (j.size() != n)
    throw std::invalid_argument(std::string(what) + ": expected " + std::to_string(n) +
                                " entries, got " + std::to_string(j.size()));
  std::vector<long> out;
  out.reserve(n);
  for (const auto& x : j) out.push_back(as_long(x, what));
  return out;
}

inline std::vector<std::vector<double>> as_matrix(const Json& j, std::size_t rows,
                                                  std::size_t cols, const char* what) {
  if (!j.is_array() || j.size() != rows)
    throw std::invalid_argument(std::string(what) + ": expected " + std::to_string(rows) +
                                " rows");
  std::vector<std::vector<double>> out;
  out.reserve(rows);
  for (const auto& row : j) out.push_back(as_double_vector(row, cols, what));
  return out;
}

// A field is either a bare number (constant) or {cells_per_axis, values}.
inline ScalarField field_from_json(const Json& j, const char* what) {
  if (j.is_number()) return ScalarField::constant(j.get<double>());
  if (!j.is_object())
    throw std::invalid_argument(std::string(what) + ": expected a number or a field object");
  check_keys(j, {"cells_per_axis", "values"}, what);
  ScalarField f;
  f.cells_per_axis = as_long(require_key(j, "cells_per_axis", what), what);
  const Json& vals = require_key(j, "values", what);
  if (!vals.is_array())
    throw std::invalid_argument(std::string(what) + ": field values must be an array");
  f.values.clear();
  f.values.reserve(vals.size());
  for (const auto& x : vals) f.values.push_back(as_double(x, what));
  return f;
}

inline Json field_to_json(const ScalarField& f) {
  Json j;
  j["cells_per_axis"] = f.cells_per_axis;
  j["values"] = f.values;
  return j;
}

inline std::vector<ScalarField> densities_from_json(const Json& j, std::size_t n,
                                                    const char* what) {
  if (j.is_null()) return {};
  if (!j.is_array() || j.size() != n)
    throw std::invalid_argument(std::string(what) + ": need one density per ball");
  std::vector<ScalarField> out;
  out.reserve(n);
  for (const auto& x : j) out.push_back(field_from_json(x, what));
  return out;
}

inline ErGraphModel er_from_json(const Json& j) {
  check_keys(j, {"model", "statistic", "seed", "m", "p", "w", "d"}, "er_graph");
  ErGraphModel m;
  m.m = as_long(require_key(j, "m", "er_graph"), "er_graph: m");
  if (m.m < 0) throw std::invalid_argument("er_graph: m must be nonnegative");
  const std::size_t n = static_cast<std::size_t>(m.m);
  const Json& p = require_key(j, "p", "er_graph");
  if (p.is_number()) {
    m.p.assign(n, std::vector<double>(n, p.get<double>()));
    for (std::size_t a = 0; a < n; ++a) m.p[a][a] = 0.0;
  } else {
    m.p = as_matrix(p, n, n, "er_graph: p");
  }
  m.w = j.contains("w") ? as_double_vector(j["w"], n, "er_graph: w")
                        : std::vector<double>(n, 1.0);
  m.d = as_long_vector(require_key(j, "d", "er_graph"), n, "er_graph: d");
  return m;
}

inline MultinomialModel multinomial_from_json(const Json& j) {
  check_keys(j, {"model", "statistic", "seed", "m", "n", "p", "w", "d"}, "multinomial");
  MultinomialModel m;
  m.m = as_long(require_key(j, "m", "multinomial"), "multinomial: m");
  m.n = as_long(require_key(j, "n", "multinomial"), "multinomial: n");
  if (m.m < 0 || m.n < 0)
    throw std::invalid_argument("multinomial: m and n must be nonnegative");
  const std::size_t urns = static_cast<std::size_t>(m.m);
  const std::size_t balls = static_cast<std::size_t>(m.n);
  const Json& p = require_key(j, "p", "multinomial");
  if (p.is_string() && p.get<std::string>() == "uniform") {
    m.p.assign(urns, std::vector<double>(balls, 1.0 / static_cast<double>(m.m)));
  } else {
    m.p = as_matrix(p, urns, balls, "multinomial: p");
  }
  m.w = j.contains("w") ? as_double_vector(j["w"], urns, "multinomial: w")
                        : std::vector<double>(urns, 1.0);
  m.d = as_long_vector(require_key(j, "d", "multinomial"), urns, "multinomial: d");
  return m;
}

inline HypergeometricModel hyper_from_json(const Json& j) {
  check_keys(j, {"model", "statistic", "seed", "colors", "sample_size", "w", "d"},
             "hypergeometric");
  HypergeometricModel m;
  const Json& colors = require_key(j, "colors", "hypergeometric");
  if (!colors.is_array())
    throw std::invalid_argument("hypergeometric: colors must be an array");
  m.colors = as_long_vector(colors, colors.size(), "hypergeometric: colors");
  m.sample_size =
      as_long(require_key(j, "sample_size", "hypergeometric"), "hypergeometric: sample_size");
  const std::size_t k = m.colors.size();
  m.w = j.contains("w") ? as_double_vector(j["w"], k, "hypergeometric: w")
                        : std::vector<double>(k, 1.0);
  m.d = as_long_vector(require_key(j, "d", "hypergeometric"), k, "hypergeometric: d");
  return m;
}

inline GgVolumeModel gg_volume_from_json(const Json& j) {
  check_keys(j,
             {"model", "statistic", "seed", "dim", "volume", "radii", "radius", "m", "density",
              "weight", "threshold", "quad_cells_per_axis"},
             "gg_volume");
  GgVolumeModel m;
  m.dim = static_cast<int>(
      j.contains("dim") ? as_long(j["dim"], "gg_volume: dim") : 1);
  m.volume = as_double(require_key(j, "volume", "gg_volume"), "gg_volume: volume");
  if (j.contains("radii")) {
    const Json& radii = j["radii"];
    if (!radii.is_array())
      throw std::invalid_argument("gg_volume: radii must be an array");
    m.radii = as_double_vector(radii, radii.size(), "gg_volume: radii");
  } else {
    const double r = as_double(require_key(j, "radius", "gg_volume"), "gg_volume: radius");
    const long count = as_long(require_key(j, "m", "gg_volume"), "gg_volume: m");
    if (count < 0) throw std::invalid_argument("gg_volume: m must be nonnegative");
    m.radii.assign(static_cast<std::size_t>(count), r);
  }
  if (j.contains("density"))
    m.density = densities_from_json(j["density"], m.radii.size(), "gg_volume: density");
  if (j.contains("weight")) m.weight = field_from_json(j["weight"], "gg_volume: weight");
  if (j.contains("threshold"))
    m.threshold = field_from_json(j["threshold"], "gg_volume: threshold");
  if (j.contains("quad_cells_per_axis"))
    m.quad_cells_per_axis = as_long(j["quad_cells_per_axis"], "gg_volume: quad_cells_per_axis");
  return m;
}

inline GgNeighborsModel gg_neighbors_from_json(const Json& j) {
  check_keys(j, {"model", "statistic", "seed", "dim", "volume", "m", "density", "w", "d",
                 "kappa1"},
             "gg_neighbors");
  GgNeighborsModel m;
  m.dim = static_cast<int>(
      j.contains("dim") ? as_long(j["dim"], "gg_neighbors: dim") : 1);
  m.volume = as_double(require_key(j, "volume", "gg_neighbors"), "gg_neighbors: volume");
  m.m = as_long(require_key(j, "m", "gg_neighbors"), "gg_neighbors: m");
  if (m.m < 0) throw std::invalid_argument("gg_neighbors: m must be nonnegative");
  const std::size_t balls = static_cast<std::size_t>(m.m);
  if (j.contains("density"))
    m.density = densities_from_json(j["density"], balls, "gg_neighbors: density");
  m.w = j.contains("w") ? as_double_vector(j["w"], balls, "gg_neighbors: w")
                        : std::vector<double>(balls, 1.0);
  m.d = as_long_vector(require_key(j, "d", "gg_neighbors"), balls, "gg_neighbors: d");
  if (j.contains("kappa1")) m.kappa1 = as_long(j["kappa1"], "gg_neighbors: kappa1");
  return m;
}

}  // namespace detail

// One parsed configuration document: the model plus optional run-level
// defaults a front-end may override.
struct ModelDocument {
  ModelSpec spec;
  std::optional<Statistic> statistic;
  std::optional<std::uint64_t> seed;
};

inline ModelDocument parse_model_document(const Json& j) {
  if (!j.is_object()) throw std::invalid_argument("config: expected a JSON object");
  const Json& model_key = detail::require_key(j, "model", "config");
  if (!model_key.is_string())
    throw std::invalid_argument("config: \"model\" must be a string");
  const std::string name = model_key.get<std::string>();
  ModelDocument doc;
  if (name == "er_graph")
    doc.spec = detail::er_from_json(j);
  else if (name == "multinomial")
    doc.spec = detail::multinomial_from_json(j);
  else if (name == "hypergeometric")
    doc.spec = detail::hyper_from_json(j);
  else if (name == "gg_volume")
    doc.spec = detail::gg_volume_from_json(j);
  else if (name == "gg_neighbors")
    doc.spec = detail::gg_neighbors_from_json(j);
  else
    throw std::invalid_argument("config: unknown model \"" + name + "\"");
  if (j.contains("statistic")) {
    const Json& s = j["statistic"];
    if (!s.is_string())
      throw std::invalid_argument("config: \"statistic\" must be a string");
    doc.statistic = parse_statistic(s.get<std::string>());
  }
  if (j.contains("seed")) doc.seed = detail::as_seed(j["seed"], "config");
  return doc;
}

inline ModelDocument parse_model_document(const std::string& text) {
  Json j;
  try {
    j = Json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw std::invalid_argument(std::string("config: ") + e.what());
  }
  return parse_model_document(j);
}

// Canonical echo: scalars expanded to full arrays, fields as explicit
// objects, defaults written out.
inline Json model_to_json(const ModelSpec& spec) {
  Json j;
  j["model"] = model_name(spec);
  if (const auto* m = std::get_if<ErGraphModel>(&spec)) {
    j["m"] = m->m;
    j["p"] = m->p;
    j["w"] = m->w;
    j["d"] = m->d;
  } else if (const auto* m = std::get_if<MultinomialModel>(&spec)) {
    j["m"] = m->m;
    j["n"] = m->n;
    j["p"] = m->p;
    j["w"] = m->w;
    j["d"] = m->d;
  } else if (const auto* m = std::get_if<HypergeometricModel>(&spec)) {
    j["colors"] = m->colors;
    j["sample_size"] = m->sample_size;
    j["w"] = m->w;
    j["d"] = m->d;
  } else if (const auto* m = std::get_if<GgVolumeModel>(&spec)) {
    j["dim"] = m->dim;
    j["volume"] = m->volume;
    j["radii"] = m->radii;
    if (!m->density.empty()) {
      Json ds = Json::array();
      for (const auto& f : m->density) ds.push_back(detail::field_to_json(f));
      j["density"] = ds;
    }
    j["weight"] = detail::field_to_json(m->weight);
    j["threshold"] = detail::field_to_json(m->threshold);
    j["quad_cells_per_axis"] = m->quad_cells_per_axis;
  } else {
    const auto& gn = std::get<GgNeighborsModel>(spec);
    j["dim"] = gn.dim;
    j["volume"] = gn.volume;
    j["m"] = gn.m;
    if (!gn.density.empty()) {
      Json ds = Json::array();
      for (const auto& f : gn.density) ds.push_back(detail::field_to_json(f));
      j["density"] = ds;
    }
    j["w"] = gn.w;
    j["d"] = gn.d;
    j["kappa1"] = gn.kappa1;
  }
  return j;
}

}  // namespace sizebias

#endif
