#ifndef SIZEBIAS_MODELS_MODEL_SPEC_HPP
#define SIZEBIAS_MODELS_MODEL_SPEC_HPP

#include <cmath>
#include <cstdint>
#include <numeric>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

#include "sizebias/models/common.hpp"

namespace sizebias {

// Random graph on m labelled vertices, edge (a,b) present independently with
// probability p[a][b]. The statistic sums w[alpha] over vertices whose degree
// meets the threshold rule.
struct ErGraphModel {
  long m = 0;
  std::vector<std::vector<double>> p;
  std::vector<double> w;
  std::vector<long> d;

  static ErGraphModel homogeneous(long m, double p, double w, long d);
};

inline ErGraphModel ErGraphModel::homogeneous(long m, double p, double w, long d) {
  ErGraphModel out;
  out.m = m;
  out.p.assign(m, std::vector<double>(m, p));
  for (long a = 0; a < m; ++a) out.p[a][a] = 0.0;
  out.w.assign(m, w);
  out.d.assign(m, d);
  return out;
}

inline void validate(const ErGraphModel& model) {
  if (model.m < 2) throw std::invalid_argument("er_graph: need at least two vertices");
  const std::size_t m = static_cast<std::size_t>(model.m);
  if (model.p.size() != m)
    throw std::invalid_argument("er_graph: edge matrix must be m x m");
  for (std::size_t a = 0; a < m; ++a) {
    if (model.p[a].size() != m)
      throw std::invalid_argument("er_graph: edge matrix must be m x m");
    if (model.p[a][a] != 0.0)
      throw std::invalid_argument("er_graph: diagonal must be zero");
    for (std::size_t b = 0; b < m; ++b) {
      const double pab = model.p[a][b];
      if (!(pab >= 0.0) || pab >= 1.0 || !std::isfinite(pab))
        throw std::invalid_argument("er_graph: edge probabilities must lie in [0,1)");
      if (std::fabs(pab - model.p[b][a]) > 0.0)
        throw std::invalid_argument("er_graph: edge matrix must be symmetric");
    }
  }
  require_weights_thresholds(model.w, model.d, m, "er_graph");
}

// n balls dropped independently; ball j lands in urn alpha with probability
// p[alpha][j]. Columns sum to one. The statistic runs over urn occupancies.
struct MultinomialModel {
  long m = 0;
  long n = 0;
  std::vector<std::vector<double>> p;
  std::vector<double> w;
  std::vector<long> d;

  static MultinomialModel uniform(long m, long n, double w, long d);
};

inline MultinomialModel MultinomialModel::uniform(long m, long n, double w, long d) {
  MultinomialModel out;
  out.m = m;
  out.n = n;
  out.p.assign(m, std::vector<double>(n, 1.0 / static_cast<double>(m)));
  out.w.assign(m, w);
  out.d.assign(m, d);
  return out;
}

inline void validate(const MultinomialModel& model) {
  if (model.m < 1 || model.n < 1)
    throw std::invalid_argument("multinomial: need at least one urn and one ball");
  const std::size_t m = static_cast<std::size_t>(model.m);
  const std::size_t n = static_cast<std::size_t>(model.n);
  if (model.p.size() != m)
    throw std::invalid_argument("multinomial: placement matrix must be m x n");
  for (const auto& row : model.p) {
    if (row.size() != n)
      throw std::invalid_argument("multinomial: placement matrix must be m x n");
    for (double pij : row)
      if (!(pij >= 0.0) || pij >= 1.0 || !std::isfinite(pij))
        throw std::invalid_argument("multinomial: placement probabilities must lie in [0,1)");
  }
  for (std::size_t j = 0; j < n; ++j) {
    double col = 0.0;
    for (std::size_t alpha = 0; alpha < m; ++alpha) col += model.p[alpha][j];
    if (std::fabs(col - 1.0) > 1e-9)
      throw std::invalid_argument("multinomial: each ball's placement column must sum to one");
  }
  require_weights_thresholds(model.w, model.d, m, "multinomial");
}

// Urn with colors[alpha] balls of each color; draw sample_size without
// replacement. The statistic runs over per-color counts in the sample.
struct HypergeometricModel {
  std::vector<long> colors;
  long sample_size = 0;
  std::vector<double> w;
  std::vector<long> d;

  long population() const {
    return std::accumulate(colors.begin(), colors.end(), 0L);
  }
};

inline void validate(const HypergeometricModel& model) {
  if (model.colors.empty())
    throw std::invalid_argument("hypergeometric: need at least one color");
  for (long c : model.colors)
    if (c < 0) throw std::invalid_argument("hypergeometric: color counts must be nonnegative");
  const long n = model.population();
  if (n < 1) throw std::invalid_argument("hypergeometric: population is empty");
  if (model.sample_size < 0 || model.sample_size > n)
    throw std::invalid_argument("hypergeometric: sample size must lie in [0, population]");
  require_weights_thresholds(model.w, model.d, model.colors.size(), "hypergeometric");
}

// Piecewise-constant scalar field on the torus [0, L)^p, stored as values on
// a regular grid with cells_per_axis cells per axis. cells_per_axis == 1 is a
// constant field.
struct ScalarField {
  long cells_per_axis = 1;
  std::vector<double> values{1.0};

  static ScalarField constant(double v) { return ScalarField{1, {v}}; }

  bool is_constant() const {
    for (double v : values)
      if (v != values.front()) return false;
    return true;
  }

  double value_at(const std::vector<double>& x, double side) const {
    if (cells_per_axis == 1) return values.front();
    std::size_t idx = 0;
    for (double xi : x) {
      double frac = xi / side;
      frac -= std::floor(frac);
      long cell = static_cast<long>(frac * static_cast<double>(cells_per_axis));
      if (cell >= cells_per_axis) cell = cells_per_axis - 1;
      idx = idx * static_cast<std::size_t>(cells_per_axis) + static_cast<std::size_t>(cell);
    }
    return values[idx];
  }

  double max_value() const {
    double best = values.front();
    for (double v : values) best = std::max(best, v);
    return best;
  }
};

inline void validate_field(const ScalarField& f, int dim, const char* what) {
  if (f.cells_per_axis < 1)
    throw std::invalid_argument(std::string(what) + ": field needs at least one cell per axis");
  std::size_t expect = 1;
  for (int k = 0; k < dim; ++k) expect *= static_cast<std::size_t>(f.cells_per_axis);
  if (f.values.size() != expect)
    throw std::invalid_argument(std::string(what) + ": field value count must be cells^dim");
  for (double v : f.values)
    if (!std::isfinite(v)) throw std::invalid_argument(std::string(what) + ": field values must be finite");
}

// Weighted covered volume of a Boolean model: m balls with fixed radii and
// independently placed centers on the torus of volume `volume`; the statistic
// integrates weight(x) over points whose coverage count meets threshold(x).
struct GgVolumeModel {
  int dim = 1;
  double volume = 0.0;
  std::vector<double> radii;
  std::vector<ScalarField> density;  // empty: uniform centers for every ball
  ScalarField weight = ScalarField::constant(1.0);
  ScalarField threshold = ScalarField::constant(1.0);
  long quad_cells_per_axis = 0;  // 0: per-dim default; ignored for dim == 1
};

// Number of balls within p-norm distance 2 of ball alpha, thresholded per
// ball and weighted.
struct GgNeighborsModel {
  int dim = 1;
  double volume = 0.0;
  long m = 0;
  std::vector<ScalarField> density;  // empty: uniform centers
  std::vector<double> w;
  std::vector<long> d;
  long kappa1 = 0;  // 0: table value for dim in {1,2,3}
};

inline double unit_ball_volume(int dim) {
  if (dim == 1) return 2.0;
  if (dim == 2) return 3.14159265358979323846;
  if (dim == 3) return 4.0 * 3.14159265358979323846 / 3.0;
  return std::pow(3.14159265358979323846, 0.5 * dim) / std::tgamma(0.5 * dim + 1.0);
}

inline long default_kappa1(int dim) {
  switch (dim) {
    case 1: return 2;
    case 2: return 5;
    case 3: return 12;
    default: return 0;
  }
}

inline void validate(const GgVolumeModel& model) {
  if (model.dim < 1 || model.dim > 3)
    throw std::invalid_argument("gg_volume: dim must be 1, 2, or 3");
  if (!(model.volume > 0.0) || !std::isfinite(model.volume))
    throw std::invalid_argument("gg_volume: volume must be positive");
  if (model.radii.empty())
    throw std::invalid_argument("gg_volume: need at least one ball");
  const double side = std::pow(model.volume, 1.0 / model.dim);
  double radius_sum = 0.0;
  for (double r : model.radii) {
    if (!(r > 0.0) || !std::isfinite(r))
      throw std::invalid_argument("gg_volume: radii must be positive");
    if (2.0 * r >= side)
      throw std::invalid_argument("gg_volume: each ball diameter must be below the torus side");
    radius_sum += r;
  }
  if (!(std::sqrt(static_cast<double>(model.dim)) * side > 2.0 * radius_sum))
    throw std::invalid_argument("gg_volume: torus too small for the given radii");
  if (!model.density.empty()) {
    if (model.density.size() != model.radii.size())
      throw std::invalid_argument("gg_volume: need one density per ball");
    if (model.dim != 1)
      throw std::invalid_argument("gg_volume: non-uniform densities are supported only for dim == 1");
    for (const auto& f : model.density) {
      validate_field(f, model.dim, "gg_volume");
      double mass = 0.0;
      for (double v : f.values) {
        if (!(v >= 0.0)) throw std::invalid_argument("gg_volume: densities must be nonnegative");
        mass += v;
      }
      mass *= model.volume / static_cast<double>(f.values.size());
      if (std::fabs(mass - 1.0) > 1e-9)
        throw std::invalid_argument("gg_volume: densities must integrate to one");
    }
  }
  validate_field(model.weight, model.dim, "gg_volume");
  validate_field(model.threshold, model.dim, "gg_volume");
  bool any_w = false;
  for (double v : model.weight.values) {
    if (!(v >= 0.0)) throw std::invalid_argument("gg_volume: weights must be nonnegative");
    any_w = any_w || v > 0.0;
  }
  if (!any_w) throw std::invalid_argument("gg_volume: weight field is identically zero");
  for (double v : model.threshold.values) {
    if (v != std::floor(v) || v < 1.0 || v > static_cast<double>(model.radii.size()))
      throw std::invalid_argument("gg_volume: thresholds must be integers in [1, ball count]");
  }
  if (model.quad_cells_per_axis < 0)
    throw std::invalid_argument("gg_volume: quad_cells_per_axis must be nonnegative");
}

inline void validate(const GgNeighborsModel& model) {
  if (model.dim < 1)
    throw std::invalid_argument("gg_neighbors: dim must be positive");
  if (!(model.volume > 0.0) || !std::isfinite(model.volume))
    throw std::invalid_argument("gg_neighbors: volume must be positive");
  if (model.m < 2)
    throw std::invalid_argument("gg_neighbors: need at least two balls");
  const double side = std::pow(model.volume, 1.0 / model.dim);
  if (!(std::sqrt(static_cast<double>(model.dim)) * side > 2.0 * static_cast<double>(model.m)))
    throw std::invalid_argument("gg_neighbors: torus too small for the ball count");
  if (!(side > 6.0))
    throw std::invalid_argument("gg_neighbors: torus side must exceed six");
  if (!model.density.empty()) {
    if (model.density.size() != static_cast<std::size_t>(model.m))
      throw std::invalid_argument("gg_neighbors: need one density per ball");
    if (model.dim != 1)
      throw std::invalid_argument("gg_neighbors: non-uniform densities are supported only for dim == 1");
    for (const auto& f : model.density) {
      validate_field(f, model.dim, "gg_neighbors");
      double mass = 0.0;
      for (double v : f.values) {
        if (!(v >= 0.0)) throw std::invalid_argument("gg_neighbors: densities must be nonnegative");
        mass += v;
      }
      mass *= model.volume / static_cast<double>(f.values.size());
      if (std::fabs(mass - 1.0) > 1e-9)
        throw std::invalid_argument("gg_neighbors: densities must integrate to one");
    }
  }
  require_weights_thresholds(model.w, model.d, static_cast<std::size_t>(model.m), "gg_neighbors");
  for (long da : model.d)
    if (da < 1 || da > model.m)
      throw std::invalid_argument("gg_neighbors: thresholds must lie in [1, m]");
  if (model.kappa1 == 0 && default_kappa1(model.dim) == 0)
    throw std::invalid_argument("gg_neighbors: kappa1 override required for dim > 3");
  if (model.kappa1 < 0)
    throw std::invalid_argument("gg_neighbors: kappa1 must be positive");
}

using ModelSpec = std::variant<ErGraphModel, MultinomialModel, HypergeometricModel,
                               GgVolumeModel, GgNeighborsModel>;

inline void validate(const ModelSpec& spec) {
  std::visit([](const auto& model) { validate(model); }, spec);
}

inline const char* model_name(const ModelSpec& spec) {
  struct Namer {
    const char* operator()(const ErGraphModel&) const { return "er_graph"; }
    const char* operator()(const MultinomialModel&) const { return "multinomial"; }
    const char* operator()(const HypergeometricModel&) const { return "hypergeometric"; }
    const char* operator()(const GgVolumeModel&) const { return "gg_volume"; }
    const char* operator()(const GgNeighborsModel&) const { return "gg_neighbors"; }
  };
  return std::visit(Namer{}, spec);
}

}  // namespace sizebias

#endif
