#ifndef SIZEBIAS_MODELS_GERM_GRAIN_HPP
#define SIZEBIAS_MODELS_GERM_GRAIN_HPP

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <numeric>
#include <stdexcept>
#include <utility>
#include <vector>

#include "sizebias/couplings.hpp"
#include "sizebias/lattice_pmf.hpp"
#include "sizebias/models/common.hpp"
#include "sizebias/models/model_spec.hpp"
#include "sizebias/monotone_chain.hpp"
#include "sizebias/rng.hpp"

namespace sizebias {

// Ball centers on the torus [0, side)^dim.
struct GermGrainConfig {
  std::vector<std::vector<double>> centers;
};

namespace gg_detail {

inline double wrap(double x, double side) {
  double r = std::fmod(x, side);
  if (r < 0.0) r += side;
  if (r >= side) r = 0.0;
  return r;
}

inline double coord_gap(double a, double b, double side) {
  double d = std::fabs(a - b);
  return std::min(d, side - d);
}

inline double dist2(const std::vector<double>& a, const std::vector<double>& b, double side) {
  double s = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) {
    const double g = coord_gap(a[k], b[k], side);
    s += g * g;
  }
  return s;
}

inline std::vector<double> uniform_point(int dim, double side, Rng& rng) {
  std::vector<double> x(static_cast<std::size_t>(dim));
  for (auto& xi : x) xi = side * rng.uniform();
  return x;
}

// Uniform point of the radius-r ball around c, by rejection from the cube.
inline std::vector<double> ball_point(const std::vector<double>& c, double r, double side,
                                      Rng& rng) {
  const auto dim = c.size();
  std::vector<double> x(dim);
  for (;;) {
    double s = 0.0;
    for (std::size_t k = 0; k < dim; ++k) {
      const double v = r * (2.0 * rng.uniform() - 1.0);
      x[k] = v;
      s += v * v;
    }
    if (s <= r * r) break;
  }
  for (std::size_t k = 0; k < dim; ++k) x[k] = wrap(c[k] + x[k], side);
  return x;
}

// Uniform point of the torus outside the radius-r ball around c.
inline std::vector<double> outside_point(const std::vector<double>& c, double r, double side,
                                         Rng& rng) {
  for (;;) {
    auto x = uniform_point(static_cast<int>(c.size()), side, rng);
    if (dist2(x, c, side) > r * r) return x;
  }
}

// Piecewise-constant probability density on the circle [0, side); supports
// exact interval masses and exact draws restricted to an arc or its
// complement.
class Piecewise1D {
 public:
  Piecewise1D(double side, const ScalarField& field) : side_(side) {
    const auto cells = static_cast<std::size_t>(field.cells_per_axis);
    density_ = field.values;
    density_.resize(cells, density_.empty() ? 0.0 : density_.back());
    cum_.assign(cells + 1, 0.0);
    const double h = side_ / static_cast<double>(cells);
    for (std::size_t i = 0; i < cells; ++i) cum_[i + 1] = cum_[i] + density_[i] * h;
  }

  double side() const { return side_; }

  // Cumulative mass of [0, x] extended periodically to the whole line.
  double cdf(double x) const {
    const double k = std::floor(x / side_);
    const double r = x - k * side_;
    const double h = side_ / static_cast<double>(density_.size());
    auto i = static_cast<std::size_t>(r / h);
    if (i >= density_.size()) i = density_.size() - 1;
    return k * cum_.back() + cum_[i] + (r - static_cast<double>(i) * h) * density_[i];
  }

  // Mass of the arc from a to b (walking upward, b - a in [0, side]).
  double mass(double a, double b) const { return cdf(b) - cdf(a); }

  double density_at(double x) const {
    const double h = side_ / static_cast<double>(density_.size());
    auto i = static_cast<std::size_t>(wrap(x, side_) / h);
    if (i >= density_.size()) i = density_.size() - 1;
    return density_[i];
  }

  // Exact draw from the density restricted to the arc a -> b.
  double sample_arc(Rng& rng, double a, double b) const {
    const double h = side_ / static_cast<double>(density_.size());
    // Segment the arc at cell edges; density is constant per segment.
    std::vector<double> edges{a};
    const double tiny = 1e-12 * side_;
    double first_edge = (std::floor(a / h) + 1.0) * h;
    for (double e = first_edge; e < b - tiny; e += h) edges.push_back(e);
    edges.push_back(b);
    std::vector<double> masses(edges.size() - 1);
    double total = 0.0;
    for (std::size_t i = 0; i + 1 < edges.size(); ++i) {
      masses[i] = (edges[i + 1] - edges[i]) * density_at(0.5 * (edges[i] + edges[i + 1]));
      total += masses[i];
    }
    if (!(total > 0.0))
      throw std::runtime_error("piecewise density: sampling from a zero-mass arc");
    double u = rng.uniform() * total, acc = 0.0;
    std::size_t pick = masses.size() - 1;
    for (std::size_t i = 0; i < masses.size(); ++i) {
      acc += masses[i];
      if (u < acc) { pick = i; break; }
    }
    const double x = edges[pick] + rng.uniform() * (edges[pick + 1] - edges[pick]);
    return wrap(x, side_);
  }

  double sample(Rng& rng) const { return sample_arc(rng, 0.0, side_); }

 private:
  double side_;
  std::vector<double> density_;
  std::vector<double> cum_;
};

// Probability that a center with the given density lands within radius r of u.
inline double ball_mass(const Piecewise1D& f, double u, double r) {
  return f.mass(u - r, u + r);
}

// Partially fixed Bernoulli profile: entries outside (0,1) are frozen.
struct SplitProfile {
  std::vector<std::size_t> active;  // indices with p in (0,1)
  std::vector<double> active_p;
  std::vector<int> fixed;  // -1 active, 0 frozen out, 1 frozen in
  long ones = 0;
};

inline SplitProfile split_profile(const std::vector<double>& p) {
  SplitProfile out;
  out.fixed.assign(p.size(), -1);
  for (std::size_t k = 0; k < p.size(); ++k) {
    if (p[k] <= 0.0) {
      out.fixed[k] = 0;
    } else if (p[k] >= 1.0) {
      out.fixed[k] = 1;
      ++out.ones;
    } else {
      out.active.push_back(k);
      out.active_p.push_back(p[k]);
    }
  }
  return out;
}

inline LatticePmf profile_count_pmf(const SplitProfile& sp) {
  if (sp.active_p.empty()) return LatticePmf(sp.ones, {1.0});
  const LatticePmf base = pb_pmf(sp.active_p);
  return LatticePmf(base.lo() + sp.ones, base.probs());
}

}  // namespace gg_detail

inline double gg_side(double volume, int dim) {
  return std::pow(volume, 1.0 / static_cast<double>(dim));
}

// ---------------------------------------------------------------------------
// Covered-volume model

inline double gg_volume_side(const GgVolumeModel& model) {
  return gg_side(model.volume, model.dim);
}

inline long gg_volume_quad_cells(const GgVolumeModel& model) {
  if (model.dim == 1) return 0;
  long base = model.quad_cells_per_axis > 0 ? model.quad_cells_per_axis
                                            : (model.dim == 2 ? 64 : 16);
  // Align quadrature cells with both field grids so cellwise-constant
  // integrands are integrated exactly.
  const long wc = model.weight.cells_per_axis;
  const long tc = model.threshold.cells_per_axis;
  const long align = std::lcm(wc, tc);
  return ((base + align - 1) / align) * align;
}

inline long gg_volume_count_at(const GgVolumeModel& model, const GermGrainConfig& cfg,
                               const std::vector<double>& x) {
  const double side = gg_volume_side(model);
  long count = 0;
  for (std::size_t alpha = 0; alpha < model.radii.size(); ++alpha) {
    const double r = model.radii[alpha];
    if (gg_detail::dist2(x, cfg.centers[alpha], side) <= r * r) ++count;
  }
  return count;
}

inline double gg_volume_statistic(const GgVolumeModel& model, const GermGrainConfig& cfg,
                                  Statistic kind) {
  const double side = gg_volume_side(model);
  if (model.dim == 1) {
    // Exact sweep: coverage count, weight, and threshold are all constant
    // between consecutive breakpoints.
    std::vector<double> pts;
    for (std::size_t alpha = 0; alpha < model.radii.size(); ++alpha) {
      const double c = cfg.centers[alpha][0], r = model.radii[alpha];
      pts.push_back(gg_detail::wrap(c - r, side));
      pts.push_back(gg_detail::wrap(c + r, side));
    }
    for (const ScalarField* f : {&model.weight, &model.threshold}) {
      if (f->cells_per_axis > 1) {
        const double h = side / static_cast<double>(f->cells_per_axis);
        for (long k = 0; k < f->cells_per_axis; ++k) pts.push_back(h * static_cast<double>(k));
      }
    }
    std::sort(pts.begin(), pts.end());
    pts.erase(std::unique(pts.begin(), pts.end()), pts.end());
    pts.push_back(pts.front() + side);
    double y = 0.0;
    std::vector<double> mid(1);
    for (std::size_t i = 0; i + 1 < pts.size(); ++i) {
      const double len = pts[i + 1] - pts[i];
      if (len <= 0.0) continue;
      mid[0] = gg_detail::wrap(0.5 * (pts[i] + pts[i + 1]), side);
      const long count = gg_volume_count_at(model, cfg, mid);
      const auto d = static_cast<long>(model.threshold.value_at(mid, side));
      const bool hit = kind == Statistic::ge ? count >= d : count != d;
      if (hit) y += len * model.weight.value_at(mid, side);
    }
    return y;
  }
  const long q = gg_volume_quad_cells(model);
  const double h = side / static_cast<double>(q);
  const double cell_vol = std::pow(h, model.dim);
  std::vector<long> idx(static_cast<std::size_t>(model.dim), 0);
  std::vector<double> x(static_cast<std::size_t>(model.dim));
  double y = 0.0;
  for (;;) {
    for (std::size_t k = 0; k < x.size(); ++k) x[k] = (static_cast<double>(idx[k]) + 0.5) * h;
    const long count = gg_volume_count_at(model, cfg, x);
    const auto d = static_cast<long>(model.threshold.value_at(x, side));
    const bool hit = kind == Statistic::ge ? count >= d : count != d;
    if (hit) y += cell_vol * model.weight.value_at(x, side);
    std::size_t k = 0;
    for (; k < idx.size(); ++k) {
      if (++idx[k] < q) break;
      idx[k] = 0;
    }
    if (k == idx.size()) break;
  }
  return y;
}

inline GermGrainConfig gg_volume_sample_configuration(const GgVolumeModel& model, Rng& rng) {
  const double side = gg_volume_side(model);
  GermGrainConfig cfg;
  cfg.centers.reserve(model.radii.size());
  for (std::size_t alpha = 0; alpha < model.radii.size(); ++alpha) {
    if (model.density.empty()) {
      cfg.centers.push_back(gg_detail::uniform_point(model.dim, side, rng));
    } else {
      gg_detail::Piecewise1D f(side, model.density[alpha]);
      cfg.centers.push_back({f.sample(rng)});
    }
  }
  return cfg;
}

// Coverage probabilities (one per ball) at the point x.
inline std::vector<double> gg_volume_cover_probs(const GgVolumeModel& model,
                                                 const std::vector<double>& x) {
  const double side = gg_volume_side(model);
  std::vector<double> p(model.radii.size());
  if (model.density.empty()) {
    for (std::size_t alpha = 0; alpha < model.radii.size(); ++alpha)
      p[alpha] = unit_ball_volume(model.dim) * std::pow(model.radii[alpha], model.dim) /
                 model.volume;
  } else {
    for (std::size_t alpha = 0; alpha < model.radii.size(); ++alpha) {
      gg_detail::Piecewise1D f(side, model.density[alpha]);
      p[alpha] = std::clamp(gg_detail::ball_mass(f, x[0], model.radii[alpha]), 0.0, 1.0);
    }
  }
  return p;
}

inline double gg_volume_indicator_prob(const std::vector<double>& cover, long d,
                                       Statistic kind) {
  const auto sp = gg_detail::split_profile(cover);
  const LatticePmf pmf = gg_detail::profile_count_pmf(sp);
  return indicator_prob(pmf, d, kind);
}

struct MeanEstimate {
  double value = 0.0;
  double error = 0.0;  // zero when the value is exact
};

inline MeanEstimate gg_volume_mean_estimate(const GgVolumeModel& model, Statistic kind) {
  const double side = gg_volume_side(model);
  if (model.density.empty()) {
    // Uniform centers: the coverage law is the same at every point, so the
    // integral reduces to an exact sum over aligned field cells.
    const auto cover = gg_volume_cover_probs(model, std::vector<double>(model.dim, 0.0));
    const long cells = std::lcm(model.weight.cells_per_axis, model.threshold.cells_per_axis);
    const double h = side / static_cast<double>(cells);
    const double cell_vol = std::pow(h, model.dim);
    std::vector<long> idx(static_cast<std::size_t>(model.dim), 0);
    std::vector<double> x(static_cast<std::size_t>(model.dim));
    double mu = 0.0;
    for (;;) {
      for (std::size_t k = 0; k < x.size(); ++k) x[k] = (static_cast<double>(idx[k]) + 0.5) * h;
      const auto d = static_cast<long>(model.threshold.value_at(x, side));
      mu += cell_vol * model.weight.value_at(x, side) *
            gg_volume_indicator_prob(cover, d, kind);
      std::size_t k = 0;
      for (; k < idx.size(); ++k) {
        if (++idx[k] < cells) break;
        idx[k] = 0;
      }
      if (k == idx.size()) break;
    }
    return {mu, 0.0};
  }
  // Non-uniform centers (dim == 1): midpoint quadrature at two resolutions.
  auto integrate = [&](long cells) {
    const double h = side / static_cast<double>(cells);
    double mu = 0.0;
    std::vector<double> x(1);
    for (long i = 0; i < cells; ++i) {
      x[0] = (static_cast<double>(i) + 0.5) * h;
      const auto d = static_cast<long>(model.threshold.value_at(x, side));
      mu += h * model.weight.value_at(x, side) *
            gg_volume_indicator_prob(gg_volume_cover_probs(model, x), d, kind);
    }
    return mu;
  };
  const long base = 4096;
  const double fine = integrate(base), coarse = integrate(base / 2);
  return {fine, std::fabs(fine - coarse)};
}

inline double gg_volume_mean(const GgVolumeModel& model, Statistic kind) {
  return gg_volume_mean_estimate(model, kind).value;
}

inline double gg_volume_coupling_constant(const GgVolumeModel& model, Statistic kind) {
  double rmax = 0.0;
  for (double r : model.radii) rmax = std::max(rmax, r);
  const double wmax = model.weight.max_value();
  const double dmax = model.threshold.max_value();
  const double ball = unit_ball_volume(model.dim) * std::pow(rmax, model.dim);
  return kind == Statistic::ge ? wmax * dmax * ball : wmax * ball;
}

// Size-bias pair sampler for the covered-volume statistic. A location u is
// drawn with density proportional to weight(u) * P(indicator at u), the
// coverage count at u is lifted through the monotone chain, and each ball is
// placed conditionally on its membership indicator; balls whose indicator
// agrees between the two levels keep one shared location.
class GgVolumePairSampler {
 public:
  GgVolumePairSampler(GgVolumeModel model, Statistic kind)
      : model_(std::move(model)), kind_(kind), side_(gg_volume_side(model_)) {
    const auto& wf = model_.weight;
    const long wc = wf.cells_per_axis;
    std::size_t ncells = 1;
    for (int k = 0; k < model_.dim; ++k) ncells *= static_cast<std::size_t>(wc);
    proposal_.assign(ncells, 0.0);
    double total = 0.0;
    for (std::size_t i = 0; i < ncells; ++i) {
      proposal_[i] = wf.values[i % wf.values.size()];
      total += proposal_[i];
    }
    for (double& v : proposal_) v /= total;
    if (model_.density.empty()) {
      const auto cover = gg_volume_cover_probs(model_, std::vector<double>(model_.dim, 0.0));
      uniform_cover_ = cover;
      chain_ = std::make_unique<MonotoneCouplingChain>(cover);
      pmf_ = std::make_unique<LatticePmf>(chain_->conditional().sum_pmf());
      for (double v : model_.threshold.values) {
        const auto d = static_cast<long>(v);
        if (kind_ == Statistic::ge) {
          if (d > pmf_->lo() && lifts_.find(d) == lifts_.end())
            lifts_.emplace(d, std::make_unique<ThresholdLift>(*pmf_, d));
        } else if (perts_.find(d) == perts_.end()) {
          perts_.emplace(d, std::make_unique<NePerturbation>(ne_perturbation(*pmf_, d)));
        }
      }
    } else {
      for (const auto& f : model_.density)
        densities_.emplace_back(side_, f);
    }
  }

  CoupledSample sample(Rng& rng, PairTrace* trace = nullptr) const {
    const auto m = model_.radii.size();
    for (long attempt = 0; attempt < kMaxReject; ++attempt) {
      const auto u = propose(rng);
      const auto d_u = static_cast<long>(model_.threshold.value_at(u, side_));
      const auto cover = model_.density.empty() ? uniform_cover_
                                                : gg_volume_cover_probs(model_, u);
      const auto sp = gg_detail::split_profile(cover);
      const LatticePmf pmf = gg_detail::profile_count_pmf(sp);
      const double accept = indicator_prob(pmf, d_u, kind_);
      if (!(rng.uniform() < accept)) continue;

      // Lift the count at u within the active (non-frozen) coordinates.
      long base_total = 0, lift_total = 0;
      draw_levels(rng, sp, pmf, d_u, base_total, lift_total);
      const long base_act = base_total - sp.ones, lift_act = lift_total - sp.ones;
      const int lo_act = static_cast<int>(std::min(base_act, lift_act));
      const int hi_act = static_cast<int>(std::max(base_act, lift_act));
      std::vector<std::uint32_t> path;
      if (!sp.active.empty()) {
        if (model_.density.empty()) {
          path = chain_->sample_path(rng, lo_act, hi_act);
        } else {
          MonotoneCouplingChain chain(sp.active_p);
          path = chain.sample_path(rng, lo_act, hi_act);
        }
      } else {
        path = {0u};
      }
      const std::uint32_t base_mask = base_act <= lift_act ? path.front() : path.back();
      const std::uint32_t lift_mask = base_act <= lift_act ? path.back() : path.front();

      GermGrainConfig base_cfg, lift_cfg;
      base_cfg.centers.resize(m);
      lift_cfg.centers.resize(m);
      std::vector<int> membership(m, 0);
      for (std::size_t k = 0; k < sp.active.size(); ++k) {
        const std::size_t alpha = sp.active[k];
        const int b0 = (base_mask >> k) & 1u, b1 = (lift_mask >> k) & 1u;
        membership[alpha] = 2;  // marker: handled below
        const auto in_loc = [&] { return place_inside(alpha, u, rng); };
        const auto out_loc = [&] { return place_outside(alpha, u, rng); };
        if (b0 == b1) {
          base_cfg.centers[alpha] = b0 ? in_loc() : out_loc();
          lift_cfg.centers[alpha] = base_cfg.centers[alpha];
        } else if (b0 < b1) {
          base_cfg.centers[alpha] = out_loc();
          lift_cfg.centers[alpha] = in_loc();
        } else {
          base_cfg.centers[alpha] = in_loc();
          lift_cfg.centers[alpha] = out_loc();
        }
      }
      for (std::size_t alpha = 0; alpha < m; ++alpha) {
        if (membership[alpha] == 2) continue;
        base_cfg.centers[alpha] =
            sp.fixed[alpha] == 1 ? place_inside(alpha, u, rng) : place_outside(alpha, u, rng);
        lift_cfg.centers[alpha] = base_cfg.centers[alpha];
      }
      CoupledSample out;
      out.alpha = -1;
      out.y = gg_volume_statistic(model_, base_cfg, kind_);
      out.y_s = gg_volume_statistic(model_, lift_cfg, kind_);
      if (trace) {
        trace->alpha = -1;
        trace->level_counts.clear();
      }
      return out;
    }
    throw std::runtime_error("gg_volume: location rejection sampler stalled");
  }

 private:
  static constexpr long kMaxReject = 10'000'000;

  std::vector<double> propose(Rng& rng) const {
    const long wc = model_.weight.cells_per_axis;
    if (wc == 1) return gg_detail::uniform_point(model_.dim, side_, rng);
    const auto cell = static_cast<long>(rng.categorical(proposal_));
    const double h = side_ / static_cast<double>(wc);
    std::vector<double> u(static_cast<std::size_t>(model_.dim));
    long rest = cell;
    // Row-major order matching ScalarField::value_at.
    for (int k = model_.dim - 1; k >= 0; --k) {
      const long c = rest % wc;
      rest /= wc;
      u[static_cast<std::size_t>(k)] = (static_cast<double>(c) + rng.uniform()) * h;
    }
    return u;
  }

  void draw_levels(Rng& rng, const gg_detail::SplitProfile& sp, const LatticePmf& pmf,
                    long d_u, long& base_total, long& lift_total) const {
    if (kind_ == Statistic::ge) {
      if (d_u <= pmf.lo()) {
        base_total = sample_pmf(pmf, rng);
        lift_total = base_total;
        return;
      }
      if (model_.density.empty() && !sp.active.empty()) {
        const auto it = lifts_.find(d_u);
        const auto draw = it->second->sample(rng);
        base_total = draw.base;
        lift_total = draw.base + draw.increment;
        return;
      }
      const ThresholdLift lift(pmf, d_u);
      const auto draw = lift.sample(rng);
      base_total = draw.base;
      lift_total = draw.base + draw.increment;
      return;
    }
    if (pmf.size() == 1) {
      base_total = pmf.lo();
      lift_total = base_total;
      return;
    }
    if (model_.density.empty() && !sp.active.empty()) {
      base_total = sample_pmf(pmf, rng);
      lift_total = base_total + sample_ne_step(*perts_.at(d_u), base_total, rng);
      return;
    }
    const auto pert = ne_perturbation(pmf, d_u);
    base_total = sample_pmf(pmf, rng);
    lift_total = base_total + sample_ne_step(pert, base_total, rng);
  }

  std::vector<double> place_inside(std::size_t alpha, const std::vector<double>& u,
                                   Rng& rng) const {
    const double r = model_.radii[alpha];
    if (model_.density.empty()) return gg_detail::ball_point(u, r, side_, rng);
    return {densities_[alpha].sample_arc(rng, u[0] - r, u[0] + r)};
  }

  std::vector<double> place_outside(std::size_t alpha, const std::vector<double>& u,
                                    Rng& rng) const {
    const double r = model_.radii[alpha];
    if (model_.density.empty()) return gg_detail::outside_point(u, r, side_, rng);
    return {densities_[alpha].sample_arc(rng, u[0] + r, u[0] - r + side_)};
  }

  GgVolumeModel model_;
  Statistic kind_;
  double side_;
  std::vector<double> proposal_;
  std::vector<double> uniform_cover_;
  std::vector<gg_detail::Piecewise1D> densities_;
  std::unique_ptr<MonotoneCouplingChain> chain_;
  std::unique_ptr<LatticePmf> pmf_;
  std::map<long, std::unique_ptr<ThresholdLift>> lifts_;
  std::map<long, std::unique_ptr<NePerturbation>> perts_;
};

// ---------------------------------------------------------------------------
// Neighbor-count model

inline double gg_neighbors_side(const GgNeighborsModel& model) {
  return gg_side(model.volume, model.dim);
}

inline long gg_kappa1(const GgNeighborsModel& model) {
  return model.kappa1 > 0 ? model.kappa1 : default_kappa1(model.dim);
}

// Sum of the kappa1 largest entries (all of them when fewer are given).
inline double sigma_sum(std::vector<long> d, long kappa1) {
  std::sort(d.begin(), d.end(), std::greater<long>());
  const auto take = std::min<std::size_t>(d.size(), static_cast<std::size_t>(kappa1));
  double s = 0.0;
  for (std::size_t i = 0; i < take; ++i) s += static_cast<double>(d[i]);
  return s;
}

inline std::vector<long> gg_neighbors_counts(const GgNeighborsModel& model,
                                             const GermGrainConfig& cfg) {
  const double side = gg_neighbors_side(model);
  const auto m = static_cast<std::size_t>(model.m);
  std::vector<long> counts(m, 0);
  for (std::size_t a = 0; a < m; ++a)
    for (std::size_t b = a + 1; b < m; ++b)
      if (gg_detail::dist2(cfg.centers[a], cfg.centers[b], side) <= 4.0) {
        ++counts[a];
        ++counts[b];
      }
  return counts;
}

inline double gg_neighbors_statistic(const GgNeighborsModel& model,
                                     const GermGrainConfig& cfg, Statistic kind) {
  const auto counts = gg_neighbors_counts(model, cfg);
  double y = 0.0;
  for (std::size_t alpha = 0; alpha < counts.size(); ++alpha) {
    const bool hit = kind == Statistic::ge ? counts[alpha] >= model.d[alpha]
                                           : counts[alpha] != model.d[alpha];
    if (hit) y += model.w[alpha];
  }
  return y;
}

inline GermGrainConfig gg_neighbors_sample_configuration(const GgNeighborsModel& model,
                                                         Rng& rng) {
  const double side = gg_neighbors_side(model);
  GermGrainConfig cfg;
  cfg.centers.reserve(static_cast<std::size_t>(model.m));
  for (long alpha = 0; alpha < model.m; ++alpha) {
    if (model.density.empty()) {
      cfg.centers.push_back(gg_detail::uniform_point(model.dim, side, rng));
    } else {
      gg_detail::Piecewise1D f(side, model.density[static_cast<std::size_t>(alpha)]);
      cfg.centers.push_back({f.sample(rng)});
    }
  }
  return cfg;
}

// Probabilities that each other center lands within distance 2 of u.
inline std::vector<double> gg_neighbors_probs(const GgNeighborsModel& model, long alpha,
                                              const std::vector<double>& u) {
  const double side = gg_neighbors_side(model);
  std::vector<double> p;
  p.reserve(static_cast<std::size_t>(model.m - 1));
  for (long beta = 0; beta < model.m; ++beta) {
    if (beta == alpha) continue;
    if (model.density.empty()) {
      p.push_back(unit_ball_volume(model.dim) * std::pow(2.0, model.dim) / model.volume);
    } else {
      gg_detail::Piecewise1D f(side, model.density[static_cast<std::size_t>(beta)]);
      p.push_back(std::clamp(gg_detail::ball_mass(f, u[0], 2.0), 0.0, 1.0));
    }
  }
  return p;
}

inline LatticePmf gg_neighbors_marginal_pmf(const GgNeighborsModel& model, long alpha,
                                            const std::vector<double>& u) {
  return gg_detail::profile_count_pmf(
      gg_detail::split_profile(gg_neighbors_probs(model, alpha, u)));
}

inline double gg_neighbors_indicator_mean(const GgNeighborsModel& model, long alpha,
                                          Statistic kind) {
  const std::vector<double> origin(static_cast<std::size_t>(model.dim), 0.0);
  if (model.density.empty())
    return indicator_prob(gg_neighbors_marginal_pmf(model, alpha, origin),
                          model.d[static_cast<std::size_t>(alpha)], kind);
  const double side = gg_neighbors_side(model);
  gg_detail::Piecewise1D f(side, model.density[static_cast<std::size_t>(alpha)]);
  const long cells = 8192;
  const double h = side / static_cast<double>(cells);
  double mu = 0.0;
  std::vector<double> x(1);
  for (long i = 0; i < cells; ++i) {
    x[0] = (static_cast<double>(i) + 0.5) * h;
    mu += h * f.density_at(x[0]) *
          indicator_prob(gg_neighbors_marginal_pmf(model, alpha, x),
                         model.d[static_cast<std::size_t>(alpha)], kind);
  }
  return mu;
}

inline double gg_neighbors_mean(const GgNeighborsModel& model, Statistic kind) {
  double mu = 0.0;
  for (long alpha = 0; alpha < model.m; ++alpha) {
    const auto ia = static_cast<std::size_t>(alpha);
    if (model.w[ia] == 0.0) continue;
    mu += model.w[ia] * gg_neighbors_indicator_mean(model, alpha, kind);
  }
  return mu;
}

inline Reduction gg_neighbors_reduce(const GgNeighborsModel& model, Statistic kind) {
  Reduction out;
  // The count support is [0, m-1] for every center (neighbor probabilities
  // lie strictly inside (0,1) thanks to the torus-size validity checks).
  for (long alpha = 0; alpha < model.m; ++alpha) {
    const auto ia = static_cast<std::size_t>(alpha);
    if (model.w[ia] == 0.0) continue;
    if (model.d[ia] > model.m - 1) {
      if (kind == Statistic::ne) {
        out.offset += model.w[ia];
        out.ones.push_back(alpha);
      }
      continue;
    }
    out.retained.push_back(alpha);
  }
  return out;
}

inline double gg_neighbors_coupling_constant(const GgNeighborsModel& model, Statistic kind) {
  const auto red = gg_neighbors_reduce(model, kind);
  if (red.retained.empty())
    throw std::invalid_argument("gg_neighbors: statistic is almost surely constant");
  const long kappa1 = gg_kappa1(model);
  double wmax = 0.0;
  long dmax = 0;
  std::vector<long> dvec, dvec_up;
  for (long alpha : red.retained) {
    const auto ia = static_cast<std::size_t>(alpha);
    wmax = std::max(wmax, model.w[ia]);
    dmax = std::max(dmax, model.d[ia]);
    dvec.push_back(model.d[ia]);
    dvec_up.push_back(model.d[ia] + 1);
  }
  const double sd = sigma_sum(dvec, kappa1);
  if (kind == Statistic::ge) return wmax * static_cast<double>(dmax) * (sd + 1.0);
  return wmax * (sd + sigma_sum(dvec_up, kappa1) + 1.0);
}

// Size-bias pair sampler for neighbor counts: picks a center alpha with
// probability proportional to w_alpha * E[indicator], places it at a location
// drawn from its (indicator-tilted) density, lifts its neighbor count through
// the monotone chain, and places every other center conditionally on its
// membership in the radius-2 ball.
class GgNeighborsPairSampler {
 public:
  GgNeighborsPairSampler(GgNeighborsModel model, Statistic kind)
      : model_(std::move(model)),
        kind_(kind),
        side_(gg_neighbors_side(model_)),
        reduction_(gg_neighbors_reduce(model_, kind)) {
    if (reduction_.retained.empty())
      throw std::invalid_argument("gg_neighbors: statistic is almost surely constant");
    const std::vector<double> origin(static_cast<std::size_t>(model_.dim), 0.0);
    if (model_.density.empty()) {
      const auto probs = gg_neighbors_probs(model_, reduction_.retained.front(), origin);
      chain_ = std::make_unique<MonotoneCouplingChain>(probs);
      pmf_ = std::make_unique<LatticePmf>(chain_->conditional().sum_pmf());
      for (long alpha : reduction_.retained) {
        const long d = model_.d[static_cast<std::size_t>(alpha)];
        if (kind_ == Statistic::ge) {
          if (d > pmf_->lo() && lifts_.find(d) == lifts_.end())
            lifts_.emplace(d, std::make_unique<ThresholdLift>(*pmf_, d));
        } else if (perts_.find(d) == perts_.end()) {
          perts_.emplace(d, std::make_unique<NePerturbation>(ne_perturbation(*pmf_, d)));
        }
      }
    } else {
      for (const auto& f : model_.density) densities_.emplace_back(side_, f);
    }
    for (long alpha : reduction_.retained)
      index_weights_.push_back(model_.w[static_cast<std::size_t>(alpha)] *
                               gg_neighbors_indicator_mean(model_, alpha, kind_));
    // Sure indicators keep their full size-bias weight; conditioning on them
    // is vacuous, so drawing one returns an unchanged configuration.
    for (long alpha : reduction_.ones)
      index_weights_.push_back(model_.w[static_cast<std::size_t>(alpha)]);
    double total = 0.0;
    for (double v : index_weights_) total += v;
    for (double& v : index_weights_) v /= total;
  }

  const Reduction& reduction() const { return reduction_; }

  CoupledSample sample(Rng& rng, PairTrace* trace = nullptr) const {
    const std::size_t pick = rng.categorical(index_weights_);
    if (pick >= reduction_.retained.size()) {
      const long alpha = reduction_.ones[pick - reduction_.retained.size()];
      const auto cfg = gg_neighbors_sample_configuration(model_, rng);
      CoupledSample out;
      out.alpha = alpha;
      out.y = out.y_s = gg_neighbors_statistic(model_, cfg, kind_);
      if (trace) {
        trace->alpha = alpha;
        trace->level_counts.assign(1, gg_neighbors_counts(model_, cfg));
      }
      return out;
    }
    const long alpha = reduction_.retained[pick];
    const auto ia = static_cast<std::size_t>(alpha);
    const long d = model_.d[ia];
    for (long attempt = 0; attempt < kMaxReject; ++attempt) {
      std::vector<double> u;
      if (model_.density.empty()) {
        u = gg_detail::uniform_point(model_.dim, side_, rng);
      } else {
        u = {densities_[ia].sample(rng)};
      }
      const auto probs = gg_neighbors_probs(model_, alpha, u);
      const auto sp = gg_detail::split_profile(probs);
      const LatticePmf pmf = gg_detail::profile_count_pmf(sp);
      if (!model_.density.empty()) {
        // Tilted location: accept with the indicator probability at u.
        const double accept = indicator_prob(pmf, d, kind_);
        if (!(rng.uniform() < accept)) continue;
      }

      long base_total = 0, lift_total = 0;
      draw_levels(rng, sp, pmf, d, base_total, lift_total);
      const long base_act = base_total - sp.ones, lift_act = lift_total - sp.ones;
      const int lo_act = static_cast<int>(std::min(base_act, lift_act));
      const int hi_act = static_cast<int>(std::max(base_act, lift_act));
      std::vector<std::uint32_t> path;
      if (!sp.active.empty()) {
        if (model_.density.empty()) {
          path = chain_->sample_path(rng, lo_act, hi_act);
        } else {
          MonotoneCouplingChain chain(sp.active_p);
          path = chain.sample_path(rng, lo_act, hi_act);
        }
      } else {
        path = {0u};
      }
      const std::uint32_t base_mask = base_act <= lift_act ? path.front() : path.back();
      const std::uint32_t lift_mask = base_act <= lift_act ? path.back() : path.front();

      // Map chain slots back to center indices (all centers except alpha).
      std::vector<std::size_t> slot_center;
      for (long beta = 0; beta < model_.m; ++beta)
        if (beta != alpha) slot_center.push_back(static_cast<std::size_t>(beta));

      GermGrainConfig base_cfg, lift_cfg;
      base_cfg.centers.resize(static_cast<std::size_t>(model_.m));
      lift_cfg.centers.resize(static_cast<std::size_t>(model_.m));
      base_cfg.centers[ia] = u;
      lift_cfg.centers[ia] = u;
      std::vector<int> handled(static_cast<std::size_t>(model_.m), 0);
      handled[ia] = 1;
      for (std::size_t k = 0; k < sp.active.size(); ++k) {
        const std::size_t beta = slot_center[sp.active[k]];
        handled[beta] = 1;
        const int b0 = (base_mask >> k) & 1u, b1 = (lift_mask >> k) & 1u;
        if (b0 == b1) {
          base_cfg.centers[beta] = b0 ? place_inside(beta, u, rng) : place_outside(beta, u, rng);
          lift_cfg.centers[beta] = base_cfg.centers[beta];
        } else if (b0 < b1) {
          base_cfg.centers[beta] = place_outside(beta, u, rng);
          lift_cfg.centers[beta] = place_inside(beta, u, rng);
        } else {
          base_cfg.centers[beta] = place_inside(beta, u, rng);
          lift_cfg.centers[beta] = place_outside(beta, u, rng);
        }
      }
      for (std::size_t k = 0; k < slot_center.size(); ++k) {
        const std::size_t beta = slot_center[k];
        if (handled[beta]) continue;
        base_cfg.centers[beta] =
            sp.fixed[k] == 1 ? place_inside(beta, u, rng) : place_outside(beta, u, rng);
        lift_cfg.centers[beta] = base_cfg.centers[beta];
      }
      CoupledSample out;
      out.alpha = alpha;
      out.y = gg_neighbors_statistic(model_, base_cfg, kind_);
      out.y_s = gg_neighbors_statistic(model_, lift_cfg, kind_);
      if (trace) {
        trace->alpha = alpha;
        trace->level_counts.clear();
        GermGrainConfig walk = base_cfg;
        const bool up = base_act <= lift_act;
        for (std::size_t step = 0; step < path.size(); ++step) {
          const std::uint32_t mask = up ? path[step] : path[path.size() - 1 - step];
          for (std::size_t k = 0; k < sp.active.size(); ++k) {
            const std::size_t beta = slot_center[sp.active[k]];
            walk.centers[beta] =
                (mask >> k & 1u) ? ((base_mask >> k & 1u) ? base_cfg.centers[beta]
                                                          : lift_cfg.centers[beta])
                                 : ((base_mask >> k & 1u) ? lift_cfg.centers[beta]
                                                          : base_cfg.centers[beta]);
          }
          trace->level_counts.push_back(gg_neighbors_counts(model_, walk));
        }
      }
      return out;
    }
    throw std::runtime_error("gg_neighbors: location rejection sampler stalled");
  }

 private:
  static constexpr long kMaxReject = 10'000'000;

  void draw_levels(Rng& rng, const gg_detail::SplitProfile& sp, const LatticePmf& pmf, long d,
                   long& base_total, long& lift_total) const {
    if (kind_ == Statistic::ge) {
      if (d <= pmf.lo()) {
        base_total = sample_pmf(pmf, rng);
        lift_total = base_total;
        return;
      }
      if (model_.density.empty() && !sp.active.empty()) {
        const auto draw = lifts_.at(d)->sample(rng);
        base_total = draw.base;
        lift_total = draw.base + draw.increment;
        return;
      }
      const ThresholdLift lift(pmf, d);
      const auto draw = lift.sample(rng);
      base_total = draw.base;
      lift_total = draw.base + draw.increment;
      return;
    }
    if (pmf.size() == 1) {
      base_total = pmf.lo();
      lift_total = base_total;
      return;
    }
    if (model_.density.empty() && !sp.active.empty()) {
      base_total = sample_pmf(pmf, rng);
      lift_total = base_total + sample_ne_step(*perts_.at(d), base_total, rng);
      return;
    }
    const auto pert = ne_perturbation(pmf, d);
    base_total = sample_pmf(pmf, rng);
    lift_total = base_total + sample_ne_step(pert, base_total, rng);
  }

  std::vector<double> place_inside(std::size_t beta, const std::vector<double>& u,
                                   Rng& rng) const {
    if (model_.density.empty()) return gg_detail::ball_point(u, 2.0, side_, rng);
    return {densities_[beta].sample_arc(rng, u[0] - 2.0, u[0] + 2.0)};
  }

  std::vector<double> place_outside(std::size_t beta, const std::vector<double>& u,
                                    Rng& rng) const {
    if (model_.density.empty()) return gg_detail::outside_point(u, 2.0, side_, rng);
    return {densities_[beta].sample_arc(rng, u[0] + 2.0, u[0] - 2.0 + side_)};
  }

  GgNeighborsModel model_;
  Statistic kind_;
  double side_;
  Reduction reduction_;
  std::vector<gg_detail::Piecewise1D> densities_;
  std::unique_ptr<MonotoneCouplingChain> chain_;
  std::unique_ptr<LatticePmf> pmf_;
  std::map<long, std::unique_ptr<ThresholdLift>> lifts_;
  std::map<long, std::unique_ptr<NePerturbation>> perts_;
  std::vector<double> index_weights_;
};

}  // namespace sizebias

#endif
