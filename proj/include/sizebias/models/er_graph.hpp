#ifndef SIZEBIAS_MODELS_ER_GRAPH_HPP
#define SIZEBIAS_MODELS_ER_GRAPH_HPP

#include <algorithm>
#include <cstdint>
#include <cstdlib>
#include <memory>
#include <utility>
#include <vector>

#include "sizebias/couplings.hpp"
#include "sizebias/lattice_pmf.hpp"
#include "sizebias/models/common.hpp"
#include "sizebias/models/model_spec.hpp"
#include "sizebias/monotone_chain.hpp"
#include "sizebias/rng.hpp"

namespace sizebias {

// Edge set stored over unordered vertex pairs a < b.
struct ErGraphConfig {
  long m = 0;
  std::vector<std::uint8_t> edges;
};

inline std::size_t er_edge_index(long m, long a, long b) {
  if (a > b) std::swap(a, b);
  return static_cast<std::size_t>(a * (2 * m - a - 1) / 2 + (b - a - 1));
}

inline LatticePmf er_marginal_pmf(const ErGraphModel& model, long alpha) {
  std::vector<double> probs;
  for (long b = 0; b < model.m; ++b) {
    const double p = model.p[static_cast<std::size_t>(alpha)][static_cast<std::size_t>(b)];
    if (b != alpha && p > 0.0) probs.push_back(p);
  }
  if (probs.empty()) return LatticePmf(0, {1.0});
  return pb_pmf(probs);
}

inline ErGraphConfig er_sample_configuration(const ErGraphModel& model, Rng& rng) {
  ErGraphConfig cfg;
  cfg.m = model.m;
  cfg.edges.assign(static_cast<std::size_t>(model.m * (model.m - 1) / 2), 0);
  for (long a = 0; a < model.m; ++a)
    for (long b = a + 1; b < model.m; ++b)
      cfg.edges[er_edge_index(model.m, a, b)] =
          rng.bernoulli(model.p[static_cast<std::size_t>(a)][static_cast<std::size_t>(b)]) ? 1 : 0;
  return cfg;
}

inline std::vector<long> er_degrees(const ErGraphConfig& cfg) {
  std::vector<long> deg(static_cast<std::size_t>(cfg.m), 0);
  for (long a = 0; a < cfg.m; ++a)
    for (long b = a + 1; b < cfg.m; ++b)
      if (cfg.edges[er_edge_index(cfg.m, a, b)]) {
        ++deg[static_cast<std::size_t>(a)];
        ++deg[static_cast<std::size_t>(b)];
      }
  return deg;
}

inline double er_statistic(const ErGraphModel& model, const ErGraphConfig& cfg,
                           Statistic kind) {
  const auto deg = er_degrees(cfg);
  double y = 0.0;
  for (long alpha = 0; alpha < model.m; ++alpha) {
    const auto ia = static_cast<std::size_t>(alpha);
    const bool hit = kind == Statistic::ge ? deg[ia] >= model.d[ia] : deg[ia] != model.d[ia];
    if (hit) y += model.w[ia];
  }
  return y;
}

inline std::vector<LatticePmf> er_marginals(const ErGraphModel& model) {
  std::vector<LatticePmf> out;
  out.reserve(static_cast<std::size_t>(model.m));
  for (long alpha = 0; alpha < model.m; ++alpha) out.push_back(er_marginal_pmf(model, alpha));
  return out;
}

inline Reduction er_reduce(const ErGraphModel& model, Statistic kind) {
  return reduce_from_marginals(model.w, model.d, er_marginals(model), kind);
}

inline double er_mean(const ErGraphModel& model, Statistic kind) {
  double mu = 0.0;
  for (long alpha = 0; alpha < model.m; ++alpha) {
    const auto ia = static_cast<std::size_t>(alpha);
    if (model.w[ia] == 0.0) continue;
    mu += model.w[ia] * indicator_prob(er_marginal_pmf(model, alpha), model.d[ia], kind);
  }
  return mu;
}

inline double er_coupling_constant(const ErGraphModel& model, Statistic kind) {
  const auto red = er_reduce(model, kind);
  if (red.retained.empty())
    throw std::invalid_argument("er_graph: statistic is almost surely constant");
  double wmax = 0.0;
  long dmax = 0;
  for (long alpha : red.retained) {
    const auto ia = static_cast<std::size_t>(alpha);
    wmax = std::max(wmax, model.w[ia]);
    dmax = std::max(dmax, std::labs(model.d[ia]));
  }
  return kind == Statistic::ge ? wmax * static_cast<double>(dmax + 1) : 2.0 * wmax;
}

// Size-bias pair sampler: picks a vertex with probability proportional to
// w_alpha * P(indicator), lifts that vertex's degree through the monotone
// edge chain, and reuses all other edges unchanged in both configurations.
class ErPairSampler {
 public:
  ErPairSampler(ErGraphModel model, Statistic kind)
      : model_(std::move(model)), kind_(kind), reduction_(er_reduce(model_, kind)) {
    if (reduction_.retained.empty())
      throw std::invalid_argument("er_graph: statistic is almost surely constant");
    for (long alpha : reduction_.retained) {
      const auto ia = static_cast<std::size_t>(alpha);
      Site site;
      site.alpha = alpha;
      for (long b = 0; b < model_.m; ++b) {
        const double p = model_.p[ia][static_cast<std::size_t>(b)];
        if (b != alpha && p > 0.0) {
          site.neighbors.push_back(b);
          site.probs.push_back(p);
        }
      }
      site.chain = std::make_unique<MonotoneCouplingChain>(site.probs);
      const LatticePmf pmf = site.chain->conditional().sum_pmf();
      if (kind_ == Statistic::ge) {
        site.lift = std::make_unique<ThresholdLift>(pmf, model_.d[ia]);
      } else {
        site.pmf = std::make_unique<LatticePmf>(pmf);
        site.pert = std::make_unique<NePerturbation>(ne_perturbation(pmf, model_.d[ia]));
      }
      index_weights_.push_back(model_.w[ia] * indicator_prob(pmf, model_.d[ia], kind_));
      sites_.push_back(std::move(site));
    }
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
    if (pick >= sites_.size()) {
      const long alpha = reduction_.ones[pick - sites_.size()];
      const auto cfg = er_sample_configuration(model_, rng);
      CoupledSample out;
      out.alpha = alpha;
      out.y = out.y_s = er_statistic(model_, cfg, kind_);
      if (trace) {
        trace->alpha = alpha;
        trace->level_counts.assign(1, er_degrees(cfg));
      }
      return out;
    }
    const auto& site = sites_[pick];
    long base_level = 0, lift_level = 0;
    if (kind_ == Statistic::ge) {
      const auto draw = site.lift->sample(rng);
      base_level = draw.base;
      lift_level = draw.base + draw.increment;
    } else {
      base_level = sample_pmf(*site.pmf, rng);
      lift_level = base_level + sample_ne_step(*site.pert, base_level, rng);
    }
    const int lo_level = static_cast<int>(std::min(base_level, lift_level));
    const int hi_level = static_cast<int>(std::max(base_level, lift_level));
    const auto path = site.chain->sample_path(rng, lo_level, hi_level);
    const std::uint32_t base_mask = base_level <= lift_level ? path.front() : path.back();
    const std::uint32_t lift_mask = base_level <= lift_level ? path.back() : path.front();

    ErGraphConfig cfg;
    cfg.m = model_.m;
    cfg.edges.assign(static_cast<std::size_t>(model_.m * (model_.m - 1) / 2), 0);
    for (long a = 0; a < model_.m; ++a) {
      if (a == site.alpha) continue;
      for (long b = a + 1; b < model_.m; ++b) {
        if (b == site.alpha) continue;
        cfg.edges[er_edge_index(model_.m, a, b)] =
            rng.bernoulli(model_.p[static_cast<std::size_t>(a)][static_cast<std::size_t>(b)]) ? 1
                                                                                              : 0;
      }
    }
    apply_mask(cfg, site, base_mask);
    CoupledSample out;
    out.alpha = site.alpha;
    out.y = er_statistic(model_, cfg, kind_);
    ErGraphConfig lifted = cfg;
    apply_mask(lifted, site, lift_mask);
    out.y_s = er_statistic(model_, lifted, kind_);
    if (trace) {
      trace->alpha = site.alpha;
      trace->level_counts.clear();
      ErGraphConfig walk = cfg;
      for (std::uint32_t mask : path) {
        apply_mask(walk, site, mask);
        trace->level_counts.push_back(er_degrees(walk));
      }
    }
    return out;
  }

 private:
  struct Site {
    long alpha = 0;
    std::vector<long> neighbors;
    std::vector<double> probs;
    std::unique_ptr<MonotoneCouplingChain> chain;
    std::unique_ptr<ThresholdLift> lift;
    std::unique_ptr<LatticePmf> pmf;
    std::unique_ptr<NePerturbation> pert;
  };

  void apply_mask(ErGraphConfig& cfg, const Site& site, std::uint32_t mask) const {
    for (std::size_t j = 0; j < site.neighbors.size(); ++j)
      cfg.edges[er_edge_index(model_.m, site.alpha, site.neighbors[j])] = (mask >> j) & 1u;
  }

  ErGraphModel model_;
  Statistic kind_;
  Reduction reduction_;
  std::vector<Site> sites_;
  std::vector<double> index_weights_;
};

}  // namespace sizebias

#endif
