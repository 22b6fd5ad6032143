#ifndef SIZEBIAS_MODELS_MULTINOMIAL_HPP
#define SIZEBIAS_MODELS_MULTINOMIAL_HPP

#include <algorithm>
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

// Ball placements: location[j] is the urn holding ball j.
struct MultinomialConfig {
  std::vector<long> location;
};

inline LatticePmf multinomial_marginal_pmf(const MultinomialModel& model, long alpha) {
  std::vector<double> probs;
  for (long j = 0; j < model.n; ++j) {
    const double p = model.p[static_cast<std::size_t>(alpha)][static_cast<std::size_t>(j)];
    if (p > 0.0) probs.push_back(p);
  }
  if (probs.empty()) return LatticePmf(0, {1.0});
  return pb_pmf(probs);
}

inline MultinomialConfig multinomial_sample_configuration(const MultinomialModel& model,
                                                          Rng& rng) {
  MultinomialConfig cfg;
  cfg.location.resize(static_cast<std::size_t>(model.n));
  std::vector<double> column(static_cast<std::size_t>(model.m));
  for (long j = 0; j < model.n; ++j) {
    for (long alpha = 0; alpha < model.m; ++alpha)
      column[static_cast<std::size_t>(alpha)] =
          model.p[static_cast<std::size_t>(alpha)][static_cast<std::size_t>(j)];
    cfg.location[static_cast<std::size_t>(j)] = static_cast<long>(rng.categorical(column));
  }
  return cfg;
}

inline std::vector<long> multinomial_counts(const MultinomialModel& model,
                                            const MultinomialConfig& cfg) {
  std::vector<long> counts(static_cast<std::size_t>(model.m), 0);
  for (long loc : cfg.location) ++counts[static_cast<std::size_t>(loc)];
  return counts;
}

inline double multinomial_statistic(const MultinomialModel& model,
                                    const MultinomialConfig& cfg, Statistic kind) {
  const auto counts = multinomial_counts(model, cfg);
  double y = 0.0;
  for (long alpha = 0; alpha < model.m; ++alpha) {
    const auto ia = static_cast<std::size_t>(alpha);
    const bool hit =
        kind == Statistic::ge ? counts[ia] >= model.d[ia] : counts[ia] != model.d[ia];
    if (hit) y += model.w[ia];
  }
  return y;
}

inline std::vector<LatticePmf> multinomial_marginals(const MultinomialModel& model) {
  std::vector<LatticePmf> out;
  out.reserve(static_cast<std::size_t>(model.m));
  for (long alpha = 0; alpha < model.m; ++alpha)
    out.push_back(multinomial_marginal_pmf(model, alpha));
  return out;
}

inline Reduction multinomial_reduce(const MultinomialModel& model, Statistic kind) {
  return reduce_from_marginals(model.w, model.d, multinomial_marginals(model), kind);
}

inline double multinomial_mean(const MultinomialModel& model, Statistic kind) {
  double mu = 0.0;
  for (long alpha = 0; alpha < model.m; ++alpha) {
    const auto ia = static_cast<std::size_t>(alpha);
    if (model.w[ia] == 0.0) continue;
    mu += model.w[ia] *
          indicator_prob(multinomial_marginal_pmf(model, alpha), model.d[ia], kind);
  }
  return mu;
}

inline double multinomial_coupling_constant(const MultinomialModel& model, Statistic kind) {
  const auto red = multinomial_reduce(model, kind);
  if (red.retained.empty())
    throw std::invalid_argument("multinomial: statistic is almost surely constant");
  double wmax = 0.0;
  for (long alpha : red.retained) wmax = std::max(wmax, model.w[static_cast<std::size_t>(alpha)]);
  return kind == Statistic::ge ? wmax : 2.0 * wmax;
}

// Size-bias pair sampler: picks an urn alpha, lifts its occupancy through the
// monotone ball-membership chain, and relocates balls that leave alpha to an
// urn drawn from that ball's conditional placement law. Balls never placed in
// alpha keep one shared draw across both configurations.
class MultinomialPairSampler {
 public:
  MultinomialPairSampler(MultinomialModel model, Statistic kind)
      : model_(std::move(model)),
        kind_(kind),
        reduction_(multinomial_reduce(model_, kind)) {
    if (reduction_.retained.empty())
      throw std::invalid_argument("multinomial: statistic is almost surely constant");
    for (long alpha : reduction_.retained) {
      const auto ia = static_cast<std::size_t>(alpha);
      Site site;
      site.alpha = alpha;
      for (long j = 0; j < model_.n; ++j) {
        const double p = model_.p[ia][static_cast<std::size_t>(j)];
        if (p > 0.0) {
          site.balls.push_back(j);
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
      // Conditional placement over the other urns for each ball of the chain.
      site.alt.resize(site.balls.size());
      for (std::size_t k = 0; k < site.balls.size(); ++k) {
        const auto j = static_cast<std::size_t>(site.balls[k]);
        auto& law = site.alt[k];
        law.assign(static_cast<std::size_t>(model_.m), 0.0);
        const double rest = 1.0 - site.probs[k];
        for (long beta = 0; beta < model_.m; ++beta)
          if (beta != alpha) law[static_cast<std::size_t>(beta)] =
              model_.p[static_cast<std::size_t>(beta)][j] / rest;
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
      const auto cfg = multinomial_sample_configuration(model_, rng);
      CoupledSample out;
      out.alpha = alpha;
      out.y = out.y_s = multinomial_statistic(model_, cfg, kind_);
      if (trace) {
        trace->alpha = alpha;
        trace->level_counts.assign(1, multinomial_counts(model_, cfg));
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

    // One shared placement per ball: chain balls get an alternative urn used
    // whenever their membership indicator is zero; other balls get a plain
    // conditional draw (alpha has probability zero for them after reduction
    // only when p[alpha][j] == 0).
    std::vector<long> alt(site.balls.size());
    for (std::size_t k = 0; k < site.balls.size(); ++k)
      alt[k] = static_cast<long>(rng.categorical(site.alt[k]));
    MultinomialConfig cfg;
    cfg.location.assign(static_cast<std::size_t>(model_.n), site.alpha);
    std::vector<double> column(static_cast<std::size_t>(model_.m));
    std::vector<std::size_t> chain_pos(static_cast<std::size_t>(model_.n),
                                       static_cast<std::size_t>(-1));
    for (std::size_t k = 0; k < site.balls.size(); ++k)
      chain_pos[static_cast<std::size_t>(site.balls[k])] = k;
    for (long j = 0; j < model_.n; ++j) {
      if (chain_pos[static_cast<std::size_t>(j)] != static_cast<std::size_t>(-1)) continue;
      for (long beta = 0; beta < model_.m; ++beta)
        column[static_cast<std::size_t>(beta)] =
            model_.p[static_cast<std::size_t>(beta)][static_cast<std::size_t>(j)];
      cfg.location[static_cast<std::size_t>(j)] = static_cast<long>(rng.categorical(column));
    }
    apply_mask(cfg, site, base_mask, alt);
    CoupledSample out;
    out.alpha = site.alpha;
    out.y = multinomial_statistic(model_, cfg, kind_);
    MultinomialConfig lifted = cfg;
    apply_mask(lifted, site, lift_mask, alt);
    out.y_s = multinomial_statistic(model_, lifted, kind_);
    if (trace) {
      trace->alpha = site.alpha;
      trace->level_counts.clear();
      MultinomialConfig walk = cfg;
      for (std::uint32_t mask : path) {
        apply_mask(walk, site, mask, alt);
        trace->level_counts.push_back(multinomial_counts(model_, walk));
      }
    }
    return out;
  }

 private:
  struct Site {
    long alpha = 0;
    std::vector<long> balls;
    std::vector<double> probs;
    std::vector<std::vector<double>> alt;
    std::unique_ptr<MonotoneCouplingChain> chain;
    std::unique_ptr<ThresholdLift> lift;
    std::unique_ptr<LatticePmf> pmf;
    std::unique_ptr<NePerturbation> pert;
  };

  void apply_mask(MultinomialConfig& cfg, const Site& site, std::uint32_t mask,
                  const std::vector<long>& alt) const {
    for (std::size_t k = 0; k < site.balls.size(); ++k)
      cfg.location[static_cast<std::size_t>(site.balls[k])] =
          (mask >> k & 1u) ? site.alpha : alt[k];
  }

  MultinomialModel model_;
  Statistic kind_;
  Reduction reduction_;
  std::vector<Site> sites_;
  std::vector<double> index_weights_;
};

}  // namespace sizebias

#endif
