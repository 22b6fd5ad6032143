#ifndef SIZEBIAS_MODELS_HYPERGEOMETRIC_HPP
#define SIZEBIAS_MODELS_HYPERGEOMETRIC_HPP

#include <algorithm>
#include <memory>
#include <utility>
#include <vector>

#include "sizebias/couplings.hpp"
#include "sizebias/lattice_pmf.hpp"
#include "sizebias/models/common.hpp"
#include "sizebias/models/model_spec.hpp"
#include "sizebias/rng.hpp"

namespace sizebias {

// Sample contents: counts[alpha] balls of each color drawn.
struct HypergeometricConfig {
  std::vector<long> counts;
};

inline LatticePmf hyper_marginal_pmf(const HypergeometricModel& model, long alpha) {
  return hypergeometric_pmf(model.colors[static_cast<std::size_t>(alpha)], model.sample_size,
                            model.population());
}

inline HypergeometricConfig hyper_sample_configuration(const HypergeometricModel& model,
                                                       Rng& rng) {
  HypergeometricConfig cfg;
  cfg.counts.assign(model.colors.size(), 0);
  std::vector<double> rem(model.colors.begin(), model.colors.end());
  double pop = 0.0;
  for (double r : rem) pop += r;
  for (long t = 0; t < model.sample_size; ++t) {
    double u = rng.uniform() * pop, acc = 0.0;
    std::size_t pick = rem.size() - 1;
    for (std::size_t c = 0; c < rem.size(); ++c) {
      acc += rem[c];
      if (u < acc) { pick = c; break; }
    }
    rem[pick] -= 1.0;
    pop -= 1.0;
    ++cfg.counts[pick];
  }
  return cfg;
}

inline double hyper_statistic(const HypergeometricModel& model,
                              const HypergeometricConfig& cfg, Statistic kind) {
  double y = 0.0;
  for (std::size_t alpha = 0; alpha < model.colors.size(); ++alpha) {
    const bool hit = kind == Statistic::ge ? cfg.counts[alpha] >= model.d[alpha]
                                           : cfg.counts[alpha] != model.d[alpha];
    if (hit) y += model.w[alpha];
  }
  return y;
}

inline std::vector<LatticePmf> hyper_marginals(const HypergeometricModel& model) {
  std::vector<LatticePmf> out;
  out.reserve(model.colors.size());
  for (std::size_t alpha = 0; alpha < model.colors.size(); ++alpha)
    out.push_back(hyper_marginal_pmf(model, static_cast<long>(alpha)));
  return out;
}

inline Reduction hyper_reduce(const HypergeometricModel& model, Statistic kind) {
  return reduce_from_marginals(model.w, model.d, hyper_marginals(model), kind);
}

inline double hyper_mean(const HypergeometricModel& model, Statistic kind) {
  double mu = 0.0;
  for (std::size_t alpha = 0; alpha < model.colors.size(); ++alpha) {
    if (model.w[alpha] == 0.0) continue;
    mu += model.w[alpha] *
          indicator_prob(hyper_marginal_pmf(model, static_cast<long>(alpha)), model.d[alpha],
                         kind);
  }
  return mu;
}

inline double hyper_coupling_constant(const HypergeometricModel& model, Statistic kind) {
  const auto red = hyper_reduce(model, kind);
  if (red.retained.empty())
    throw std::invalid_argument("hypergeometric: statistic is almost surely constant");
  double wmax = 0.0;
  for (long alpha : red.retained) wmax = std::max(wmax, model.w[static_cast<std::size_t>(alpha)]);
  return kind == Statistic::ge ? wmax : 2.0 * wmax;
}

// Size-bias pair sampler. The count of color alpha is lifted along the
// exchangeable without-replacement chain: the sample at alpha-count a holds a
// multivariate hypergeometric draw of s - a balls from the other colors, and
// each up-step swaps a uniformly chosen non-alpha sample ball for an alpha
// ball. Snapshots of that walk at the base and lifted levels share all other
// randomness.
class HyperPairSampler {
 public:
  HyperPairSampler(HypergeometricModel model, Statistic kind)
      : model_(std::move(model)), kind_(kind), reduction_(hyper_reduce(model_, kind)) {
    if (reduction_.retained.empty())
      throw std::invalid_argument("hypergeometric: statistic is almost surely constant");
    for (long alpha : reduction_.retained) {
      const auto ia = static_cast<std::size_t>(alpha);
      Site site;
      site.alpha = alpha;
      site.pmf = std::make_unique<LatticePmf>(hyper_marginal_pmf(model_, alpha));
      if (kind_ == Statistic::ge)
        site.lift = std::make_unique<ThresholdLift>(*site.pmf, model_.d[ia]);
      else
        site.pert = std::make_unique<NePerturbation>(ne_perturbation(*site.pmf, model_.d[ia]));
      index_weights_.push_back(model_.w[ia] *
                               indicator_prob(*site.pmf, model_.d[ia], kind_));
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
      const auto cfg = hyper_sample_configuration(model_, rng);
      CoupledSample out;
      out.alpha = alpha;
      out.y = out.y_s = hyper_statistic(model_, cfg, kind_);
      if (trace) {
        trace->alpha = alpha;
        trace->level_counts.assign(1, cfg.counts);
      }
      return out;
    }
    const auto& site = sites_[pick];
    const auto ia = static_cast<std::size_t>(site.alpha);
    long base_level = 0, lift_level = 0;
    if (kind_ == Statistic::ge) {
      const auto draw = site.lift->sample(rng);
      base_level = draw.base;
      lift_level = draw.base + draw.increment;
    } else {
      base_level = sample_pmf(*site.pmf, rng);
      lift_level = base_level + sample_ne_step(*site.pert, base_level, rng);
    }
    const long lo_level = std::min(base_level, lift_level);
    const long hi_level = std::max(base_level, lift_level);

    // Non-alpha sample at the chain floor, drawn without replacement.
    const long floor_level = site.pmf->lo();
    std::vector<long> counts(model_.colors.size(), 0);
    std::vector<double> rem(model_.colors.begin(), model_.colors.end());
    rem[ia] = 0.0;
    double pop = 0.0;
    for (double r : rem) pop += r;
    for (long t = 0; t < model_.sample_size - floor_level; ++t) {
      double u = rng.uniform() * pop, acc = 0.0;
      std::size_t pick = rem.size() - 1;
      for (std::size_t c = 0; c < rem.size(); ++c) {
        acc += rem[c];
        if (u < acc) { pick = c; break; }
      }
      rem[pick] -= 1.0;
      pop -= 1.0;
      ++counts[pick];
    }
    counts[ia] = floor_level;

    if (trace) {
      trace->alpha = site.alpha;
      trace->level_counts.clear();
    }
    HypergeometricConfig base_cfg, lift_cfg;
    for (long level = floor_level; level <= hi_level; ++level) {
      if (level > floor_level) {
        // Swap a uniform non-alpha sample ball for an alpha ball.
        const long others = model_.sample_size - (level - 1);
        double u = rng.uniform() * static_cast<double>(others), acc = 0.0;
        std::size_t pick = counts.size() - 1;
        for (std::size_t c = 0; c < counts.size(); ++c) {
          if (c == ia) continue;
          acc += static_cast<double>(counts[c]);
          if (u < acc) { pick = c; break; }
        }
        --counts[pick];
        counts[ia] = level;
      }
      if (level == base_level) base_cfg.counts = counts;
      if (level == lift_level) lift_cfg.counts = counts;
      if (trace && level >= lo_level) trace->level_counts.push_back(counts);
    }
    CoupledSample out;
    out.alpha = site.alpha;
    out.y = hyper_statistic(model_, base_cfg, kind_);
    out.y_s = hyper_statistic(model_, lift_cfg, kind_);
    return out;
  }

 private:
  struct Site {
    long alpha = 0;
    std::unique_ptr<LatticePmf> pmf;
    std::unique_ptr<ThresholdLift> lift;
    std::unique_ptr<NePerturbation> pert;
  };

  HypergeometricModel model_;
  Statistic kind_;
  Reduction reduction_;
  std::vector<Site> sites_;
  std::vector<double> index_weights_;
};

}  // namespace sizebias

#endif
