#ifndef SIZEBIAS_MODELS_HPP
#define SIZEBIAS_MODELS_HPP

#include <memory>
#include <stdexcept>
#include <variant>
#include <vector>

#include "sizebias/models/common.hpp"
#include "sizebias/models/er_graph.hpp"
#include "sizebias/models/germ_grain.hpp"
#include "sizebias/models/hypergeometric.hpp"
#include "sizebias/models/model_spec.hpp"
#include "sizebias/models/multinomial.hpp"

namespace sizebias {

using Configuration =
    std::variant<ErGraphConfig, MultinomialConfig, HypergeometricConfig, GermGrainConfig>;

inline LatticePmf marginal_pmf(const ModelSpec& spec, long alpha) {
  struct V {
    long alpha;
    LatticePmf operator()(const ErGraphModel& m) const { return er_marginal_pmf(m, alpha); }
    LatticePmf operator()(const MultinomialModel& m) const {
      return multinomial_marginal_pmf(m, alpha);
    }
    LatticePmf operator()(const HypergeometricModel& m) const {
      return hyper_marginal_pmf(m, alpha);
    }
    LatticePmf operator()(const GgVolumeModel&) const {
      throw std::invalid_argument("gg_volume: no per-index marginal law");
    }
    LatticePmf operator()(const GgNeighborsModel& m) const {
      if (!m.density.empty())
        throw std::invalid_argument(
            "gg_neighbors: marginal law is location-dependent for non-uniform densities");
      return gg_neighbors_marginal_pmf(m, alpha,
                                       std::vector<double>(static_cast<std::size_t>(m.dim), 0.0));
    }
  };
  return std::visit(V{alpha}, spec);
}

inline MeanEstimate mean_estimate(const ModelSpec& spec, Statistic kind) {
  struct V {
    Statistic kind;
    MeanEstimate operator()(const ErGraphModel& m) const { return {er_mean(m, kind), 0.0}; }
    MeanEstimate operator()(const MultinomialModel& m) const {
      return {multinomial_mean(m, kind), 0.0};
    }
    MeanEstimate operator()(const HypergeometricModel& m) const {
      return {hyper_mean(m, kind), 0.0};
    }
    MeanEstimate operator()(const GgVolumeModel& m) const {
      return gg_volume_mean_estimate(m, kind);
    }
    MeanEstimate operator()(const GgNeighborsModel& m) const {
      return {gg_neighbors_mean(m, kind), m.density.empty() ? 0.0 : 1e-7};
    }
  };
  return std::visit(V{kind}, spec);
}

inline double mean_stat(const ModelSpec& spec, Statistic kind) {
  return mean_estimate(spec, kind).value;
}

inline double coupling_constant(const ModelSpec& spec, Statistic kind) {
  struct V {
    Statistic kind;
    double operator()(const ErGraphModel& m) const { return er_coupling_constant(m, kind); }
    double operator()(const MultinomialModel& m) const {
      return multinomial_coupling_constant(m, kind);
    }
    double operator()(const HypergeometricModel& m) const {
      return hyper_coupling_constant(m, kind);
    }
    double operator()(const GgVolumeModel& m) const {
      return gg_volume_coupling_constant(m, kind);
    }
    double operator()(const GgNeighborsModel& m) const {
      return gg_neighbors_coupling_constant(m, kind);
    }
  };
  return std::visit(V{kind}, spec);
}

inline Reduction reduce(const ModelSpec& spec, Statistic kind) {
  struct V {
    Statistic kind;
    Reduction operator()(const ErGraphModel& m) const { return er_reduce(m, kind); }
    Reduction operator()(const MultinomialModel& m) const {
      return multinomial_reduce(m, kind);
    }
    Reduction operator()(const HypergeometricModel& m) const { return hyper_reduce(m, kind); }
    Reduction operator()(const GgVolumeModel&) const { return Reduction{}; }
    Reduction operator()(const GgNeighborsModel& m) const {
      return gg_neighbors_reduce(m, kind);
    }
  };
  return std::visit(V{kind}, spec);
}

inline Configuration sample_configuration(const ModelSpec& spec, Rng& rng) {
  struct V {
    Rng& rng;
    Configuration operator()(const ErGraphModel& m) const {
      return er_sample_configuration(m, rng);
    }
    Configuration operator()(const MultinomialModel& m) const {
      return multinomial_sample_configuration(m, rng);
    }
    Configuration operator()(const HypergeometricModel& m) const {
      return hyper_sample_configuration(m, rng);
    }
    Configuration operator()(const GgVolumeModel& m) const {
      return gg_volume_sample_configuration(m, rng);
    }
    Configuration operator()(const GgNeighborsModel& m) const {
      return gg_neighbors_sample_configuration(m, rng);
    }
  };
  return std::visit(V{rng}, spec);
}

inline double statistic(const ModelSpec& spec, const Configuration& cfg, Statistic kind) {
  if (const auto* m = std::get_if<ErGraphModel>(&spec))
    return er_statistic(*m, std::get<ErGraphConfig>(cfg), kind);
  if (const auto* m = std::get_if<MultinomialModel>(&spec))
    return multinomial_statistic(*m, std::get<MultinomialConfig>(cfg), kind);
  if (const auto* m = std::get_if<HypergeometricModel>(&spec))
    return hyper_statistic(*m, std::get<HypergeometricConfig>(cfg), kind);
  if (const auto* m = std::get_if<GgVolumeModel>(&spec))
    return gg_volume_statistic(*m, std::get<GermGrainConfig>(cfg), kind);
  return gg_neighbors_statistic(std::get<GgNeighborsModel>(spec), std::get<GermGrainConfig>(cfg),
                                kind);
}

// Total weight carried by the statistic; W - Y is the complementary count
// (indicators flipped), used to read left tails as right tails.
inline double total_weight(const ModelSpec& spec) {
  struct V {
    double operator()(const ErGraphModel& m) const {
      double s = 0.0;
      for (double w : m.w) s += w;
      return s;
    }
    double operator()(const MultinomialModel& m) const {
      double s = 0.0;
      for (double w : m.w) s += w;
      return s;
    }
    double operator()(const HypergeometricModel& m) const {
      double s = 0.0;
      for (double w : m.w) s += w;
      return s;
    }
    double operator()(const GgVolumeModel& m) const {
      double s = 0.0;
      for (double w : m.weight.values) s += w;
      return s * m.volume / static_cast<double>(m.weight.values.size());
    }
    double operator()(const GgNeighborsModel& m) const {
      double s = 0.0;
      for (double w : m.w) s += w;
      return s;
    }
  };
  return std::visit(V{}, spec);
}

// Unified size-bias pair sampler over any model.
class PairSampler {
 public:
  PairSampler(const ModelSpec& spec, Statistic kind) {
    if (const auto* m = std::get_if<ErGraphModel>(&spec))
      er_ = std::make_unique<ErPairSampler>(*m, kind);
    else if (const auto* m = std::get_if<MultinomialModel>(&spec))
      mult_ = std::make_unique<MultinomialPairSampler>(*m, kind);
    else if (const auto* m = std::get_if<HypergeometricModel>(&spec))
      hyper_ = std::make_unique<HyperPairSampler>(*m, kind);
    else if (const auto* m = std::get_if<GgVolumeModel>(&spec))
      ggv_ = std::make_unique<GgVolumePairSampler>(*m, kind);
    else
      ggn_ = std::make_unique<GgNeighborsPairSampler>(std::get<GgNeighborsModel>(spec), kind);
  }

  CoupledSample sample(Rng& rng, PairTrace* trace = nullptr) const {
    if (er_) return er_->sample(rng, trace);
    if (mult_) return mult_->sample(rng, trace);
    if (hyper_) return hyper_->sample(rng, trace);
    if (ggv_) return ggv_->sample(rng, trace);
    return ggn_->sample(rng, trace);
  }

 private:
  std::unique_ptr<ErPairSampler> er_;
  std::unique_ptr<MultinomialPairSampler> mult_;
  std::unique_ptr<HyperPairSampler> hyper_;
  std::unique_ptr<GgVolumePairSampler> ggv_;
  std::unique_ptr<GgNeighborsPairSampler> ggn_;
};

}  // namespace sizebias

#endif
