#ifndef SIZEBIAS_MODELS_COMMON_HPP
#define SIZEBIAS_MODELS_COMMON_HPP

#include <stdexcept>
#include <vector>

#include "sizebias/lattice_pmf.hpp"
#include "sizebias/rng.hpp"

namespace sizebias {

inline long sample_pmf(const LatticePmf& pmf, Rng& rng) {
  return pmf.lo() + static_cast<long>(rng.categorical(pmf.probs()));
}

// Which indicator family the weighted sum runs over: 1(M_alpha >= d_alpha)
// or 1(M_alpha != d_alpha).
enum class Statistic { ge, ne };

// Constant summands stripped from the sum at construction time. Indicators
// that are almost surely one contribute their weight to `offset` (their
// indices land in `ones`); indicators that are almost surely zero (or carry
// zero weight) are dropped. Every retained index has a genuinely random
// indicator. The `ones` indices still carry size-bias weight: conditioning on
// a sure event is vacuous, so a pair sampler that draws one of them returns
// an unchanged configuration.
struct Reduction {
  std::vector<long> retained;
  std::vector<long> ones;
  double offset = 0.0;
};

// One draw of the coupled pair: y is distributed as the statistic, y_s as
// its size-bias transform, and y_s - y never exceeds the model's coupling
// constant. alpha is the mixture index chosen for the lift (-1 when the
// mixture runs over a continuum).
struct CoupledSample {
  double y = 0.0;
  double y_s = 0.0;
  long alpha = -1;
};

// Optional introspection filled during pair sampling: the count vectors at
// each chain level walked between the base and lifted configurations.
struct PairTrace {
  long alpha = -1;
  std::vector<std::vector<long>> level_counts;
};

inline double indicator_prob(const LatticePmf& pmf, long d, Statistic kind) {
  return kind == Statistic::ge ? tail_ge(pmf, d) : prob_ne(pmf, d);
}

// Reduction over discrete-index models from their marginal laws.
inline Reduction reduce_from_marginals(const std::vector<double>& w,
                                       const std::vector<long>& d,
                                       const std::vector<LatticePmf>& marginals,
                                       Statistic kind) {
  Reduction out;
  for (std::size_t alpha = 0; alpha < w.size(); ++alpha) {
    if (w[alpha] == 0.0) continue;
    const auto& pmf = marginals[alpha];
    const long da = d[alpha];
    if (kind == Statistic::ge) {
      if (da <= pmf.lo()) {
        out.offset += w[alpha];
        out.ones.push_back(static_cast<long>(alpha));
      } else if (da > pmf.hi()) {
        // never fires
      } else {
        out.retained.push_back(static_cast<long>(alpha));
      }
    } else {
      const double at_d = pmf.at(da);
      if (at_d == 0.0) {
        out.offset += w[alpha];
        out.ones.push_back(static_cast<long>(alpha));
      } else if (at_d == 1.0 || pmf.size() == 1) {
        // point mass at d: never fires
      } else {
        out.retained.push_back(static_cast<long>(alpha));
      }
    }
  }
  return out;
}

inline void require_weights_thresholds(const std::vector<double>& w,
                                       const std::vector<long>& d, std::size_t m,
                                       const char* what) {
  if (w.size() != m || d.size() != m)
    throw std::invalid_argument(std::string(what) +
                                ": weights and thresholds must have one entry per index");
  bool any = false;
  for (double wa : w) {
    if (!(wa >= 0.0))
      throw std::invalid_argument(std::string(what) + ": weights must be nonnegative");
    any = any || wa > 0.0;
  }
  if (!any) throw std::invalid_argument(std::string(what) + ": all weights are zero");
}

}  // namespace sizebias

#endif
