#ifndef SIZEBIAS_COUPLINGS_HPP
#define SIZEBIAS_COUPLINGS_HPP

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <tuple>
#include <utility>
#include <vector>

#include "sizebias/lattice_pmf.hpp"
#include "sizebias/rng.hpp"

namespace sizebias {

namespace detail {

inline void require_log_concave(const LatticePmf& pmf, const char* what) {
  if (!is_log_concave(pmf))
    throw std::invalid_argument(std::string(what) + ": pmf is not log-concave");
}

// P(M >= x) for x in [lo, hi + 1], indexed by x - lo.
inline std::vector<double> upper_tails(const LatticePmf& pmf) {
  std::vector<double> g(pmf.size() + 1, 0.0);
  for (std::size_t i = pmf.size(); i-- > 0;) g[i] = g[i + 1] + pmf.probs()[i];
  return g;
}

// P(M <= x) for x in [lo - 1, hi], indexed by x - lo + 1.
inline std::vector<double> lower_tails(const LatticePmf& pmf) {
  std::vector<double> f(pmf.size() + 1, 0.0);
  for (std::size_t i = 0; i < pmf.size(); ++i) f[i + 1] = f[i] + pmf.probs()[i];
  return f;
}

inline double clamp01(double v) { return std::min(1.0, std::max(0.0, v)); }

inline double pi_unchecked(const LatticePmf& pmf, const std::vector<double>& g,
                           long d, long x) {
  if (x < d || pmf.at(x) == 0.0 || pmf.at(d + 1) == 0.0) return 0.0;
  const double num = g[static_cast<std::size_t>(x + 1 - pmf.lo())] * pmf.at(d);
  const double den = g[static_cast<std::size_t>(d + 1 - pmf.lo())] * pmf.at(x);
  return clamp01(num / den);
}

inline double rho_unchecked(const LatticePmf& pmf, const std::vector<double>& f,
                            long d, long x) {
  if (x > d || pmf.at(x) == 0.0 || pmf.at(d - 1) == 0.0) return 0.0;
  const double num = f[static_cast<std::size_t>(x - 1 - pmf.lo() + 1)] * pmf.at(d);
  const double den = f[static_cast<std::size_t>(d - 1 - pmf.lo() + 1)] * pmf.at(x);
  return clamp01(num / den);
}

}  // namespace detail

// Probability that the value x steps up by one when lifting past threshold d.
// Zero when x < d, x is off the support, or d + 1 is off the support.
inline double pi_coeff(const LatticePmf& pmf, long d, long x) {
  detail::require_log_concave(pmf, "pi_coeff");
  return detail::pi_unchecked(pmf, detail::upper_tails(pmf), d, x);
}

// Mirror image of pi_coeff: probability of stepping down by one.
inline double rho_coeff(const LatticePmf& pmf, long d, long x) {
  detail::require_log_concave(pmf, "rho_coeff");
  return detail::rho_unchecked(pmf, detail::lower_tails(pmf), d, x);
}

enum class StepDirection { up, down };

// Step probabilities for one threshold, tabulated over the support.
struct StepCoefficients {
  StepDirection direction = StepDirection::up;
  long d = 0;
  long lo = 0;
  std::vector<double> values;

  double at(long x) const {
    if (x < lo || x >= lo + static_cast<long>(values.size())) return 0.0;
    return values[static_cast<std::size_t>(x - lo)];
  }
};

inline StepCoefficients step_coefficients(const LatticePmf& pmf, long d,
                                          StepDirection direction) {
  detail::require_log_concave(pmf, "step_coefficients");
  StepCoefficients out;
  out.direction = direction;
  out.d = d;
  out.lo = pmf.lo();
  out.values.resize(pmf.size());
  if (direction == StepDirection::up) {
    auto g = detail::upper_tails(pmf);
    for (long x = pmf.lo(); x <= pmf.hi(); ++x)
      out.values[static_cast<std::size_t>(x - pmf.lo())] =
          detail::pi_unchecked(pmf, g, d, x);
  } else {
    auto f = detail::lower_tails(pmf);
    for (long x = pmf.lo(); x <= pmf.hi(); ++x)
      out.values[static_cast<std::size_t>(x - pmf.lo())] =
          detail::rho_unchecked(pmf, f, d, x);
  }
  return out;
}

// Law of N + Z where N ~ L(M | M >= d) and Z | N ~ Bern(pi_N). Equals
// L(M | M >= d + 1); requires d + 1 in the support.
inline LatticePmf step_up_law(const LatticePmf& pmf, long d) {
  detail::require_log_concave(pmf, "step_up_law");
  if (pmf.at(d + 1) == 0.0)
    throw std::invalid_argument("step_up_law: d + 1 must be in the support");
  auto n = conditional_ge(pmf, std::max(d, pmf.lo()));
  auto pi = step_coefficients(pmf, d, StepDirection::up);
  const long lo = n.lo();
  std::vector<double> probs(n.size() + 1, 0.0);
  for (long x = n.lo(); x <= n.hi(); ++x) {
    const double mass = n.at(x);
    const double up = pi.at(x);
    probs[static_cast<std::size_t>(x - lo)] += mass * (1.0 - up);
    probs[static_cast<std::size_t>(x + 1 - lo)] += mass * up;
  }
  return LatticePmf(lo, std::move(probs));
}

// All-at-once lift: runs the Bernoulli chain M_0 = M, M_{k+1} = M_k + X_k
// for k = 0, ..., d - lo - 1, so that M + A ~ L(M | M >= d) with
// A = sum of the X_k bounded by d - lo.
class ThresholdLift {
 public:
  struct Sample {
    long base;       // M
    long increment;  // A
  };

  ThresholdLift(LatticePmf pmf, long d) : pmf_(std::move(pmf)), d_(d) {
    detail::require_log_concave(pmf_, "ThresholdLift");
    if (pmf_.at(d) == 0.0)
      throw std::invalid_argument("ThresholdLift: d must be in the support");
    steps_.reserve(static_cast<std::size_t>(d_ - pmf_.lo()));
    for (long k = pmf_.lo(); k < d_; ++k)
      steps_.push_back(step_coefficients(pmf_, k, StepDirection::up));
  }

  const LatticePmf& pmf() const { return pmf_; }
  long threshold() const { return d_; }
  long max_increment() const { return d_ - pmf_.lo(); }

  Sample sample(Rng& rng) const {
    double u = rng.uniform(), acc = 0.0;
    long m = pmf_.hi();
    for (long x = pmf_.lo(); x <= pmf_.hi(); ++x) {
      acc += pmf_.at(x);
      if (u < acc) { m = x; break; }
    }
    long value = m, a = 0;
    for (const auto& step : steps_) {
      if (rng.bernoulli(step.at(value))) {
        ++value;
        ++a;
      }
    }
    return {m, a};
  }

  // Exact joint law of (M, A), enumerated through the chain.
  std::vector<std::tuple<long, long, double>> exact_joint_law() const {
    const std::size_t width = pmf_.size();
    const std::size_t amax = static_cast<std::size_t>(max_increment()) + 1;
    std::vector<std::vector<double>> dp(width, std::vector<double>(amax, 0.0));
    for (std::size_t i = 0; i < width; ++i) dp[i][0] = pmf_.probs()[i];
    for (const auto& step : steps_) {
      std::vector<std::vector<double>> next(width, std::vector<double>(amax, 0.0));
      for (std::size_t i = 0; i < width; ++i) {
        for (std::size_t a = 0; a < amax; ++a) {
          const double mass = dp[i][a];
          if (mass == 0.0) continue;
          const long value = pmf_.lo() + static_cast<long>(i) + static_cast<long>(a);
          const double up = step.at(value);
          next[i][a] += mass * (1.0 - up);
          if (up > 0.0) next[i][a + 1] += mass * up;
        }
      }
      dp = std::move(next);
    }
    std::vector<std::tuple<long, long, double>> out;
    for (std::size_t i = 0; i < width; ++i)
      for (std::size_t a = 0; a < amax; ++a)
        if (dp[i][a] > 0.0)
          out.emplace_back(pmf_.lo() + static_cast<long>(i), static_cast<long>(a),
                           dp[i][a]);
    return out;
  }

  // Exact law of M + A.
  LatticePmf exact_lifted_law() const {
    std::vector<double> probs(pmf_.size(), 0.0);
    for (const auto& [m, a, mass] : exact_joint_law())
      probs[static_cast<std::size_t>(m + a - pmf_.lo())] += mass;
    return LatticePmf(pmf_.lo(), std::move(probs));
  }

 private:
  LatticePmf pmf_;
  long d_;
  std::vector<StepCoefficients> steps_;
};

// One-point perturbation carrying L(M) to L(M | M != d): with probability q
// attempt an up-step, otherwise attempt a down-step.
struct NePerturbation {
  long d = 0;
  double q = 0.0;
  StepCoefficients pi, rho;
};

inline NePerturbation ne_perturbation(const LatticePmf& pmf, long d) {
  detail::require_log_concave(pmf, "ne_perturbation");
  const double denom = prob_ne(pmf, d);
  if (denom <= 0.0)
    throw std::invalid_argument("ne_perturbation: M is a point mass at d");
  const double up_mass = tail_ge(pmf, d + 1);
  NePerturbation out;
  out.d = d;
  out.q = up_mass > 0.0 ? detail::clamp01(up_mass / denom) : 0.0;
  out.pi = step_coefficients(pmf, d, StepDirection::up);
  out.rho = step_coefficients(pmf, d, StepDirection::down);
  return out;
}

// Draws X in {-1, 0, +1} given the current value m of M.
inline int sample_ne_step(const NePerturbation& pert, long m, Rng& rng) {
  if (rng.bernoulli(pert.q)) return rng.bernoulli(pert.pi.at(m)) ? 1 : 0;
  return rng.bernoulli(pert.rho.at(m)) ? -1 : 0;
}

// Exact law of M + X; equals L(M | M != d).
inline GappedPmf ne_perturbation_law(const LatticePmf& pmf, long d) {
  auto pert = ne_perturbation(pmf, d);
  const long lo = pmf.lo() - 1;
  std::vector<double> probs(pmf.size() + 2, 0.0);
  for (long m = pmf.lo(); m <= pmf.hi(); ++m) {
    const double mass = pmf.at(m);
    const double up = pert.pi.at(m), down = pert.rho.at(m);
    probs[static_cast<std::size_t>(m + 1 - lo)] += mass * pert.q * up;
    probs[static_cast<std::size_t>(m - 1 - lo)] += mass * (1.0 - pert.q) * down;
    probs[static_cast<std::size_t>(m - lo)] +=
        mass * (pert.q * (1.0 - up) + (1.0 - pert.q) * (1.0 - down));
  }
  return GappedPmf(lo, std::move(probs));
}

}  // namespace sizebias

#endif
