#ifndef SIZEBIAS_LATTICE_PMF_HPP
#define SIZEBIAS_LATTICE_PMF_HPP

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

namespace sizebias {

namespace detail {

inline std::vector<double> normalize_probs(long& lo, std::vector<double> probs,
                                           const char* what) {
  if (probs.empty()) throw std::invalid_argument(std::string(what) + ": empty pmf");
  for (double q : probs) {
    if (!(q >= 0.0) || !std::isfinite(q))
      throw std::invalid_argument(std::string(what) + ": negative or non-finite mass");
  }
  std::size_t first = 0;
  while (first < probs.size() && probs[first] == 0.0) ++first;
  if (first == probs.size())
    throw std::invalid_argument(std::string(what) + ": zero total mass");
  std::size_t last = probs.size();
  while (probs[last - 1] == 0.0) --last;
  lo += static_cast<long>(first);
  probs = std::vector<double>(probs.begin() + first, probs.begin() + last);
  double total = 0.0;
  for (double q : probs) total += q;
  for (double& q : probs) q /= total;
  return probs;
}

}  // namespace detail

// Probability mass function on a finite integer interval. End atoms are
// strictly positive (zero ends are trimmed on construction); interior atoms
// may be zero. Mass is renormalized to sum to one.
class LatticePmf {
 public:
  LatticePmf(long lo, std::vector<double> probs)
      : lo_(lo), probs_(detail::normalize_probs(lo_, std::move(probs), "LatticePmf")) {}

  long lo() const { return lo_; }
  long hi() const { return lo_ + static_cast<long>(probs_.size()) - 1; }
  std::size_t size() const { return probs_.size(); }
  const std::vector<double>& probs() const { return probs_; }

  double at(long x) const {
    if (x < lo_ || x > hi()) return 0.0;
    return probs_[static_cast<std::size_t>(x - lo_)];
  }

  double mean() const {
    double m = 0.0;
    for (std::size_t i = 0; i < probs_.size(); ++i)
      m += static_cast<double>(lo_ + static_cast<long>(i)) * probs_[i];
    return m;
  }

 private:
  long lo_;
  std::vector<double> probs_;
};

// Like LatticePmf but marks a law whose interior is expected to carry a gap
// (the output of conditioning on {M != d}).
class GappedPmf {
 public:
  GappedPmf(long lo, std::vector<double> probs)
      : lo_(lo), probs_(detail::normalize_probs(lo_, std::move(probs), "GappedPmf")) {}

  long lo() const { return lo_; }
  long hi() const { return lo_ + static_cast<long>(probs_.size()) - 1; }
  std::size_t size() const { return probs_.size(); }
  const std::vector<double>& probs() const { return probs_; }

  double at(long x) const {
    if (x < lo_ || x > hi()) return 0.0;
    return probs_[static_cast<std::size_t>(x - lo_)];
  }

 private:
  long lo_;
  std::vector<double> probs_;
};

// Poisson-binomial law of X_1 + ... + X_m with X_j ~ Bern(p_j) independent.
inline LatticePmf pb_pmf(const std::vector<double>& p) {
  if (p.empty()) throw std::invalid_argument("pb_pmf: empty probability vector");
  for (double q : p) {
    if (!(q > 0.0 && q < 1.0))
      throw std::invalid_argument("pb_pmf: entries must lie in (0, 1)");
  }
  std::vector<double> probs{1.0};
  for (double q : p) {
    std::vector<double> next(probs.size() + 1, 0.0);
    for (std::size_t k = 0; k < probs.size(); ++k) {
      next[k] += probs[k] * (1.0 - q);
      next[k + 1] += probs[k] * q;
    }
    probs = std::move(next);
  }
  return LatticePmf(0, std::move(probs));
}

// Number of white balls drawn when l balls are sampled without replacement
// from i balls of which k are white. Computed in log space.
inline LatticePmf hypergeometric_pmf(long k, long l, long i) {
  if (i < 0 || k < 0 || l < 0 || k > i || l > i)
    throw std::invalid_argument("hypergeometric_pmf: need 0 <= k, l <= i");
  const long lo = std::max(0L, l + k - i);
  const long hi = std::min(l, k);
  auto lchoose = [](long n, long r) {
    return std::lgamma(static_cast<double>(n + 1)) -
           std::lgamma(static_cast<double>(r + 1)) -
           std::lgamma(static_cast<double>(n - r + 1));
  };
  std::vector<double> logs;
  logs.reserve(static_cast<std::size_t>(hi - lo + 1));
  for (long j = lo; j <= hi; ++j)
    logs.push_back(lchoose(k, j) + lchoose(i - k, l - j) - lchoose(i, l));
  const double peak = *std::max_element(logs.begin(), logs.end());
  std::vector<double> probs;
  probs.reserve(logs.size());
  for (double lg : logs) probs.push_back(std::exp(lg - peak));
  return LatticePmf(lo, std::move(probs));
}

// p_x^2 >= p_{x-1} p_{x+1} for all interior x, up to relative slack.
inline bool is_log_concave(const LatticePmf& pmf) {
  const auto& q = pmf.probs();
  for (std::size_t x = 1; x + 1 < q.size(); ++x) {
    if (q[x] * q[x] * (1.0 + 1e-12) < q[x - 1] * q[x + 1]) return false;
  }
  return true;
}

// P(M >= d), accumulated from the top of the support.
inline double tail_ge(const LatticePmf& pmf, long d) {
  if (d <= pmf.lo()) return 1.0;
  if (d > pmf.hi()) return 0.0;
  double acc = 0.0;
  for (long x = pmf.hi(); x >= d; --x) acc += pmf.at(x);
  return acc;
}

// P(M <= d), accumulated from the bottom of the support.
inline double tail_le(const LatticePmf& pmf, long d) {
  if (d >= pmf.hi()) return 1.0;
  if (d < pmf.lo()) return 0.0;
  double acc = 0.0;
  for (long x = pmf.lo(); x <= d; ++x) acc += pmf.at(x);
  return acc;
}

inline double prob_ne(const LatticePmf& pmf, long d) { return 1.0 - pmf.at(d); }

// p_x / P(M >= x) for x in the support interval.
inline double hazard(const LatticePmf& pmf, long x) {
  if (x < pmf.lo() || x > pmf.hi())
    throw std::invalid_argument("hazard: point outside the support interval");
  return pmf.at(x) / tail_ge(pmf, x);
}

inline LatticePmf conditional_ge(const LatticePmf& pmf, long d) {
  if (d > pmf.hi())
    throw std::invalid_argument("conditional_ge: event {M >= d} has zero probability");
  const long lo = std::max(d, pmf.lo());
  std::vector<double> probs;
  probs.reserve(static_cast<std::size_t>(pmf.hi() - lo + 1));
  for (long x = lo; x <= pmf.hi(); ++x) probs.push_back(pmf.at(x));
  return LatticePmf(lo, std::move(probs));
}

inline LatticePmf conditional_le(const LatticePmf& pmf, long d) {
  if (d < pmf.lo())
    throw std::invalid_argument("conditional_le: event {M <= d} has zero probability");
  const long hi = std::min(d, pmf.hi());
  std::vector<double> probs;
  probs.reserve(static_cast<std::size_t>(hi - pmf.lo() + 1));
  for (long x = pmf.lo(); x <= hi; ++x) probs.push_back(pmf.at(x));
  return LatticePmf(pmf.lo(), std::move(probs));
}

inline GappedPmf conditional_ne(const LatticePmf& pmf, long d) {
  if (prob_ne(pmf, d) <= 0.0)
    throw std::invalid_argument("conditional_ne: event {M != d} has zero probability");
  std::vector<double> probs(pmf.probs());
  if (d >= pmf.lo() && d <= pmf.hi()) probs[static_cast<std::size_t>(d - pmf.lo())] = 0.0;
  return GappedPmf(pmf.lo(), std::move(probs));
}

}  // namespace sizebias

#endif
