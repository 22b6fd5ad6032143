#ifndef SIZEBIAS_CONDITIONAL_BERNOULLI_HPP
#define SIZEBIAS_CONDITIONAL_BERNOULLI_HPP

#include <bit>
#include <cstdint>
#include <stdexcept>
#include <utility>
#include <vector>

#include "sizebias/lattice_pmf.hpp"
#include "sizebias/rng.hpp"

namespace sizebias {

// Independent Bernoulli vector conditioned on its sum. A backward table of
// suffix-sum probabilities makes each draw a single sequential pass, so the
// per-sample cost is linear in m after the O(m^2) setup.
class ConditionalBernoulli {
 public:
  explicit ConditionalBernoulli(std::vector<double> p)
      : p_(std::move(p)), sum_(pb_pmf(p_)) {
    const std::size_t m = p_.size();
    suffix_.assign(m + 1, {});
    suffix_[m] = {1.0};
    for (std::size_t j = m; j-- > 0;) {
      const auto& tail = suffix_[j + 1];
      std::vector<double> cur(tail.size() + 1, 0.0);
      for (std::size_t s = 0; s < tail.size(); ++s) {
        cur[s] += tail[s] * (1.0 - p_[j]);
        cur[s + 1] += tail[s] * p_[j];
      }
      suffix_[j] = std::move(cur);
    }
  }

  std::size_t m() const { return p_.size(); }
  const std::vector<double>& p() const { return p_; }
  const LatticePmf& sum_pmf() const { return sum_; }

  std::vector<std::uint8_t> sample(Rng& rng, long a) const {
    if (a < 0 || a > static_cast<long>(m()))
      throw std::invalid_argument("ConditionalBernoulli: level outside [0, m]");
    std::vector<std::uint8_t> x(m(), 0);
    long r = a;
    for (std::size_t j = 0; j < m(); ++j) {
      if (r == 0) break;
      const auto& tail = suffix_[j + 1];
      const long remaining = static_cast<long>(m() - j);
      if (r == remaining) {
        for (std::size_t k = j; k < m(); ++k) x[k] = 1;
        return x;
      }
      const double take = p_[j] * tail[static_cast<std::size_t>(r - 1)];
      const double leave = (1.0 - p_[j]) * tail[static_cast<std::size_t>(r)];
      if (rng.bernoulli(take / (take + leave))) {
        x[j] = 1;
        --r;
      }
    }
    return x;
  }

  // P(X = x | sum X = |x|).
  double prob(const std::vector<std::uint8_t>& x) const {
    if (x.size() != m())
      throw std::invalid_argument("ConditionalBernoulli: vector length mismatch");
    double joint = 1.0;
    long a = 0;
    for (std::size_t j = 0; j < m(); ++j) {
      joint *= x[j] ? p_[j] : 1.0 - p_[j];
      a += x[j];
    }
    return joint / sum_.at(a);
  }

  // Full law at one level as (bitmask, probability) pairs; enumeration only.
  std::vector<std::pair<std::uint32_t, double>> law(long a) const {
    if (m() > 20)
      throw std::invalid_argument("ConditionalBernoulli::law: enumeration capped at m = 20");
    if (a < 0 || a > static_cast<long>(m()))
      throw std::invalid_argument("ConditionalBernoulli::law: level outside [0, m]");
    std::vector<std::pair<std::uint32_t, double>> out;
    const double level = sum_.at(a);
    for (std::uint32_t mask = 0; mask < (1u << m()); ++mask) {
      if (std::popcount(mask) != a) continue;
      double joint = 1.0;
      for (std::size_t j = 0; j < m(); ++j)
        joint *= (mask >> j & 1u) ? p_[j] : 1.0 - p_[j];
      out.emplace_back(mask, joint / level);
    }
    return out;
  }

 private:
  std::vector<double> p_;
  std::vector<std::vector<double>> suffix_;  // suffix_[j][s] = P(X_j + ... = s)
  LatticePmf sum_;
};

}  // namespace sizebias

#endif
