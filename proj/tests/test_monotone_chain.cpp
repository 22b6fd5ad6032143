#include <catch2/catch_amalgamated.hpp>

#include <bit>
#include <cmath>
#include <map>

#include "sizebias/conditional_bernoulli.hpp"
#include "sizebias/monotone_chain.hpp"
#include "sizebias/rng.hpp"

using namespace sizebias;

TEST_CASE("two-site chain kernel") {
  MonotoneCouplingChain chain({0.9, 0.1});
  // from the empty state the first step picks site 0 with the level-1 weight
  auto row = chain.kernel_row(0, 0);
  std::map<std::uint32_t, double> q;
  for (auto [yi, prob] : row) q[chain.level_masks(1)[yi]] += prob;
  REQUIRE(q.at(0b01) == Catch::Approx(81.0 / 82.0).margin(1e-10));
  REQUIRE(q.at(0b10) == Catch::Approx(1.0 / 82.0).margin(1e-10));
}

TEST_CASE("chain marginals match conditional bernoulli") {
  std::vector<std::vector<double>> cases = {
      {0.2, 0.5, 0.8},
      {0.9, 0.1},
      {0.5, 0.5, 0.5, 0.5},
      {0.05, 0.6, 0.33, 0.71, 0.48},
  };
  for (const auto& p : cases) {
    MonotoneCouplingChain chain(p);
    REQUIRE(chain.marginal_residual() < 1e-10);
  }

  Rng rng(41);
  for (int trial = 0; trial < 20; ++trial) {
    int m = 2 + static_cast<int>(rng.uniform_long(7));
    std::vector<double> p(m);
    for (auto& q : p) q = 0.02 + 0.96 * rng.uniform();
    MonotoneCouplingChain chain(p);
    REQUIRE(chain.marginal_residual() < 1e-10);
  }
}

TEST_CASE("uniform probabilities give uniform level laws") {
  MonotoneCouplingChain chain({0.37, 0.37, 0.37, 0.37});
  for (int a = 0; a <= 4; ++a) {
    const auto& probs = chain.level_probs(a);
    for (double q : probs) REQUIRE(q == Catch::Approx(1.0 / probs.size()).margin(1e-10));
  }
}

TEST_CASE("sampled chains are monotone with single flips") {
  MonotoneCouplingChain chain({0.2, 0.5, 0.8, 0.4, 0.66});
  Rng rng(42);
  for (int i = 0; i < 2000; ++i) {
    auto states = chain.sample_chain(rng);
    REQUIRE(states.size() == 6);
    REQUIRE(states.front() == 0u);
    REQUIRE(states.back() == 0b11111u);
    for (std::size_t a = 0; a + 1 < states.size(); ++a) {
      REQUIRE((states[a] & ~states[a + 1]) == 0u);
      REQUIRE(std::popcount(states[a + 1] ^ states[a]) == 1);
    }
  }
}

TEST_CASE("segment sampling agrees with level laws") {
  MonotoneCouplingChain chain({0.2, 0.5, 0.8});
  Rng rng(43);
  std::map<std::uint32_t, int> freq;
  const int n = 200000;
  for (int i = 0; i < n; ++i) {
    auto [xa, xb] = chain.sample_segment(rng, 1, 2);
    REQUIRE((xa & ~xb) == 0u);
    REQUIRE(std::popcount(xb ^ xa) == 1);
    ++freq[xa];
  }
  ConditionalBernoulli cb({0.2, 0.5, 0.8});
  for (auto [mask, prob] : cb.law(1)) {
    double emp = double(freq[mask]) / n;
    REQUIRE(std::abs(emp - prob) < 0.01);
  }

  auto [same_a, same_b] = chain.sample_segment(rng, 2, 2);
  REQUIRE(same_a == same_b);
}

TEST_CASE("chain size limit") {
  std::vector<double> p(13, 0.5);
  REQUIRE_THROWS_AS(MonotoneCouplingChain(p), std::invalid_argument);
  REQUIRE_NOTHROW(MonotoneCouplingChain(std::vector<double>(12, 0.5)));
}
