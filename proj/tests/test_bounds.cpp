#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "sizebias/bounds.hpp"

using namespace sizebias;

TEST_CASE("tail bound evaluators at pinned points") {
  REQUIRE(left_tail_gauss({2.0, 1.0, 1.0}) == Catch::Approx(std::exp(-0.25)).epsilon(1e-14));
  REQUIRE(right_tail_basic({2.0, 1.0, 1.0}) == Catch::Approx(std::exp(-0.2)).epsilon(1e-14));
  REQUIRE(sub_poisson_tail({1.0, 1.0, 1.0}) == Catch::Approx(std::exp(1.0) / 4.0).epsilon(1e-14));
  REQUIRE(bernstein_tail({2.0, 1.0, 1.0}) == Catch::Approx(std::exp(-3.0 / 14.0)).epsilon(1e-14));

  // every family evaluates to 1 at t = 0
  BoundParams zero{3.7, 2.2, 0.0};
  REQUIRE(left_tail_gauss(zero) == 1.0);
  REQUIRE(right_tail_basic(zero) == 1.0);
  REQUIRE(sub_poisson_tail(zero) == 1.0);
  REQUIRE(sub_poisson_left_tail(zero) == 1.0);
  REQUIRE(bernstein_tail(zero) == 1.0);

  REQUIRE_THROWS_AS(left_tail_gauss({0.0, 1.0, 1.0}), std::invalid_argument);
  REQUIRE_THROWS_AS(left_tail_gauss({1.0, 0.0, 1.0}), std::invalid_argument);
  REQUIRE_THROWS_AS(left_tail_gauss({1.0, 1.0, -0.5}), std::invalid_argument);
}

TEST_CASE("left tail of the sub-poisson family") {
  // halfway down: (mu/(mu-t))^{(mu-t)/c} e^{-t/c} at mu=1, t=0.5
  REQUIRE(sub_poisson_left_tail({1.0, 1.0, 0.5}) ==
          Catch::Approx(std::sqrt(2.0) * std::exp(-0.5)).epsilon(1e-14));
  // the deviation cannot exceed the mean: boundary value e^{-mu/c}, zero beyond
  REQUIRE(sub_poisson_left_tail({1.0, 1.0, 1.0}) == Catch::Approx(std::exp(-1.0)).epsilon(1e-14));
  REQUIRE(sub_poisson_left_tail({1.0, 1.0, 1.0 + 1e-9}) == 0.0);
  REQUIRE(sub_poisson_left_tail({5.0, 2.0, 17.0}) == 0.0);
}

TEST_CASE("two algebraic routes to the sub-poisson bound agree") {
  for (double mu : {0.3, 1.0, 7.5, 120.0}) {
    for (double c : {0.5, 1.0, 3.0}) {
      for (double t : {1e-3, 0.7, 4.0, 60.0}) {
        double direct = detail::sub_poisson_log_direct(mu, c, t);
        double via_h = detail::sub_poisson_log_h(mu, c, t);
        REQUIRE(std::abs(direct - via_h) < 1e-12 * std::max(1.0, std::abs(direct)));
      }
    }
  }
}

TEST_CASE("negative association alias") {
  for (double mu : {0.5, 4.0, 33.0}) {
    for (double t : {0.0, 1.0, 9.0}) {
      REQUIRE(negative_association_tail(mu, t) == sub_poisson_tail({mu, 1.0, t}));
      REQUIRE(negative_association_left_tail(mu, t) == sub_poisson_left_tail({mu, 1.0, t}));
    }
  }
}

TEST_CASE("bounded differences bound") {
  REQUIRE(mcdiarmid_tail(std::vector<double>(100, 1.0), 10.0) ==
          Catch::Approx(std::exp(-2.0)).epsilon(1e-14));
  // graph form: c_i = 2 over m(m-1)/2 edges collapses to exp(-t^2 / (m (m-1)))
  const double m = 7.0, t = 3.0;
  std::vector<double> cs(static_cast<std::size_t>(m * (m - 1) / 2), 2.0);
  REQUIRE(mcdiarmid_tail(cs, t) == Catch::Approx(std::exp(-t * t / (m * (m - 1)))).epsilon(1e-13));
  REQUIRE(mcdiarmid_tail({1.0, 2.0}, 0.0) == 1.0);
  REQUIRE_THROWS_AS(mcdiarmid_tail({}, 1.0), std::invalid_argument);
  REQUIRE_THROWS_AS(mcdiarmid_tail({0.0, 0.0}, 1.0), std::invalid_argument);
  REQUIRE_THROWS_AS(mcdiarmid_tail({1.0, -1.0}, 1.0), std::invalid_argument);
}

TEST_CASE("certifiable-certificate tails") {
  auto both = certifiable_tails({1.0, 1.0, 0.0, 1.0, 1.0});
  REQUIRE(both.left == Catch::Approx(std::exp(-3.0 / 8.0)).epsilon(1e-14));
  REQUIRE(both.right == Catch::Approx(std::exp(-0.25)).epsilon(1e-14));

  // a = 0 removes the mean from the right denominator entirely
  auto flat = certifiable_tails({1.0, 0.0, 2.0, 9.0, 2.0});
  REQUIRE(flat.right == Catch::Approx(std::exp(-1.0)).epsilon(1e-14));
  REQUIRE(flat.left == Catch::Approx(std::exp(-0.75)).epsilon(1e-14));

  auto zero = certifiable_tails({1.0, 1.0, 0.5, 2.0, 0.0});
  REQUIRE(zero.left == 1.0);
  REQUIRE(zero.right == 1.0);

  REQUIRE_THROWS_AS(certifiable_tails({-1.0, 1.0, 0.0, 1.0, 1.0}), std::invalid_argument);
  REQUIRE_THROWS_AS(certifiable_tails({1.0, -0.1, 0.0, 1.0, 1.0}), std::invalid_argument);
}

TEST_CASE("bound families are ordered and monotone") {
  for (double mu : {0.4, 2.0, 15.0, 300.0}) {
    for (double c : {0.3, 1.0, 4.0}) {
      double prev_sub = 1.0, prev_bern = 1.0, prev_basic = 1.0;
      for (double t : {0.1, 0.5, 1.5, 4.0, 12.0, 50.0}) {
        BoundParams prm{mu, c, t};
        double sub = sub_poisson_tail(prm);
        double bern = bernstein_tail(prm);
        double basic = right_tail_basic(prm);
        REQUIRE(sub <= bern * (1.0 + 1e-12));
        REQUIRE(bern <= basic * (1.0 + 1e-12));
        // strictly decreasing in t
        REQUIRE(sub < prev_sub);
        REQUIRE(bern < prev_bern);
        REQUIRE(basic < prev_basic);
        prev_sub = sub;
        prev_bern = bern;
        prev_basic = basic;
        // nondecreasing in the coupling constant
        BoundParams wider{mu, c * 1.5, t};
        REQUIRE(sub_poisson_tail(wider) >= sub - 1e-15);
        REQUIRE(bernstein_tail(wider) >= bern - 1e-15);
        REQUIRE(right_tail_basic(wider) >= basic - 1e-15);
        REQUIRE(left_tail_gauss(wider) >= left_tail_gauss(prm) - 1e-15);
      }
    }
  }
}

TEST_CASE("crossover location") {
  // Bernstein for a mean-10 unit-coupling sum crosses the bounded-differences
  // bound for 100 unit entries at t = 45.
  auto bern = [](double t) { return bernstein_tail({10.0, 1.0, t}); };
  auto mcd = [](double t) { return mcdiarmid_tail_sumsq(100.0, t); };
  auto crossings = crossover(bern, mcd, 0.5, 60.0);
  REQUIRE(crossings.size() == 1);
  REQUIRE(std::abs(crossings[0] - 45.0) < 1e-6);
  // Bernstein is the tighter bound before the crossing, looser after
  REQUIRE(bern(44.0) < mcd(44.0));
  REQUIRE(bern(46.0) > mcd(46.0));

  auto none = crossover(bern, bern, 0.5, 60.0);
  REQUIRE(none.empty());
}
