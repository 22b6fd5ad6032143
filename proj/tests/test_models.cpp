#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <map>
#include <vector>

#include "sizebias/models.hpp"

using namespace sizebias;

namespace {

using Law = std::map<double, double>;

double law_tv(const Law& a, const Law& b) {
  double tv = 0.0;
  for (const auto& [y, p] : a) {
    auto it = b.find(y);
    tv += std::fabs(p - (it == b.end() ? 0.0 : it->second));
  }
  for (const auto& [y, q] : b)
    if (a.find(y) == a.end()) tv += q;
  return 0.5 * tv;
}

Law size_bias_of(const Law& base) {
  double mu = 0.0;
  for (const auto& [y, p] : base) mu += y * p;
  Law out;
  for (const auto& [y, p] : base)
    if (y * p > 0.0) out[y] += y * p / mu;
  return out;
}

double law_mean(const Law& law) {
  double mu = 0.0;
  for (const auto& [y, p] : law) mu += y * p;
  return mu;
}

// Exact law of the degree statistic of the three-vertex graph, enumerated
// edge set by edge set without touching the library's statistic code.
Law er3_exact_law(double p, const std::vector<double>& w, const std::vector<long>& d,
                  Statistic kind) {
  Law law;
  for (int mask = 0; mask < 8; ++mask) {
    // bit 0: edge 01, bit 1: edge 02, bit 2: edge 12
    int deg[3] = {0, 0, 0};
    if (mask & 1) { ++deg[0]; ++deg[1]; }
    if (mask & 2) { ++deg[0]; ++deg[2]; }
    if (mask & 4) { ++deg[1]; ++deg[2]; }
    double prob = 1.0;
    for (int e = 0; e < 3; ++e) prob *= (mask >> e & 1) ? p : 1.0 - p;
    double y = 0.0;
    for (int v = 0; v < 3; ++v) {
      const bool hit = kind == Statistic::ge ? deg[v] >= d[static_cast<std::size_t>(v)]
                                             : deg[v] != d[static_cast<std::size_t>(v)];
      if (hit) y += w[static_cast<std::size_t>(v)];
    }
    law[y] += prob;
  }
  return law;
}

// Exact law of the occupancy statistic for three balls over three urns.
Law multinomial33_exact_law(const std::vector<double>& w, const std::vector<long>& d,
                            Statistic kind) {
  Law law;
  for (int a = 0; a < 3; ++a)
    for (int b = 0; b < 3; ++b)
      for (int c = 0; c < 3; ++c) {
        int counts[3] = {0, 0, 0};
        ++counts[a];
        ++counts[b];
        ++counts[c];
        double y = 0.0;
        for (int urn = 0; urn < 3; ++urn) {
          const bool hit = kind == Statistic::ge
                               ? counts[urn] >= d[static_cast<std::size_t>(urn)]
                               : counts[urn] != d[static_cast<std::size_t>(urn)];
          if (hit) y += w[static_cast<std::size_t>(urn)];
        }
        law[y] += 1.0 / 27.0;
      }
  return law;
}

}  // namespace

TEST_CASE("er marginal degree law is poisson-binomial") {
  const auto model = ErGraphModel::homogeneous(4, 0.5, 1.0, 1);
  const auto pmf = er_marginal_pmf(model, 0);
  REQUIRE(pmf.lo() == 0);
  REQUIRE(pmf.hi() == 3);
  REQUIRE(pmf.at(0) == Catch::Approx(1.0 / 8.0).margin(1e-15));
  REQUIRE(pmf.at(1) == Catch::Approx(3.0 / 8.0).margin(1e-15));
  REQUIRE(pmf.at(2) == Catch::Approx(3.0 / 8.0).margin(1e-15));
  REQUIRE(pmf.at(3) == Catch::Approx(1.0 / 8.0).margin(1e-15));
}

TEST_CASE("er exact means") {
  const auto model = ErGraphModel::homogeneous(4, 0.5, 1.0, 1);
  // 4 * P(Bin(3, 1/2) >= 1) = 4 * 7/8
  REQUIRE(er_mean(model, Statistic::ge) == Catch::Approx(3.5).margin(1e-12));
  // 4 * (1 - 3/8)
  REQUIRE(er_mean(model, Statistic::ne) == Catch::Approx(2.5).margin(1e-12));
}

TEST_CASE("er coupling constants") {
  auto model = ErGraphModel::homogeneous(4, 0.5, 1.0, 2);
  REQUIRE(er_coupling_constant(model, Statistic::ge) == Catch::Approx(3.0));
  REQUIRE(er_coupling_constant(model, Statistic::ne) == Catch::Approx(2.0));

  model.w = {0.5, 2.0, 1.0, 1.0};
  model.d = {1, 1, 2, 1};
  REQUIRE(er_coupling_constant(model, Statistic::ge) == Catch::Approx(2.0 * 3.0));
  REQUIRE(er_coupling_constant(model, Statistic::ne) == Catch::Approx(4.0));
}

TEST_CASE("er reduction strips constant indicators") {
  auto model = ErGraphModel::homogeneous(4, 0.5, 1.0, 1);
  model.w = {1.0, 0.0, 1.0, 1.0};
  model.d = {0, 1, 4, 1};
  const auto red = er_reduce(model, Statistic::ge);
  // vertex 0: degree >= 0 always (offset); vertex 1: zero weight; vertex 2:
  // threshold above the max degree (dropped); vertex 3: genuinely random.
  REQUIRE(red.offset == Catch::Approx(1.0));
  REQUIRE(red.retained == std::vector<long>{3});
}

TEST_CASE("er statistic on a fixed edge set") {
  const auto model = ErGraphModel::homogeneous(3, 0.5, 1.0, 1);
  ErGraphConfig cfg;
  cfg.m = 3;
  cfg.edges = {0, 0, 0};
  cfg.edges[er_edge_index(3, 0, 1)] = 1;
  REQUIRE(er_statistic(model, cfg, Statistic::ge) == Catch::Approx(2.0));
  REQUIRE(er_statistic(model, cfg, Statistic::ne) == Catch::Approx(1.0));
}

TEST_CASE("er configuration sampler matches the product law") {
  const auto model = ErGraphModel::homogeneous(3, 0.6, 1.0, 1);
  Rng rng(411);
  std::map<int, double> emp;
  const int samples = 40000;
  for (int s = 0; s < samples; ++s) {
    const auto cfg = er_sample_configuration(model, rng);
    int mask = 0;
    for (int e = 0; e < 3; ++e) mask |= cfg.edges[static_cast<std::size_t>(e)] << e;
    emp[mask] += 1.0 / samples;
  }
  for (int mask = 0; mask < 8; ++mask) {
    double prob = 1.0;
    for (int e = 0; e < 3; ++e) prob *= (mask >> e & 1) ? 0.6 : 0.4;
    REQUIRE(emp[mask] == Catch::Approx(prob).margin(0.02));
  }
}

TEST_CASE("er pair sampler realizes the size-bias law") {
  const auto model = ErGraphModel::homogeneous(3, 0.6, 1.0, 1);
  const auto exact = er3_exact_law(0.6, model.w, model.d, Statistic::ge);
  const auto exact_sb = size_bias_of(exact);
  const double mu = law_mean(exact);
  REQUIRE(mu == Catch::Approx(er_mean(model, Statistic::ge)).margin(1e-12));

  ErPairSampler sampler(model, Statistic::ge);
  Rng rng(7107);
  const int samples = 200000;
  Law emp_y, emp_ys;
  const double c = er_coupling_constant(model, Statistic::ge);
  for (int s = 0; s < samples; ++s) {
    const auto pair = sampler.sample(rng);
    emp_y[pair.y] += 1.0 / samples;
    emp_ys[pair.y_s] += 1.0 / samples;
    REQUIRE(pair.y_s - pair.y <= c + 1e-9);
    REQUIRE(pair.y_s >= pair.y - 1e-9);  // threshold lifts only raise degrees
  }
  REQUIRE(law_tv(emp_y, exact) < 0.01);
  REQUIRE(law_tv(emp_ys, exact_sb) < 0.01);
}

TEST_CASE("er pair sampler with uneven weights and thresholds") {
  ErGraphModel model = ErGraphModel::homogeneous(3, 0.6, 1.0, 1);
  model.w = {0.5, 2.0, 1.0};
  model.d = {1, 1, 2};
  const auto exact = er3_exact_law(0.6, model.w, model.d, Statistic::ne);
  const auto exact_sb = size_bias_of(exact);

  ErPairSampler sampler(model, Statistic::ne);
  Rng rng(7211);
  const int samples = 200000;
  Law emp_y, emp_ys;
  const double c = er_coupling_constant(model, Statistic::ne);
  REQUIRE(c == Catch::Approx(4.0));
  for (int s = 0; s < samples; ++s) {
    const auto pair = sampler.sample(rng);
    emp_y[pair.y] += 1.0 / samples;
    emp_ys[pair.y_s] += 1.0 / samples;
    REQUIRE(std::fabs(pair.y_s - pair.y) <= c + 1e-9);
  }
  REQUIRE(law_tv(emp_y, exact) < 0.01);
  REQUIRE(law_tv(emp_ys, exact_sb) < 0.01);
}

TEST_CASE("er lift walks one incident edge per step") {
  const auto model = ErGraphModel::homogeneous(4, 0.5, 1.0, 2);
  ErPairSampler sampler(model, Statistic::ge);
  Rng rng(99);
  PairTrace trace;
  for (int s = 0; s < 2000; ++s) {
    sampler.sample(rng, &trace);
    const auto ia = static_cast<std::size_t>(trace.alpha);
    for (std::size_t lvl = 0; lvl + 1 < trace.level_counts.size(); ++lvl) {
      const auto& cur = trace.level_counts[lvl];
      const auto& nxt = trace.level_counts[lvl + 1];
      REQUIRE(nxt[ia] - cur[ia] == 1);
      int changed = 0;
      for (std::size_t v = 0; v < cur.size(); ++v) {
        const long delta = nxt[v] - cur[v];
        REQUIRE(std::labs(delta) <= 1);
        if (delta != 0) ++changed;
      }
      // one new edge testifies at both endpoints
      REQUIRE(changed == 2);
    }
  }
}

TEST_CASE("multinomial marginal law and means") {
  const auto model = MultinomialModel::uniform(3, 3, 1.0, 1);
  const auto pmf = multinomial_marginal_pmf(model, 0);
  REQUIRE(pmf.at(0) == Catch::Approx(8.0 / 27.0).margin(1e-15));
  REQUIRE(pmf.at(1) == Catch::Approx(12.0 / 27.0).margin(1e-15));
  REQUIRE(pmf.at(2) == Catch::Approx(6.0 / 27.0).margin(1e-15));
  REQUIRE(pmf.at(3) == Catch::Approx(1.0 / 27.0).margin(1e-15));

  REQUIRE(multinomial_mean(model, Statistic::ge) == Catch::Approx(19.0 / 9.0).margin(1e-12));
  REQUIRE(multinomial_mean(model, Statistic::ne) == Catch::Approx(5.0 / 3.0).margin(1e-12));

  REQUIRE(multinomial_coupling_constant(model, Statistic::ge) == Catch::Approx(1.0));
  REQUIRE(multinomial_coupling_constant(model, Statistic::ne) == Catch::Approx(2.0));
}

TEST_CASE("multinomial validation") {
  auto model = MultinomialModel::uniform(3, 3, 1.0, 1);
  REQUIRE_NOTHROW(validate(model));
  model.p[0][0] = 0.9;
  REQUIRE_THROWS_AS(validate(model), std::invalid_argument);
  auto degenerate = MultinomialModel::uniform(1, 2, 1.0, 1);
  // a single urn would need placement probability one
  REQUIRE_THROWS_AS(validate(degenerate), std::invalid_argument);
}

TEST_CASE("multinomial pair sampler realizes the size-bias law") {
  const auto model = MultinomialModel::uniform(3, 3, 1.0, 1);
  for (const Statistic kind : {Statistic::ge, Statistic::ne}) {
    const auto exact = multinomial33_exact_law(model.w, model.d, kind);
    const auto exact_sb = size_bias_of(exact);
    MultinomialPairSampler sampler(model, kind);
    Rng rng(kind == Statistic::ge ? 314 : 315);
    const int samples = 200000;
    Law emp_y, emp_ys;
    const double c = multinomial_coupling_constant(model, kind);
    for (int s = 0; s < samples; ++s) {
      const auto pair = sampler.sample(rng);
      emp_y[pair.y] += 1.0 / samples;
      emp_ys[pair.y_s] += 1.0 / samples;
      if (kind == Statistic::ge) {
        REQUIRE(pair.y_s - pair.y <= c + 1e-9);
      } else {
        REQUIRE(std::fabs(pair.y_s - pair.y) <= c + 1e-9);
      }
    }
    REQUIRE(law_tv(emp_y, exact) < 0.01);
    REQUIRE(law_tv(emp_ys, exact_sb) < 0.01);
  }
}

TEST_CASE("multinomial lift moves one ball into the biased urn per step") {
  const auto model = MultinomialModel::uniform(4, 6, 1.0, 3);
  MultinomialPairSampler sampler(model, Statistic::ge);
  Rng rng(2718);
  PairTrace trace;
  for (int s = 0; s < 2000; ++s) {
    sampler.sample(rng, &trace);
    const auto ia = static_cast<std::size_t>(trace.alpha);
    for (std::size_t lvl = 0; lvl + 1 < trace.level_counts.size(); ++lvl) {
      const auto& cur = trace.level_counts[lvl];
      const auto& nxt = trace.level_counts[lvl + 1];
      REQUIRE(nxt[ia] - cur[ia] == 1);
      for (std::size_t urn = 0; urn < cur.size(); ++urn)
        if (urn != ia) REQUIRE(nxt[urn] <= cur[urn]);  // other urns never grow
    }
  }
}

TEST_CASE("hypergeometric marginals, means, constants") {
  HypergeometricModel model;
  model.colors = {2, 2};
  model.sample_size = 2;
  model.w = {1.0, 1.0};
  model.d = {1, 1};
  REQUIRE_NOTHROW(validate(model));

  const auto pmf = hyper_marginal_pmf(model, 0);
  REQUIRE(pmf.at(0) == Catch::Approx(1.0 / 6.0).margin(1e-12));
  REQUIRE(pmf.at(1) == Catch::Approx(4.0 / 6.0).margin(1e-12));
  REQUIRE(pmf.at(2) == Catch::Approx(1.0 / 6.0).margin(1e-12));

  REQUIRE(hyper_mean(model, Statistic::ge) == Catch::Approx(5.0 / 3.0).margin(1e-12));
  REQUIRE(hyper_mean(model, Statistic::ne) == Catch::Approx(2.0 / 3.0).margin(1e-12));
  REQUIRE(hyper_coupling_constant(model, Statistic::ge) == Catch::Approx(1.0));
  REQUIRE(hyper_coupling_constant(model, Statistic::ne) == Catch::Approx(2.0));
}

TEST_CASE("hypergeometric configuration sampler matches the exact count law") {
  HypergeometricModel model;
  model.colors = {3, 2, 4};
  model.sample_size = 4;
  model.w = {1.0, 1.0, 1.0};
  model.d = {1, 1, 1};
  Rng rng(5050);
  const auto exact = hyper_marginal_pmf(model, 0);
  std::vector<double> emp(static_cast<std::size_t>(exact.hi()) + 1, 0.0);
  const int samples = 40000;
  for (int s = 0; s < samples; ++s) {
    const auto cfg = hyper_sample_configuration(model, rng);
    long total = 0;
    for (long c : cfg.counts) total += c;
    REQUIRE(total == model.sample_size);
    emp[static_cast<std::size_t>(cfg.counts[0])] += 1.0 / samples;
  }
  for (long k = exact.lo(); k <= exact.hi(); ++k)
    REQUIRE(emp[static_cast<std::size_t>(k)] == Catch::Approx(exact.at(k)).margin(0.015));
}

TEST_CASE("hypergeometric pair sampler realizes the size-bias law") {
  HypergeometricModel model;
  model.colors = {2, 2};
  model.sample_size = 2;
  model.w = {1.0, 1.0};
  model.d = {1, 1};

  // counts (k, 2-k) for k = 0,1,2 carry probabilities 1/6, 2/3, 1/6
  Law exact_ge{{1.0, 1.0 / 3.0}, {2.0, 2.0 / 3.0}};
  Law exact_ne{{0.0, 2.0 / 3.0}, {2.0, 1.0 / 3.0}};

  for (const Statistic kind : {Statistic::ge, Statistic::ne}) {
    const auto& exact = kind == Statistic::ge ? exact_ge : exact_ne;
    const auto exact_sb = size_bias_of(exact);
    HyperPairSampler sampler(model, kind);
    Rng rng(kind == Statistic::ge ? 808 : 809);
    const int samples = 200000;
    Law emp_y, emp_ys;
    const double c = hyper_coupling_constant(model, kind);
    for (int s = 0; s < samples; ++s) {
      const auto pair = sampler.sample(rng);
      emp_y[pair.y] += 1.0 / samples;
      emp_ys[pair.y_s] += 1.0 / samples;
      if (kind == Statistic::ge) {
        REQUIRE(pair.y_s - pair.y <= c + 1e-9);
      } else {
        REQUIRE(std::fabs(pair.y_s - pair.y) <= c + 1e-9);
      }
    }
    REQUIRE(law_tv(emp_y, exact) < 0.01);
    REQUIRE(law_tv(emp_ys, exact_sb) < 0.01);
  }
}

TEST_CASE("hypergeometric lift swaps exactly one ball per step") {
  HypergeometricModel model;
  model.colors = {2, 2, 2};
  model.sample_size = 3;
  model.w = {1.0, 1.0, 1.0};
  model.d = {1, 1, 1};
  HyperPairSampler sampler(model, Statistic::ge);
  Rng rng(606);
  PairTrace trace;
  for (int s = 0; s < 2000; ++s) {
    sampler.sample(rng, &trace);
    const auto ia = static_cast<std::size_t>(trace.alpha);
    for (std::size_t lvl = 0; lvl + 1 < trace.level_counts.size(); ++lvl) {
      const auto& cur = trace.level_counts[lvl];
      const auto& nxt = trace.level_counts[lvl + 1];
      REQUIRE(nxt[ia] - cur[ia] == 1);
      long dropped = 0;
      for (std::size_t color = 0; color < cur.size(); ++color) {
        if (color == ia) continue;
        REQUIRE(nxt[color] <= cur[color]);
        dropped += cur[color] - nxt[color];
      }
      REQUIRE(dropped == 1);
    }
  }
}

TEST_CASE("reduction-aware pair sampling keeps the full statistic law") {
  // urn 0 has threshold 0 (indicator always on, offset 1); urn 2 has an
  // unreachable threshold (dropped); only urn 1 stays stochastic.
  auto model = MultinomialModel::uniform(3, 3, 1.0, 1);
  model.d = {0, 1, 5};
  const auto red = multinomial_reduce(model, Statistic::ge);
  REQUIRE(red.offset == Catch::Approx(1.0));
  REQUIRE(red.retained == std::vector<long>{1});

  const auto exact = multinomial33_exact_law(model.w, model.d, Statistic::ge);
  const auto exact_sb = size_bias_of(exact);
  MultinomialPairSampler sampler(model, Statistic::ge);
  Rng rng(1234);
  const int samples = 100000;
  Law emp_y, emp_ys;
  for (int s = 0; s < samples; ++s) {
    const auto pair = sampler.sample(rng);
    emp_y[pair.y] += 1.0 / samples;
    emp_ys[pair.y_s] += 1.0 / samples;
    REQUIRE(pair.y_s - pair.y <= 1.0 + 1e-9);
  }
  REQUIRE(law_tv(emp_y, exact) < 0.01);
  REQUIRE(law_tv(emp_ys, exact_sb) < 0.01);
}

TEST_CASE("model dispatch covers every variant") {
  ModelSpec er = ErGraphModel::homogeneous(4, 0.5, 1.0, 1);
  REQUIRE(std::string(model_name(er)) == "er_graph");
  REQUIRE(mean_stat(er, Statistic::ge) == Catch::Approx(3.5));
  REQUIRE(coupling_constant(er, Statistic::ge) == Catch::Approx(2.0));
  REQUIRE(marginal_pmf(er, 0).hi() == 3);
  Rng rng(42);
  const auto cfg = sample_configuration(er, rng);
  const double y = statistic(er, cfg, Statistic::ge);
  REQUIRE(y >= 0.0);
  REQUIRE(y <= total_weight(er));
  PairSampler sampler(er, Statistic::ge);
  const auto pair = sampler.sample(rng);
  REQUIRE(pair.y_s - pair.y <= 2.0 + 1e-9);

  ModelSpec mult = MultinomialModel::uniform(3, 3, 1.0, 1);
  REQUIRE(std::string(model_name(mult)) == "multinomial");
  REQUIRE(total_weight(mult) == Catch::Approx(3.0));
  REQUIRE(reduce(mult, Statistic::ge).retained.size() == 3);

  HypergeometricModel hyper;
  hyper.colors = {2, 2};
  hyper.sample_size = 2;
  hyper.w = {1.0, 1.0};
  hyper.d = {1, 1};
  ModelSpec hspec = hyper;
  REQUIRE(std::string(model_name(hspec)) == "hypergeometric");
  REQUIRE(mean_stat(hspec, Statistic::ne) == Catch::Approx(2.0 / 3.0));

  GgVolumeModel vol;
  vol.dim = 1;
  vol.volume = 100.0;
  vol.radii = {1.0, 1.0};
  ModelSpec vspec = vol;
  REQUIRE(std::string(model_name(vspec)) == "gg_volume");
  REQUIRE_THROWS_AS(marginal_pmf(vspec, 0), std::invalid_argument);
  REQUIRE(total_weight(vspec) == Catch::Approx(100.0));
}

TEST_CASE("er validation rejects malformed inputs") {
  auto model = ErGraphModel::homogeneous(3, 0.5, 1.0, 1);
  REQUIRE_NOTHROW(validate(model));
  model.p[0][1] = 0.7;  // asymmetric
  REQUIRE_THROWS_AS(validate(model), std::invalid_argument);
  model = ErGraphModel::homogeneous(3, 0.5, 1.0, 1);
  model.p[1][1] = 0.2;
  REQUIRE_THROWS_AS(validate(model), std::invalid_argument);
  model = ErGraphModel::homogeneous(3, 0.5, 1.0, 1);
  model.w = {0.0, 0.0, 0.0};
  REQUIRE_THROWS_AS(validate(model), std::invalid_argument);
  model = ErGraphModel::homogeneous(3, 0.5, 1.0, 1);
  model.w = {1.0, -1.0, 1.0};
  REQUIRE_THROWS_AS(validate(model), std::invalid_argument);
}

TEST_CASE("chain size limit propagates to pair samplers") {
  const auto big = ErGraphModel::homogeneous(14, 0.3, 1.0, 1);
  REQUIRE_THROWS_AS(ErPairSampler(big, Statistic::ge), std::invalid_argument);
  const auto ok = ErGraphModel::homogeneous(13, 0.3, 1.0, 1);
  REQUIRE_NOTHROW(ErPairSampler(ok, Statistic::ge));
}
