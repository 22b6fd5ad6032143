#ifndef SIZEBIAS_VERIFY_HPP
#define SIZEBIAS_VERIFY_HPP

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <functional>
#include <mutex>
#include <stdexcept>
#include <string>
#include <thread>
#include <utility>
#include <variant>
#include <vector>

#include "sizebias/bounds.hpp"
#include "sizebias/models.hpp"
#include "sizebias/rng.hpp"

namespace sizebias {

// Discrete law over real atoms. Atoms closer than kAtomTol are treated as
// the same point; add() accumulates mass, so an empirical law can be built
// from unit increments and rescaled once.
class DiscreteLaw {
 public:
  static constexpr double kAtomTol = 1e-9;

  void add(double x, double p) {
    if (!std::isfinite(x) || !std::isfinite(p))
      throw std::invalid_argument("DiscreteLaw: atoms and masses must be finite");
    auto it = std::lower_bound(
        atoms_.begin(), atoms_.end(), x,
        [](const std::pair<double, double>& a, double v) { return a.first < v; });
    if (it != atoms_.end() && std::fabs(it->first - x) <= kAtomTol) {
      it->second += p;
      return;
    }
    if (it != atoms_.begin() && std::fabs(std::prev(it)->first - x) <= kAtomTol) {
      std::prev(it)->second += p;
      return;
    }
    atoms_.insert(it, {x, p});
  }

  void merge(const DiscreteLaw& other) {
    for (const auto& [x, p] : other.atoms_) add(x, p);
  }

  void scale(double s) {
    for (auto& [x, p] : atoms_) p *= s;
  }

  double total() const {
    double s = 0.0;
    for (const auto& [x, p] : atoms_) s += p;
    return s;
  }

  double mean() const {
    double s = 0.0;
    for (const auto& [x, p] : atoms_) s += x * p;
    return s;
  }

  const std::vector<std::pair<double, double>>& atoms() const { return atoms_; }

 private:
  std::vector<std::pair<double, double>> atoms_;
};

// Half the L1 distance between two laws over the union of their atoms.
inline double tv_distance(const DiscreteLaw& a, const DiscreteLaw& b) {
  const auto& xs = a.atoms();
  const auto& ys = b.atoms();
  double s = 0.0;
  std::size_t i = 0, j = 0;
  while (i < xs.size() || j < ys.size()) {
    if (j == ys.size() || (i < xs.size() && xs[i].first < ys[j].first - DiscreteLaw::kAtomTol)) {
      s += std::fabs(xs[i++].second);
    } else if (i == xs.size() || ys[j].first < xs[i].first - DiscreteLaw::kAtomTol) {
      s += std::fabs(ys[j++].second);
    } else {
      s += std::fabs(xs[i++].second - ys[j++].second);
    }
  }
  return 0.5 * s;
}

// P(Y^s = y) = y P(Y = y) / E[Y]. The atom at zero is annihilated.
inline DiscreteLaw exact_size_bias_law(const DiscreteLaw& law) {
  double mu = 0.0;
  for (const auto& [x, p] : law.atoms()) {
    if (x < -DiscreteLaw::kAtomTol)
      throw std::invalid_argument("exact_size_bias_law: law must be nonnegative");
    mu += x * p;
  }
  if (!(mu > 0.0))
    throw std::invalid_argument("exact_size_bias_law: law must have positive mean");
  DiscreteLaw out;
  for (const auto& [x, p] : law.atoms())
    if (x > DiscreteLaw::kAtomTol && p > 0.0) out.add(x, x * p / mu);
  return out;
}

namespace detail {

inline double choose(long n, long k) {
  if (k < 0 || k > n) return 0.0;
  k = std::min(k, n - k);
  double v = 1.0;
  for (long i = 1; i <= k; ++i)
    v *= static_cast<double>(n - k + i) / static_cast<double>(i);
  return v;
}

constexpr double kBruteForceLimit = 1e7;

}  // namespace detail

// Exact law of the statistic by exhausting the configuration space. Only
// models whose configuration count stays within 10^7 qualify; the germ-grain
// statistics live on a continuum and are rejected outright.
inline DiscreteLaw brute_force_law(const ModelSpec& spec, Statistic kind) {
  validate(spec);
  DiscreteLaw law;
  if (const auto* er = std::get_if<ErGraphModel>(&spec)) {
    const long e = er->m * (er->m - 1) / 2;
    if (e >= 63 || std::pow(2.0, static_cast<double>(e)) > detail::kBruteForceLimit)
      throw std::invalid_argument("brute_force_law: configuration space too large");
    const std::uint64_t total = 1ULL << e;
    ErGraphConfig cfg;
    cfg.m = er->m;
    cfg.edges.assign(static_cast<std::size_t>(e), 0);
    for (std::uint64_t mask = 0; mask < total; ++mask) {
      double prob = 1.0;
      std::size_t idx = 0;
      for (long a = 0; a < er->m; ++a)
        for (long b = a + 1; b < er->m; ++b, ++idx) {
          const bool on = (mask >> idx) & 1ULL;
          cfg.edges[idx] = on ? 1 : 0;
          const double pab = er->p[static_cast<std::size_t>(a)][static_cast<std::size_t>(b)];
          prob *= on ? pab : 1.0 - pab;
        }
      if (prob > 0.0) law.add(er_statistic(*er, cfg, kind), prob);
    }
    return law;
  }
  if (const auto* mo = std::get_if<MultinomialModel>(&spec)) {
    if (std::pow(static_cast<double>(mo->m), static_cast<double>(mo->n)) >
        detail::kBruteForceLimit)
      throw std::invalid_argument("brute_force_law: configuration space too large");
    MultinomialConfig cfg;
    cfg.location.assign(static_cast<std::size_t>(mo->n), 0);
    for (;;) {
      double prob = 1.0;
      for (long j = 0; j < mo->n; ++j)
        prob *= mo->p[static_cast<std::size_t>(cfg.location[static_cast<std::size_t>(j)])]
                     [static_cast<std::size_t>(j)];
      if (prob > 0.0) law.add(multinomial_statistic(*mo, cfg, kind), prob);
      long j = mo->n - 1;
      while (j >= 0) {
        auto& loc = cfg.location[static_cast<std::size_t>(j)];
        if (++loc < mo->m) break;
        loc = 0;
        --j;
      }
      if (j < 0) break;
    }
    return law;
  }
  if (const auto* hy = std::get_if<HypergeometricModel>(&spec)) {
    const double denom = detail::choose(hy->population(), hy->sample_size);
    HypergeometricConfig cfg;
    cfg.counts.assign(hy->colors.size(), 0);
    std::function<void(std::size_t, long, double)> rec = [&](std::size_t color, long left,
                                                             double ways) {
      if (color + 1 == hy->colors.size()) {
        if (left > hy->colors[color]) return;
        cfg.counts[color] = left;
        const double prob = ways * detail::choose(hy->colors[color], left) / denom;
        if (prob > 0.0) law.add(hyper_statistic(*hy, cfg, kind), prob);
        return;
      }
      const long top = std::min(left, hy->colors[color]);
      for (long k = 0; k <= top; ++k) {
        cfg.counts[color] = k;
        rec(color + 1, left - k, ways * detail::choose(hy->colors[color], k));
      }
    };
    rec(0, hy->sample_size, 1.0);
    return law;
  }
  throw std::invalid_argument("brute_force_law: model has no finite configuration enumeration");
}

// Sorted sample with inclusive tail queries from either side.
class EmpiricalTail {
 public:
  explicit EmpiricalTail(std::vector<double> samples) : values_(std::move(samples)) {
    if (values_.empty()) throw std::invalid_argument("EmpiricalTail: need at least one sample");
    for (double v : values_)
      if (!std::isfinite(v)) throw std::invalid_argument("EmpiricalTail: samples must be finite");
    std::sort(values_.begin(), values_.end());
  }

  std::size_t count() const { return values_.size(); }

  double fraction_ge(double t) const {
    const auto it = std::lower_bound(values_.begin(), values_.end(), t);
    return static_cast<double>(values_.end() - it) / static_cast<double>(values_.size());
  }

  double fraction_le(double t) const {
    const auto it = std::upper_bound(values_.begin(), values_.end(), t);
    return static_cast<double>(it - values_.begin()) / static_cast<double>(values_.size());
  }

 private:
  std::vector<double> values_;
};

// Half-width of the Wilson score interval at z standard normal units.
inline double wilson_halfwidth(double phat, std::size_t n, double z = 4.0) {
  if (n == 0) throw std::invalid_argument("wilson_halfwidth: need a positive sample count");
  if (!(phat >= 0.0) || !(phat <= 1.0))
    throw std::invalid_argument("wilson_halfwidth: proportion must lie in [0,1]");
  const double nn = static_cast<double>(n);
  const double z2 = z * z;
  return z * std::sqrt(phat * (1.0 - phat) / nn + z2 / (4.0 * nn * nn)) / (1.0 + z2 / nn);
}

namespace detail {

// Fixed-size chunks with per-chunk derived rng streams. The chunk layout
// depends only on the total, never on the worker count, so every audit is
// reproducible across --jobs settings.
constexpr std::size_t kChunkSamples = 8192;

template <typename Body>
void run_chunks(std::size_t total, std::uint64_t seed, int jobs, Body&& body) {
  const std::size_t chunks = (total + kChunkSamples - 1) / kChunkSamples;
  std::atomic<std::size_t> next{0};
  std::atomic<bool> failed{false};
  std::exception_ptr error;
  std::mutex error_lock;
  auto worker = [&] {
    for (;;) {
      const std::size_t k = next.fetch_add(1);
      if (k >= chunks || failed.load()) return;
      const std::size_t first = k * kChunkSamples;
      const std::size_t count = std::min(kChunkSamples, total - first);
      Rng rng = Rng::derive(seed, k);
      try {
        body(k, first, count, rng);
      } catch (...) {
        std::lock_guard<std::mutex> hold(error_lock);
        if (!error) error = std::current_exception();
        failed.store(true);
        return;
      }
    }
  };
  if (jobs <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    pool.reserve(static_cast<std::size_t>(jobs));
    for (int j = 0; j < jobs; ++j) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }
  if (error) std::rethrow_exception(error);
}

}  // namespace detail

struct DominationRow {
  std::string family;
  TailSide side = TailSide::right;
  double t = 0.0;
  double bound = 0.0;
  double empirical = 0.0;
  double halfwidth = 0.0;
  bool pass = false;
};

struct DominationReport {
  std::string model;
  Statistic statistic = Statistic::ge;
  double mu = 0.0;          // mean of the full statistic
  double mu_reduced = 0.0;  // mean with sure summands stripped; bound parameter
  double mu_error = 0.0;
  double c = 0.0;
  std::size_t samples = 0;
  std::uint64_t seed = 0;
  std::vector<DominationRow> rows;
  bool pass = false;
};

// Samples the statistic and checks every concentration family against the
// empirical tails: a family passes at t when the observed frequency does not
// exceed the bound by more than a 4-sigma Wilson half-width. Deviations are
// measured from the full mean; the bounds see the reduced mean, which is the
// mean of the random part the coupling actually controls.
inline DominationReport audit_domination(const ModelSpec& spec, Statistic kind,
                                         const std::vector<double>& t_grid,
                                         std::size_t n_samples, std::uint64_t seed,
                                         int jobs = 1) {
  validate(spec);
  if (n_samples == 0)
    throw std::invalid_argument("audit_domination: need at least one sample");
  if (t_grid.empty()) throw std::invalid_argument("audit_domination: empty t grid");
  for (double t : t_grid)
    if (!(t >= 0.0) || !std::isfinite(t))
      throw std::invalid_argument("audit_domination: deviations must be nonnegative");

  DominationReport report;
  report.model = model_name(spec);
  report.statistic = kind;
  const auto est = mean_estimate(spec, kind);
  const auto red = reduce(spec, kind);
  report.mu = est.value;
  report.mu_error = est.error;
  report.mu_reduced = est.value - red.offset;
  report.c = coupling_constant(spec, kind);
  report.samples = n_samples;
  report.seed = seed;

  std::vector<double> values(n_samples);
  detail::run_chunks(n_samples, seed, jobs,
                     [&](std::size_t, std::size_t first, std::size_t count, Rng& rng) {
                       for (std::size_t i = 0; i < count; ++i) {
                         const auto cfg = sample_configuration(spec, rng);
                         values[first + i] = statistic(spec, cfg, kind);
                       }
                     });
  const EmpiricalTail tail(std::move(values));

  const double mu = report.mu, mur = report.mu_reduced, c = report.c;
  auto add_row = [&](const char* family, TailSide side, double t, double bound) {
    DominationRow row;
    row.family = family;
    row.side = side;
    row.t = t;
    row.bound = bound;
    row.empirical =
        side == TailSide::right ? tail.fraction_ge(mu + t) : tail.fraction_le(mu - t);
    row.halfwidth = wilson_halfwidth(row.empirical, tail.count());
    row.pass = row.empirical <= row.bound + row.halfwidth;
    report.rows.push_back(std::move(row));
  };
  for (double t : t_grid) {
    add_row("gauss", TailSide::left, t, left_tail_gauss({mur, c, t}));
    add_row("basic", TailSide::right, t, right_tail_basic({mur, c, t}));
    add_row("sub_poisson", TailSide::right, t, sub_poisson_tail({mur, c, t}));
    add_row("sub_poisson", TailSide::left, t, sub_poisson_left_tail({mur, c, t}));
    add_row("bernstein", TailSide::right, t, bernstein_tail({mur, c, t}));
  }
  report.pass = true;
  for (const auto& row : report.rows) report.pass = report.pass && row.pass;
  return report;
}

struct IdentityResidual {
  std::string test_function;
  double residual = 0.0;
  double tolerance = 0.0;
  bool pass = false;
};

struct CouplingReport {
  std::string model;
  Statistic statistic = Statistic::ge;
  double mu = 0.0;
  double coupling_constant = 0.0;
  double sure_bound = 0.0;  // two-sided allowance; 2c for the covered-measure exchange
  std::size_t samples = 0;
  std::uint64_t seed = 0;
  double max_increase = 0.0;
  double max_decrease = 0.0;
  bool sure_bound_pass = false;
  std::vector<IdentityResidual> identities;
  bool tv_checked = false;
  double tv_base = 0.0;
  double tv_size_bias = 0.0;
  double tv_tolerance = 0.0;
  std::size_t trace_checked = 0;
  std::size_t trace_violations = 0;
  bool pass = false;
};

namespace detail {

// Structural checks on one chain walk; counts a violation when the per-model
// step discipline is broken.
inline bool trace_steps_ok(const ModelSpec& spec, const PairTrace& trace) {
  const auto& levels = trace.level_counts;
  if (levels.size() < 2) return true;
  const auto ia = static_cast<std::size_t>(trace.alpha);
  for (std::size_t l = 0; l + 1 < levels.size(); ++l) {
    const auto& cur = levels[l];
    const auto& nxt = levels[l + 1];
    if (cur.size() != nxt.size()) return false;
    if (std::holds_alternative<ErGraphModel>(spec)) {
      int changed = 0;
      for (std::size_t v = 0; v < cur.size(); ++v) {
        const long diff = nxt[v] - cur[v];
        if (diff != 0) ++changed;
        if (diff < -1 || diff > 1) return false;
      }
      if (changed > 2) return false;
    } else if (std::holds_alternative<GgNeighborsModel>(spec)) {
      if (nxt[ia] - cur[ia] != 1) return false;
    } else {
      // occupancy chains: the biased count rises by one, no other count grows
      if (nxt[ia] - cur[ia] != 1) return false;
      for (std::size_t v = 0; v < cur.size(); ++v)
        if (v != ia && nxt[v] > cur[v]) return false;
    }
  }
  return true;
}

}  // namespace detail

// Draws coupled pairs and audits everything the construction promises: the
// sure bound on y_s - y, the size-bias identity E[Y f(Y)] = mu E[f(Y^s)] for
// f in {1, y, y^2}, agreement of both marginal laws with brute-force
// enumeration when the model is small enough, and the per-step discipline of
// the chain walks.
inline CouplingReport audit_coupling(const ModelSpec& spec, Statistic kind,
                                     std::size_t n_samples, std::uint64_t seed, int jobs = 1,
                                     double tv_tolerance = 0.01) {
  validate(spec);
  if (n_samples == 0) throw std::invalid_argument("audit_coupling: need at least one sample");

  CouplingReport report;
  report.model = model_name(spec);
  report.statistic = kind;
  const auto est = mean_estimate(spec, kind);
  report.mu = est.value;
  report.coupling_constant = coupling_constant(spec, kind);
  const bool volume_exchange =
      std::holds_alternative<GgVolumeModel>(spec) && kind == Statistic::ne;
  report.sure_bound = (volume_exchange ? 2.0 : 1.0) * report.coupling_constant;
  report.samples = n_samples;
  report.seed = seed;
  report.tv_tolerance = tv_tolerance;

  DiscreteLaw exact_law, exact_sb;
  try {
    exact_law = brute_force_law(spec, kind);
    exact_sb = exact_size_bias_law(exact_law);
    report.tv_checked = true;
  } catch (const std::invalid_argument&) {
    report.tv_checked = false;
  }

  const PairSampler sampler(spec, kind);
  const double mu = report.mu;

  struct ChunkAcc {
    double max_inc = 0.0;
    double max_dec = 0.0;
    double d1 = 0.0, d1_sq = 0.0;
    double d2 = 0.0, d2_sq = 0.0;
    double d3 = 0.0, d3_sq = 0.0;
    double abs_ys = 0.0, abs_ys_sq = 0.0;
    DiscreteLaw law_y, law_ys;
    std::size_t trace_checked = 0, trace_violations = 0;
  };
  const std::size_t chunk_count =
      (n_samples + detail::kChunkSamples - 1) / detail::kChunkSamples;
  std::vector<ChunkAcc> accs(chunk_count);
  const bool collect_laws = report.tv_checked;

  detail::run_chunks(
      n_samples, seed, jobs,
      [&](std::size_t k, std::size_t, std::size_t count, Rng& rng) {
        ChunkAcc& acc = accs[k];
        PairTrace trace;
        const bool check_traces = k == 0;
        for (std::size_t i = 0; i < count; ++i) {
          const auto pair = sampler.sample(rng, check_traces ? &trace : nullptr);
          acc.max_inc = std::max(acc.max_inc, pair.y_s - pair.y);
          acc.max_dec = std::max(acc.max_dec, pair.y - pair.y_s);
          const double d1 = pair.y - mu;
          const double d2 = pair.y * pair.y - mu * pair.y_s;
          const double d3 = pair.y * pair.y * pair.y - mu * pair.y_s * pair.y_s;
          acc.d1 += d1;
          acc.d1_sq += d1 * d1;
          acc.d2 += d2;
          acc.d2_sq += d2 * d2;
          acc.d3 += d3;
          acc.d3_sq += d3 * d3;
          acc.abs_ys += std::fabs(pair.y_s);
          acc.abs_ys_sq += pair.y_s * pair.y_s;
          if (collect_laws) {
            acc.law_y.add(pair.y, 1.0);
            acc.law_ys.add(pair.y_s, 1.0);
          }
          if (check_traces && !trace.level_counts.empty()) {
            ++acc.trace_checked;
            if (!detail::trace_steps_ok(spec, trace)) ++acc.trace_violations;
          }
        }
      });

  double max_inc = 0.0, max_dec = 0.0;
  double d1 = 0.0, d1_sq = 0.0, d2 = 0.0, d2_sq = 0.0, d3 = 0.0, d3_sq = 0.0;
  double abs_ys = 0.0, abs_ys_sq = 0.0;
  DiscreteLaw law_y, law_ys;
  for (const auto& acc : accs) {
    max_inc = std::max(max_inc, acc.max_inc);
    max_dec = std::max(max_dec, acc.max_dec);
    d1 += acc.d1;
    d1_sq += acc.d1_sq;
    d2 += acc.d2;
    d2_sq += acc.d2_sq;
    d3 += acc.d3;
    d3_sq += acc.d3_sq;
    abs_ys += acc.abs_ys;
    abs_ys_sq += acc.abs_ys_sq;
    if (collect_laws) {
      law_y.merge(acc.law_y);
      law_ys.merge(acc.law_ys);
    }
    report.trace_checked += acc.trace_checked;
    report.trace_violations += acc.trace_violations;
  }

  report.max_increase = max_inc;
  report.max_decrease = max_dec;
  const double tol = 1e-9;
  report.sure_bound_pass = kind == Statistic::ge
                               ? max_inc <= report.sure_bound + tol
                               : std::max(max_inc, max_dec) <= report.sure_bound + tol;

  const double n = static_cast<double>(n_samples);
  auto add_identity = [&](const char* name, double sum, double sum_sq, double mu_slack) {
    IdentityResidual idr;
    idr.test_function = name;
    idr.residual = std::fabs(sum / n);
    const double var = std::max(0.0, sum_sq / n - (sum / n) * (sum / n));
    idr.tolerance = 4.0 * std::sqrt(var / n) + est.error * mu_slack + 1e-12;
    idr.pass = idr.residual <= idr.tolerance;
    report.identities.push_back(std::move(idr));
  };
  add_identity("constant", d1, d1_sq, 1.0);
  add_identity("identity", d2, d2_sq, abs_ys / n);
  add_identity("square", d3, d3_sq, abs_ys_sq / n);

  if (report.tv_checked) {
    law_y.scale(1.0 / n);
    law_ys.scale(1.0 / n);
    report.tv_base = tv_distance(law_y, exact_law);
    report.tv_size_bias = tv_distance(law_ys, exact_sb);
  }

  report.pass = report.sure_bound_pass && report.trace_violations == 0;
  for (const auto& idr : report.identities) report.pass = report.pass && idr.pass;
  if (report.tv_checked)
    report.pass = report.pass && report.tv_base <= tv_tolerance &&
                  report.tv_size_bias <= tv_tolerance;
  return report;
}

}  // namespace sizebias

#endif
