#ifndef SIZEBIAS_BOUNDS_HPP
#define SIZEBIAS_BOUNDS_HPP

#include <algorithm>
#include <cmath>
#include <functional>
#include <stdexcept>
#include <string>
#include <vector>

namespace sizebias {

// Deviation-bound inputs: mean mu, coupling constant c, deviation t >= 0.
struct BoundParams {
  double mu;
  double c;
  double t;
};

enum class TailSide { left, right };

namespace detail {

inline void check_params(const BoundParams& p, const char* what) {
  if (!(p.mu > 0.0) || !std::isfinite(p.mu))
    throw std::invalid_argument(std::string(what) + ": mean must be positive");
  if (!(p.c > 0.0) || !std::isfinite(p.c))
    throw std::invalid_argument(std::string(what) + ": coupling constant must be positive");
  if (!(p.t >= 0.0) || !std::isfinite(p.t))
    throw std::invalid_argument(std::string(what) + ": deviation must be nonnegative");
}

inline double clamp_prob(double logv) {
  if (logv >= 0.0) return 1.0;
  return std::exp(logv);
}

// log of (mu/(mu+t))^{(t+mu)/c} e^{t/c}
inline double sub_poisson_log_direct(double mu, double c, double t) {
  return ((t + mu) / c) * std::log(mu / (mu + t)) + t / c;
}

// same quantity via -(mu/c) h(t/mu) with h(x) = (1+x) log(1+x) - x
inline double sub_poisson_log_h(double mu, double c, double t) {
  const double x = t / mu;
  return -(mu / c) * ((1.0 + x) * std::log1p(x) - x);
}

}  // namespace detail

// exp(-t^2 / (2 c mu)): left-tail consequence of a bounded size-bias coupling.
inline double left_tail_gauss(const BoundParams& p) {
  detail::check_params(p, "left_tail_gauss");
  return detail::clamp_prob(-p.t * p.t / (2.0 * p.c * p.mu));
}

// exp(-t^2 / (2 c mu + c t)): the right-tail counterpart.
inline double right_tail_basic(const BoundParams& p) {
  detail::check_params(p, "right_tail_basic");
  return detail::clamp_prob(-p.t * p.t / (2.0 * p.c * p.mu + p.c * p.t));
}

// (mu/(mu+t))^{(t+mu)/c} e^{t/c}: the sharper Poisson-type right tail.
inline double sub_poisson_tail(const BoundParams& p) {
  detail::check_params(p, "sub_poisson_tail");
  if (p.t == 0.0) return 1.0;
  return detail::clamp_prob(detail::sub_poisson_log_direct(p.mu, p.c, p.t));
}

// Poisson-type bound on P(Y <= mu - t); meaningful only for t <= mu and
// identically zero past the mean.
inline double sub_poisson_left_tail(const BoundParams& p) {
  detail::check_params(p, "sub_poisson_left_tail");
  if (p.t == 0.0) return 1.0;
  if (p.t > p.mu) return 0.0;
  if (p.t == p.mu) return detail::clamp_prob(-p.mu / p.c);
  const double logv =
      ((p.mu - p.t) / p.c) * std::log(p.mu / (p.mu - p.t)) - p.t / p.c;
  return detail::clamp_prob(logv);
}

// Sums of negatively associated indicators admit the sub-poisson bound with
// unit coupling constant.
inline double negative_association_tail(double mu, double t) {
  return sub_poisson_tail({mu, 1.0, t});
}

inline double negative_association_left_tail(double mu, double t) {
  return sub_poisson_left_tail({mu, 1.0, t});
}

// exp(-t^2 / (2 c mu + 2 c t / 3)).
inline double bernstein_tail(const BoundParams& p) {
  detail::check_params(p, "bernstein_tail");
  return detail::clamp_prob(-p.t * p.t / (2.0 * p.c * p.mu + 2.0 * p.c * p.t / 3.0));
}

// exp(-2 t^2 / sum c_i^2), given the sum of squares directly.
inline double mcdiarmid_tail_sumsq(double sum_c_sq, double t) {
  if (!(sum_c_sq > 0.0) || !std::isfinite(sum_c_sq))
    throw std::invalid_argument("mcdiarmid_tail: sum of squares must be positive");
  if (!(t >= 0.0) || !std::isfinite(t))
    throw std::invalid_argument("mcdiarmid_tail: deviation must be nonnegative");
  return detail::clamp_prob(-2.0 * t * t / sum_c_sq);
}

inline double mcdiarmid_tail(const std::vector<double>& c, double t) {
  if (c.empty()) throw std::invalid_argument("mcdiarmid_tail: empty coordinate bounds");
  double sumsq = 0.0;
  for (double ci : c) {
    if (!(ci >= 0.0) || !std::isfinite(ci))
      throw std::invalid_argument("mcdiarmid_tail: coordinate bounds must be nonnegative");
    sumsq += ci * ci;
  }
  return mcdiarmid_tail_sumsq(sumsq, t);
}

// Certificate-based pair: an event of the form {Y <= a mu + b} certifying
// bounded differences gives two-sided tails with c-scaled denominators.
struct CertifiableParams {
  double c;
  double a;
  double b;
  double mu;
  double t;
};

struct TailPair {
  double left;
  double right;
};

inline TailPair certifiable_tails(const CertifiableParams& p) {
  if (!(p.c > 0.0) || !std::isfinite(p.c))
    throw std::invalid_argument("certifiable_tails: c must be positive");
  if (!(p.a >= 0.0) || !(p.b >= 0.0))
    throw std::invalid_argument("certifiable_tails: a and b must be nonnegative");
  if (!(p.mu > 0.0) || !std::isfinite(p.mu))
    throw std::invalid_argument("certifiable_tails: mean must be positive");
  if (!(p.t >= 0.0) || !std::isfinite(p.t))
    throw std::invalid_argument("certifiable_tails: deviation must be nonnegative");
  if (p.t == 0.0) return {1.0, 1.0};
  const double base = p.a * p.mu + p.b;
  const double dl = 2.0 * p.c * p.c * (base + p.t / (3.0 * p.c));
  const double dr = 2.0 * p.c * p.c * (base + p.a * p.t);
  TailPair out;
  out.left = dl > 0.0 ? detail::clamp_prob(-p.t * p.t / dl) : 0.0;
  out.right = dr > 0.0 ? detail::clamp_prob(-p.t * p.t / dr) : 0.0;
  return out;
}

// Locations in (t_lo, t_hi) where two bound curves cross, found by a sign
// scan over a uniform grid plus bisection. Grid-point ties are treated as
// crossings only when the sign actually changes across them.
inline std::vector<double> crossover(const std::function<double(double)>& bound_a,
                                     const std::function<double(double)>& bound_b,
                                     double t_lo, double t_hi, int grid = 2048,
                                     double tol = 1e-9) {
  if (!(t_lo < t_hi)) throw std::invalid_argument("crossover: need t_lo < t_hi");
  if (grid < 2) throw std::invalid_argument("crossover: need at least 2 grid points");
  auto diff = [&](double t) { return bound_a(t) - bound_b(t); };
  std::vector<double> out;
  double prev_t = t_lo;
  double prev_d = diff(t_lo);
  for (int i = 1; i <= grid; ++i) {
    const double t = t_lo + (t_hi - t_lo) * static_cast<double>(i) / grid;
    const double d = diff(t);
    if ((prev_d < 0.0 && d > 0.0) || (prev_d > 0.0 && d < 0.0)) {
      double lo = prev_t, hi = t;
      while (hi - lo > tol) {
        const double mid = 0.5 * (lo + hi);
        const double dm = diff(mid);
        if (dm == 0.0) { lo = hi = mid; break; }
        if ((dm < 0.0) == (prev_d < 0.0))
          lo = mid;
        else
          hi = mid;
      }
      out.push_back(0.5 * (lo + hi));
    }
    if (d != 0.0) {
      prev_t = t;
      prev_d = d;
    }
  }
  return out;
}

// One evaluated family over a shared t grid.
struct TailBoundSeries {
  std::string family;
  TailSide side;
  std::vector<double> values;
};

struct TailBoundReport {
  double mu = 0.0;
  double c = 0.0;
  std::vector<double> t_grid;
  std::vector<TailBoundSeries> series;
};

// The standard family set for one (mu, c); negative-association rows are
// appended when the model carries that structure, bounded-difference rows
// when a sum of squared coordinate ranges is supplied (> 0).
inline TailBoundReport make_tail_bound_report(double mu, double c,
                                              const std::vector<double>& t_grid,
                                              bool include_na = false,
                                              double mcdiarmid_sumsq = 0.0) {
  TailBoundReport report;
  report.mu = mu;
  report.c = c;
  report.t_grid = t_grid;
  auto add = [&](const std::string& family, TailSide side, auto&& eval) {
    TailBoundSeries s;
    s.family = family;
    s.side = side;
    s.values.reserve(t_grid.size());
    for (double t : t_grid) s.values.push_back(eval(t));
    report.series.push_back(std::move(s));
  };
  add("gauss", TailSide::left, [&](double t) { return left_tail_gauss({mu, c, t}); });
  add("basic", TailSide::right, [&](double t) { return right_tail_basic({mu, c, t}); });
  add("sub_poisson", TailSide::right, [&](double t) { return sub_poisson_tail({mu, c, t}); });
  add("sub_poisson", TailSide::left,
      [&](double t) { return sub_poisson_left_tail({mu, c, t}); });
  add("bernstein", TailSide::right, [&](double t) { return bernstein_tail({mu, c, t}); });
  if (include_na) {
    add("na", TailSide::right, [&](double t) { return negative_association_tail(mu, t); });
    add("na", TailSide::left,
        [&](double t) { return negative_association_left_tail(mu, t); });
  }
  if (mcdiarmid_sumsq > 0.0) {
    add("mcdiarmid", TailSide::right,
        [&](double t) { return mcdiarmid_tail_sumsq(mcdiarmid_sumsq, t); });
    add("mcdiarmid", TailSide::left,
        [&](double t) { return mcdiarmid_tail_sumsq(mcdiarmid_sumsq, t); });
  }
  return report;
}

}  // namespace sizebias

#endif
