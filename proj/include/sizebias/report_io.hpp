#ifndef SIZEBIAS_REPORT_IO_HPP
#define SIZEBIAS_REPORT_IO_HPP

#include <cstdint>
#include <cstdio>
#include <stdexcept>
#include <string>
#include <vector>

#include "sizebias/bounds.hpp"
#include "sizebias/model_json.hpp"
#include "sizebias/verify.hpp"

namespace sizebias {

// 17 significant digits round-trip every double exactly.
inline std::string format_double(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

inline const char* side_name(TailSide side) {
  return side == TailSide::left ? "left" : "right";
}

namespace detail {

inline void csv_row(std::string& out, const std::vector<std::string>& cells) {
  for (std::size_t i = 0; i < cells.size(); ++i) {
    if (i) out += ',';
    out += cells[i];
  }
  out += '\n';
}

inline const char* pass_name(bool pass) { return pass ? "true" : "false"; }

}  // namespace detail

// "start:stop:step" with step > 0; start > stop (or an empty string) gives an
// empty grid. The stop value is included up to a relative step slack.
inline std::vector<double> parse_t_grid(const std::string& s) {
  if (s.empty()) return {};
  double start = 0.0, stop = 0.0, step = 0.0;
  char trailing = 0;
  const int got = std::sscanf(s.c_str(), "%lf:%lf:%lf%c", &start, &stop, &step, &trailing);
  if (got != 3)
    throw std::invalid_argument("t-grid: expected \"start:stop:step\", got \"" + s + "\"");
  if (!(step > 0.0)) throw std::invalid_argument("t-grid: step must be positive");
  if (!(start >= 0.0)) throw std::invalid_argument("t-grid: start must be nonnegative");
  std::vector<double> out;
  const double limit = stop + step * 1e-9;
  for (std::size_t k = 0;; ++k) {
    const double t = start + static_cast<double>(k) * step;
    if (t > limit) break;
    if (out.size() >= 1000000) throw std::invalid_argument("t-grid: more than 1e6 points");
    out.push_back(t);
  }
  return out;
}

// ---------------------------------------------------------------------------
// bounds

struct BoundsDocument {
  std::string model;
  Statistic statistic = Statistic::ge;
  double mu = 0.0;  // full mean; report.mu holds the reduced mean the bounds see
  TailBoundReport report;
};

inline std::string bounds_csv(const BoundsDocument& doc) {
  std::string out = "model,statistic,family,side,t,bound,mu,mu_reduced,c\n";
  const auto& r = doc.report;
  for (std::size_t i = 0; i < r.t_grid.size(); ++i)
    for (const auto& s : r.series)
      detail::csv_row(out, {doc.model, statistic_name(doc.statistic), s.family,
                            side_name(s.side), format_double(r.t_grid[i]),
                            format_double(s.values[i]), format_double(doc.mu),
                            format_double(r.mu), format_double(r.c)});
  return out;
}

inline std::string bounds_json(const BoundsDocument& doc) {
  Json j;
  j["model"] = doc.model;
  j["statistic"] = statistic_name(doc.statistic);
  j["mu"] = doc.mu;
  j["mu_reduced"] = doc.report.mu;
  j["c"] = doc.report.c;
  j["t_grid"] = doc.report.t_grid;
  Json series = Json::array();
  for (const auto& s : doc.report.series) {
    Json row;
    row["family"] = s.family;
    row["side"] = side_name(s.side);
    row["values"] = s.values;
    series.push_back(std::move(row));
  }
  j["series"] = std::move(series);
  return j.dump(2) + "\n";
}

// ---------------------------------------------------------------------------
// simulate

struct SimulateDocument {
  std::string model;
  Statistic statistic = Statistic::ge;
  std::uint64_t seed = 0;
  std::vector<double> values;
};

inline std::string simulate_csv(const SimulateDocument& doc) {
  std::string out = "index,value\n";
  for (std::size_t i = 0; i < doc.values.size(); ++i)
    detail::csv_row(out, {std::to_string(i), format_double(doc.values[i])});
  return out;
}

inline std::string simulate_json(const SimulateDocument& doc) {
  Json j;
  j["model"] = doc.model;
  j["statistic"] = statistic_name(doc.statistic);
  j["seed"] = doc.seed;
  j["samples"] = doc.values.size();
  j["values"] = doc.values;
  return j.dump(2) + "\n";
}

// ---------------------------------------------------------------------------
// verify

struct VerifyDocument {
  CouplingReport coupling;
  DominationReport domination;

  bool pass() const { return coupling.pass && domination.pass; }
};

// One flat matrix: domination rows first, then the coupling checks recast as
// (bound_value, empirical) pairs so every line reads "observed within bound".
inline std::string verify_csv(const VerifyDocument& doc) {
  std::string out = "model,statistic,bound,t,bound_value,empirical,halfwidth,pass\n";
  const auto& dom = doc.domination;
  const char* stat = statistic_name(dom.statistic);
  for (const auto& row : dom.rows)
    detail::csv_row(out, {dom.model, stat, row.family + "_" + side_name(row.side),
                          format_double(row.t), format_double(row.bound),
                          format_double(row.empirical), format_double(row.halfwidth),
                          detail::pass_name(row.pass)});
  const auto& c = doc.coupling;
  const double sure_observed = c.statistic == Statistic::ge
                                   ? c.max_increase
                                   : std::max(c.max_increase, c.max_decrease);
  detail::csv_row(out, {c.model, stat, "sure_bound", "0", format_double(c.sure_bound),
                        format_double(sure_observed), "0",
                        detail::pass_name(c.sure_bound_pass)});
  for (const auto& idr : c.identities)
    detail::csv_row(out, {c.model, stat, "identity_" + idr.test_function, "0",
                          format_double(idr.tolerance), format_double(idr.residual), "0",
                          detail::pass_name(idr.pass)});
  if (c.tv_checked) {
    detail::csv_row(out, {c.model, stat, "tv_base", "0", format_double(c.tv_tolerance),
                          format_double(c.tv_base), "0",
                          detail::pass_name(c.tv_base <= c.tv_tolerance)});
    detail::csv_row(out, {c.model, stat, "tv_size_bias", "0", format_double(c.tv_tolerance),
                          format_double(c.tv_size_bias), "0",
                          detail::pass_name(c.tv_size_bias <= c.tv_tolerance)});
  }
  if (c.trace_checked > 0)
    detail::csv_row(out, {c.model, stat, "trace_steps", "0", "0",
                          std::to_string(c.trace_violations), "0",
                          detail::pass_name(c.trace_violations == 0)});
  return out;
}

inline std::string verify_json(const VerifyDocument& doc) {
  Json j;
  j["model"] = doc.domination.model;
  j["statistic"] = statistic_name(doc.domination.statistic);
  j["pass"] = doc.pass();

  const auto& c = doc.coupling;
  Json jc;
  jc["mu"] = c.mu;
  jc["coupling_constant"] = c.coupling_constant;
  jc["sure_bound"] = c.sure_bound;
  jc["samples"] = c.samples;
  jc["seed"] = c.seed;
  jc["max_increase"] = c.max_increase;
  jc["max_decrease"] = c.max_decrease;
  jc["sure_bound_pass"] = c.sure_bound_pass;
  Json ids = Json::array();
  for (const auto& idr : c.identities) {
    Json row;
    row["test_function"] = idr.test_function;
    row["residual"] = idr.residual;
    row["tolerance"] = idr.tolerance;
    row["pass"] = idr.pass;
    ids.push_back(std::move(row));
  }
  jc["identities"] = std::move(ids);
  jc["tv_checked"] = c.tv_checked;
  if (c.tv_checked) {
    jc["tv_base"] = c.tv_base;
    jc["tv_size_bias"] = c.tv_size_bias;
    jc["tv_tolerance"] = c.tv_tolerance;
  }
  jc["trace_checked"] = c.trace_checked;
  jc["trace_violations"] = c.trace_violations;
  jc["pass"] = c.pass;
  j["coupling"] = std::move(jc);

  const auto& d = doc.domination;
  Json jd;
  jd["mu"] = d.mu;
  jd["mu_reduced"] = d.mu_reduced;
  jd["mu_error"] = d.mu_error;
  jd["c"] = d.c;
  jd["samples"] = d.samples;
  jd["seed"] = d.seed;
  Json rows = Json::array();
  for (const auto& row : d.rows) {
    Json r;
    r["family"] = row.family;
    r["side"] = side_name(row.side);
    r["t"] = row.t;
    r["bound"] = row.bound;
    r["empirical"] = row.empirical;
    r["halfwidth"] = row.halfwidth;
    r["pass"] = row.pass;
    rows.push_back(std::move(r));
  }
  jd["rows"] = std::move(rows);
  jd["pass"] = d.pass;
  j["domination"] = std::move(jd);
  return j.dump(2) + "\n";
}

// ---------------------------------------------------------------------------
// compare

struct CompareDocument {
  std::string family_a;
  std::string family_b;
  double mu = 0.0;
  double c = 0.0;
  double sumsq = 0.0;   // bounded-difference families only
  double cert_a = -1.0;  // certificate slope/intercept; negative when unused
  double cert_b = -1.0;
  std::vector<double> t_grid;
  std::vector<double> values_a;
  std::vector<double> values_b;
  std::vector<double> crossings;
};

inline std::string compare_csv(const CompareDocument& doc) {
  std::string out = "kind,t,value_a,value_b\n";
  for (std::size_t i = 0; i < doc.t_grid.size(); ++i)
    detail::csv_row(out, {"grid", format_double(doc.t_grid[i]),
                          format_double(doc.values_a[i]), format_double(doc.values_b[i])});
  for (double t : doc.crossings)
    detail::csv_row(out, {"crossover", format_double(t), "", ""});
  return out;
}

inline std::string compare_json(const CompareDocument& doc) {
  Json j;
  j["family_a"] = doc.family_a;
  j["family_b"] = doc.family_b;
  j["mu"] = doc.mu;
  j["c"] = doc.c;
  if (doc.sumsq > 0.0) j["sumsq"] = doc.sumsq;
  if (doc.cert_a >= 0.0 && doc.cert_b >= 0.0) {
    j["cert_a"] = doc.cert_a;
    j["cert_b"] = doc.cert_b;
  }
  j["t_grid"] = doc.t_grid;
  j["values_a"] = doc.values_a;
  j["values_b"] = doc.values_b;
  j["crossings"] = doc.crossings;
  return j.dump(2) + "\n";
}

}  // namespace sizebias

#endif
