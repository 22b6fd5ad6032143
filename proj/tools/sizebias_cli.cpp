#include <cmath>
#include <cstdint>
#include <fstream>
#include <functional>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "sizebias/model_json.hpp"
#include "sizebias/report_io.hpp"
#include "sizebias/verify.hpp"

namespace {

using namespace sizebias;

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::invalid_argument("cannot read config file: " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

void write_output(const std::string& path, const std::string& data) {
  if (path.empty()) {
    std::cout << data;
    return;
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open output file: " + path);
  out << data;
  out.flush();
  if (!out) throw std::runtime_error("short write to output file: " + path);
}

struct CommonOpts {
  std::string config_path;
  std::string out_path;
  std::string format = "csv";
  std::string statistic;  // empty: config default, then "ge"
  std::string t_grid;
  std::uint64_t seed = 0;
  bool seed_given = false;
  std::size_t samples = 0;
  int jobs = 1;
};

Statistic resolve_statistic(const CommonOpts& opt, const ModelDocument& doc) {
  if (!opt.statistic.empty()) return parse_statistic(opt.statistic);
  if (doc.statistic) return *doc.statistic;
  return Statistic::ge;
}

std::uint64_t resolve_seed(const CommonOpts& opt, const ModelDocument& doc) {
  if (opt.seed_given) return opt.seed;
  if (doc.seed) return *doc.seed;
  throw std::invalid_argument("seed required: pass --seed or put \"seed\" in the config");
}

ModelDocument load_config(const CommonOpts& opt) {
  ModelDocument doc = parse_model_document(read_file(opt.config_path));
  validate(doc.spec);
  return doc;
}

int run_bounds(const CommonOpts& opt, bool include_na, double sumsq) {
  const ModelDocument doc = load_config(opt);
  const Statistic kind = resolve_statistic(opt, doc);
  const auto grid = parse_t_grid(opt.t_grid);

  BoundsDocument out;
  out.model = model_name(doc.spec);
  out.statistic = kind;
  const auto est = mean_estimate(doc.spec, kind);
  out.mu = est.value;
  const double mu_reduced = est.value - reduce(doc.spec, kind).offset;
  const double c = coupling_constant(doc.spec, kind);
  out.report = make_tail_bound_report(mu_reduced, c, grid, include_na, sumsq);

  write_output(opt.out_path, opt.format == "json" ? bounds_json(out) : bounds_csv(out));
  std::cerr << "bounds: " << out.model << " " << statistic_name(kind) << ", mu="
            << format_double(out.mu) << ", c=" << format_double(c) << ", "
            << grid.size() << " grid points\n";
  return 0;
}

int run_simulate(const CommonOpts& opt) {
  const ModelDocument doc = load_config(opt);
  const Statistic kind = resolve_statistic(opt, doc);
  const std::uint64_t seed = resolve_seed(opt, doc);
  if (opt.samples == 0) throw std::invalid_argument("simulate: need at least one sample");

  SimulateDocument out;
  out.model = model_name(doc.spec);
  out.statistic = kind;
  out.seed = seed;
  out.values.resize(opt.samples);
  sizebias::detail::run_chunks(
      opt.samples, seed, opt.jobs,
      [&](std::size_t, std::size_t first, std::size_t count, Rng& rng) {
        for (std::size_t i = 0; i < count; ++i) {
          const auto cfg = sample_configuration(doc.spec, rng);
          out.values[first + i] = statistic(doc.spec, cfg, kind);
        }
      });

  write_output(opt.out_path, opt.format == "json" ? simulate_json(out) : simulate_csv(out));
  std::cerr << "simulate: " << out.model << " " << statistic_name(kind) << ", "
            << opt.samples << " samples, seed " << seed << "\n";
  return 0;
}

// Without an explicit grid, audit deviations on the scale the gauss bound
// sets: eight points from 0 to four reduced standard-deviation proxies.
std::vector<double> default_verify_grid(const ModelSpec& spec, Statistic kind) {
  const double mu_reduced =
      mean_estimate(spec, kind).value - reduce(spec, kind).offset;
  const double c = coupling_constant(spec, kind);
  const double tmax = 4.0 * std::sqrt(std::max(c * mu_reduced, 1e-12));
  std::vector<double> grid;
  for (int k = 0; k < 8; ++k) grid.push_back(tmax * static_cast<double>(k) / 7.0);
  return grid;
}

int run_verify(const CommonOpts& opt, double tv_tolerance) {
  const ModelDocument doc = load_config(opt);
  const Statistic kind = resolve_statistic(opt, doc);
  const std::uint64_t seed = resolve_seed(opt, doc);
  const std::size_t samples = opt.samples;
  auto grid = parse_t_grid(opt.t_grid);
  if (grid.empty()) grid = default_verify_grid(doc.spec, kind);

  VerifyDocument out;
  out.coupling = audit_coupling(doc.spec, kind, samples, seed, opt.jobs, tv_tolerance);
  std::cerr << "verify: coupling " << (out.coupling.pass ? "pass" : "FAIL") << "\n";
  out.domination = audit_domination(doc.spec, kind, grid, samples, seed, opt.jobs);
  std::cerr << "verify: domination " << (out.domination.pass ? "pass" : "FAIL") << "\n";

  write_output(opt.out_path, opt.format == "json" ? verify_json(out) : verify_csv(out));
  return out.pass() ? 0 : 1;
}

std::function<double(double)> make_family(const std::string& name, double mu, double c,
                                          bool have_c, double sumsq, double cert_a,
                                          double cert_b) {
  const auto need_c = [&] {
    if (!have_c)
      throw std::invalid_argument("compare: family \"" + name +
                                  "\" needs --c or a model config");
  };
  if (name == "gauss_left") {
    need_c();
    return [=](double t) { return left_tail_gauss({mu, c, t}); };
  }
  if (name == "basic") {
    need_c();
    return [=](double t) { return right_tail_basic({mu, c, t}); };
  }
  if (name == "sub_poisson") {
    need_c();
    return [=](double t) { return sub_poisson_tail({mu, c, t}); };
  }
  if (name == "sub_poisson_left") {
    need_c();
    return [=](double t) { return sub_poisson_left_tail({mu, c, t}); };
  }
  if (name == "bernstein") {
    need_c();
    return [=](double t) { return bernstein_tail({mu, c, t}); };
  }
  if (name == "na")
    return [=](double t) { return negative_association_tail(mu, t); };
  if (name == "na_left")
    return [=](double t) { return negative_association_left_tail(mu, t); };
  if (name == "mcdiarmid") {
    if (!(sumsq > 0.0))
      throw std::invalid_argument("compare: mcdiarmid needs --sumsq > 0");
    return [=](double t) { return mcdiarmid_tail_sumsq(sumsq, t); };
  }
  if (name == "certifiable_left" || name == "certifiable_right") {
    need_c();
    if (cert_a < 0.0 || cert_b < 0.0)
      throw std::invalid_argument("compare: certifiable families need --cert-a and --cert-b");
    const bool left = name == "certifiable_left";
    return [=](double t) {
      const TailPair p = certifiable_tails({c, cert_a, cert_b, mu, t});
      return left ? p.left : p.right;
    };
  }
  throw std::invalid_argument("compare: unknown bound family \"" + name + "\"");
}

int run_compare(const CommonOpts& opt, const std::string& family_a,
                const std::string& family_b, std::optional<double> mu_flag,
                std::optional<double> c_flag, double sumsq, double cert_a, double cert_b) {
  CompareDocument out;
  out.family_a = family_a;
  out.family_b = family_b;
  bool have_c = false;
  if (!opt.config_path.empty()) {
    const ModelDocument doc = load_config(opt);
    const Statistic kind = resolve_statistic(opt, doc);
    out.mu = mean_estimate(doc.spec, kind).value - reduce(doc.spec, kind).offset;
    out.c = coupling_constant(doc.spec, kind);
    have_c = true;
  }
  if (mu_flag) out.mu = *mu_flag;
  if (c_flag) {
    out.c = *c_flag;
    have_c = true;
  }
  if (!(out.mu > 0.0))
    throw std::invalid_argument("compare: need --config or a positive --mu");
  if (have_c && !(out.c > 0.0))
    throw std::invalid_argument("compare: coupling constant must be positive");
  out.sumsq = sumsq;
  out.cert_a = cert_a;
  out.cert_b = cert_b;

  const auto eval_a = make_family(family_a, out.mu, out.c, have_c, sumsq, cert_a, cert_b);
  const auto eval_b = make_family(family_b, out.mu, out.c, have_c, sumsq, cert_a, cert_b);
  out.t_grid = parse_t_grid(opt.t_grid);
  out.values_a.reserve(out.t_grid.size());
  out.values_b.reserve(out.t_grid.size());
  for (double t : out.t_grid) {
    out.values_a.push_back(eval_a(t));
    out.values_b.push_back(eval_b(t));
  }
  if (out.t_grid.size() >= 2)
    out.crossings = crossover(eval_a, eval_b, out.t_grid.front(), out.t_grid.back());

  write_output(opt.out_path, opt.format == "json" ? compare_json(out) : compare_csv(out));
  std::cerr << "compare: " << family_a << " vs " << family_b << ", "
            << out.t_grid.size() << " grid points, " << out.crossings.size()
            << " crossings\n";
  return 0;
}

void add_common(CLI::App* cmd, CommonOpts& opt, bool needs_config) {
  auto* config = cmd->add_option("--config", opt.config_path, "model config JSON path");
  if (needs_config) config->required();
  cmd->add_option("--out", opt.out_path, "output path (default: stdout)");
  cmd->add_option("--format", opt.format, "output format")
      ->check(CLI::IsMember({"csv", "json"}))
      ->capture_default_str();
  cmd->add_option("--statistic", opt.statistic, "statistic kind (overrides config)")
      ->check(CLI::IsMember({"ge", "ne"}));
  cmd->add_option("--jobs", opt.jobs, "worker threads (never affects results)")
      ->check(CLI::PositiveNumber);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"bounded size-bias couplings for occupancy models: bounds, simulation, audits"};
  app.require_subcommand(1);

  CommonOpts bounds_opt, simulate_opt, verify_opt, compare_opt;
  bool bounds_na = false;
  double bounds_sumsq = 0.0;
  double verify_tv_tol = 0.01;
  std::string compare_a, compare_b;
  std::optional<double> compare_mu, compare_c;
  double compare_sumsq = 0.0, compare_cert_a = -1.0, compare_cert_b = -1.0;

  auto* bounds = app.add_subcommand("bounds", "tabulate tail bounds over a deviation grid");
  add_common(bounds, bounds_opt, true);
  bounds->add_option("--t-grid", bounds_opt.t_grid, "deviation grid start:stop:step");
  bounds->add_flag("--na", bounds_na, "append negative-association rows");
  bounds->add_option("--sumsq", bounds_sumsq,
                     "sum of squared coordinate ranges; adds bounded-difference rows");

  auto* simulate = app.add_subcommand("simulate", "dump statistic samples");
  add_common(simulate, simulate_opt, true);
  simulate->add_option("--samples", simulate_opt.samples, "sample count")
      ->default_val(std::size_t{10000});
  auto* sim_seed = simulate->add_option("--seed", simulate_opt.seed, "RNG seed");

  auto* verify = app.add_subcommand("verify", "audit coupling and tail domination");
  add_common(verify, verify_opt, true);
  verify->add_option("--t-grid", verify_opt.t_grid,
                     "deviation grid start:stop:step (default: model-scaled)");
  verify->add_option("--samples", verify_opt.samples, "samples per audit")
      ->default_val(std::size_t{200000});
  auto* ver_seed = verify->add_option("--seed", verify_opt.seed, "RNG seed");
  verify->add_option("--tv-tolerance", verify_tv_tol,
                     "total-variation tolerance for law checks")
      ->capture_default_str();

  auto* compare = app.add_subcommand("compare", "tabulate two bound families and their crossings");
  add_common(compare, compare_opt, false);
  compare->add_option("--t-grid", compare_opt.t_grid, "deviation grid start:stop:step")
      ->required();
  compare->add_option("--family-a", compare_a, "first bound family")->required();
  compare->add_option("--family-b", compare_b, "second bound family")->required();
  compare->add_option("--mu", compare_mu, "mean (overrides config)");
  compare->add_option("--c", compare_c, "coupling constant (overrides config)");
  compare->add_option("--sumsq", compare_sumsq, "bounded-difference sum of squares");
  compare->add_option("--cert-a", compare_cert_a, "certificate slope");
  compare->add_option("--cert-b", compare_cert_b, "certificate intercept");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }
  simulate_opt.seed_given = sim_seed->count() > 0;
  verify_opt.seed_given = ver_seed->count() > 0;

  try {
    if (bounds->parsed()) return run_bounds(bounds_opt, bounds_na, bounds_sumsq);
    if (simulate->parsed()) return run_simulate(simulate_opt);
    if (verify->parsed()) return run_verify(verify_opt, verify_tv_tol);
    return run_compare(compare_opt, compare_a, compare_b, compare_mu, compare_c,
                       compare_sumsq, compare_cert_a, compare_cert_b);
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
