#include "arp/experiment.hpp"
#include "arp/rates.hpp"
#include "arp/trace_io.hpp"

#include <CLI11.hpp>

#include <cstdio>
#include <fstream>
#include <iostream>

namespace {

struct CommonOptions {
  std::string problem = "rosenbrock";
  int dim = 2;
  int p = 2;
  std::string strategy = "lazy";
  int m = 1;
  double eps1 = 1e-5;
  double eps2 = 1e-4;
  double sigma0 = 1.0;
  double theta1 = 2.0;
  double theta2 = 2.0;
  long max_iters = 100000;
  std::uint64_t seed = 0;
  int inner_budget = 500;
  std::string subsolver = "exact";
  double dfp_mu = 1e-4;
  double dfp_L = 1e4;
  double dfp_sigma = 1.0;
  double h_floor = 1e-8;
  double jitter = 0.0;
  bool no_audit = false;
  bool timing = false;
  std::string out = "out";
};

void add_common(CLI::App* app, CommonOptions& o) {
  app->add_option("--problem", o.problem, "test problem")
      ->check(CLI::IsMember(arp::problem_names()))
      ->capture_default_str();
  app->add_option("--dim", o.dim, "dimension")->check(CLI::PositiveNumber)->capture_default_str();
  app->add_option("--p", o.p, "model order")->check(CLI::IsMember({2, 3}))->capture_default_str();
  app->add_option("--strategy", o.strategy, "tensor strategy")
      ->check(CLI::IsMember({"lazy", "fd", "psb-lazy", "psb-fd", "dfp-fd"}))
      ->capture_default_str();
  app->add_option("--m", o.m, "restart period")->check(CLI::PositiveNumber)->capture_default_str();
  app->add_option("--eps1", o.eps1, "gradient tolerance")->capture_default_str();
  app->add_option("--eps2", o.eps2, "curvature tolerance")->capture_default_str();
  app->add_option("--sigma0", o.sigma0, "initial regularization weight")->capture_default_str();
  app->add_option("--theta1", o.theta1, "gradient certificate factor (> 1)")->capture_default_str();
  app->add_option("--theta2", o.theta2, "curvature certificate factor (> 1)")->capture_default_str();
  app->add_option("--max-iters", o.max_iters, "iteration budget")->capture_default_str();
  app->add_option("--seed", o.seed, "seed for the starting-point jitter")->capture_default_str();
  app->add_option("--jitter", o.jitter, "std. deviation of the starting-point perturbation")->capture_default_str();
  app->add_option("--inner-budget", o.inner_budget, "subsolver iteration budget")->capture_default_str();
  app->add_option("--subsolver", o.subsolver, "p = 2 subsolver")
      ->check(CLI::IsMember({"exact", "descent"}))
      ->capture_default_str();
  app->add_option("--dfp-mu", o.dfp_mu, "DFP guard curvature floor")->capture_default_str();
  app->add_option("--dfp-L", o.dfp_L, "DFP guard Lipschitz ceiling")->capture_default_str();
  app->add_option("--dfp-sigma", o.dfp_sigma, "DFP weight determinant floor")->capture_default_str();
  app->add_option("--h-floor", o.h_floor, "smallest finite-difference stepsize")->capture_default_str();
  app->add_flag("--no-audit", o.no_audit, "skip diagnostic audits");
  app->add_flag("--timing", o.timing, "record wall-clock times in the trace");
  app->add_option("--out", o.out, "output directory")->capture_default_str();
}

arp::ExperimentSpec make_spec(const CommonOptions& o) {
  arp::ExperimentSpec spec;
  spec.problem = o.problem;
  spec.dim = o.dim;
  spec.x0_jitter = o.jitter;
  auto& c = spec.solver;
  c.p = o.p;
  c.strategy.kind = arp::parse_strategy(o.strategy);
  c.strategy.m = o.m;
  c.strategy.dfp_mu = o.dfp_mu;
  c.strategy.dfp_L = o.dfp_L;
  c.strategy.dfp_sigma_bar = o.dfp_sigma;
  c.strategy.h_floor = o.h_floor;
  c.eps1 = o.eps1;
  c.eps2 = o.eps2;
  c.sigma0 = o.sigma0;
  c.theta1 = o.theta1;
  c.theta2 = o.theta2;
  c.max_iters = o.max_iters;
  c.seed = o.seed;
  c.audit = !o.no_audit;
  c.subsolver.inner_budget = o.inner_budget;
  c.subsolver.method = o.subsolver == "exact" ? arp::SubsolverMethod::ExactSecular : arp::SubsolverMethod::InnerDescent;
  c.validate();
  return spec;
}

void print_summary(const arp::RunTrace& t) {
  const auto* last = t.rows.empty() ? nullptr : &t.rows.back();
  std::printf("%s n=%d p=%d %s m=%d: %s after %ld iterations", t.problem.c_str(), t.dim, t.config.p,
              arp::to_string(t.config.strategy.kind).c_str(), t.config.strategy.m,
              arp::to_string(t.termination).c_str(), t.iterations());
  if (last) std::printf(", |g| = %.3e, chi = %.3e, sigma = %.6g", last->grad_norm, last->chi, last->sigma);
  std::printf("\n");
  if (!t.message.empty()) std::printf("  %s\n", t.message.c_str());
}

int cmd_solve(const CommonOptions& o) {
  const auto trace = arp::run_experiment(make_spec(o));
  arp::write_outputs(trace, o.out, o.timing);
  print_summary(trace);
  return arp::exit_code(trace.termination);
}

int cmd_sweep(const CommonOptions& o, const std::vector<double>& grid) {
  const auto spec = make_spec(o);
  const auto rows = arp::sweep_epsilon(spec, grid, arp::threads_from_env());
  std::filesystem::create_directories(o.out);
  std::ofstream csv(std::filesystem::path(o.out) / "sweep.csv", std::ios::binary);
  csv << "schema_version,eps1,iterations,termination,flagged,calls_f,calls_d1,calls_d2,calls_d3,calls_d4\n";
  csv.precision(17);
  std::printf("%12s %10s %12s %10s %10s %10s %10s\n", "eps1", "iters", "termination", "d1", "d2", "d3", "d4");
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const auto& r = rows[i];
    csv << arp::kTraceSchemaVersion << ',' << r.eps1 << ',' << r.iterations << ',' << arp::to_string(r.termination)
        << ',' << (r.flagged ? 1 : 0);
    for (int j = 0; j <= 4; ++j) csv << ',' << r.calls.order(j);
    csv << '\n';
    std::printf("%12.3e %10ld %12s %10lld %10lld %10lld %10lld%s\n", r.eps1, r.iterations,
                arp::to_string(r.termination).c_str(), static_cast<long long>(r.calls.order(1)),
                static_cast<long long>(r.calls.order(2)), static_cast<long long>(r.calls.order(3)),
                static_cast<long long>(r.calls.order(4)), r.flagged ? "  [flagged]" : "");
    std::ofstream jsonl(std::filesystem::path(o.out) / ("trace_" + std::to_string(i) + ".jsonl"), std::ios::binary);
    arp::write_jsonl(r.trace, jsonl, o.timing);
  }
  try {
    const double e = arp::sweep_exponent(rows);
    std::printf("fitted exponent of iterations vs 1/eps1: %.4f (worst-case bound %.4f)\n", e,
                arp::eps1_exponent(spec.solver.p));
  } catch (const arp::Error& err) {
    std::printf("no exponent fit: %s\n", err.what());
  }
  bool any_flagged = false;
  for (const auto& r : rows) any_flagged = any_flagged || r.flagged;
  return any_flagged ? 2 : 0;
}

int cmd_report(const std::string& path, double tail_fraction, std::size_t min_length) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw arp::Error("cannot open " + path);
  const auto loaded = arp::read_jsonl(in);
  const auto config = arp::config_from_json(loaded.header.at("config"));
  const int p = config.p;
  std::printf("trace: %s n=%d p=%d %s m=%d, %zu rows", loaded.header.at("problem").get<std::string>().c_str(),
              loaded.header.at("dim").get<int>(), p, arp::to_string(config.strategy.kind).c_str(), config.strategy.m,
              loaded.rows.size());
  if (!loaded.summary.is_null()) std::printf(", %s", loaded.summary.at("termination").get<std::string>().c_str());
  std::printf("\n");
  if (loaded.rows.empty()) return 0;
  long violations = 0, bad_certificates = 0;
  for (const auto& r : loaded.rows) {
    if (r.condition1 && r.condition1->violated) ++violations;
    if (r.certificate && !r.certificate->all_ok()) ++bad_certificates;
  }
  const auto& last = loaded.rows.back();
  std::printf("final |g| = %.3e, min |g| = %.3e, chi = %.3e, sigma = %.6g\n", last.grad_norm, last.min_grad_norm,
              last.chi, last.sigma);
  std::printf("condition-1 violations: %ld, failed certificates: %ld\n", violations, bad_certificates);
  const double pd = p;
  const auto grad = [&] {
    std::vector<double> v;
    for (const auto& r : loaded.rows) v.push_back(r.grad_norm);
    return v;
  }();
  const auto tail = arp::tail_statistic(grad, pd / (pd + 1.0), tail_fraction);
  std::printf("tail statistic min|g|*k^(%.4f): sup = %.4e, Mann-Kendall S = %.0f (z = %.3f, n = %zu)\n",
              pd / (pd + 1.0), tail.sup, tail.trend.s, tail.trend.z, tail.trend.n);
  try {
    const auto rep = arp::fit_rates(loaded.rows, p, tail_fraction, min_length);
    std::printf("log-log slope of min|g| vs k: %.4f (bound %.4f)\n", rep.grad_slope, -pd / (pd + 1.0));
    std::printf("curvature statistic sup = %.4e, Mann-Kendall S = %.0f\n", rep.curvature_bound.sup,
                rep.curvature_bound.trend.s);
    if (rep.curvature_slope) std::printf("log-log slope of min curvature vs k: %.4f\n", *rep.curvature_slope);
  } catch (const arp::Error& err) {
    std::printf("no rate fit: %s\n", err.what());
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Objective-function-free adaptive regularization with approximate high-order tensors"};
  app.require_subcommand(1);

  CommonOptions solve_opts;
  auto* solve = app.add_subcommand("solve", "run one experiment and write trace.jsonl and summary.csv");
  add_common(solve, solve_opts);

  CommonOptions sweep_opts;
  std::vector<double> grid;
  auto* sweep = app.add_subcommand("sweep", "run one experiment per eps1 value (threads from ARP_THREADS)");
  add_common(sweep, sweep_opts);
  sweep->add_option("--eps1-grid", grid, "strictly decreasing eps1 values")->required()->delimiter(',');

  std::string trace_path;
  double tail_fraction = 0.5;
  std::size_t min_length = 50;
  auto* report = app.add_subcommand("report", "summarize a trace and fit empirical rates");
  report->add_option("--trace", trace_path, "trace.jsonl file")->required();
  report->add_option("--fit-tail-fraction", tail_fraction, "fraction of the trace used by the fits")
      ->check(CLI::Range(1e-9, 1.0))
      ->capture_default_str();
  report->add_option("--min-length", min_length, "shortest trace accepted by the rate fit")->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : 1;
  }
  try {
    if (*solve) return cmd_solve(solve_opts);
    if (*sweep) return cmd_sweep(sweep_opts, grid);
    if (*report) return cmd_report(trace_path, tail_fraction, min_length);
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return 1;
}
