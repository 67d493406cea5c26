#include "arp/experiment.hpp"

#include "arp/rates.hpp"
#include "arp/trace_io.hpp"

#include <atomic>
#include <cstdlib>
#include <fstream>
#include <random>
#include <thread>

namespace arp {

int exit_code(Termination t) {
  switch (t) {
    case Termination::Converged: return 0;
    case Termination::Budget: return 2;
    case Termination::SubsolverFailure: return 3;
    case Termination::NonFinite: return 4;
  }
  return 1;
}

Vector starting_point(const ExperimentSpec& spec, const Problem& problem) {
  Vector x0 = spec.x0 ? *spec.x0 : problem.default_start();
  if (x0.size() != problem.dim()) throw DimensionError("starting point dimension mismatch");
  if (spec.x0_jitter > 0.0) {
    std::mt19937_64 rng(spec.solver.seed);
    std::normal_distribution<double> normal(0.0, spec.x0_jitter);
    for (Eigen::Index i = 0; i < x0.size(); ++i) x0(i) += normal(rng);
  }
  return x0;
}

RunTrace run_experiment(const ExperimentSpec& spec) {
  auto problem = make_problem(spec.problem, spec.dim);
  return run(problem, starting_point(spec, *problem), spec.solver);
}

void write_outputs(const RunTrace& trace, const std::filesystem::path& dir, bool include_timing) {
  std::filesystem::create_directories(dir);
  std::ofstream jsonl(dir / "trace.jsonl", std::ios::binary);
  if (!jsonl) throw Error("cannot open " + (dir / "trace.jsonl").string());
  write_jsonl(trace, jsonl, include_timing);
  std::ofstream csv(dir / "summary.csv", std::ios::binary);
  if (!csv) throw Error("cannot open " + (dir / "summary.csv").string());
  write_summary_csv_header(csv);
  write_summary_csv_row(trace, csv);
}

OracleCounts ledger_from_flags(const RunTrace& trace) {
  OracleCounts c;
  const int p = trace.config.p;
  for (const auto& row : trace.rows) {
    for (int i = 1; i <= p - 1; ++i) ++c.calls[static_cast<std::size_t>(i)];
    if (!row.restart) continue;
    if (row.branch == TensorBranch::FiniteDifference) {
      c.calls[static_cast<std::size_t>(p - 1)] += trace.dim + 1;
    } else if (row.branch == TensorBranch::Exact) {
      ++c.calls[static_cast<std::size_t>(p)];
    }
  }
  return c;
}

std::vector<SweepRow> sweep_epsilon(const ExperimentSpec& spec, std::span<const double> grid, int threads) {
  if (grid.size() < 4) throw Error("sweep_epsilon: need at least four grid points");
  for (std::size_t i = 0; i < grid.size(); ++i) {
    if (!(grid[i] > 0.0)) throw Error("sweep_epsilon: tolerances must be positive");
    if (i > 0 && !(grid[i] < grid[i - 1])) throw Error("sweep_epsilon: grid must be strictly decreasing");
  }
  std::vector<SweepRow> rows(grid.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < grid.size(); i = next++) {
      ExperimentSpec local = spec;
      local.solver.eps1 = grid[i];
      SweepRow& row = rows[i];
      row.eps1 = grid[i];
      try {
        row.trace = run_experiment(local);
        row.iterations = row.trace.iterations();
        row.calls = row.trace.oracle_totals;
        row.termination = row.trace.termination;
        row.flagged = !row.trace.converged();
        row.message = row.trace.message;
      } catch (const std::exception& e) {
        row.flagged = true;
        row.message = e.what();
      }
    }
  };
  const int n_workers = std::max(1, std::min<int>(threads, static_cast<int>(grid.size())));
  std::vector<std::thread> pool;
  for (int t = 1; t < n_workers; ++t) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();
  return rows;
}

double sweep_exponent(const std::vector<SweepRow>& rows) {
  std::vector<double> eps, its;
  for (const auto& r : rows) {
    if (r.flagged) continue;
    eps.push_back(r.eps1);
    its.push_back(static_cast<double>(std::max<long>(r.iterations, 1)));
  }
  if (eps.size() < 2) throw Error("sweep_exponent: fewer than two converged runs");
  return fit_iteration_exponent(eps, its);
}

int threads_from_env() {
  if (const char* v = std::getenv("ARP_THREADS")) {
    try {
      const int n = std::stoi(v);
      if (n >= 1) return n;
    } catch (const std::exception&) {
    }
    throw Error(std::string("ARP_THREADS must be a positive integer, got '") + v + "'");
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

}  // namespace arp
