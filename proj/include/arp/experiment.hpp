#pragma once

#include "arp/driver.hpp"

#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace arp {

struct ExperimentSpec {
  std::string problem = "rosenbrock";
  int dim = 2;
  SolverConfig solver;
  std::optional<Vector> x0;  // problem default when absent
  double x0_jitter = 0.0;    // standard deviation of a seeded Gaussian perturbation of x0
};

/// Exit status for a termination reason: 0 converged, 2 budget, 3 subsolver failure, 4 non-finite.
int exit_code(Termination t);

Vector starting_point(const ExperimentSpec& spec, const Problem& problem);
RunTrace run_experiment(const ExperimentSpec& spec);

/// Writes trace.jsonl and summary.csv into `dir`, creating it if needed.
void write_outputs(const RunTrace& trace, const std::filesystem::path& dir, bool include_timing = false);

/// Oracle calls implied by the restart/branch flags of a trace.
OracleCounts ledger_from_flags(const RunTrace& trace);

struct SweepRow {
  double eps1 = 0.0;
  long iterations = 0;
  OracleCounts calls;
  Termination termination = Termination::Budget;
  bool flagged = false;  // the run did not converge
  std::string message;
  RunTrace trace;
};

/// Runs the spec once per tolerance on `threads` workers; rows follow the grid order.
/// The grid must hold at least four strictly decreasing positive values.
std::vector<SweepRow> sweep_epsilon(const ExperimentSpec& spec, std::span<const double> eps1_grid, int threads);

/// Exponent of iterations against 1/eps1 fitted on the converged rows.
double sweep_exponent(const std::vector<SweepRow>& rows);

/// Worker count from ARP_THREADS, else the hardware concurrency (at least 1).
int threads_from_env();

}  // namespace arp
