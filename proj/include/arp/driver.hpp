#pragma once

#include "arp/problems.hpp"
#include "arp/subsolver.hpp"
#include "arp/tensor_update.hpp"

#include <cstdint>
#include <deque>
#include <limits>
#include <memory>
#include <optional>
#include <utility>
#include <string>
#include <vector>

namespace arp {

struct SolverConfig {
  int p = 2;
  StrategyConfig strategy;
  double sigma0 = 1.0;
  double theta1 = 2.0;
  double theta2 = 2.0;
  double eps1 = 1e-5;
  double eps2 = 1e-4;
  long max_iters = 100000;
  SubsolverConfig subsolver;
  /// Record Condition 1 audits, exact curvature and secant progress (extra oracle calls
  /// on the un-instrumented problem; never counted in the ledger).
  bool audit = true;
  /// Lipschitz constant used by the audit; taken from the problem when absent.
  std::optional<double> lipschitz;
  std::uint64_t seed = 0;

  void validate() const;
};

/// One row per visited iterate x_k. Rows of the terminal iterate carry no step.
struct TraceRow {
  long k = 0;
  double grad_norm = 0.0;
  double min_grad_norm = 0.0;  // min_{j <= k} ||g_j||
  double chi = 0.0;            // max(0, -λ_min(∇²f)) for p >= 3, max(0, -λ_min(B_k)) for p = 2
  std::optional<double> beta;  // max(0, -λ_min(∇²f(x_k))) from the exact Hessian
  double sigma = 0.0;
  double xi = 0.0;  // sum over the 2m-1 buffered step norms of ||s||^{p+1}
  bool restart = false;
  TensorBranch branch = TensorBranch::Exact;
  std::optional<double> h;
  bool h_floor_active = false;
  std::optional<Condition1Audit> condition1;
  std::optional<SecantProgress> secant;
  std::optional<double> f_value;  // diagnostic only
  // Step taken from x_k (absent on the terminal row).
  std::optional<double> step_norm;
  std::optional<StepCertificate> certificate;
  int inner_iterations = 0;
  bool used_exact_subsolver = false;
  OracleCounts oracle_calls;  // calls made by the algorithm while processing this row
  double wall_time = 0.0;
};

enum class Termination { Converged, Budget, SubsolverFailure, NonFinite };
std::string to_string(Termination t);

struct RunTrace {
  std::string problem;
  int dim = 0;
  SolverConfig config;
  std::vector<TraceRow> rows;
  Termination termination = Termination::Budget;
  std::string message;
  OracleCounts oracle_totals;  // as recorded by the instrumented problem wrapper
  Vector x_final;

  /// Number of steps taken.
  long iterations() const;
  bool converged() const { return termination == Termination::Converged; }
};

/// Mutable state of the outer loop.
struct SolverState {
  long k = 0;
  Vector x;
  double sigma = 1.0;
  std::optional<SymTensor> tensor;  // T_{k-1} between iterations
  std::deque<double> history;       // ||s_{k-1}||, ||s_{k-2}||, ... (2m - 1 entries)
  std::optional<SymTensor> prev_top;  // ∇^{p-1} f(x_{k-1})
  std::optional<Vector> prev_grad;
  std::optional<Vector> prev_step;
  std::optional<Vector> prev_x;
  double min_grad = std::numeric_limits<double>::infinity();
};

/// χ_k and, when `exact_hessian` is given, β_k.
std::pair<double, std::optional<double>> second_order_measure(int p, const SymTensor& tensor,
                                                              const std::vector<SymTensor>& derivs,
                                                              const std::optional<Matrix>& exact_hessian);

/// sum_{i=1}^{2m-1} ||s_{k-i}||^{p+1}.
double xi_from_history(const std::deque<double>& history, int p);

/// Outer loop: refresh derivatives, dispatch the tensor approximation, test for an
/// (eps1, eps2) point, subsolve, accept the step unconditionally and update sigma.
/// Never branches on objective values. Errors are reported through `termination`.
class Solver {
 public:
  Solver(std::shared_ptr<const Problem> problem, SolverConfig config);

  SolverState initial_state(const Vector& x0) const;
  /// Processes iterate state.k. Returns the row; `done` reports convergence.
  TraceRow step(SolverState& state, bool& done);
  RunTrace run(const Vector& x0);

  const CountingProblem& counted() const { return counted_; }

 private:
  std::shared_ptr<const Problem> problem_;
  CountingProblem counted_;
  SolverConfig config_;
  double lipschitz_ = 0.0;
};

RunTrace run(std::shared_ptr<const Problem> problem, const Vector& x0, const SolverConfig& config);

}  // namespace arp
