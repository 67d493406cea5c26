#include "arp/driver.hpp"

#include <chrono>
#include <cmath>

namespace arp {

std::string to_string(Termination t) {
  switch (t) {
    case Termination::Converged: return "converged";
    case Termination::Budget: return "budget";
    case Termination::SubsolverFailure: return "subsolver-failure";
    case Termination::NonFinite: return "non-finite";
  }
  return "unknown";
}

void SolverConfig::validate() const {
  if (p < 2) throw Error("SolverConfig: p must be at least 2");
  if (!(sigma0 > 0.0)) throw Error("SolverConfig: sigma0 must be positive");
  if (!(theta1 > 1.0) || !(theta2 > 1.0)) throw Error("SolverConfig: theta1 and theta2 must exceed 1");
  if (!(eps1 >= 0.0) || !(eps2 >= 0.0)) throw Error("SolverConfig: tolerances must be non-negative");
  if (max_iters < 0) throw Error("SolverConfig: max_iters must be non-negative");
  strategy.validate();
  subsolver.validate();
}

long RunTrace::iterations() const {
  long n = 0;
  for (const auto& r : rows) n += r.step_norm.has_value() ? 1 : 0;
  return n;
}

std::pair<double, std::optional<double>> second_order_measure(int p, const SymTensor& tensor,
                                                              const std::vector<SymTensor>& derivs,
                                                              const std::optional<Matrix>& exact_hessian) {
  const Matrix curvature = p >= 3 ? derivs.at(1).to_matrix() : tensor.to_matrix();
  const double chi = std::max(0.0, -lambda_min(curvature));
  std::optional<double> beta;
  if (exact_hessian) beta = std::max(0.0, -lambda_min(*exact_hessian));
  return {chi, beta};
}

double xi_from_history(const std::deque<double>& history, int p) {
  double xi = 0.0;
  for (double r : history) xi += std::pow(r, p + 1);
  return xi;
}

namespace {

OracleCounts difference(const OracleCounts& after, const OracleCounts& before) {
  OracleCounts d;
  for (std::size_t i = 0; i < d.calls.size(); ++i) d.calls[i] = after.calls[i] - before.calls[i];
  return d;
}

}  // namespace

Solver::Solver(std::shared_ptr<const Problem> problem, SolverConfig config)
    : problem_(std::move(problem)), counted_(problem_), config_(std::move(config)) {
  config_.validate();
  if (config_.p > problem_->max_order()) throw UnsupportedOrder("Solver: problem lacks derivatives of order p");
  if (config_.lipschitz) {
    lipschitz_ = *config_.lipschitz;
  } else {
    try {
      lipschitz_ = problem_->lipschitz(config_.p).value;
    } catch (const Error&) {
      lipschitz_ = std::numeric_limits<double>::infinity();
    }
  }
}

SolverState Solver::initial_state(const Vector& x0) const {
  if (x0.size() != problem_->dim()) throw DimensionError("Solver: starting point dimension mismatch");
  SolverState st;
  st.x = x0;
  st.sigma = config_.sigma0;
  // Steps before the first iterate count as unit length.
  st.history.assign(static_cast<std::size_t>(2 * config_.strategy.m - 1), 1.0);
  return st;
}

TraceRow Solver::step(SolverState& st, bool& done) {
  const auto start = std::chrono::steady_clock::now();
  const OracleCounts before = counted_.counts();
  const int p = config_.p;
  done = false;

  TraceRow row;
  row.k = st.k;
  row.sigma = st.sigma;
  row.xi = xi_from_history(st.history, p);

  std::vector<SymTensor> derivs;
  derivs.reserve(static_cast<std::size_t>(p - 1));
  for (int i = 1; i <= p - 1; ++i) derivs.push_back(counted_.derivative(st.x, i));
  const Vector g = derivs.front().to_vector();
  if (!g.allFinite()) throw NonFiniteError("non-finite gradient at iterate " + std::to_string(st.k));
  row.grad_norm = g.norm();
  st.min_grad = std::min(st.min_grad, row.grad_norm);
  row.min_grad_norm = st.min_grad;

  std::optional<SecantData> secant;
  if (st.prev_top && st.prev_grad && st.prev_step) {
    secant = SecantData{*st.prev_step, derivs.back() - *st.prev_top, g - *st.prev_grad};
  }
  const std::vector<double> recent(st.history.begin(), st.history.end());
  const int k_int = static_cast<int>(st.k % (static_cast<long>(config_.strategy.m) * 1000000L));
  TensorUpdate upd = tensor_p(k_int, st.tensor, secant, recent, counted_, st.x, p, config_.strategy);
  row.restart = upd.restart;
  row.branch = upd.branch;
  if (upd.fd) {
    row.h = upd.fd->h;
    row.h_floor_active = upd.fd->floor_active;
  }

  std::optional<Matrix> exact_hessian;
  if (config_.audit) exact_hessian = problem_->hessian(st.x);
  const auto [chi, beta] = second_order_measure(p, upd.tensor, derivs, exact_hessian);
  row.chi = chi;
  row.beta = beta;

  if (config_.audit) {
    if (upd.restart && std::isfinite(lipschitz_)) {
      row.condition1 = condition1_audit(upd.tensor, *problem_, st.x, k_int, recent, p, config_.strategy, lipschitz_);
    }
    if (upd.weight && st.tensor && st.prev_x && st.prev_step) {
      const SymTensor averaged = averaged_tensor(*problem_, *st.prev_x, *st.prev_step, p);
      row.secant = secant_progress(upd.tensor, *st.tensor, averaged, *upd.weight);
    }
    row.f_value = problem_->value(st.x);
  }

  if (row.grad_norm <= config_.eps1 && row.chi <= config_.eps2) {
    done = true;
    st.tensor = upd.tensor;
    row.oracle_calls = difference(counted_.counts(), before);
    row.wall_time = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    return row;
  }

  const ModelState model(st.x, derivs, upd.tensor, st.sigma);
  SubsolverResult sub = minimize_model(model, config_.theta1, config_.theta2, config_.subsolver);
  // Independent re-validation of the subsolver's certificate.
  const StepCertificate cert = check_step(model, sub.s, config_.theta1, config_.theta2);
  if (!cert.all_ok()) {
    sub.certificate = cert;
    throw BudgetExhausted("driver: re-validated certificate failed", sub);
  }
  row.certificate = cert;
  row.inner_iterations = sub.inner_iterations;
  row.used_exact_subsolver = sub.used_exact;
  const double r = sub.s.norm();
  row.step_norm = r;

  st.prev_top = derivs.back();
  st.prev_grad = g;
  st.prev_step = sub.s;
  st.prev_x = st.x;
  st.tensor = std::move(upd.tensor);
  st.x += sub.s;
  st.sigma += st.sigma * std::pow(r, p + 1);
  st.history.push_front(r);
  st.history.pop_back();
  ++st.k;

  row.oracle_calls = difference(counted_.counts(), before);
  row.wall_time = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  if (!st.x.allFinite() || !std::isfinite(st.sigma)) throw NonFiniteError("non-finite iterate after step " + std::to_string(row.k));
  return row;
}

RunTrace Solver::run(const Vector& x0) {
  RunTrace trace;
  trace.problem = problem_->name();
  trace.dim = problem_->dim();
  trace.config = config_;
  SolverState st = initial_state(x0);
  trace.termination = Termination::Budget;
  while (true) {
    if (st.k >= config_.max_iters) {
      trace.termination = Termination::Budget;
      break;
    }
    bool done = false;
    try {
      trace.rows.push_back(step(st, done));
    } catch (const BudgetExhausted& e) {
      trace.termination = Termination::SubsolverFailure;
      trace.message = e.what();
      break;
    } catch (const NonFiniteError& e) {
      trace.termination = Termination::NonFinite;
      trace.message = e.what();
      break;
    }
    if (done) {
      trace.termination = Termination::Converged;
      break;
    }
  }
  trace.oracle_totals = counted_.counts();
  trace.x_final = st.x;
  return trace;
}

RunTrace run(std::shared_ptr<const Problem> problem, const Vector& x0, const SolverConfig& config) {
  Solver solver(std::move(problem), config);
  return solver.run(x0);
}

}  // namespace arp
