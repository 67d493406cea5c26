#include "arp/driver.hpp"
#include "arp/experiment.hpp"
#include "helpers.hpp"

#include <doctest.h>

using namespace arp;

namespace {

// Delegates derivatives and refuses objective values.
class NoValueProblem : public Problem {
 public:
  explicit NoValueProblem(std::shared_ptr<const Problem> inner) : inner_(std::move(inner)) {}
  std::string name() const override { return inner_->name(); }
  int dim() const override { return inner_->dim(); }
  int max_order() const override { return inner_->max_order(); }
  double value(const Vector&) const override { throw Error("objective value requested"); }
  SymTensor derivative(const Vector& x, int order) const override { return inner_->derivative(x, order); }
  LipschitzInfo lipschitz(int p) const override { return inner_->lipschitz(p); }
  bool bounded_below() const override { return inner_->bounded_below(); }
  Vector default_start() const override { return inner_->default_start(); }

 private:
  std::shared_ptr<const Problem> inner_;
};

SolverConfig config(StrategyKind kind, int m, int p = 2) {
  SolverConfig c;
  c.p = p;
  c.strategy.kind = kind;
  c.strategy.m = m;
  c.sigma0 = 100.0;
  c.max_iters = 5000;
  return c;
}

}  // namespace

TEST_SUITE("driver") {

TEST_CASE("sigma recurrence, certificates, cadence and xi") {
  for (auto kind : {StrategyKind::Lazy, StrategyKind::FD, StrategyKind::PsbLazy, StrategyKind::PsbFd, StrategyKind::DfpFd}) {
    auto prob = make_problem("rosenbrock", 2);
    const SolverConfig cfg = config(kind, 3);
    const RunTrace t = run(prob, prob->default_start(), cfg);
    CAPTURE(to_string(kind));
    REQUIRE(t.converged());
    std::vector<double> steps;
    for (std::size_t i = 0; i < t.rows.size(); ++i) {
      const TraceRow& r = t.rows[i];
      CHECK(r.k == static_cast<long>(i));
      CHECK(r.restart == (r.k % 3 == 0));
      // xi from the independently rebuilt step history.
      double xi = 0.0;
      for (int j = 1; j <= 5; ++j) {
        const long idx = static_cast<long>(steps.size()) - j;
        const double norm = idx >= 0 ? steps[static_cast<std::size_t>(idx)] : 1.0;
        xi += std::pow(norm, 3);
      }
      CHECK(r.xi == doctest::Approx(xi).epsilon(1e-14));
      if (i + 1 < t.rows.size()) {
        REQUIRE(r.step_norm);
        REQUIRE(r.certificate);
        CHECK(r.certificate->all_ok());
        const double next = t.rows[i + 1].sigma;
        CHECK(next >= r.sigma);
        CHECK(next / r.sigma == doctest::Approx(1.0 + std::pow(*r.step_norm, 3)).epsilon(1e-14));
        steps.push_back(*r.step_norm);
      } else {
        CHECK_FALSE(r.step_norm);
        CHECK(r.grad_norm <= cfg.eps1);
        CHECK(r.chi <= cfg.eps2);
      }
    }
  }
}

TEST_CASE("iterates never depend on objective values") {
  for (auto kind : {StrategyKind::Lazy, StrategyKind::PsbFd, StrategyKind::DfpFd}) {
    auto prob = make_problem("quartic", 4);
    SolverConfig cfg = config(kind, 2);
    cfg.audit = false;
    const RunTrace plain = run(prob, prob->default_start(), cfg);
    const RunTrace blind = run(std::make_shared<NoValueProblem>(prob), prob->default_start(), cfg);
    REQUIRE(blind.converged());
    CHECK(blind.oracle_totals.order(0) == 0);
    CHECK(plain.x_final == blind.x_final);
    CHECK(plain.rows.size() == blind.rows.size());
  }
}

TEST_CASE("starting at the minimizer of a convex quadratic stops at k = 0") {
  auto quad = std::make_shared<QuadraticProblem>(4);
  const RunTrace t = run(quad, quad->minimizer(), config(StrategyKind::Lazy, 1));
  CHECK(t.converged());
  CHECK(t.rows.size() == 1);
  CHECK(t.iterations() == 0);
}

TEST_CASE("zero budget gives an empty trace") {
  auto prob = make_problem("rosenbrock", 2);
  SolverConfig cfg = config(StrategyKind::Lazy, 1);
  cfg.max_iters = 0;
  const RunTrace t = run(prob, prob->default_start(), cfg);
  CHECK(t.rows.empty());
  CHECK(t.termination == Termination::Budget);
  CHECK(exit_code(t.termination) == 2);
}

TEST_CASE("sigma recurrence examples") {
  auto prob = make_problem("quartic", 2);
  SolverConfig cfg = config(StrategyKind::Lazy, 1);
  cfg.sigma0 = 1.0;
  Solver solver(prob, cfg);
  SolverState st = solver.initial_state(prob->default_start());
  CHECK(st.history.size() == 1);
  bool done = false;
  const TraceRow r = solver.step(st, done);
  REQUIRE(r.step_norm);
  CHECK(st.sigma == doctest::Approx(1.0 * (1.0 + std::pow(*r.step_norm, 3))).epsilon(1e-15));
  CHECK(st.history.front() == *r.step_norm);
}

TEST_CASE("second-order measure") {
  Matrix b(2, 2);
  b << -2, 0, 0, 1;
  const auto [chi, beta] = second_order_measure(2, SymTensor::from_matrix(b), {SymTensor::zeros(1, 2)}, std::nullopt);
  CHECK(chi == doctest::Approx(2.0));
  CHECK_FALSE(beta);
  const auto [chi_i, beta_i] =
      second_order_measure(2, SymTensor::from_matrix(Matrix::Identity(2, 2)), {SymTensor::zeros(1, 2)}, b);
  CHECK(chi_i == 0.0);
  CHECK(*beta_i == doctest::Approx(2.0));
  // p = 3 reads the exact Hessian among the refreshed derivatives.
  const auto [chi3, beta3] =
      second_order_measure(3, SymTensor::zeros(3, 2), {SymTensor::zeros(1, 2), SymTensor::from_matrix(b)}, b);
  CHECK(chi3 == *beta3);
}

TEST_CASE("oracle ledger recomputed from trace flags matches the instrumented counts") {
  for (int p = 2; p <= 3; ++p) {
    for (auto kind : {StrategyKind::Lazy, StrategyKind::FD, StrategyKind::PsbLazy, StrategyKind::PsbFd, StrategyKind::DfpFd}) {
      auto prob = make_problem("quartic", 3);
      const RunTrace t = run(prob, prob->default_start(), config(kind, 4, p));
      CHECK(ledger_from_flags(t) == t.oracle_totals);
      OracleCounts summed;
      for (const auto& r : t.rows) {
        for (std::size_t i = 0; i < summed.calls.size(); ++i) summed.calls[i] += r.oracle_calls.calls[i];
      }
      CHECK(summed == t.oracle_totals);
    }
  }
}

TEST_CASE("hand-counted ledger for a ten-iteration FD run") {
  // n = 2, p = 2, m = 5, ten rows: every row refreshes the gradient once (10 calls);
  // the restarts at k = 0 and k = 5 add n + 1 = 3 gradient calls each. No Hessians.
  auto prob = make_problem("rosenbrock", 2);
  SolverConfig cfg = config(StrategyKind::FD, 5);
  cfg.max_iters = 10;
  const RunTrace t = run(prob, prob->default_start(), cfg);
  REQUIRE(t.rows.size() == 10);
  CHECK(t.oracle_totals.order(0) == 0);
  CHECK(t.oracle_totals.order(1) == 16);
  CHECK(t.oracle_totals.order(2) == 0);
}

TEST_CASE("lazy m = 1 makes one exact tensor call per row") {
  auto prob = make_problem("rosenbrock", 2);
  const RunTrace t = run(prob, prob->default_start(), config(StrategyKind::Lazy, 1));
  REQUIRE(t.converged());
  CHECK(t.oracle_totals.order(2) == t.iterations() + 1);
}

TEST_CASE("subsolver failure ends the run with a partial trace") {
  auto prob = make_problem("rosenbrock", 2);
  SolverConfig cfg = config(StrategyKind::Lazy, 1);
  cfg.subsolver.method = SubsolverMethod::InnerDescent;
  cfg.subsolver.inner_budget = 1;
  cfg.theta1 = 1.0001;
  cfg.theta2 = 1.0001;
  const RunTrace t = run(prob, prob->default_start(), cfg);
  CHECK(t.termination == Termination::SubsolverFailure);
  CHECK_FALSE(t.message.empty());
}

TEST_CASE("configuration validation") {
  SolverConfig c;
  c.p = 1;
  CHECK_THROWS_AS(c.validate(), Error);
  c = SolverConfig{};
  c.theta1 = 1.0;
  CHECK_THROWS_AS(c.validate(), Error);
  c = SolverConfig{};
  c.sigma0 = 0.0;
  CHECK_THROWS_AS(c.validate(), Error);
  auto prob = make_problem("trig", 2);
  c = SolverConfig{};
  CHECK_THROWS_AS(Solver(prob, c).initial_state(Vector::Zero(3)), DimensionError);
}

}  // TEST_SUITE
