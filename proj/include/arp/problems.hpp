#pragma once

#include "arp/tensor.hpp"

#include <cstdint>
#include <limits>
#include <memory>
#include <string>
#include <utility>
#include <vector>

namespace arp {

/// Declared Lipschitz constant of the order-p derivative (in the tensor 2-norm).
/// `global` is false when the constant only holds on the box |x_i| <= box_half_width.
struct LipschitzInfo {
  double value = 0.0;
  bool global = true;
  double box_half_width = std::numeric_limits<double>::infinity();
  std::string derivation;
};

/// Objective with exact analytic derivatives. Implementations are stateless.
class Problem {
 public:
  virtual ~Problem() = default;

  virtual std::string name() const = 0;
  virtual int dim() const = 0;
  /// Highest derivative order implemented.
  virtual int max_order() const = 0;
  virtual double value(const Vector& x) const = 0;
  /// Order-`order` derivative tensor at x; throws UnsupportedOrder outside 1..max_order().
  virtual SymTensor derivative(const Vector& x, int order) const = 0;
  virtual LipschitzInfo lipschitz(int p) const = 0;
  /// Whether f is bounded below on R^n.
  virtual bool bounded_below() const = 0;
  /// Half width of the box on which experiments are meant to stay; infinity when unrestricted.
  virtual double box_half_width() const { return std::numeric_limits<double>::infinity(); }
  virtual Vector default_start() const = 0;

  Vector gradient(const Vector& x) const { return derivative(x, 1).to_vector(); }
  Matrix hessian(const Vector& x) const { return derivative(x, 2).to_matrix(); }
};

/// Sparse polynomial objective: a sum of monomials c * prod_v x_v^e_v.
/// Derivatives of every order are exact.
class PolynomialProblem : public Problem {
 public:
  struct Monomial {
    double coefficient;
    std::vector<std::pair<int, int>> powers;  // (variable, exponent > 0)
  };

  PolynomialProblem(std::string name, int dim, std::vector<Monomial> monomials, Vector start);

  std::string name() const override { return name_; }
  int dim() const override { return dim_; }
  int max_order() const override { return 8; }
  double value(const Vector& x) const override;
  SymTensor derivative(const Vector& x, int order) const override;
  /// Defaults to box_lipschitz_bound on the declared box; subclasses override with sharper constants.
  LipschitzInfo lipschitz(int p) const override;
  bool bounded_below() const override { return bounded_below_; }
  double box_half_width() const override { return box_; }
  Vector default_start() const override { return start_; }

  /// Polynomial degree.
  int degree() const;
  /// Frobenius norm of the order-(p+1) derivative of the coefficient-wise absolute polynomial
  /// evaluated at (B, ..., B); bounds ||∇^{p+1} f|| on the box and hence L_p there.
  double box_lipschitz_bound(int p, double box) const;

  void set_box(double box) { box_ = box; }
  void set_bounded_below(bool b) { bounded_below_ = b; }

 private:
  std::string name_;
  int dim_;
  std::vector<Monomial> monomials_;
  Vector start_;
  double box_ = std::numeric_limits<double>::infinity();
  bool bounded_below_ = true;
};

/// 0.5 x^T A x - b^T x with a fixed tridiagonal SPD A = tridiag(-1, 4, -1) and b = 1.
class QuadraticProblem : public PolynomialProblem {
 public:
  explicit QuadraticProblem(int dim);
  LipschitzInfo lipschitz(int p) const override;
  const Matrix& a() const { return a_; }
  const Vector& b() const { return b_; }
  Vector minimizer() const;

 private:
  Matrix a_;
  Vector b_;
};

/// sum_j (x_j^2 - 1)^2 + 0.1 sum_j x_j. Nonconvex, separable.
class QuarticProblem : public PolynomialProblem {
 public:
  explicit QuarticProblem(int dim, double box = 2.0);
  LipschitzInfo lipschitz(int p) const override;
};

/// Chained Rosenbrock sum_i 100 (x_{i+1} - x_i^2)^2 + (1 - x_i)^2.
class RosenbrockProblem : public PolynomialProblem {
 public:
  explicit RosenbrockProblem(int dim, double box = 2.0);
  LipschitzInfo lipschitz(int p) const override;
};

/// sum_j cos(x_j) + 0.05 ||x||^2. Every derivative of order >= 3 is diagonal with entries bounded by 1.
class TrigProblem : public Problem {
 public:
  explicit TrigProblem(int dim);

  std::string name() const override { return "trig"; }
  int dim() const override { return dim_; }
  int max_order() const override { return 8; }
  double value(const Vector& x) const override;
  SymTensor derivative(const Vector& x, int order) const override;
  LipschitzInfo lipschitz(int p) const override;
  bool bounded_below() const override { return true; }
  Vector default_start() const override;

 private:
  int dim_;
};

/// Names accepted by make_problem.
std::vector<std::string> problem_names();
/// Throws Error for an unknown name or a dimension the problem does not support.
std::shared_ptr<const Problem> make_problem(const std::string& name, int dim);

/// Tally of oracle calls, by derivative order (index 0 counts value calls).
struct OracleCounts {
  std::vector<std::int64_t> calls = std::vector<std::int64_t>(9, 0);

  std::int64_t order(int i) const { return calls[static_cast<std::size_t>(i)]; }
  bool operator==(const OracleCounts&) const = default;
};

/// Instrumented wrapper counting every call made through it. Not thread-safe;
/// each run owns its own instance.
class CountingProblem : public Problem {
 public:
  explicit CountingProblem(std::shared_ptr<const Problem> inner) : inner_(std::move(inner)) {}

  std::string name() const override { return inner_->name(); }
  int dim() const override { return inner_->dim(); }
  int max_order() const override { return inner_->max_order(); }
  double value(const Vector& x) const override;
  SymTensor derivative(const Vector& x, int order) const override;
  LipschitzInfo lipschitz(int p) const override { return inner_->lipschitz(p); }
  bool bounded_below() const override { return inner_->bounded_below(); }
  double box_half_width() const override { return inner_->box_half_width(); }
  Vector default_start() const override { return inner_->default_start(); }

  const OracleCounts& counts() const { return counts_; }
  const Problem& inner() const { return *inner_; }

 private:
  std::shared_ptr<const Problem> inner_;
  mutable OracleCounts counts_;
};

/// max_j || [∇^{i-1} f(x + h e_j) - ∇^{i-1} f(x)] / h - ∇^i f(x)[e_j] ||_F.
/// Requires i >= 2 and h > 0.
double fd_check(const Problem& problem, const Vector& x, int i, double h);

}  // namespace arp
