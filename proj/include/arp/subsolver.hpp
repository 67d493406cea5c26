#pragma once

#include "arp/taylor_model.hpp"

#include <string>

namespace arp {

enum class SubsolverMethod {
  ExactSecular,  // closed-form cubic step (p = 2), descent polish if the certificate fails
  InnerDescent,  // generic modified-Newton descent on the model
};

struct SubsolverConfig {
  int inner_budget = 500;
  /// Inner loop stops once the certificate holds with theta replaced by 1 + slack (theta - 1).
  double inner_tol_factor = 0.9;
  SubsolverMethod method = SubsolverMethod::ExactSecular;

  void validate() const;
};

struct SubsolverResult {
  Vector s;
  StepCertificate certificate;
  int inner_iterations = 0;
  bool used_exact = false;
};

/// Raised when the inner loop runs out of budget; carries the best point found.
class BudgetExhausted : public Error {
 public:
  BudgetExhausted(const std::string& what, SubsolverResult best) : Error(what), best_(std::move(best)) {}
  const SubsolverResult& best() const { return best_; }

 private:
  SubsolverResult best_;
};

/// Global minimizer of g^T s + 0.5 s^T B s + (sigma / 6) ||s||^3, characterized by
/// (B + (sigma / 2) ||s|| I) s = -g with B + (sigma / 2) ||s|| I positive semidefinite.
/// In the hard case the leading eigenvector is added with a positive coefficient.
Vector exact_cubic_step(const Vector& g, const Matrix& b, double sigma);

/// Monotone descent on m from `start` until check_step passes with the slack thetas.
/// Throws BudgetExhausted.
SubsolverResult inner_descent(const ModelState& state, double theta1, double theta2, const SubsolverConfig& cfg,
                              const Vector& start);
SubsolverResult inner_descent(const ModelState& state, double theta1, double theta2, const SubsolverConfig& cfg);

/// Returns a step whose certificate (at the caller's theta1, theta2) is all-true. Throws BudgetExhausted.
SubsolverResult minimize_model(const ModelState& state, double theta1, double theta2, const SubsolverConfig& cfg = {});

}  // namespace arp
