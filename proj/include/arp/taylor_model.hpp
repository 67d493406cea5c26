#pragma once

#include "arp/tensor.hpp"

#include <optional>
#include <vector>

namespace arp {

/// Frozen per-iteration data defining the regularized model
///   m(s) = f(x) + sum_{i=1}^{p-1} ∇^i f(x)[s]^i / i! + T[s]^p / p! + sigma ||s||^{p+1} / (p+1)!.
/// f(x) is carried for diagnostics only.
class ModelState {
 public:
  /// `derivs` holds the exact derivatives of orders 1..p-1; `tensor` is the order-p approximation.
  ModelState(Vector x, std::vector<SymTensor> derivs, SymTensor tensor, double sigma,
             std::optional<double> f_x = std::nullopt);

  int order() const { return static_cast<int>(derivs_.size()) + 1; }
  int dim() const { return static_cast<int>(x_.size()); }
  const Vector& x() const { return x_; }
  const std::vector<SymTensor>& derivs() const { return derivs_; }
  const Vector& gradient() const { return gradient_; }
  const SymTensor& tensor() const { return tensor_; }
  double sigma() const { return sigma_; }
  std::optional<double> f_x() const { return f_x_; }

 private:
  Vector x_;
  std::vector<SymTensor> derivs_;
  SymTensor tensor_;
  double sigma_;
  std::optional<double> f_x_;
  Vector gradient_;
};

/// The approximate Taylor expansion minus its constant term f(x).
double taylor_change(const ModelState& state, const Vector& s);
/// m(s) - m(0). Never touches f(x).
double model_change(const ModelState& state, const Vector& s);
/// m(s); uses f(x) when known, otherwise treats it as zero.
double model_value(const ModelState& state, const Vector& s);

Vector taylor_grad(const ModelState& state, const Vector& s);
Matrix taylor_hess(const ModelState& state, const Vector& s);
Vector model_grad(const ModelState& state, const Vector& s);
Matrix model_hess(const ModelState& state, const Vector& s);

/// sigma ||s||^{p+1} / (p+1)!
double regularizer(const ModelState& state, const Vector& s);

struct StepCertificate {
  Vector s;
  double model_decrease = 0.0;  // m(s) - m(0)
  double grad_norm = 0.0;       // ||∇_s T̄(x, s)||
  double lam_min_model = 0.0;   // λ_min(∇²_s T̄(x, s))
  double theta1_rhs = 0.0;      // theta1 sigma ||s||^p / p!
  double theta2_rhs = 0.0;      // theta2 sigma ||s||^{p-1} / (p-1)!
  bool decrease_ok = false;
  bool theta1_ok = false;
  bool theta2_ok = false;

  bool all_ok() const { return decrease_ok && theta1_ok && theta2_ok; }
};

/// Evaluates the three step-acceptance conditions. Requires theta1, theta2 > 1.
StepCertificate check_step(const ModelState& state, const Vector& s, double theta1, double theta2);

double factorial(int k);

}  // namespace arp
