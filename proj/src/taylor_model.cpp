#include "arp/taylor_model.hpp"

#include <cmath>

namespace arp {

double factorial(int k) {
  double r = 1.0;
  for (int i = 2; i <= k; ++i) r *= i;
  return r;
}

ModelState::ModelState(Vector x, std::vector<SymTensor> derivs, SymTensor tensor, double sigma,
                       std::optional<double> f_x)
    : x_(std::move(x)), derivs_(std::move(derivs)), tensor_(std::move(tensor)), sigma_(sigma), f_x_(f_x) {
  const int n = static_cast<int>(x_.size());
  if (derivs_.empty()) throw Error("ModelState: need at least the gradient (order p >= 2)");
  for (std::size_t i = 0; i < derivs_.size(); ++i) {
    if (derivs_[i].order() != static_cast<int>(i) + 1 || derivs_[i].dim() != n)
      throw DimensionError("ModelState: derivative list must hold orders 1..p-1 of matching dimension");
  }
  if (tensor_.order() != order() || tensor_.dim() != n)
    throw DimensionError("ModelState: approximate tensor must have order p and matching dimension");
  if (!(sigma_ > 0.0)) throw Error("ModelState: sigma must be positive");
  gradient_ = derivs_.front().to_vector();
}

namespace {

void require_step_dim(const ModelState& state, const Vector& s) {
  if (s.size() != state.dim()) throw DimensionError("model: step dimension mismatch");
}

// Order-q tensor contracted q - j times, as a vector (j = 1) or matrix (j = 2).
Vector partial_vector(const SymTensor& t, const Vector& s) {
  return t.order() == 1 ? t.to_vector() : contract(t, s, t.order() - 1).to_vector();
}

Matrix partial_matrix(const SymTensor& t, const Vector& s) {
  return t.order() == 2 ? t.to_matrix() : contract(t, s, t.order() - 2).to_matrix();
}

}  // namespace

double regularizer(const ModelState& state, const Vector& s) {
  const int p = state.order();
  return state.sigma() * std::pow(s.norm(), p + 1) / factorial(p + 1);
}

double taylor_change(const ModelState& state, const Vector& s) {
  require_step_dim(state, s);
  double v = 0.0;
  for (const auto& d : state.derivs()) v += full_contract(d, s) / factorial(d.order());
  v += full_contract(state.tensor(), s) / factorial(state.order());
  return v;
}

double model_change(const ModelState& state, const Vector& s) { return taylor_change(state, s) + regularizer(state, s); }

double model_value(const ModelState& state, const Vector& s) {
  return state.f_x().value_or(0.0) + model_change(state, s);
}

Vector taylor_grad(const ModelState& state, const Vector& s) {
  require_step_dim(state, s);
  Vector g = Vector::Zero(state.dim());
  for (const auto& d : state.derivs()) g += partial_vector(d, s) / factorial(d.order() - 1);
  g += partial_vector(state.tensor(), s) / factorial(state.order() - 1);
  return g;
}

Matrix taylor_hess(const ModelState& state, const Vector& s) {
  require_step_dim(state, s);
  Matrix h = Matrix::Zero(state.dim(), state.dim());
  for (const auto& d : state.derivs()) {
    if (d.order() >= 2) h += partial_matrix(d, s) / factorial(d.order() - 2);
  }
  h += partial_matrix(state.tensor(), s) / factorial(state.order() - 2);
  return h;
}

Vector model_grad(const ModelState& state, const Vector& s) {
  const int p = state.order();
  const double r = s.norm();
  return taylor_grad(state, s) + (state.sigma() / factorial(p)) * std::pow(r, p - 1) * s;
}

Matrix model_hess(const ModelState& state, const Vector& s) {
  const int p = state.order();
  const int n = state.dim();
  const double r = s.norm();
  Matrix h = taylor_hess(state, s);
  const double c = state.sigma() / factorial(p);
  h += c * std::pow(r, p - 1) * Matrix::Identity(n, n);
  // (p-1) ||s||^{p-3} s s^T, which vanishes continuously at s = 0 for p >= 2.
  if (r > 0.0) h += c * (p - 1) * std::pow(r, p - 3) * (s * s.transpose());
  return h;
}

StepCertificate check_step(const ModelState& state, const Vector& s, double theta1, double theta2) {
  if (!(theta1 > 1.0) || !(theta2 > 1.0)) throw Error("check_step: theta1 and theta2 must exceed 1");
  const int p = state.order();
  const double r = s.norm();
  StepCertificate c;
  c.s = s;
  c.model_decrease = model_change(state, s);
  c.grad_norm = taylor_grad(state, s).norm();
  c.lam_min_model = lambda_min(taylor_hess(state, s));
  c.theta1_rhs = theta1 * state.sigma() * std::pow(r, p) / factorial(p);
  c.theta2_rhs = theta2 * state.sigma() * std::pow(r, p - 1) / factorial(p - 1);
  c.decrease_ok = c.model_decrease <= 0.0;
  c.theta1_ok = c.grad_norm <= c.theta1_rhs;
  c.theta2_ok = std::max(0.0, -c.lam_min_model) <= c.theta2_rhs;
  return c;
}

}  // namespace arp
