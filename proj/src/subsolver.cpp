#include "arp/subsolver.hpp"

#include <Eigen/Eigenvalues>
#include <boost/math/tools/roots.hpp>

#include <cmath>
#include <cstdint>
#include <limits>

namespace arp {

void SubsolverConfig::validate() const {
  if (inner_budget < 1) throw Error("SubsolverConfig: inner budget must be at least 1");
  if (!(inner_tol_factor > 0.0 && inner_tol_factor < 1.0)) throw Error("SubsolverConfig: slack must lie in (0, 1)");
}

namespace {

// Root of a continuous f with f(lo) and f(hi) of opposite signs.
template <typename F>
double bracketed_root(F f, double lo, double hi, double f_lo, double f_hi) {
  std::uintmax_t max_iter = 200;
  const auto [a, b] = boost::math::tools::toms748_solve(f, lo, hi, f_lo, f_hi,
                                                        boost::math::tools::eps_tolerance<double>(52), max_iter);
  return 0.5 * (a + b);
}

}  // namespace

Vector exact_cubic_step(const Vector& g, const Matrix& b, double sigma) {
  const int n = static_cast<int>(g.size());
  if (b.rows() != n || b.cols() != n) throw DimensionError("exact_cubic_step: dimension mismatch");
  if (!(sigma > 0.0)) throw Error("exact_cubic_step: sigma must be positive");
  Eigen::SelfAdjointEigenSolver<Matrix> es(0.5 * (b + b.transpose()));
  const Vector& lam = es.eigenvalues();
  const Matrix& q = es.eigenvectors();
  const Vector gh = q.transpose() * g;
  const double lam_low = std::max(0.0, -lam(0));
  const double scale = std::max({1.0, lam.cwiseAbs().maxCoeff(), g.norm()});
  const double gap_tol = 1e-12 * scale;

  // ||s(λ)|| with s(λ) = -(B + λ I)^{-1} g, skipping directions listed as degenerate.
  auto step_norm = [&](double l, bool skip_degenerate) {
    double acc = 0.0;
    for (int i = 0; i < n; ++i) {
      const double d = lam(i) + l;
      if (skip_degenerate && lam(i) - lam(0) <= gap_tol) continue;
      acc += (gh(i) / d) * (gh(i) / d);
    }
    return std::sqrt(acc);
  };
  auto step_at = [&](double l, bool skip_degenerate) {
    Vector c = Vector::Zero(n);
    for (int i = 0; i < n; ++i) {
      if (skip_degenerate && lam(i) - lam(0) <= gap_tol) continue;
      c(i) = -gh(i) / (lam(i) + l);
    }
    return Vector(q * c);
  };

  if (g.norm() == 0.0 && lam(0) >= 0.0) return Vector::Zero(n);

  // Hard case: g has (numerically) no component along the leftmost eigenspace and the
  // remaining step at λ = -λ_1 is shorter than the regularization radius 2λ/σ.
  if (lam(0) < 0.0) {
    double lead = 0.0;
    for (int i = 0; i < n; ++i) {
      if (lam(i) - lam(0) <= gap_tol) lead = std::max(lead, std::abs(gh(i)));
    }
    const double radius = 2.0 * lam_low / sigma;
    if (lead <= 1e-14 * std::max(1.0, g.norm())) {
      const double rest = step_norm(lam_low, true);
      if (rest <= radius) {
        Vector s = step_at(lam_low, true);
        const double tau = std::sqrt(std::max(0.0, radius * radius - rest * rest));
        return s + tau * q.col(0);
      }
    }
  }

  // Secular equation φ(λ) = ||s(λ)|| - 2λ/σ, decreasing on (λ_low, ∞).
  auto phi = [&](double l) { return step_norm(l, false) - 2.0 * l / sigma; };
  double lo = lam_low;
  double f_lo = phi(lo);
  if (!std::isfinite(f_lo)) {
    double bump = 1e-15 * scale;
    do {
      lo = lam_low + bump;
      f_lo = phi(lo);
      bump *= 10.0;
    } while (!std::isfinite(f_lo));
  }
  if (f_lo <= 0.0) return step_at(lo, false);
  double hi = lo + std::max(1.0, 0.5 * sigma * g.norm());
  double f_hi = phi(hi);
  while (f_hi > 0.0) {
    hi = lo + 2.0 * (hi - lo);
    f_hi = phi(hi);
  }
  const double root = bracketed_root(phi, lo, hi, f_lo, f_hi);
  return step_at(root, false);
}

namespace {

double slack_theta(double theta, double factor) { return 1.0 + factor * (theta - 1.0); }

// Minimizes t -> m(s + t v) over t > 0 starting where the directional derivative is negative.
double exact_line_min(const ModelState& state, const Vector& s, const Vector& v) {
  auto dphi = [&](double t) { return model_grad(state, s + t * v).dot(v); };
  const double d0 = dphi(0.0);
  if (d0 >= 0.0) return 0.0;
  double hi = std::max(1e-8, 1e-3 * (1.0 + s.norm()));
  double d_hi = dphi(hi);
  int guard = 0;
  while (d_hi < 0.0 && guard++ < 200) {
    hi *= 2.0;
    d_hi = dphi(hi);
  }
  if (d_hi < 0.0) return hi;
  return bracketed_root(dphi, 0.0, hi, d0, d_hi);
}

}  // namespace

SubsolverResult inner_descent(const ModelState& state, double theta1, double theta2, const SubsolverConfig& cfg,
                              const Vector& start) {
  cfg.validate();
  const double t1 = slack_theta(theta1, cfg.inner_tol_factor);
  const double t2 = slack_theta(theta2, cfg.inner_tol_factor);
  const int n = state.dim();

  Vector s = start;
  double value = model_change(state, s);
  if (!(value <= 0.0) || !s.allFinite()) {
    s = Vector::Zero(n);
    value = 0.0;
  }

  SubsolverResult result;
  for (int it = 0; it <= cfg.inner_budget; ++it) {
    StepCertificate cert = check_step(state, s, t1, t2);
    result.s = s;
    result.certificate = cert;
    result.inner_iterations = it;
    if (cert.all_ok()) return result;
    if (it == cfg.inner_budget) break;

    const Vector grad = model_grad(state, s);
    const Matrix hess = model_hess(state, s);
    Eigen::SelfAdjointEigenSolver<Matrix> es(hess);
    const double lmin = es.eigenvalues()(0);
    const double hscale = std::max(1.0, es.eigenvalues().cwiseAbs().maxCoeff());

    Vector best = s;
    double best_value = value;

    // Shifted Newton step with Armijo backtracking.
    if (grad.norm() > 0.0) {
      const double shift = lmin > 1e-12 * hscale ? 0.0 : -lmin + 1e-8 * hscale;
      const Vector shifted_eigs = es.eigenvalues().array() + shift;
      Vector d = -es.eigenvectors() * ((es.eigenvectors().transpose() * grad).array() / shifted_eigs.array()).matrix();
      double slope = grad.dot(d);
      if (!(slope < 0.0) || !d.allFinite()) {
        d = -grad;
        slope = -grad.squaredNorm();
      }
      double t = 1.0;
      for (int k = 0; k < 60; ++k, t *= 0.5) {
        const Vector trial = s + t * d;
        const double v = model_change(state, trial);
        if (v <= value + 1e-4 * t * slope) {
          if (v < best_value) {
            best = trial;
            best_value = v;
          }
          break;
        }
      }
    }

    // Negative curvature: exact 1-D minimization along the leftmost eigenvector.
    if (lmin < 0.0) {
      Vector v = es.eigenvectors().col(0);
      if (grad.dot(v) > 0.0) v = -v;
      const double t = exact_line_min(state, s, v);
      if (t > 0.0) {
        const Vector trial = s + t * v;
        const double val = model_change(state, trial);
        if (val < best_value) {
          best = trial;
          best_value = val;
        }
      }
    }

    if (!(best_value < value)) break;  // no further progress possible in floating point
    s = best;
    value = best_value;
  }
  throw BudgetExhausted("inner_descent: certificate not reached within budget", result);
}

SubsolverResult inner_descent(const ModelState& state, double theta1, double theta2, const SubsolverConfig& cfg) {
  return inner_descent(state, theta1, theta2, cfg, Vector::Zero(state.dim()));
}

SubsolverResult minimize_model(const ModelState& state, double theta1, double theta2, const SubsolverConfig& cfg) {
  cfg.validate();
  if (!(theta1 > 1.0) || !(theta2 > 1.0)) throw Error("minimize_model: theta1 and theta2 must exceed 1");
  SubsolverResult result;
  if (state.order() == 2 && cfg.method == SubsolverMethod::ExactSecular) {
    const Vector s = exact_cubic_step(state.gradient(), state.tensor().to_matrix(), state.sigma());
    const StepCertificate strict = check_step(state, s, slack_theta(theta1, cfg.inner_tol_factor),
                                              slack_theta(theta2, cfg.inner_tol_factor));
    if (strict.all_ok()) {
      result.s = s;
      result.used_exact = true;
    } else {
      result = inner_descent(state, theta1, theta2, cfg, s);
    }
  } else {
    result = inner_descent(state, theta1, theta2, cfg);
  }
  result.certificate = check_step(state, result.s, theta1, theta2);
  if (!result.certificate.all_ok()) throw BudgetExhausted("minimize_model: certificate failed", result);
  return result;
}

}  // namespace arp
