#include "arp/tensor_update.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>

namespace arp {

std::string to_string(StrategyKind kind) {
  switch (kind) {
    case StrategyKind::Lazy: return "lazy";
    case StrategyKind::FD: return "fd";
    case StrategyKind::PsbLazy: return "psb-lazy";
    case StrategyKind::PsbFd: return "psb-fd";
    case StrategyKind::DfpFd: return "dfp-fd";
  }
  return "unknown";
}

StrategyKind parse_strategy(const std::string& name) {
  for (auto k : {StrategyKind::Lazy, StrategyKind::FD, StrategyKind::PsbLazy, StrategyKind::PsbFd, StrategyKind::DfpFd}) {
    if (to_string(k) == name) return k;
  }
  throw Error("unknown strategy '" + name + "'");
}

std::string to_string(TensorBranch branch) {
  switch (branch) {
    case TensorBranch::Exact: return "exact";
    case TensorBranch::FiniteDifference: return "fd";
    case TensorBranch::KeepConstant: return "keep";
    case TensorBranch::Psb: return "psb";
    case TensorBranch::Dfp: return "dfp";
    case TensorBranch::DfpGuardFallback: return "dfp-guard-keep";
    case TensorBranch::DegenerateFallback: return "degenerate-keep";
  }
  return "unknown";
}

void StrategyConfig::validate() const {
  if (m < 1) throw Error("StrategyConfig: m must be at least 1");
  if (!(dfp_mu > 0.0) || !(dfp_L > 0.0) || !(dfp_sigma_bar > 0.0))
    throw Error("StrategyConfig: DFP parameters must be positive");
  if (dfp_mu > dfp_L) throw Error("StrategyConfig: DFP guard requires mu <= L");
  if (!(h_floor > 0.0)) throw Error("StrategyConfig: h_floor must be positive");
}

bool StrategyConfig::fd_restart() const {
  return kind == StrategyKind::FD || kind == StrategyKind::PsbFd || kind == StrategyKind::DfpFd;
}

bool StrategyConfig::secant() const {
  return kind == StrategyKind::PsbLazy || kind == StrategyKind::PsbFd || kind == StrategyKind::DfpFd;
}

double StrategyConfig::kappa_c(int p) const {
  if (kind != StrategyKind::DfpFd) return 1.0;
  return std::pow(dfp_kappa_max(dfp_mu, dfp_L, dfp_sigma_bar), p);
}

// ---------------------------------------------------------------------------
// Finite differences

FdStepsize compute_h(std::span<const double> recent, int m, int n, double h_floor) {
  if (m < 1 || n < 1) throw Error("compute_h: m and n must be positive");
  if (static_cast<int>(recent.size()) < m) throw Error("compute_h: need at least m recent step norms");
  double sum = 0.0;
  for (int i = 0; i < m; ++i) sum += recent[static_cast<std::size_t>(i)];
  FdStepsize out;
  out.unfloored = std::min(sum, 1.0) / std::sqrt(static_cast<double>(n));
  out.floor_active = out.unfloored < h_floor;
  out.h = out.floor_active ? h_floor : out.unfloored;
  return out;
}

SymTensor fd_restart(const Problem& problem, const Vector& x, double h, int p) {
  if (!(h > 0.0)) throw Error("fd_restart: h must be positive");
  if (p < 2) throw UnsupportedOrder("fd_restart: order must be at least 2");
  const int n = problem.dim();
  const SymTensor base = problem.derivative(x, p - 1);
  DenseTensor a(p, n);
  for (int i = 0; i < n; ++i) {
    const SymTensor shifted = problem.derivative(x + h * Vector::Unit(n, i), p - 1);
    const auto hi = shifted.entries();
    const auto lo = base.entries();
    for (std::size_t lin = 0; lin < hi.size(); ++lin) {
      const double d = (hi[lin] - lo[lin]) / h;
      if (!std::isfinite(d)) throw NonFiniteError("fd_restart: non-finite derivative difference");
      a[lin * static_cast<std::size_t>(n) + static_cast<std::size_t>(i)] = d;
    }
  }
  return sym_project(a);
}

// ---------------------------------------------------------------------------
// High-order secant update

namespace {

SymTensor secant_residual(const SymTensor& t, const Vector& s, const SymTensor& y) {
  if (t.order() == 1) throw DimensionError("secant residual needs order >= 2");
  return y - contract(t, s, 1);
}

}  // namespace

SymTensor hosu_update(const SymTensor& t_prev, const Vector& s, const SymTensor& y, const WeightMatrix& w) {
  const int p = t_prev.order();
  const int n = t_prev.dim();
  if (p < 2) throw UnsupportedOrder("hosu_update: order must be at least 2");
  if (s.size() != n || y.dim() != n || y.order() != p - 1 || w.dim() != n)
    throw DimensionError("hosu_update: dimension mismatch");
  if (s.norm() < 1e-14) throw DegenerateStep("hosu_update: step norm below 1e-14");

  // Work in an orthonormal frame whose first axis is s. There the secant equation fixes every
  // entry carrying the index 0, and stationarity of the weighted norm fixes the rest:
  // with A = W^{-2} in the rotated frame and c = -A_{f0} / A_{00}, the free block equals
  // -F[N]^p, where F holds the fixed entries and N sends e_0 to c and keeps the other axes.
  const double sn = s.norm();
  Matrix q = Matrix::Identity(n, n);
  Vector v = s / sn;
  v(0) -= 1.0;
  if (v.squaredNorm() > 0.0) q -= (2.0 / v.squaredNorm()) * v * v.transpose();

  const SymTensor rho = apply_matrix(secant_residual(t_prev, s, y), q);
  const auto rho_entries = rho.entries();
  const DenseTensor& rho_dense = rho.dense();
  DenseTensor fixed(p, n);
  for (std::size_t lin = 0; lin < fixed.size(); ++lin) {
    auto idx = fixed.multi_index(lin);
    const auto zero = std::find(idx.begin(), idx.end(), 0);
    if (zero == idx.end()) continue;
    idx.erase(zero);
    fixed[lin] = rho_entries[rho_dense.linear_index(idx)] / sn;
  }

  const Vector a0 = q.transpose() * w.apply_inverse_square(s / sn);
  Matrix nmap = Matrix::Identity(n, n);
  nmap(0, 0) = 0.0;
  for (int i = 1; i < n; ++i) nmap(0, i) = -a0(i) / a0(0);
  DenseTensor rotated = fixed;
  const DenseTensor free_part = apply_matrix(fixed, nmap);
  for (std::size_t lin = 0; lin < rotated.size(); ++lin) rotated[lin] -= free_part[lin];
  const SymTensor correction = sym_project(apply_matrix(rotated, Matrix(q.transpose())));
  const auto entries = correction.entries();
  if (!std::all_of(entries.begin(), entries.end(), [](double e) { return std::isfinite(e); })) throw DegenerateStep("hosu_update: non-finite correction");
  return t_prev + correction;
}

SymTensor hosu_update(const SymTensor& t_prev, const SecantData& secant, const WeightMatrix& w) {
  return hosu_update(t_prev, secant.s_prev, secant.y_tensor, w);
}

bool dfp_guard(const Vector& s, const Vector& y, double mu, double L) {
  const double ss = s.squaredNorm();
  return mu * ss <= std::abs(s.dot(y)) && y.norm() <= L * std::sqrt(ss);
}

double dfp_kappa_max(double mu, double L, double sigma_bar) {
  const double big = (sigma_bar + L * L) / mu;
  const double second = std::sqrt(L + big) * std::sqrt(std::max({1.0 / sigma_bar, 1.0, big / sigma_bar}));
  return std::max(std::sqrt(1.0 / mu), second);
}

DfpWeight build_dfp_weight(const Vector& s, const Vector& y, double mu, double L, double sigma_bar) {
  if (s.size() != y.size()) throw DimensionError("build_dfp_weight: dimension mismatch");
  if (!dfp_guard(s, y, mu, L)) throw GuardViolated("build_dfp_weight: guard conditions do not hold");
  if (!(sigma_bar > 0.0)) throw Error("build_dfp_weight: sigma_bar must be positive");
  const int n = static_cast<int>(s.size());
  const Vector s_used = s.dot(y) < 0.0 ? Vector(-s) : s;
  const double ns = s_used.norm();
  const Vector v1 = s_used / ns;
  const double a = s_used.dot(y) / (ns * ns);
  const Vector u = y - a * s_used;
  const double c = u.norm() / ns;

  // A = W^{-2} = I + V K V^T acts as identity off span{s, y}.
  const bool colinear = n == 1 || c <= 1e-12 * y.norm() / ns;
  Matrix basis;
  Matrix core;
  if (colinear) {
    basis = v1;
    core = Matrix::Constant(1, 1, a - 1.0);
  } else {
    basis.resize(n, 2);
    basis << v1, u / u.norm();
    const double b = (sigma_bar + c * c) / a;
    core.resize(2, 2);
    core << a - 1.0, c, c, b - 1.0;
  }
  Matrix a_mat = Matrix::Identity(n, n) + basis * core * basis.transpose();
  a_mat = (0.5 * (a_mat + a_mat.transpose())).eval();
  Eigen::SelfAdjointEigenSolver<Matrix> es(a_mat);
  Matrix w = es.operatorInverseSqrt();
  w = 0.5 * (w + w.transpose());
  return {WeightMatrix(std::move(w), std::move(basis), std::move(core)), dfp_kappa_max(mu, L, sigma_bar), s_used, colinear};
}

// ---------------------------------------------------------------------------
// Dispatch

TensorUpdate tensor_p(int k, const std::optional<SymTensor>& t_prev, const std::optional<SecantData>& secant,
                      std::span<const double> recent, const Problem& problem, const Vector& x_k, int p,
                      const StrategyConfig& cfg) {
  cfg.validate();
  if (k < 0) throw Error("tensor_p: iteration index must be non-negative");
  if (k % cfg.m == 0) {
    if (cfg.fd_restart()) {
      const FdStepsize h = compute_h(recent, cfg.m, problem.dim(), cfg.h_floor);
      return {fd_restart(problem, x_k, h.h, p), true, TensorBranch::FiniteDifference, h, std::nullopt};
    }
    return {problem.derivative(x_k, p), true, TensorBranch::Exact, std::nullopt, std::nullopt};
  }
  if (!t_prev) throw Error("tensor_p: previous tensor required on non-restart iterations");
  if (!cfg.secant()) return {*t_prev, false, TensorBranch::KeepConstant, std::nullopt, std::nullopt};
  if (!secant) throw Error("tensor_p: secant data required for secant strategies");

  if (cfg.kind == StrategyKind::DfpFd) {
    if (!dfp_guard(secant->s_prev, secant->y_vec, cfg.dfp_mu, cfg.dfp_L))
      return {*t_prev, false, TensorBranch::DfpGuardFallback, std::nullopt, std::nullopt};
    try {
      DfpWeight dw = build_dfp_weight(secant->s_prev, secant->y_vec, cfg.dfp_mu, cfg.dfp_L, cfg.dfp_sigma_bar);
      SymTensor t = hosu_update(*t_prev, *secant, dw.w);
      return {std::move(t), false, TensorBranch::Dfp, std::nullopt, std::move(dw.w)};
    } catch (const DegenerateStep&) {
      return {*t_prev, false, TensorBranch::DegenerateFallback, std::nullopt, std::nullopt};
    }
  }
  try {
    const WeightMatrix id = WeightMatrix::identity(problem.dim());
    return {hosu_update(*t_prev, *secant, id), false, TensorBranch::Psb, std::nullopt, id};
  } catch (const DegenerateStep&) {
    return {*t_prev, false, TensorBranch::DegenerateFallback, std::nullopt, std::nullopt};
  }
}

// ---------------------------------------------------------------------------
// Diagnostics

Condition1Audit condition1_audit(const SymTensor& t_k, const Problem& problem, const Vector& x_k, int k,
                                 std::span<const double> recent, int p, const StrategyConfig& cfg,
                                 double lipschitz) {
  Condition1Audit audit;
  if (k % cfg.m != 0) return audit;
  audit.restart = true;
  const SymTensor residual = t_k - problem.derivative(x_k, p);
  audit.frob_residual = frob_norm(residual);
  audit.op_residual = op_norm(residual).value;
  if (cfg.fd_restart()) {
    double sum = 0.0;
    for (int i = 0; i < cfg.m; ++i) sum += recent[static_cast<std::size_t>(i)];
    const double kappa = lipschitz / 2.0;
    audit.bound = std::min(kappa * sum, kappa);
    // Cancellation in the forward difference: a few ulps of ∇^{p-1} f divided by h.
    const FdStepsize h = compute_h(recent, cfg.m, problem.dim(), cfg.h_floor);
    const double scale = 1.0 + frob_norm(problem.derivative(x_k, p - 1));
    audit.roundoff = 1e3 * std::numeric_limits<double>::epsilon() * scale / h.h;
  }
  audit.violated = audit.op_residual > 1.01 * audit.bound + audit.roundoff;
  return audit;
}

SymTensor averaged_tensor(const Problem& problem, const Vector& x, const Vector& s, int p) {
  static constexpr std::array<double, 5> nodes = {-0.9061798459386640, -0.5384693101056831, 0.0, 0.5384693101056831,
                                                  0.9061798459386640};
  static constexpr std::array<double, 5> weights = {0.2369268850561891, 0.4786286704993665, 0.5688888888888889,
                                                    0.4786286704993665, 0.2369268850561891};
  SymTensor acc = SymTensor::zeros(p, problem.dim());
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    const double t = 0.5 * (nodes[i] + 1.0);
    acc += (0.5 * weights[i]) * problem.derivative(x + t * s, p);
  }
  return acc;
}

SecantProgress secant_progress(const SymTensor& t_k, const SymTensor& t_prev, const SymTensor& averaged,
                               const WeightMatrix& w) {
  return {frob_norm(apply_matrix(t_prev - averaged, w.matrix())), frob_norm(apply_matrix(t_k - averaged, w.matrix()))};
}

}  // namespace arp
