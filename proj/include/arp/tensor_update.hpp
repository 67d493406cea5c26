#pragma once

#include "arp/problems.hpp"
#include "arp/tensor.hpp"

#include <optional>
#include <span>
#include <string>

namespace arp {

enum class StrategyKind { Lazy, FD, PsbLazy, PsbFd, DfpFd };

std::string to_string(StrategyKind kind);
/// Accepts lazy, fd, psb-lazy, psb-fd, dfp-fd.
StrategyKind parse_strategy(const std::string& name);

struct StrategyConfig {
  StrategyKind kind = StrategyKind::Lazy;
  int m = 1;                   // restart period
  double dfp_mu = 1e-4;        // guard: mu ||s||^2 <= |s^T y|
  double dfp_L = 1e4;          // guard: ||y|| <= L ||s||
  double dfp_sigma_bar = 1.0;  // determinant floor of the 2x2 block in the weight construction
  double h_floor = 1e-8;       // smallest finite-difference stepsize

  void validate() const;
  bool fd_restart() const;
  bool secant() const;
  /// 1 for the PSB, lazy and FD variants, kappa_max^p for DFP.
  double kappa_c(int p) const;
};

/// Data from the previous step consumed by the secant updates.
struct SecantData {
  Vector s_prev;
  SymTensor y_tensor;  // ∇^{p-1} f(x_k) - ∇^{p-1} f(x_{k-1})
  Vector y_vec;        // ∇f(x_k) - ∇f(x_{k-1})
};

class DegenerateStep : public Error {
 public:
  using Error::Error;
};

class GuardViolated : public Error {
 public:
  using Error::Error;
};

struct FdStepsize {
  double h = 0.0;
  double unfloored = 0.0;
  bool floor_active = false;
};

/// h = min(sum of the m most recent step norms, 1) / sqrt(n), floored at h_floor.
/// `recent` lists ||s_{k-1}||, ||s_{k-2}||, ... and must hold at least m values
/// (steps before the first iterate count as 1).
FdStepsize compute_h(std::span<const double> recent, int m, int n, double h_floor);

/// Symmetrized forward differences of ∇^{p-1} f along the coordinate axes.
/// Costs exactly n + 1 evaluations of ∇^{p-1} f.
SymTensor fd_restart(const Problem& problem, const Vector& x, double h, int p);

/// Least-change symmetric update: argmin ||(T - T_prev)[W]^p||_F subject to T[s] = y.
/// Throws DegenerateStep when ||s|| < 1e-14.
SymTensor hosu_update(const SymTensor& t_prev, const Vector& s, const SymTensor& y, const WeightMatrix& w);
SymTensor hosu_update(const SymTensor& t_prev, const SecantData& secant, const WeightMatrix& w);

bool dfp_guard(const Vector& s, const Vector& y, double mu, double L);
double dfp_kappa_max(double mu, double L, double sigma_bar);

struct DfpWeight {
  WeightMatrix w;
  double kappa_bound;  // kappa_max for (mu, L, sigma_bar)
  Vector s_used;       // s, or -s when s^T y < 0; satisfies W^{-2} s_used = y
  bool colinear;
};

/// SPD W with W^{-2} s_used = y and condition number at most kappa_max.
/// Throws GuardViolated when dfp_guard fails.
DfpWeight build_dfp_weight(const Vector& s, const Vector& y, double mu, double L, double sigma_bar);

enum class TensorBranch { Exact, FiniteDifference, KeepConstant, Psb, Dfp, DfpGuardFallback, DegenerateFallback };
std::string to_string(TensorBranch branch);

struct TensorUpdate {
  SymTensor tensor;
  bool restart = false;
  TensorBranch branch = TensorBranch::Exact;
  std::optional<FdStepsize> fd;
  std::optional<WeightMatrix> weight;  // weight used by a secant update
};

/// Dispatches the tensor approximation for iteration k. Restart iterations (k mod m == 0)
/// use the exact derivative or finite differences; the others keep the previous tensor or
/// apply a PSB / guarded DFP secant update.
TensorUpdate tensor_p(int k, const std::optional<SymTensor>& t_prev, const std::optional<SecantData>& secant,
                      std::span<const double> recent, const Problem& problem, const Vector& x_k, int p,
                      const StrategyConfig& cfg);

struct Condition1Audit {
  bool restart = false;
  double frob_residual = 0.0;  // ||T_k - ∇^p f(x_k)||_F
  double op_residual = 0.0;    // power-iteration lower bound of the 2-norm residual
  double bound = 0.0;          // min(kappa_A sum ||s_{k-i}||, kappa_B)
  double roundoff = 0.0;       // floating-point allowance added to the bound for FD restarts
  bool violated = false;
};

/// Restart-branch check of the tensor error against the theoretical bound, with
/// kappa_A = kappa_B = L_p / 2 for finite differences and 0 for exact restarts.
/// Pure diagnostic; non-restart iterations return an empty record.
Condition1Audit condition1_audit(const SymTensor& t_k, const Problem& problem, const Vector& x_k, int k,
                                 std::span<const double> recent, int p, const StrategyConfig& cfg,
                                 double lipschitz);

/// ∫_0^1 ∇^p f(x + t s) dt by 5-point Gauss-Legendre (exact for polynomials of degree <= p + 9).
SymTensor averaged_tensor(const Problem& problem, const Vector& x, const Vector& s, int p);

struct SecantProgress {
  double before = 0.0;  // ||(T_{k-1} - T̃_{k-1})[W]^p||_F
  double after = 0.0;   // ||(T_k - T̃_{k-1})[W]^p||_F
};

SecantProgress secant_progress(const SymTensor& t_k, const SymTensor& t_prev, const SymTensor& averaged,
                               const WeightMatrix& w);

}  // namespace arp
