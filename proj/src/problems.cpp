#include "arp/problems.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <unordered_set>

namespace arp {

namespace {

double falling_factorial(int e, int k) {
  double r = 1.0;
  for (int i = 0; i < k; ++i) r *= static_cast<double>(e - i);
  return r;
}

void require_order(const Problem& p, int order) {
  if (order < 1 || order > p.max_order())
    throw UnsupportedOrder(p.name() + ": derivative order " + std::to_string(order) + " not available");
}

void require_dim(const Problem& p, const Vector& x) {
  if (x.size() != p.dim()) throw DimensionError(p.name() + ": point dimension mismatch");
}

// Fills every permutation of each sorted index listed in `touched` from its sorted slot.
void symmetrize_from_sorted(DenseTensor& t, const std::unordered_set<std::size_t>& touched) {
  for (std::size_t lin : touched) {
    auto idx = t.multi_index(lin);
    const double v = t[lin];
    while (std::next_permutation(idx.begin(), idx.end())) t(idx) = v;
  }
}

}  // namespace

// ---------------------------------------------------------------------------
// PolynomialProblem

PolynomialProblem::PolynomialProblem(std::string name, int dim, std::vector<Monomial> monomials, Vector start)
    : name_(std::move(name)), dim_(dim), monomials_(std::move(monomials)), start_(std::move(start)) {
  if (dim < 1) throw DimensionError("PolynomialProblem: dimension must be positive");
  if (start_.size() != dim) throw DimensionError("PolynomialProblem: start point dimension mismatch");
  for (auto& m : monomials_) {
    std::sort(m.powers.begin(), m.powers.end());
    for (auto [v, e] : m.powers) {
      if (v < 0 || v >= dim || e <= 0) throw Error("PolynomialProblem: invalid monomial");
    }
  }
}

int PolynomialProblem::degree() const {
  int d = 0;
  for (const auto& m : monomials_) {
    int s = 0;
    for (auto [v, e] : m.powers) s += e;
    d = std::max(d, s);
  }
  return d;
}

double PolynomialProblem::value(const Vector& x) const {
  require_dim(*this, x);
  double f = 0.0;
  for (const auto& m : monomials_) {
    double term = m.coefficient;
    for (auto [v, e] : m.powers) term *= std::pow(x(v), e);
    f += term;
  }
  return f;
}

SymTensor PolynomialProblem::derivative(const Vector& x, int order) const {
  require_order(*this, order);
  require_dim(*this, x);
  DenseTensor t(order, dim_);
  std::unordered_set<std::size_t> touched;
  std::vector<int> counts;
  std::vector<int> index(static_cast<std::size_t>(order));
  for (const auto& m : monomials_) {
    const std::size_t nv = m.powers.size();
    counts.assign(nv, 0);
    // Enumerate k_v in [0, e_v] with sum k_v = order (odometer over the monomial's variables).
    auto emit = [&]() {
      double c = m.coefficient;
      int pos = 0;
      for (std::size_t a = 0; a < nv; ++a) {
        const auto [v, e] = m.powers[a];
        const int k = counts[a];
        c *= falling_factorial(e, k) * std::pow(x(v), e - k);
        for (int r = 0; r < k; ++r) index[static_cast<std::size_t>(pos++)] = v;
      }
      const std::size_t lin = t.linear_index(index);
      t[lin] += c;
      touched.insert(lin);
    };
    auto recurse = [&](auto&& self, std::size_t a, int remaining) -> void {
      if (a == nv) {
        if (remaining == 0) emit();
        return;
      }
      const int cap = std::min(m.powers[a].second, remaining);
      for (int k = 0; k <= cap; ++k) {
        counts[a] = k;
        self(self, a + 1, remaining - k);
      }
      counts[a] = 0;
    };
    recurse(recurse, 0, order);
  }
  symmetrize_from_sorted(t, touched);
  return SymTensor::from_dense(std::move(t), 0.0);
}

double PolynomialProblem::box_lipschitz_bound(int p, double box) const {
  if (p + 1 > max_order()) throw UnsupportedOrder("box_lipschitz_bound: order too high");
  PolynomialProblem absolute = *this;
  for (auto& m : absolute.monomials_) m.coefficient = std::abs(m.coefficient);
  const Vector corner = Vector::Constant(dim_, box);
  return frob_norm(absolute.derivative(corner, p + 1));
}

LipschitzInfo PolynomialProblem::lipschitz(int p) const {
  if (p >= degree()) return {0.0, true, box_, "order-p derivative is constant"};
  if (!std::isfinite(box_)) throw Error(name_ + ": no box declared for a local Lipschitz bound");
  return {box_lipschitz_bound(p, box_), false, box_, "Frobenius bound of |f|'s order-(p+1) derivative at box corner"};
}

// ---------------------------------------------------------------------------
// Corpus

namespace {

std::vector<PolynomialProblem::Monomial> quadratic_monomials(const Matrix& a, const Vector& b) {
  std::vector<PolynomialProblem::Monomial> out;
  const int n = static_cast<int>(b.size());
  for (int i = 0; i < n; ++i) {
    out.push_back({0.5 * a(i, i), {{i, 2}}});
    for (int j = i + 1; j < n; ++j) {
      if (a(i, j) != 0.0) out.push_back({a(i, j), {{i, 1}, {j, 1}}});
    }
    out.push_back({-b(i), {{i, 1}}});
  }
  return out;
}

Matrix tridiagonal(int n) {
  Matrix a = 4.0 * Matrix::Identity(n, n);
  for (int i = 0; i + 1 < n; ++i) a(i, i + 1) = a(i + 1, i) = -1.0;
  return a;
}

std::vector<PolynomialProblem::Monomial> quartic_monomials(int n) {
  std::vector<PolynomialProblem::Monomial> out;
  for (int j = 0; j < n; ++j) {
    out.push_back({1.0, {{j, 4}}});
    out.push_back({-2.0, {{j, 2}}});
    out.push_back({0.1, {{j, 1}}});
  }
  out.push_back({static_cast<double>(n), {}});
  return out;
}

Vector quartic_start(int n) {
  Vector x(n);
  for (int j = 0; j < n; ++j) x(j) = 0.05 * (1 + j % 3) * ((j % 2 == 0) ? 1.0 : -1.0);
  return x;
}

std::vector<PolynomialProblem::Monomial> rosenbrock_monomials(int n) {
  std::vector<PolynomialProblem::Monomial> out;
  for (int i = 0; i + 1 < n; ++i) {
    out.push_back({100.0, {{i + 1, 2}}});
    out.push_back({-200.0, {{i, 2}, {i + 1, 1}}});
    out.push_back({100.0, {{i, 4}}});
    out.push_back({1.0, {}});
    out.push_back({-2.0, {{i, 1}}});
    out.push_back({1.0, {{i, 2}}});
  }
  return out;
}

Vector rosenbrock_start(int n) {
  Vector x(n);
  for (int i = 0; i < n; ++i) x(i) = (i % 2 == 0) ? -1.2 : 1.0;
  return x;
}

}  // namespace

QuadraticProblem::QuadraticProblem(int dim)
    : PolynomialProblem("quadratic", dim, quadratic_monomials(tridiagonal(dim), Vector::Ones(dim)), Vector::Zero(dim)),
      a_(tridiagonal(dim)),
      b_(Vector::Ones(dim)) {}

LipschitzInfo QuadraticProblem::lipschitz(int p) const {
  if (p < 2) throw UnsupportedOrder("quadratic: Lipschitz constants are declared for p >= 2");
  return {0.0, true, box_half_width(), "derivatives of order >= 2 are constant"};
}

Vector QuadraticProblem::minimizer() const { return a_.llt().solve(b_); }

QuarticProblem::QuarticProblem(int dim, double box)
    : PolynomialProblem("quartic", dim, quartic_monomials(dim), quartic_start(dim)) {
  set_box(box);
}

LipschitzInfo QuarticProblem::lipschitz(int p) const {
  // The derivatives are diagonal, so their 2-norm is the largest diagonal entry.
  switch (p) {
    case 2:
      return {24.0 * box_half_width(), false, box_half_width(), "max_j 12|x_j + y_j| on the box"};
    case 3:
      return {24.0, true, box_half_width(), "fourth derivative is 24 I (diagonal)"};
    default:
      if (p >= 4) return {0.0, true, box_half_width(), "order-p derivative is constant"};
      throw UnsupportedOrder("quartic: Lipschitz constants are declared for p >= 2");
  }
}

RosenbrockProblem::RosenbrockProblem(int dim, double box)
    : PolynomialProblem("rosenbrock", dim, rosenbrock_monomials(dim), rosenbrock_start(dim)) {
  if (dim < 2) throw DimensionError("rosenbrock: dimension must be at least 2");
  set_box(box);
}

LipschitzInfo RosenbrockProblem::lipschitz(int p) const {
  if (p == 3) return {2400.0, true, box_half_width(), "fourth derivative is diagonal with entries 2400"};
  if (p >= 4) return {0.0, true, box_half_width(), "order-p derivative is constant"};
  return PolynomialProblem::lipschitz(p);
}

TrigProblem::TrigProblem(int dim) : dim_(dim) {
  if (dim < 1) throw DimensionError("trig: dimension must be positive");
}

double TrigProblem::value(const Vector& x) const {
  require_dim(*this, x);
  return x.array().cos().sum() + 0.05 * x.squaredNorm();
}

SymTensor TrigProblem::derivative(const Vector& x, int order) const {
  require_order(*this, order);
  require_dim(*this, x);
  DenseTensor t(order, dim_);
  std::vector<int> idx(static_cast<std::size_t>(order));
  const double shift = order * std::numbers::pi / 2.0;
  for (int j = 0; j < dim_; ++j) {
    double v = std::cos(x(j) + shift);
    if (order == 1) v += 0.1 * x(j);
    if (order == 2) v += 0.1;
    std::fill(idx.begin(), idx.end(), j);
    t(idx) = v;
  }
  return SymTensor::from_dense(std::move(t), 0.0);
}

LipschitzInfo TrigProblem::lipschitz(int p) const {
  if (p < 2) throw UnsupportedOrder("trig: Lipschitz constants are declared for p >= 2");
  // The regularizer is quadratic and contributes nothing for p >= 2.
  return {1.0, true, box_half_width(), "order-(p+1) derivative is diagonal with |entries| <= 1"};
}

Vector TrigProblem::default_start() const {
  Vector x(dim_);
  for (int j = 0; j < dim_; ++j) x(j) = 1.0 + 0.25 * j;
  return x;
}

std::vector<std::string> problem_names() { return {"quadratic", "quartic", "rosenbrock", "trig"}; }

std::shared_ptr<const Problem> make_problem(const std::string& name, int dim) {
  if (name == "quadratic") return std::make_shared<QuadraticProblem>(dim);
  if (name == "quartic") return std::make_shared<QuarticProblem>(dim);
  if (name == "rosenbrock") return std::make_shared<RosenbrockProblem>(dim);
  if (name == "trig") return std::make_shared<TrigProblem>(dim);
  throw Error("unknown problem '" + name + "'");
}

// ---------------------------------------------------------------------------
// CountingProblem

double CountingProblem::value(const Vector& x) const {
  ++counts_.calls[0];
  return inner_->value(x);
}

SymTensor CountingProblem::derivative(const Vector& x, int order) const {
  if (order >= 1 && order < static_cast<int>(counts_.calls.size())) ++counts_.calls[static_cast<std::size_t>(order)];
  return inner_->derivative(x, order);
}

// ---------------------------------------------------------------------------

double fd_check(const Problem& problem, const Vector& x, int i, double h) {
  if (i < 2) throw UnsupportedOrder("fd_check: order must be at least 2");
  if (!(h > 0.0)) throw Error("fd_check: h must be positive");
  const SymTensor base = problem.derivative(x, i - 1);
  const SymTensor top = problem.derivative(x, i);
  double worst = 0.0;
  for (int j = 0; j < problem.dim(); ++j) {
    const Vector e = Vector::Unit(problem.dim(), j);
    SymTensor diff = problem.derivative(x + h * e, i - 1) - base;
    diff *= 1.0 / h;
    worst = std::max(worst, frob_norm(diff - contract(top, e, 1)));
  }
  return worst;
}

}  // namespace arp
