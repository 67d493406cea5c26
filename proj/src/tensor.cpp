#include "arp/tensor.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>
#include <random>
#include <string>

namespace arp {

namespace {

std::size_t int_pow(int base, int exp) {
  std::size_t r = 1;
  for (int i = 0; i < exp; ++i) r *= static_cast<std::size_t>(base);
  return r;
}

void require_same_shape(int order_a, int dim_a, int order_b, int dim_b, const char* what) {
  if (order_a != order_b || dim_a != dim_b) {
    throw DimensionError(std::string(what) + ": shape mismatch (order " + std::to_string(order_a) + " dim " +
                         std::to_string(dim_a) + " vs order " + std::to_string(order_b) + " dim " +
                         std::to_string(dim_b) + ")");
  }
}

// Contracts the last slot of a row-major tensor with s.
std::vector<double> contract_last(std::span<const double> data, int dim, const Vector& s) {
  const std::size_t rows = data.size() / static_cast<std::size_t>(dim);
  Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>> m(
      data.data(), static_cast<Eigen::Index>(rows), dim);
  std::vector<double> out(rows);
  Eigen::Map<Vector>(out.data(), static_cast<Eigen::Index>(rows)) = m * s;
  return out;
}

// Moves the last index slot to the front: out[i_q, i_1, ..., i_{q-1}] = in[i_1, ..., i_q].
std::vector<double> rotate_last_to_front(std::span<const double> data, int dim) {
  const std::size_t n = static_cast<std::size_t>(dim);
  const std::size_t rest = data.size() / n;
  std::vector<double> out(data.size());
  for (std::size_t r = 0; r < rest; ++r) {
    for (std::size_t j = 0; j < n; ++j) out[j * rest + r] = data[r * n + j];
  }
  return out;
}

std::int64_t factorial(int k) {
  std::int64_t r = 1;
  for (int i = 2; i <= k; ++i) r *= i;
  return r;
}

void enumerate_components(int order, int dim, int start, std::vector<int>& current,
                          std::vector<SymmetricComponent>& out) {
  if (static_cast<int>(current.size()) == order) {
    std::int64_t mult = factorial(order);
    int run = 1;
    for (int k = 1; k <= order; ++k) {
      if (k < order && current[k] == current[k - 1]) {
        ++run;
      } else {
        mult /= factorial(run);
        run = 1;
      }
    }
    out.push_back({current, mult});
    return;
  }
  for (int i = start; i < dim; ++i) {
    current.push_back(i);
    enumerate_components(order, dim, i, current, out);
    current.pop_back();
  }
}

}  // namespace

// ---------------------------------------------------------------------------
// DenseTensor

DenseTensor::DenseTensor(int order, int dim) : order_(order), dim_(dim) {
  if (order < 1 || dim < 1) throw DimensionError("tensor order and dimension must be positive");
  data_.assign(int_pow(dim, order), 0.0);
}

DenseTensor::DenseTensor(int order, int dim, std::vector<double> entries)
    : order_(order), dim_(dim), data_(std::move(entries)) {
  if (order < 1 || dim < 1) throw DimensionError("tensor order and dimension must be positive");
  if (data_.size() != int_pow(dim, order)) throw DimensionError("tensor entries must have length dim^order");
}

std::size_t DenseTensor::linear_index(std::span<const int> index) const {
  std::size_t lin = 0;
  for (int i : index) lin = lin * static_cast<std::size_t>(dim_) + static_cast<std::size_t>(i);
  return lin;
}

std::vector<int> DenseTensor::multi_index(std::size_t linear) const {
  std::vector<int> idx(static_cast<std::size_t>(order_));
  for (int k = order_ - 1; k >= 0; --k) {
    idx[static_cast<std::size_t>(k)] = static_cast<int>(linear % static_cast<std::size_t>(dim_));
    linear /= static_cast<std::size_t>(dim_);
  }
  return idx;
}

// ---------------------------------------------------------------------------
// SymTensor

SymTensor SymTensor::zeros(int order, int dim) { return SymTensor(DenseTensor(order, dim)); }

SymTensor SymTensor::outer_power(const Vector& v, int order) {
  const int n = static_cast<int>(v.size());
  DenseTensor t(order, n);
  for (std::size_t lin = 0; lin < t.size(); ++lin) {
    double prod = 1.0;
    for (int i : t.multi_index(lin)) prod *= v(i);
    t[lin] = prod;
  }
  return SymTensor(std::move(t));
}

SymTensor SymTensor::from_vector(const Vector& v) {
  return SymTensor(DenseTensor(1, static_cast<int>(v.size()), std::vector<double>(v.data(), v.data() + v.size())));
}

SymTensor SymTensor::from_matrix(const Matrix& m, double tol) {
  if (m.rows() != m.cols()) throw DimensionError("from_matrix: matrix must be square");
  const int n = static_cast<int>(m.rows());
  DenseTensor t(2, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) t[static_cast<std::size_t>(i * n + j)] = m(i, j);
  if (!is_symmetric(t, tol)) throw DimensionError("from_matrix: matrix is not symmetric");
  return SymTensor(std::move(t));
}

SymTensor SymTensor::from_dense(DenseTensor t, double tol) {
  if (!is_symmetric(t, tol)) throw Error("from_dense: tensor is not symmetric");
  return SymTensor(std::move(t));
}

SymTensor SymTensor::from_components(int order, int dim, std::span<const double> components) {
  const auto comps = symmetric_components(order, dim);
  if (comps.size() != components.size()) throw DimensionError("from_components: wrong number of components");
  DenseTensor t(order, dim);
  for (std::size_t c = 0; c < comps.size(); ++c) {
    std::vector<int> idx = comps[c].index;
    do {
      t(idx) = components[c];
    } while (std::next_permutation(idx.begin(), idx.end()));
  }
  return SymTensor(std::move(t));
}

Vector SymTensor::to_vector() const {
  if (order() != 1) throw DimensionError("to_vector: tensor order is not 1");
  return Eigen::Map<const Vector>(entries().data(), dim());
}

Matrix SymTensor::to_matrix() const {
  if (order() != 2) throw DimensionError("to_matrix: tensor order is not 2");
  return Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>(entries().data(),
                                                                                               dim(), dim());
}

std::vector<double> SymTensor::components() const {
  const auto comps = symmetric_components(order(), dim());
  std::vector<double> out;
  out.reserve(comps.size());
  for (const auto& c : comps) out.push_back(dense_(c.index));
  return out;
}

SymTensor& SymTensor::operator+=(const SymTensor& other) {
  require_same_shape(order(), dim(), other.order(), other.dim(), "operator+");
  auto dst = dense_.entries();
  auto src = other.entries();
  for (std::size_t i = 0; i < dst.size(); ++i) dst[i] += src[i];
  return *this;
}

SymTensor& SymTensor::operator-=(const SymTensor& other) {
  require_same_shape(order(), dim(), other.order(), other.dim(), "operator-");
  auto dst = dense_.entries();
  auto src = other.entries();
  for (std::size_t i = 0; i < dst.size(); ++i) dst[i] -= src[i];
  return *this;
}

SymTensor& SymTensor::operator*=(double alpha) {
  for (double& v : dense_.entries()) v *= alpha;
  return *this;
}

SymTensor operator+(SymTensor a, const SymTensor& b) { return a += b; }
SymTensor operator-(SymTensor a, const SymTensor& b) { return a -= b; }
SymTensor operator*(double alpha, SymTensor a) { return a *= alpha; }

// ---------------------------------------------------------------------------
// Free functions

std::vector<SymmetricComponent> symmetric_components(int order, int dim) {
  std::vector<SymmetricComponent> out;
  std::vector<int> current;
  current.reserve(static_cast<std::size_t>(order));
  enumerate_components(order, dim, 0, current, out);
  return out;
}

bool is_symmetric(const DenseTensor& t, double rel_tol) {
  const int q = t.order();
  if (q < 2) return true;
  double scale = 0.0;
  for (double v : t.entries()) scale = std::max(scale, std::abs(v));
  const double tol = rel_tol * std::max(scale, 1e-300);
  // Adjacent transpositions generate the symmetric group.
  for (std::size_t lin = 0; lin < t.size(); ++lin) {
    auto idx = t.multi_index(lin);
    for (int k = 0; k + 1 < q; ++k) {
      std::swap(idx[static_cast<std::size_t>(k)], idx[static_cast<std::size_t>(k + 1)]);
      if (std::abs(t(idx) - t[lin]) > tol) return false;
      std::swap(idx[static_cast<std::size_t>(k)], idx[static_cast<std::size_t>(k + 1)]);
    }
  }
  return true;
}

SymTensor sym_project(const DenseTensor& t) {
  const int q = t.order();
  DenseTensor out(q, t.dim());
  std::vector<int> perm(static_cast<std::size_t>(q));
  std::vector<int> permuted(static_cast<std::size_t>(q));
  const double inv = 1.0 / static_cast<double>(factorial(q));
  for (std::size_t lin = 0; lin < t.size(); ++lin) {
    const auto idx = t.multi_index(lin);
    std::iota(perm.begin(), perm.end(), 0);
    double sum = 0.0;
    do {
      for (int k = 0; k < q; ++k) permuted[static_cast<std::size_t>(k)] = idx[static_cast<std::size_t>(perm[k])];
      sum += t(permuted);
    } while (std::next_permutation(perm.begin(), perm.end()));
    out[lin] = sum * inv;
  }
  return SymTensor(std::move(out));
}

SymTensor contract(const SymTensor& t, const Vector& s, int times) {
  if (s.size() != t.dim()) throw DimensionError("contract: vector dimension does not match tensor");
  if (times < 0 || times >= t.order()) throw DimensionError("contract: times must satisfy 0 <= times < order");
  std::vector<double> data(t.entries().begin(), t.entries().end());
  for (int j = 0; j < times; ++j) data = contract_last(data, t.dim(), s);
  // Contracting trailing slots of a symmetric tensor leaves a symmetric tensor.
  return SymTensor(DenseTensor(t.order() - times, t.dim(), std::move(data)));
}

double full_contract(const SymTensor& t, const Vector& s) {
  if (s.size() != t.dim()) throw DimensionError("full_contract: vector dimension does not match tensor");
  std::vector<double> data(t.entries().begin(), t.entries().end());
  for (int j = 0; j < t.order(); ++j) data = contract_last(data, t.dim(), s);
  return data[0];
}

double multilinear(const DenseTensor& t, std::span<const Vector> vectors) {
  if (static_cast<int>(vectors.size()) != t.order()) throw DimensionError("multilinear: need one vector per slot");
  std::vector<double> data(t.entries().begin(), t.entries().end());
  for (int k = t.order() - 1; k >= 0; --k) {
    const Vector& v = vectors[static_cast<std::size_t>(k)];
    if (v.size() != t.dim()) throw DimensionError("multilinear: vector dimension does not match tensor");
    data = contract_last(data, t.dim(), v);
  }
  return data[0];
}

DenseTensor apply_matrix(const DenseTensor& t, const Matrix& w) {
  if (w.rows() != t.dim() || w.cols() != t.dim()) throw DimensionError("apply_matrix: matrix dimension mismatch");
  const int n = t.dim();
  std::vector<double> data(t.entries().begin(), t.entries().end());
  const std::size_t rows = data.size() / static_cast<std::size_t>(n);
  for (int mode = 0; mode < t.order(); ++mode) {
    Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>> m(
        data.data(), static_cast<Eigen::Index>(rows), n);
    Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> prod = m * w;
    data = rotate_last_to_front(std::span<const double>(prod.data(), data.size()), n);
  }
  return DenseTensor(t.order(), n, std::move(data));
}

SymTensor apply_matrix(const SymTensor& t, const Matrix& w) {
  // Applying the same matrix in every slot keeps the result symmetric.
  return SymTensor(apply_matrix(t.dense(), w));
}

double frob_inner(const DenseTensor& a, const DenseTensor& b) {
  require_same_shape(a.order(), a.dim(), b.order(), b.dim(), "frob_inner");
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

double frob_inner(const SymTensor& a, const SymTensor& b) { return frob_inner(a.dense(), b.dense()); }

double frob_norm(const DenseTensor& t) {
  double s = 0.0;
  for (double v : t.entries()) s += v * v;
  return std::sqrt(s);
}

double frob_norm(const SymTensor& t) { return frob_norm(t.dense()); }

double max_abs_diff(const SymTensor& a, const SymTensor& b) {
  require_same_shape(a.order(), a.dim(), b.order(), b.dim(), "max_abs_diff");
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a.entries()[i] - b.entries()[i]));
  return m;
}

double lambda_min(const Matrix& m) {
  Eigen::SelfAdjointEigenSolver<Matrix> es(m, Eigen::EigenvaluesOnly);
  return es.eigenvalues()(0);
}

// ---------------------------------------------------------------------------
// WeightMatrix

WeightMatrix::WeightMatrix(Matrix m) : matrix_(std::move(m)) {
  if (matrix_.rows() != matrix_.cols() || matrix_.rows() == 0) throw DimensionError("WeightMatrix: must be square");
  const double scale = std::max(matrix_.cwiseAbs().maxCoeff(), 1e-300);
  if ((matrix_ - matrix_.transpose()).cwiseAbs().maxCoeff() > 1e-12 * scale)
    throw Error("WeightMatrix: matrix is not symmetric");
  Eigen::SelfAdjointEigenSolver<Matrix> es(matrix_, Eigen::EigenvaluesOnly);
  lambda_min_ = es.eigenvalues()(0);
  lambda_max_ = es.eigenvalues()(es.eigenvalues().size() - 1);
  if (!(lambda_min_ > 0.0)) throw Error("WeightMatrix: matrix is not positive definite");
  const Eigen::LLT<Matrix> llt(matrix_);
  inverse_square_ = llt.solve(llt.solve(Matrix::Identity(dim(), dim())));
  inverse_square_ = (0.5 * (inverse_square_ + inverse_square_.transpose())).eval();
}

WeightMatrix::WeightMatrix(Matrix m, Matrix basis, Matrix core) : WeightMatrix(std::move(m)) {
  if (basis.rows() != dim() || core.rows() != basis.cols() || core.cols() != basis.cols())
    throw DimensionError("WeightMatrix: low-rank factors have the wrong shape");
  basis_ = std::move(basis);
  core_ = std::move(core);
  inverse_square_ = Matrix::Identity(dim(), dim()) + basis_ * core_ * basis_.transpose();
  inverse_square_ = (0.5 * (inverse_square_ + inverse_square_.transpose())).eval();
}

Vector WeightMatrix::apply_inverse_square(const Vector& v) const {
  if (basis_.size() == 0) return inverse_square_ * v;
  return v + basis_ * (core_ * (basis_.transpose() * v));
}

WeightMatrix WeightMatrix::identity(int dim) {
  return WeightMatrix(Matrix::Identity(dim, dim), Matrix::Zero(dim, 0), Matrix::Zero(0, 0));
}

// ---------------------------------------------------------------------------
// Operator norm estimates

namespace {

// Shifted symmetric higher-order power iteration maximizing sign * T[s]^q on the sphere.
// Unshifted steps are taken whenever they increase the objective; otherwise the convex
// shift guarantees monotone ascent.
double power_ascent(const SymTensor& t, Vector s, double sign, double shift, int max_iterations) {
  const int q = t.order();
  auto objective = [&](const Vector& v) { return sign * full_contract(t, v); };
  s.normalize();
  double value = objective(s);
  for (int it = 0; it < max_iterations; ++it) {
    const Vector grad = sign * contract(t, s, q - 1).to_vector();
    Vector best = s;
    double best_value = value;
    if (grad.norm() > 0.0) {
      const Vector plain = grad.normalized();
      const double v_plain = objective(plain);
      if (v_plain > best_value) {
        best = plain;
        best_value = v_plain;
      }
    }
    if (best_value <= value) {
      const Vector shifted = (grad + shift * s).normalized();
      const double v_shifted = objective(shifted);
      if (v_shifted > best_value) {
        best = shifted;
        best_value = v_shifted;
      }
    }
    const double step = (best - s).norm();
    const double gain = best_value - value;
    s = best;
    value = best_value;
    if (step < 1e-13 || gain <= 1e-16 * std::max(1.0, std::abs(value))) break;
  }
  return std::abs(value);
}

NormEstimate power_norm(const SymTensor& t, const NormOptions& options) {
  const int n = t.dim();
  if (t.order() == 1) return {t.to_vector().norm(), 0.0, 0.0};
  if (t.order() == 2) {
    Eigen::SelfAdjointEigenSolver<Matrix> es(t.to_matrix(), Eigen::EigenvaluesOnly);
    return {es.eigenvalues().cwiseAbs().maxCoeff(), 0.0, 0.0};
  }
  const double fro = frob_norm(t);
  if (fro == 0.0) return {0.0, 0.0, 0.0};
  const double shift = (t.order() - 1) * fro;
  std::mt19937_64 rng(options.seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  double best = 0.0;
  // Deterministic start at the coordinate with the largest diagonal entry.
  {
    int arg = 0;
    double big = -1.0;
    std::vector<int> idx(static_cast<std::size_t>(t.order()));
    for (int i = 0; i < n; ++i) {
      std::fill(idx.begin(), idx.end(), i);
      if (std::abs(t(idx)) > big) {
        big = std::abs(t(idx));
        arg = i;
      }
    }
    const Vector e = Vector::Unit(n, arg);
    for (double sign : {1.0, -1.0}) best = std::max(best, power_ascent(t, e, sign, shift, options.max_iterations));
  }
  for (int r = 0; r < options.restarts; ++r) {
    Vector s(n);
    for (int i = 0; i < n; ++i) s(i) = normal(rng);
    if (s.norm() == 0.0) s(0) = 1.0;
    for (double sign : {1.0, -1.0}) best = std::max(best, power_ascent(t, s, sign, shift, options.max_iterations));
  }
  return {best, 0.0, 0.0};
}

NormEstimate grid_norm(const SymTensor& t, const NormOptions& options) {
  const int n = t.dim();
  const int q = t.order();
  if (n > 3 || q > 3) throw Error("op_norm: grid method requires dim <= 3 and order <= 3");
  if (!(options.grid_spacing > 0.0)) throw Error("op_norm: grid spacing must be positive");
  const double pi = std::numbers::pi;
  double best = 0.0;
  double radius = 0.0;  // covering radius (arc length) of the mesh
  if (n == 1) {
    best = std::abs(t.entries()[0]);
  } else if (n == 2) {
    // |T[-s]^q| = |T[s]^q|, so half the circle suffices.
    const int steps = static_cast<int>(std::ceil(pi / options.grid_spacing));
    const double d = pi / steps;
    Vector s(2);
    for (int i = 0; i < steps; ++i) {
      s << std::cos(i * d), std::sin(i * d);
      best = std::max(best, std::abs(full_contract(t, s)));
    }
    radius = d / 2.0;
  } else {
    // Upper hemisphere including the equator, polar angle phi in [0, pi/2].
    const int n_phi = static_cast<int>(std::ceil((pi / 2.0) / options.grid_spacing));
    const int n_theta = static_cast<int>(std::ceil(2.0 * pi / options.grid_spacing));
    const double d_phi = (pi / 2.0) / n_phi;
    const double d_theta = 2.0 * pi / n_theta;
    Vector s(3);
    for (int i = 0; i <= n_phi; ++i) {
      const double phi = i * d_phi;
      const int ring = (i == 0) ? 1 : n_theta;
      for (int j = 0; j < ring; ++j) {
        const double theta = j * d_theta;
        s << std::sin(phi) * std::cos(theta), std::sin(phi) * std::sin(theta), std::cos(phi);
        best = std::max(best, std::abs(full_contract(t, s)));
      }
    }
    radius = std::hypot(d_phi / 2.0, d_theta / 2.0);
  }
  // Along a great circle through a maximizer, |d²/dt² T[s(t)]^q| <= q² ||T|| <= q² ||T||_F.
  const double slack = 0.5 * q * q * frob_norm(t) * radius * radius;
  return {best, 2.0 * radius, slack};
}

}  // namespace

NormEstimate op_norm(const SymTensor& t, const NormOptions& options) {
  return options.method == NormMethod::Grid ? grid_norm(t, options) : power_norm(t, options);
}

NormEstimate op_norm(const SymTensor& t, const WeightMatrix& w, const NormOptions& options) {
  if (w.dim() != t.dim()) throw DimensionError("op_norm: weight matrix dimension mismatch");
  return op_norm(apply_matrix(t, w.matrix()), options);
}

}  // namespace arp
