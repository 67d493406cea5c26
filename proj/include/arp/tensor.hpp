#pragma once

#include "arp/types.hpp"

#include <cstdint>
#include <span>
#include <vector>

namespace arp {

/// Dense order-q tensor over R^n, stored row-major as n^q coefficients.
/// The multi-index (i1, ..., iq) maps to sum_k i_k n^(q-1-k).
class DenseTensor {
 public:
  DenseTensor(int order, int dim);
  DenseTensor(int order, int dim, std::vector<double> entries);

  int order() const { return order_; }
  int dim() const { return dim_; }
  std::size_t size() const { return data_.size(); }

  std::span<const double> entries() const { return data_; }
  std::span<double> entries() { return data_; }

  double operator()(std::span<const int> index) const { return data_[linear_index(index)]; }
  double& operator()(std::span<const int> index) { return data_[linear_index(index)]; }
  double operator[](std::size_t i) const { return data_[i]; }
  double& operator[](std::size_t i) { return data_[i]; }

  std::size_t linear_index(std::span<const int> index) const;
  std::vector<int> multi_index(std::size_t linear) const;

 private:
  int order_;
  int dim_;
  std::vector<double> data_;
};

/// Symmetric tensor: entries are invariant under every permutation of the index slots.
/// Instances are only produced by operations that preserve symmetry or by a checked
/// conversion, so holders may rely on the invariant.
class SymTensor {
 public:
  static SymTensor zeros(int order, int dim);
  /// v ⊗ v ⊗ ... ⊗ v (order copies).
  static SymTensor outer_power(const Vector& v, int order);
  static SymTensor from_vector(const Vector& v);
  /// Throws DimensionError when the matrix is not square or not symmetric to `tol` (relative).
  static SymTensor from_matrix(const Matrix& m, double tol = 1e-12);
  /// Throws Error when `t` is not symmetric to `tol` (relative to its largest entry).
  static SymTensor from_dense(DenseTensor t, double tol = 1e-12);
  /// Fills every permutation of each nondecreasing index with the given component value.
  /// `components` follows the order of symmetric_components(order, dim).
  static SymTensor from_components(int order, int dim, std::span<const double> components);

  int order() const { return dense_.order(); }
  int dim() const { return dense_.dim(); }
  std::size_t size() const { return dense_.size(); }
  const DenseTensor& dense() const { return dense_; }
  std::span<const double> entries() const { return dense_.entries(); }
  double operator()(std::span<const int> index) const { return dense_(index); }
  double operator()(std::initializer_list<int> index) const {
    return dense_(std::span<const int>(index.begin(), index.size()));
  }

  /// Order-1 view as a vector, order-2 view as a matrix.
  Vector to_vector() const;
  Matrix to_matrix() const;
  /// Values at each nondecreasing multi-index, in symmetric_components order.
  std::vector<double> components() const;

  SymTensor& operator+=(const SymTensor& other);
  SymTensor& operator-=(const SymTensor& other);
  SymTensor& operator*=(double alpha);

 private:
  explicit SymTensor(DenseTensor t) : dense_(std::move(t)) {}
  friend SymTensor sym_project(const DenseTensor&);
  friend SymTensor apply_matrix(const SymTensor&, const Matrix&);
  friend SymTensor contract(const SymTensor&, const Vector&, int);

  DenseTensor dense_;
};

SymTensor operator+(SymTensor a, const SymTensor& b);
SymTensor operator-(SymTensor a, const SymTensor& b);
SymTensor operator*(double alpha, SymTensor a);

/// One nondecreasing multi-index together with the number of distinct
/// permutations of it (the size of its orbit).
struct SymmetricComponent {
  std::vector<int> index;
  std::int64_t multiplicity;
};

/// All nondecreasing multi-indices of length `order` over {0..dim-1}, lexicographic.
std::vector<SymmetricComponent> symmetric_components(int order, int dim);

bool is_symmetric(const DenseTensor& t, double rel_tol = 1e-12);

/// Average over all index permutations.
SymTensor sym_project(const DenseTensor& t);

/// T[s]^j: contracts `times` slots with s. Requires times < order (see full_contract).
SymTensor contract(const SymTensor& t, const Vector& s, int times);
/// T[s]^q as a scalar.
double full_contract(const SymTensor& t, const Vector& s);
/// T[v1, ..., vq] for a general dense tensor.
double multilinear(const DenseTensor& t, std::span<const Vector> vectors);

/// (T[W]^q)[s1..sq] = T[W s1, ..., W sq].
DenseTensor apply_matrix(const DenseTensor& t, const Matrix& w);
SymTensor apply_matrix(const SymTensor& t, const Matrix& w);

double frob_inner(const DenseTensor& a, const DenseTensor& b);
double frob_inner(const SymTensor& a, const SymTensor& b);
double frob_norm(const DenseTensor& t);
double frob_norm(const SymTensor& t);
double max_abs_diff(const SymTensor& a, const SymTensor& b);

/// Symmetric positive definite n×n matrix with cached extreme eigenvalues.
class WeightMatrix {
 public:
  /// Throws Error unless `m` is symmetric (relative 1e-12) and positive definite.
  explicit WeightMatrix(Matrix m);
  /// As above, with W^{-2} = I + V K V^T supplied in low-rank form instead of computed by factorization.
  WeightMatrix(Matrix m, Matrix basis, Matrix core);
  static WeightMatrix identity(int dim);

  const Matrix& matrix() const { return matrix_; }
  /// W^{-2}.
  const Matrix& inverse_square() const { return inverse_square_; }
  /// W^{-2} v, through the low-rank form when one was supplied.
  Vector apply_inverse_square(const Vector& v) const;
  int dim() const { return static_cast<int>(matrix_.rows()); }
  double lambda_min() const { return lambda_min_; }
  double lambda_max() const { return lambda_max_; }
  double condition_number() const { return lambda_max_ / lambda_min_; }

 private:
  Matrix matrix_;
  Matrix inverse_square_;
  Matrix basis_;  // empty unless a low-rank form was supplied
  Matrix core_;
  double lambda_min_;
  double lambda_max_;
};

enum class NormMethod { PowerIteration, Grid };

struct NormOptions {
  NormMethod method = NormMethod::PowerIteration;
  int restarts = 8;
  std::uint64_t seed = 0x5eed;
  int max_iterations = 5000;
  /// Angular spacing of the sphere mesh (grid method).
  double grid_spacing = 1e-3;
};

/// Lower-bound estimate of the tensor 2-norm max_{|s_i|=1} |T[s_1..s_q]|.
/// `value` is attained at a feasible unit vector. For the grid method, `slack`
/// bounds the gap to the true norm: value <= ||T|| <= value + slack.
struct NormEstimate {
  double value = 0.0;
  double mesh_spacing = 0.0;
  double slack = 0.0;
};

/// Grid method requires dim <= 3 and order <= 3; throws Error otherwise.
NormEstimate op_norm(const SymTensor& t, const NormOptions& options = {});
/// ||T||_W = ||T[W]^q||.
NormEstimate op_norm(const SymTensor& t, const WeightMatrix& w, const NormOptions& options = {});

/// Smallest eigenvalue of a symmetric matrix.
double lambda_min(const Matrix& m);

}  // namespace arp
