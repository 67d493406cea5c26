#pragma once

// Reference implementations used only by the tests. They work on raw row-major
// coefficient arrays with their own index arithmetic and share no code with the library.

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <vector>

namespace oracle {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;
using Coeffs = std::vector<double>;

inline long ipow(int n, int q) {
  long r = 1;
  for (int i = 0; i < q; ++i) r *= n;
  return r;
}

inline std::vector<int> digits(long lin, int n, int q) {
  std::vector<int> idx(static_cast<std::size_t>(q));
  for (int k = q - 1; k >= 0; --k) {
    idx[static_cast<std::size_t>(k)] = static_cast<int>(lin % n);
    lin /= n;
  }
  return idx;
}

inline long undigits(const std::vector<int>& idx, int n) {
  long lin = 0;
  for (int v : idx) lin = lin * n + v;
  return lin;
}

/// Average of the coefficient array over every permutation of the q slots.
inline Coeffs symmetrize(const Coeffs& a, int n, int q) {
  Coeffs out(a.size(), 0.0);
  std::vector<int> perm(static_cast<std::size_t>(q));
  std::iota(perm.begin(), perm.end(), 0);
  long count = 0;
  do {
    ++count;
    for (long lin = 0; lin < static_cast<long>(a.size()); ++lin) {
      const auto idx = digits(lin, n, q);
      std::vector<int> permuted(idx.size());
      for (int k = 0; k < q; ++k) permuted[static_cast<std::size_t>(k)] = idx[static_cast<std::size_t>(perm[static_cast<std::size_t>(k)])];
      out[static_cast<std::size_t>(lin)] += a[static_cast<std::size_t>(undigits(permuted, n))];
    }
  } while (std::next_permutation(perm.begin(), perm.end()));
  for (double& v : out) v /= static_cast<double>(count);
  return out;
}

/// T[s]^times as coefficients of an order (q - times) tensor; contracts the trailing slots.
inline Coeffs contract(const Coeffs& t, int n, int q, const Vec& s, int times) {
  const int r = q - times;
  Coeffs out(static_cast<std::size_t>(ipow(n, r)), 0.0);
  for (long lin = 0; lin < static_cast<long>(t.size()); ++lin) {
    const auto idx = digits(lin, n, q);
    double w = t[static_cast<std::size_t>(lin)];
    for (int k = r; k < q; ++k) w *= s(idx[static_cast<std::size_t>(k)]);
    std::vector<int> head(idx.begin(), idx.begin() + r);
    out[static_cast<std::size_t>(undigits(head, n))] += w;
  }
  return out;
}

inline double full_contract(const Coeffs& t, int n, int q, const Vec& s) { return contract(t, n, q, s, q)[0]; }

/// (T[W]^q)_{i1..iq} = sum_j T_{j1..jq} W_{j1 i1} ... W_{jq iq}.
inline Coeffs apply_matrix(const Coeffs& t, int n, int q, const Mat& w) {
  Coeffs out(t.size(), 0.0);
  for (long out_lin = 0; out_lin < static_cast<long>(t.size()); ++out_lin) {
    const auto i = digits(out_lin, n, q);
    double acc = 0.0;
    for (long in_lin = 0; in_lin < static_cast<long>(t.size()); ++in_lin) {
      const auto j = digits(in_lin, n, q);
      double w_prod = t[static_cast<std::size_t>(in_lin)];
      for (int k = 0; k < q && w_prod != 0.0; ++k) w_prod *= w(j[static_cast<std::size_t>(k)], i[static_cast<std::size_t>(k)]);
      acc += w_prod;
    }
    out[static_cast<std::size_t>(out_lin)] = acc;
  }
  return out;
}

inline double frob(const Coeffs& t) {
  double acc = 0.0;
  for (double v : t) acc += v * v;
  return std::sqrt(acc);
}

inline Coeffs minus(const Coeffs& a, const Coeffs& b) {
  Coeffs out(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) out[i] = a[i] - b[i];
  return out;
}

inline Coeffs random_symmetric(std::mt19937_64& rng, int n, int q, double scale = 1.0) {
  std::normal_distribution<double> normal(0.0, scale);
  Coeffs a(static_cast<std::size_t>(ipow(n, q)));
  for (double& v : a) v = normal(rng);
  return symmetrize(a, n, q);
}

inline Vec random_vector(std::mt19937_64& rng, int n, double scale = 1.0) {
  std::normal_distribution<double> normal(0.0, scale);
  Vec v(n);
  for (int i = 0; i < n; ++i) v(i) = normal(rng);
  return v;
}

/// Symmetric positive definite matrix with eigenvalues drawn from [lo, hi].
inline Mat random_spd(std::mt19937_64& rng, int n, double lo, double hi) {
  std::uniform_real_distribution<double> uni(lo, hi);
  Eigen::HouseholderQR<Mat> qr(Mat::NullaryExpr(n, n, [&] { return std::normal_distribution<double>()(rng); }));
  const Mat q = qr.householderQ();
  Vec d(n);
  for (int i = 0; i < n; ++i) d(i) = uni(rng);
  Mat m = q * d.asDiagonal() * q.transpose();
  return 0.5 * (m + m.transpose());
}

/// Least-change symmetric correction by a direct KKT solve in the original coordinates:
///   minimize ||(T - T_prev)[W]^q||_F  subject to  T[s] = y,  T symmetric.
/// The unknowns are the distinct entries of D = T - T_prev; every entry of the order q-1
/// secant residual is imposed as a separate (possibly redundant) equality.
inline Coeffs kkt_least_change(const Coeffs& t_prev, int n, int q, const Vec& s, const Coeffs& y, const Mat& w) {
  // Orbit indicator tensors of the nondecreasing multi-indices.
  std::vector<Coeffs> basis;
  const long total = ipow(n, q);
  for (long lin = 0; lin < total; ++lin) {
    const auto idx = digits(lin, n, q);
    if (!std::is_sorted(idx.begin(), idx.end())) continue;
    Coeffs e(static_cast<std::size_t>(total), 0.0);
    for (long other = 0; other < total; ++other) {
      auto j = digits(other, n, q);
      std::sort(j.begin(), j.end());
      if (j == idx) e[static_cast<std::size_t>(other)] = 1.0;
    }
    basis.push_back(std::move(e));
  }
  const int nb = static_cast<int>(basis.size());
  std::vector<Coeffs> weighted;
  for (const auto& e : basis) weighted.push_back(apply_matrix(e, n, q, w));
  Mat gram(nb, nb);
  for (int i = 0; i < nb; ++i) {
    for (int j = 0; j < nb; ++j) {
      double acc = 0.0;
      for (std::size_t k = 0; k < weighted[static_cast<std::size_t>(i)].size(); ++k) {
        acc += weighted[static_cast<std::size_t>(i)][k] * weighted[static_cast<std::size_t>(j)][k];
      }
      gram(i, j) = acc;
    }
  }
  const Coeffs residual = minus(y, contract(t_prev, n, q, s, 1));
  const int nc = static_cast<int>(residual.size());
  Mat a(nc, nb);
  for (int j = 0; j < nb; ++j) {
    const Coeffs col = contract(basis[static_cast<std::size_t>(j)], n, q, s, 1);
    for (int i = 0; i < nc; ++i) a(i, j) = col[static_cast<std::size_t>(i)];
  }
  Mat kkt = Mat::Zero(nb + nc, nb + nc);
  kkt.topLeftCorner(nb, nb) = 2.0 * gram;
  kkt.topRightCorner(nb, nc) = a.transpose();
  kkt.bottomLeftCorner(nc, nb) = a;
  Vec rhs = Vec::Zero(nb + nc);
  for (int i = 0; i < nc; ++i) rhs(nb + i) = residual[static_cast<std::size_t>(i)];
  const Vec sol = kkt.completeOrthogonalDecomposition().solve(rhs);
  Coeffs out = t_prev;
  for (int j = 0; j < nb; ++j) {
    for (std::size_t k = 0; k < out.size(); ++k) out[k] += sol(j) * basis[static_cast<std::size_t>(j)][k];
  }
  return out;
}

/// Powell-symmetric-Broyden update.
inline Mat psb(const Mat& b, const Vec& s, const Vec& y) {
  const Vec r = y - b * s;
  const double ss = s.squaredNorm();
  return b + (r * s.transpose() + s * r.transpose()) / ss - (r.dot(s)) * (s * s.transpose()) / (ss * ss);
}

/// Davidon-Fletcher-Powell update of the Hessian approximation.
inline Mat dfp(const Mat& b, const Vec& s, const Vec& y) {
  const double ys = y.dot(s);
  const Mat id = Mat::Identity(b.rows(), b.cols());
  const Mat left = id - y * s.transpose() / ys;
  return left * b * left.transpose() + y * y.transpose() / ys;
}

/// Bound on the condition number of the DFP weight for guard constants (mu, L) and floor sigma_bar.
inline double kappa_max(double mu, double L, double sigma_bar) {
  const double first = std::sqrt(1.0 / mu);
  const double second = std::sqrt(L + (sigma_bar + L * L) / mu) *
                        std::sqrt(std::max({1.0 / sigma_bar, 1.0, (sigma_bar + L * L) / (mu * sigma_bar)}));
  return std::max(first, second);
}

/// Largest |T[u]^q| over unit vectors sampled uniformly (a lower bound on the 2-norm).
inline double sampled_norm(const Coeffs& t, int n, int q, std::mt19937_64& rng, int samples) {
  double best = 0.0;
  for (int i = 0; i < samples; ++i) {
    Vec u = random_vector(rng, n);
    u.normalize();
    best = std::max(best, std::abs(full_contract(t, n, q, u)));
  }
  return best;
}

/// Derivative of a scalar function along e_i by a five-point central stencil.
template <typename F>
double central_diff(F f, const Vec& x, int i, double h) {
  Vec e = Vec::Zero(x.size());
  e(i) = h;
  return (-f(x + 2 * e) + 8 * f(x + e) - 8 * f(x - e) + f(x - 2 * e)) / (12 * h);
}

}  // namespace oracle
