#pragma once

#include "arp/tensor.hpp"
#include "oracles.hpp"

inline oracle::Coeffs coeffs(const arp::SymTensor& t) { return {t.entries().begin(), t.entries().end()}; }
inline oracle::Coeffs coeffs(const arp::DenseTensor& t) { return {t.entries().begin(), t.entries().end()}; }

inline arp::SymTensor sym(const oracle::Coeffs& c, int n, int q) {
  return arp::SymTensor::from_dense(arp::DenseTensor(q, n, c), 1e-10);
}

inline double max_diff(const oracle::Coeffs& a, const oracle::Coeffs& b) {
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
  return m;
}
