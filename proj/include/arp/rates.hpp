#pragma once

#include "arp/driver.hpp"

#include <optional>
#include <span>
#include <vector>

namespace arp {

/// Ordinary least-squares slope of y against x.
double least_squares_slope(std::span<const double> x, std::span<const double> y);

struct MannKendall {
  double s = 0.0;  // sum of sign(x_j - x_i) over i < j
  double z = 0.0;  // normal approximation, continuity corrected
  std::size_t n = 0;
};

/// Differences within this fraction of the largest |value| count as ties.
inline constexpr double kMannKendallTieTolerance = 1e-12;

MannKendall mann_kendall(std::span<const double> series);

/// Products q_k = min_{j<=k} v_j * k^exponent for k >= 1, restricted to the tail.
struct TailStatistic {
  std::vector<long> k;
  std::vector<double> q;
  double sup = 0.0;
  MannKendall trend;
};

/// `values[k]` is the measure at iterate k; the tail keeps the last `tail_fraction` of k >= 1.
TailStatistic tail_statistic(std::span<const double> values, double exponent, double tail_fraction);

struct RateReport {
  std::size_t points = 0;     // rows in the trace
  std::size_t tail_points = 0;
  double grad_slope = 0.0;    // log-log slope of min ||g_j|| against k over the tail
  TailStatistic grad_bound;   // exponent p/(p+1)
  std::optional<double> curvature_slope;  // absent when the tail minima include zeros
  TailStatistic curvature_bound;          // exponent (p-1)/(p+1), on beta when logged, else chi
};

/// Throws Error when the trace has fewer than `min_length` rows.
RateReport fit_rates(const std::vector<TraceRow>& rows, int p, double tail_fraction = 0.5,
                     std::size_t min_length = 50);

/// Slope of log(iterations) against log(1/eps).
double fit_iteration_exponent(std::span<const double> eps, std::span<const double> iterations);

/// Worst-case exponents of the iteration bound in eps1 and eps2.
double eps1_exponent(int p);
double eps2_exponent(int p);

}  // namespace arp
