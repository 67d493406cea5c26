#include "arp/rates.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace arp {

double least_squares_slope(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size()) throw DimensionError("least_squares_slope: length mismatch");
  if (x.size() < 2) throw Error("least_squares_slope: need at least two points");
  const double n = static_cast<double>(x.size());
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= n;
  my /= n;
  double sxy = 0.0, sxx = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxy += (x[i] - mx) * (y[i] - my);
    sxx += (x[i] - mx) * (x[i] - mx);
  }
  if (sxx == 0.0) throw Error("least_squares_slope: abscissae are all equal");
  return sxy / sxx;
}

MannKendall mann_kendall(std::span<const double> series) {
  MannKendall mk;
  mk.n = series.size();
  double scale = 0.0;
  for (double v : series) scale = std::max(scale, std::abs(v));
  const double tie = kMannKendallTieTolerance * scale;
  for (std::size_t i = 0; i < series.size(); ++i) {
    for (std::size_t j = i + 1; j < series.size(); ++j) {
      const double d = series[j] - series[i];
      mk.s += static_cast<double>((d > tie) - (d < -tie));
    }
  }
  const double n = static_cast<double>(mk.n);
  const double var = n * (n - 1.0) * (2.0 * n + 5.0) / 18.0;
  if (var > 0.0) {
    if (mk.s > 0.0) mk.z = (mk.s - 1.0) / std::sqrt(var);
    else if (mk.s < 0.0) mk.z = (mk.s + 1.0) / std::sqrt(var);
  }
  return mk;
}

namespace {

std::size_t tail_start(std::size_t count, double tail_fraction) {
  if (!(tail_fraction > 0.0 && tail_fraction <= 1.0)) throw Error("tail fraction must lie in (0, 1]");
  const auto keep = static_cast<std::size_t>(std::ceil(tail_fraction * static_cast<double>(count)));
  return count - std::min(count, std::max<std::size_t>(keep, 1));
}

}  // namespace

TailStatistic tail_statistic(std::span<const double> values, double exponent, double tail_fraction) {
  TailStatistic st;
  if (values.size() < 2) return st;
  std::vector<double> running(values.size());
  double m = std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; k < values.size(); ++k) {
    m = std::min(m, values[k]);
    running[k] = m;
  }
  const std::size_t first = 1 + tail_start(values.size() - 1, tail_fraction);
  for (std::size_t k = first; k < values.size(); ++k) {
    st.k.push_back(static_cast<long>(k));
    st.q.push_back(running[k] * std::pow(static_cast<double>(k), exponent));
  }
  st.sup = st.q.empty() ? 0.0 : *std::max_element(st.q.begin(), st.q.end());
  st.trend = mann_kendall(st.q);
  return st;
}

RateReport fit_rates(const std::vector<TraceRow>& rows, int p, double tail_fraction, std::size_t min_length) {
  if (p < 2) throw Error("fit_rates: p must be at least 2");
  if (rows.size() < min_length) {
    throw Error("fit_rates: trace has " + std::to_string(rows.size()) + " rows, need " + std::to_string(min_length));
  }
  RateReport report;
  report.points = rows.size();
  std::vector<double> grad(rows.size()), curv(rows.size());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    grad[i] = rows[i].grad_norm;
    curv[i] = rows[i].beta.value_or(rows[i].chi);
  }
  const double pd = static_cast<double>(p);
  report.grad_bound = tail_statistic(grad, pd / (pd + 1.0), tail_fraction);
  report.curvature_bound = tail_statistic(curv, (pd - 1.0) / (pd + 1.0), tail_fraction);
  report.tail_points = report.grad_bound.k.size();

  auto slope_of = [&](const TailStatistic& st, double exponent) -> std::optional<double> {
    std::vector<double> lx, ly;
    for (std::size_t i = 0; i < st.k.size(); ++i) {
      const double kk = static_cast<double>(st.k[i]);
      const double running = st.q[i] / std::pow(kk, exponent);
      if (!(running > 0.0)) return std::nullopt;
      lx.push_back(std::log(kk));
      ly.push_back(std::log(running));
    }
    if (lx.size() < 2) return std::nullopt;
    return least_squares_slope(lx, ly);
  };
  report.grad_slope = slope_of(report.grad_bound, pd / (pd + 1.0)).value_or(-std::numeric_limits<double>::infinity());
  report.curvature_slope = slope_of(report.curvature_bound, (pd - 1.0) / (pd + 1.0));
  return report;
}

double fit_iteration_exponent(std::span<const double> eps, std::span<const double> iterations) {
  if (eps.size() != iterations.size()) throw DimensionError("fit_iteration_exponent: length mismatch");
  std::vector<double> lx, ly;
  for (std::size_t i = 0; i < eps.size(); ++i) {
    if (!(eps[i] > 0.0) || !(iterations[i] > 0.0)) throw Error("fit_iteration_exponent: values must be positive");
    lx.push_back(-std::log(eps[i]));
    ly.push_back(std::log(iterations[i]));
  }
  return least_squares_slope(lx, ly);
}

double eps1_exponent(int p) { return (p + 1.0) / p; }
double eps2_exponent(int p) { return (p + 1.0) / (p - 1.0); }

}  // namespace arp
