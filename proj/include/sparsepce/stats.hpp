#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <vector>

namespace sparsepce {

/// ||c - reference||_2 / ||reference||_2.
inline double relative_coeff_error(const Eigen::Ref<const Eigen::VectorXd>& c,
                                   const Eigen::Ref<const Eigen::VectorXd>& reference) {
  if (c.size() != reference.size())
    throw std::invalid_argument("relative_coeff_error: length mismatch");
  const double denom = reference.norm();
  if (denom == 0.0) throw std::invalid_argument("relative_coeff_error: zero reference");
  return (c - reference).norm() / denom;
}

/// Same ratio over predicted vs exact values at validation points.
inline double relative_validation_error(const Eigen::Ref<const Eigen::VectorXd>& predicted,
                                        const Eigen::Ref<const Eigen::VectorXd>& exact) {
  if (predicted.size() != exact.size())
    throw std::invalid_argument("relative_validation_error: length mismatch");
  if (predicted.size() == 0) throw std::invalid_argument("relative_validation_error: empty");
  const double denom = exact.norm();
  if (denom == 0.0) throw std::invalid_argument("relative_validation_error: zero exact vector");
  return (predicted - exact).norm() / denom;
}

/// Fraction of entries strictly below the threshold.
inline double success_rate(const std::vector<double>& errors, double threshold) {
  if (errors.empty()) throw std::invalid_argument("success_rate: empty list");
  std::size_t successes = 0;
  for (double e : errors)
    if (e < threshold) ++successes;
  return static_cast<double>(successes) / static_cast<double>(errors.size());
}

struct QuantileSummary {
  double q25 = 0.0;
  double median = 0.0;
  double q75 = 0.0;
  double mean = 0.0;
};

/// Linear-interpolation quantile estimator: the p-quantile of n sorted
/// values sits at rank (n-1)p, interpolated between neighbours.
inline double quantile(std::vector<double> values, double p) {
  if (values.empty()) throw std::invalid_argument("quantile: empty list");
  std::sort(values.begin(), values.end());
  const double rank = p * static_cast<double>(values.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(rank));
  const auto hi = static_cast<std::size_t>(std::ceil(rank));
  const double frac = rank - std::floor(rank);
  return values[lo] + frac * (values[hi] - values[lo]);
}

inline QuantileSummary quantile_summary(const std::vector<double>& values) {
  if (values.empty()) throw std::invalid_argument("quantile_summary: empty list");
  QuantileSummary s;
  std::vector<double> sorted = values;
  std::sort(sorted.begin(), sorted.end());
  auto at = [&](double p) {
    const double rank = p * static_cast<double>(sorted.size() - 1);
    const auto lo = static_cast<std::size_t>(std::floor(rank));
    const auto hi = static_cast<std::size_t>(std::ceil(rank));
    return sorted[lo] + (rank - std::floor(rank)) * (sorted[hi] - sorted[lo]);
  };
  s.q25 = at(0.25);
  s.median = at(0.50);
  s.q75 = at(0.75);
  double total = 0.0;
  for (double v : sorted) total += v;
  s.mean = total / static_cast<double>(sorted.size());
  return s;
}

}  // namespace sparsepce
