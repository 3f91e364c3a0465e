#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <ostream>
#include <stdexcept>
#include <vector>

#include "sparsepce/measurement_matrix.hpp"
#include "sparsepce/rng.hpp"

namespace sparsepce {

/// Outcome of a greedy near-optimal selection: the chosen pool rows in
/// selection order and the (mu, gamma) of the growing matrix after each
/// step.
struct SelectionResult {
  std::vector<Eigen::Index> indices;
  std::vector<std::pair<double, double>> trajectory;
  std::uint64_t seed = 0;

  void write_csv(std::ostream& out) const {
    out << "step,pool_index,mu,gamma\n";
    char buffer[32];
    for (std::size_t s = 0; s < indices.size(); ++s) {
      out << (s + 1) << ',' << indices[s] << ',';
      std::snprintf(buffer, sizeof buffer, "%.17g", trajectory[s].first);
      out << buffer << ',';
      std::snprintf(buffer, sizeof buffer, "%.17g", trajectory[s].second);
      out << buffer << '\n';
    }
  }
};

/// Greedy selection of `count` rows from a candidate pool so that the grown
/// matrix keeps both the mutual coherence and the average cross-correlation
/// small. The pool rows are expected to be weight-premultiplied.
///
/// The first row is drawn uniformly from the pool. Each later step scores
/// every remaining candidate by the (mu', gamma') its row would produce,
/// normalizes both objectives to [0, 1] across the sweep, and keeps the
/// candidate closest to the utopia point (min mu', min gamma'):
///
///   j* = argmin_j [(mu'_j - min mu') / (max mu' - min mu')]^2
///               + [(gamma'_j - min gamma') / (max gamma' - min gamma')]^2
///
/// When an objective is flat across the sweep its normalized term carries
/// no information and is taken as zero. Ties go to the lowest candidate
/// index, and chosen rows leave the pool, so a selection never contains
/// duplicates.
inline SelectionResult near_optimal_select(const MeasurementMatrix& pool, Eigen::Index count,
                                           std::uint64_t seed) {
  const Eigen::Index pool_size = pool.rows();
  if (pool_size < 1) throw std::invalid_argument("near_optimal_select: empty pool");
  if (count < 1 || count > pool_size)
    throw std::invalid_argument("near_optimal_select: count outside [1, pool size]");

  SelectionResult result;
  result.seed = seed;
  result.indices.reserve(static_cast<std::size_t>(count));
  result.trajectory.reserve(static_cast<std::size_t>(count));

  // Candidate rows as contiguous columns; the scan reads them constantly.
  const Eigen::MatrixXd rows_t = pool.entries().transpose();

  std::vector<char> taken(static_cast<std::size_t>(pool_size), 0);
  GramState state(pool.cols());

  Rng rng(derive_seed(seed, Stream::selection));
  const auto first = static_cast<Eigen::Index>(rng.below(static_cast<std::uint64_t>(pool_size)));
  result.trajectory.push_back(state.append_metrics(rows_t.col(first)));
  state.append_row(rows_t.col(first));
  result.indices.push_back(first);
  taken[static_cast<std::size_t>(first)] = 1;

  std::vector<double> mu(static_cast<std::size_t>(pool_size));
  std::vector<double> gamma(static_cast<std::size_t>(pool_size));

  for (Eigen::Index step = 1; step < count; ++step) {
    double mu_min = std::numeric_limits<double>::infinity(), mu_max = 0.0;
    double gamma_min = std::numeric_limits<double>::infinity(), gamma_max = 0.0;
    for (Eigen::Index j = 0; j < pool_size; ++j) {
      if (taken[static_cast<std::size_t>(j)]) continue;
      const auto [m, g] = state.append_metrics(rows_t.col(j));
      mu[static_cast<std::size_t>(j)] = m;
      gamma[static_cast<std::size_t>(j)] = g;
      mu_min = std::min(mu_min, m);
      mu_max = std::max(mu_max, m);
      gamma_min = std::min(gamma_min, g);
      gamma_max = std::max(gamma_max, g);
    }
    const double mu_span = mu_max - mu_min;
    const double gamma_span = gamma_max - gamma_min;

    Eigen::Index best = -1;
    double best_distance = std::numeric_limits<double>::infinity();
    for (Eigen::Index j = 0; j < pool_size; ++j) {
      if (taken[static_cast<std::size_t>(j)]) continue;
      const double tm = mu_span > 0.0 ? (mu[static_cast<std::size_t>(j)] - mu_min) / mu_span : 0.0;
      const double tg =
          gamma_span > 0.0 ? (gamma[static_cast<std::size_t>(j)] - gamma_min) / gamma_span : 0.0;
      const double distance = tm * tm + tg * tg;
      if (distance < best_distance) {
        best_distance = distance;
        best = j;
      }
    }

    result.trajectory.emplace_back(mu[static_cast<std::size_t>(best)],
                                   gamma[static_cast<std::size_t>(best)]);
    state.append_row(rows_t.col(best));
    result.indices.push_back(best);
    taken[static_cast<std::size_t>(best)] = 1;
  }
  return result;
}

/// Ensemble view of a selection: the chosen pool points and weights, in
/// selection order.
inline SampleEnsemble select_ensemble(const SampleEnsemble& pool, const SelectionResult& result) {
  SampleEnsemble out;
  out.family = pool.family;
  out.seed = result.seed;
  out.strategy = Strategy::near_optimal;
  out.points.resize(static_cast<Eigen::Index>(result.indices.size()), pool.dim());
  out.weights.resize(static_cast<Eigen::Index>(result.indices.size()));
  for (std::size_t s = 0; s < result.indices.size(); ++s) {
    out.points.row(static_cast<Eigen::Index>(s)) = pool.points.row(result.indices[s]);
    out.weights[static_cast<Eigen::Index>(s)] = pool.weights[result.indices[s]];
  }
  return out;
}

}  // namespace sparsepce
