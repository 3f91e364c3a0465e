#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <set>
#include <sstream>

#include "sparsepce/greedy_select.hpp"
#include "sparsepce/sampling.hpp"
#include "sparsepce/stats.hpp"
#include "support/oracles.hpp"

using namespace sparsepce;

namespace {

Eigen::MatrixXd random_pool(Eigen::Index rows, Eigen::Index cols, std::uint64_t seed) {
  Rng rng(seed);
  Eigen::MatrixXd m(rows, cols);
  for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = rng.normal();
  return m;
}

/// From-scratch reimplementation of the per-step selection rule: rebuild
/// every candidate matrix from its rows and recompute both metrics with the
/// batch path.
std::vector<Eigen::Index> brute_force_select(const Eigen::MatrixXd& pool, Eigen::Index count,
                                             std::uint64_t seed) {
  const Eigen::Index pool_size = pool.rows();
  std::vector<Eigen::Index> chosen;
  std::vector<char> taken(static_cast<std::size_t>(pool_size), 0);

  Rng rng(derive_seed(seed, Stream::selection));
  const auto first = static_cast<Eigen::Index>(rng.below(static_cast<std::uint64_t>(pool_size)));
  chosen.push_back(first);
  taken[static_cast<std::size_t>(first)] = 1;

  auto metrics_of = [&](const std::vector<Eigen::Index>& rows, Eigen::Index extra) {
    Eigen::MatrixXd m(static_cast<Eigen::Index>(rows.size()) + 1, pool.cols());
    for (std::size_t i = 0; i < rows.size(); ++i) m.row(static_cast<Eigen::Index>(i)) = pool.row(rows[i]);
    m.row(static_cast<Eigen::Index>(rows.size())) = pool.row(extra);
    const MeasurementMatrix matrix(m, false);
    return std::pair{mutual_coherence(matrix), avg_cross_correlation(matrix)};
  };

  while (static_cast<Eigen::Index>(chosen.size()) < count) {
    std::vector<double> mu(static_cast<std::size_t>(pool_size),
                           std::numeric_limits<double>::quiet_NaN());
    std::vector<double> gamma(mu);
    double mu_min = 1e300, mu_max = -1e300, gamma_min = 1e300, gamma_max = -1e300;
    for (Eigen::Index j = 0; j < pool_size; ++j) {
      if (taken[static_cast<std::size_t>(j)]) continue;
      const auto [m, g] = metrics_of(chosen, j);
      mu[static_cast<std::size_t>(j)] = m;
      gamma[static_cast<std::size_t>(j)] = g;
      mu_min = std::min(mu_min, m);
      mu_max = std::max(mu_max, m);
      gamma_min = std::min(gamma_min, g);
      gamma_max = std::max(gamma_max, g);
    }
    Eigen::Index best = -1;
    double best_distance = 1e300;
    for (Eigen::Index j = 0; j < pool_size; ++j) {
      if (taken[static_cast<std::size_t>(j)]) continue;
      const double tm =
          mu_max > mu_min ? (mu[static_cast<std::size_t>(j)] - mu_min) / (mu_max - mu_min) : 0.0;
      const double tg = gamma_max > gamma_min
                            ? (gamma[static_cast<std::size_t>(j)] - gamma_min) / (gamma_max - gamma_min)
                            : 0.0;
      const double d = tm * tm + tg * tg;
      if (d < best_distance) {
        best_distance = d;
        best = j;
      }
    }
    chosen.push_back(best);
    taken[static_cast<std::size_t>(best)] = 1;
  }
  return chosen;
}

}  // namespace

TEST_CASE("selecting one row returns just the seeded random start") {
  const Eigen::MatrixXd pool = random_pool(9, 4, 1);
  const MeasurementMatrix matrix(pool, false);
  const SelectionResult result = near_optimal_select(matrix, 1, 5);
  REQUIRE(result.indices.size() == 1);
  REQUIRE(result.trajectory.size() == 1);

  Rng rng(derive_seed(5, Stream::selection));
  CHECK(result.indices[0] == static_cast<Eigen::Index>(rng.below(9)));
}

TEST_CASE("a candidate attaining both minima is always chosen") {
  // Pool of near-duplicates plus one orthogonal row; whatever the starting
  // row, the orthogonal candidate is the utopia point itself.
  Eigen::MatrixXd pool(4, 2);
  pool << 1, 0, 1, 0, 1, 0, 0, 1;
  const MeasurementMatrix matrix(pool, false);
  for (std::uint64_t seed = 0; seed < 8; ++seed) {
    const SelectionResult result = near_optimal_select(matrix, 2, seed);
    const bool started_orthogonal = result.indices[0] == 3;
    if (!started_orthogonal) {
      CHECK(result.indices[1] == 3);
      CHECK(result.trajectory[1].first == Catch::Approx(0.0).margin(1e-14));
    } else {
      // Any duplicate is equivalent; lowest index wins.
      CHECK(result.indices[1] == 0);
    }
  }
}

TEST_CASE("incremental selection equals the from-scratch oracle") {
  {
    const Eigen::MatrixXd pool = random_pool(5, 3, 17);
    const MeasurementMatrix matrix(pool, false);
    const SelectionResult fast = near_optimal_select(matrix, 3, 99);
    CHECK(fast.indices == brute_force_select(pool, 3, 99));
  }
  for (std::uint64_t seed : {2ULL, 3ULL, 4ULL}) {
    const Eigen::MatrixXd pool = random_pool(40, 8, seed);
    const MeasurementMatrix matrix(pool, false);
    const SelectionResult fast = near_optimal_select(matrix, 10, seed);
    CHECK(fast.indices == brute_force_select(pool, 10, seed));
  }
  {
    // Structured pool: basis rows at coherence-optimal points.
    const Basis basis(Family::legendre, 2, 4);
    const SampleEnsemble pool = build_pool(basis, 60, 7);
    const MeasurementMatrix matrix = assemble(pool, basis, true);
    const SelectionResult fast = near_optimal_select(matrix, 12, 7);
    CHECK(fast.indices == brute_force_select(matrix.entries(), 12, 7));
  }
}

TEST_CASE("selection is deterministic and duplicate-free") {
  const Eigen::MatrixXd pool = random_pool(30, 5, 8);
  const MeasurementMatrix matrix(pool, false);
  const SelectionResult a = near_optimal_select(matrix, 12, 3);
  const SelectionResult b = near_optimal_select(matrix, 12, 3);
  CHECK(a.indices == b.indices);
  CHECK(a.trajectory == b.trajectory);
  const std::set<Eigen::Index> unique(a.indices.begin(), a.indices.end());
  CHECK(unique.size() == a.indices.size());
  REQUIRE(a.trajectory.size() == 12);

  const SelectionResult other = near_optimal_select(matrix, 12, 4);
  CHECK(other.indices != a.indices);
}

TEST_CASE("trajectory reports the metrics of each grown prefix") {
  const Eigen::MatrixXd pool = random_pool(25, 6, 21);
  const MeasurementMatrix matrix(pool, false);
  const SelectionResult result = near_optimal_select(matrix, 8, 2);
  for (std::size_t step = 1; step < result.indices.size(); ++step) {
    Eigen::MatrixXd prefix(static_cast<Eigen::Index>(step) + 1, 6);
    for (std::size_t i = 0; i <= step; ++i)
      prefix.row(static_cast<Eigen::Index>(i)) = pool.row(result.indices[i]);
    const MeasurementMatrix direct(prefix, false);
    CHECK(result.trajectory[step].first ==
          Catch::Approx(mutual_coherence(direct)).margin(1e-10));
    CHECK(result.trajectory[step].second ==
          Catch::Approx(avg_cross_correlation(direct)).margin(1e-10));
  }
}

TEST_CASE("no strictly dominating candidate is rejected at the chosen distance") {
  const Eigen::MatrixXd pool = random_pool(35, 5, 31);
  const MeasurementMatrix matrix(pool, false);
  const SelectionResult result = near_optimal_select(matrix, 10, 11);

  // Replay each step, recomputing every candidate's raw objectives.
  GramState state(matrix.cols());
  const Eigen::MatrixXd rows_t = pool.transpose();
  std::vector<char> taken(35, 0);
  state.append_row(rows_t.col(result.indices[0]));
  taken[static_cast<std::size_t>(result.indices[0])] = 1;
  for (std::size_t step = 1; step < result.indices.size(); ++step) {
    const Eigen::Index chosen = result.indices[step];
    const auto [mu_star, gamma_star] = state.append_metrics(rows_t.col(chosen));
    for (Eigen::Index j = 0; j < 35; ++j) {
      if (taken[static_cast<std::size_t>(j)] || j == chosen) continue;
      const auto [mu_j, gamma_j] = state.append_metrics(rows_t.col(j));
      const bool dominates = mu_j <= mu_star && gamma_j <= gamma_star &&
                             (mu_j < mu_star || gamma_j < gamma_star);
      CHECK_FALSE(dominates);
    }
    state.append_row(rows_t.col(chosen));
    taken[static_cast<std::size_t>(chosen)] = 1;
  }
}

TEST_CASE("selection rejects impossible requests") {
  const Eigen::MatrixXd pool = random_pool(5, 3, 41);
  const MeasurementMatrix matrix(pool, false);
  CHECK_THROWS_AS(near_optimal_select(matrix, 6, 1), std::invalid_argument);
  CHECK_THROWS_AS(near_optimal_select(matrix, 0, 1), std::invalid_argument);
}

TEST_CASE("greedy selections beat random coherence-optimal subsets on average") {
  const Basis basis(Family::legendre, 2, 6);  // 28 columns
  const Eigen::Index pool_size = 400;
  const Eigen::Index m = 14;
  std::vector<double> greedy_mu, greedy_gamma, random_mu, random_gamma;
  for (std::uint64_t rep = 0; rep < 20; ++rep) {
    const SampleEnsemble pool = build_pool(basis, pool_size, derive_seed(91, Stream::pool, rep));
    const MeasurementMatrix pool_matrix = assemble(pool, basis, true);
    const SelectionResult selection = near_optimal_select(pool_matrix, m, rep);
    greedy_mu.push_back(selection.trajectory.back().first);
    greedy_gamma.push_back(selection.trajectory.back().second);

    const SampleEnsemble direct =
        coherence_optimal_sample(basis, m, derive_seed(91, Stream::trial, rep));
    const MeasurementMatrix direct_matrix = assemble(direct, basis, true);
    random_mu.push_back(mutual_coherence(direct_matrix));
    random_gamma.push_back(avg_cross_correlation(direct_matrix));
  }
  CHECK(quantile(greedy_mu, 0.5) <= quantile(random_mu, 0.5));
  CHECK(quantile(greedy_gamma, 0.5) <= quantile(random_gamma, 0.5));
}

TEST_CASE("selection csv lists one row per step") {
  const Eigen::MatrixXd pool = random_pool(6, 3, 3);
  const MeasurementMatrix matrix(pool, false);
  const SelectionResult result = near_optimal_select(matrix, 2, 1);
  std::ostringstream out;
  result.write_csv(out);
  const std::string text = out.str();
  CHECK(text.rfind("step,pool_index,mu,gamma\n", 0) == 0);
  CHECK(std::count(text.begin(), text.end(), '\n') == 3);
}
