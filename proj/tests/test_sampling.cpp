#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <sstream>

#include "sparsepce/sampling.hpp"
#include "support/oracles.hpp"

using namespace sparsepce;

TEST_CASE("standard sampling is reproducible bit for bit") {
  const Basis basis(Family::legendre, 2, 3);
  const SampleEnsemble a = standard_sample(basis, 3, 77);
  const SampleEnsemble b = standard_sample(basis, 3, 77);
  CHECK(a.points == b.points);
  CHECK(a.weights == b.weights);
  const SampleEnsemble c = standard_sample(basis, 3, 78);
  CHECK(a.points != c.points);
}

TEST_CASE("standard sampling matches its distribution at scale") {
  {
    const Basis basis(Family::legendre, 1, 2);
    const SampleEnsemble ensemble = standard_sample(basis, 100000, 5);
    const double mean = ensemble.points.col(0).mean();
    const double sigma = 1.0 / std::sqrt(3.0);
    CHECK(std::abs(mean) < 3.0 * sigma / std::sqrt(100000.0));
    CHECK(ensemble.points.minCoeff() >= -1.0);
    CHECK(ensemble.points.maxCoeff() <= 1.0);
    CHECK((ensemble.weights.array() == 1.0).all());
  }
  {
    const Basis basis(Family::hermite, 1, 2);
    const SampleEnsemble ensemble = standard_sample(basis, 100000, 5);
    const double mean = ensemble.points.col(0).mean();
    const double variance =
        (ensemble.points.col(0).array() - mean).square().sum() / 100000.0;
    CHECK(std::abs(variance - 1.0) < 0.05);
  }
}

TEST_CASE("acceptance ratio is one when the envelope is flat") {
  CHECK(detail::mh_accept(1.0, 1.0, 0.9999999));
  CHECK(detail::mh_accept(4.0, 1.0, 0.2));
  CHECK_FALSE(detail::mh_accept(1.0, 4.0, 0.5));

  // With order zero the target collapses to the base measure and every
  // retained weight is exactly one.
  const Basis basis(Family::legendre, 1, 0);
  const SampleEnsemble ensemble = coherence_optimal_sample(basis, 100000, 3);
  CHECK((ensemble.weights.array() == 1.0).all());
  std::vector<double> samples(ensemble.points.col(0).data(),
                              ensemble.points.col(0).data() + ensemble.size());
  const double ks =
      testsupport::ks_statistic(samples, [](double x) { return (x + 1.0) / 2.0; });
  CHECK(ks < 0.01);
}

TEST_CASE("chain draws follow the coherence-optimal density in one dimension") {
  const Basis basis(Family::legendre, 1, 2);
  const testsupport::Density1D oracle(basis);
  const SampleEnsemble ensemble = coherence_optimal_sample(basis, 100000, 11);

  std::vector<double> samples(ensemble.points.col(0).data(),
                              ensemble.points.col(0).data() + ensemble.size());
  const double ks =
      testsupport::ks_statistic(samples, [&](double x) { return oracle.cdf(x); });
  CHECK(ks < 0.01);

  // Chi-squared against the numerically normalized target over 50 bins;
  // 74.919 is the 0.99 quantile at 49 degrees of freedom.
  const int bins = 50;
  std::vector<double> observed(bins, 0.0);
  for (double x : samples) {
    int b = static_cast<int>((x + 1.0) / 2.0 * bins);
    if (b == bins) b = bins - 1;
    observed[static_cast<std::size_t>(b)] += 1.0;
  }
  double statistic = 0.0;
  for (int b = 0; b < bins; ++b) {
    const double lo = -1.0 + 2.0 * b / bins;
    const double hi = -1.0 + 2.0 * (b + 1) / bins;
    const double expected = oracle.bin_mass(lo, hi) * static_cast<double>(samples.size());
    statistic += (observed[static_cast<std::size_t>(b)] - expected) *
                 (observed[static_cast<std::size_t>(b)] - expected) / expected;
  }
  CHECK(statistic < 74.919);
}

TEST_CASE("every chain weight is the exact reciprocal envelope") {
  const Basis basis(Family::legendre, 1, 2);
  const SampleEnsemble ensemble = coherence_optimal_sample(basis, 500, 21);
  for (Eigen::Index i = 0; i < ensemble.size(); ++i) {
    CHECK(ensemble.weights[i] == 1.0 / basis.envelope(ensemble.points.row(i).transpose()));
    CHECK(ensemble.weights[i] > 0.0);
    CHECK(ensemble.weights[i] <= 1.0);
  }
}

TEST_CASE("pool generation is deterministic and sized as asked") {
  const Basis basis(Family::legendre, 2, 4);
  const SampleEnsemble pool = build_pool(basis, 100, 9);
  CHECK(pool.size() == 100);
  CHECK(pool.strategy == Strategy::coherence_optimal);
  const SampleEnsemble again = build_pool(basis, 100, 9);
  CHECK(pool.points == again.points);
  CHECK(pool.weights == again.weights);
}

TEST_CASE("coherence-optimal pools concentrate on high-envelope regions") {
  const Basis basis(Family::legendre, 2, 20);
  const Eigen::Index count = 10000;
  const SampleEnsemble pool = build_pool(basis, count, 13);
  const SampleEnsemble flat = standard_sample(basis, count, 13);
  double pool_mean = 0.0, flat_mean = 0.0;
  for (Eigen::Index i = 0; i < count; ++i) {
    pool_mean += basis.envelope(pool.points.row(i).transpose());
    flat_mean += basis.envelope(flat.points.row(i).transpose());
  }
  CHECK(pool_mean / count > flat_mean / count);
}

TEST_CASE("config validation") {
  McmcConfig config;
  config.burn_in = -1;
  CHECK_THROWS_AS(config.effective_thinning(3), std::invalid_argument);
  config.burn_in = 0;
  config.thinning = -2;
  CHECK_THROWS_AS(config.effective_thinning(3), std::invalid_argument);
  config.thinning = 0;
  CHECK(config.effective_thinning(7) == 7);
  config.thinning = 4;
  CHECK(config.effective_thinning(7) == 4);
  const Basis basis(Family::legendre, 1, 1);
  CHECK_THROWS_AS(standard_sample(basis, 0, 1), std::invalid_argument);
  CHECK_THROWS_AS(coherence_optimal_sample(basis, 0, 1), std::invalid_argument);
}

TEST_CASE("csv round trip preserves points and weights") {
  const Basis basis(Family::legendre, 3, 2);
  const SampleEnsemble ensemble = coherence_optimal_sample(basis, 25, 31);
  std::stringstream stream;
  write_ensemble_csv(ensemble, stream);
  const SampleEnsemble loaded = read_ensemble_csv(stream, Family::legendre);
  REQUIRE(loaded.size() == ensemble.size());
  REQUIRE(loaded.dim() == ensemble.dim());
  CHECK(loaded.points == ensemble.points);
  CHECK(loaded.weights == ensemble.weights);
}

TEST_CASE("binary cache round trip preserves the header and payload") {
  const Basis basis(Family::hermite, 2, 3);
  const SampleEnsemble ensemble = coherence_optimal_sample(basis, 40, 17);
  std::stringstream stream(std::ios::in | std::ios::out | std::ios::binary);
  write_ensemble_binary(ensemble, basis.order(), stream);
  int order = -1;
  const SampleEnsemble loaded = read_ensemble_binary(stream, &order);
  CHECK(order == 3);
  CHECK(loaded.family == Family::hermite);
  CHECK(loaded.seed == ensemble.seed);
  CHECK(loaded.strategy == Strategy::coherence_optimal);
  CHECK(loaded.points == ensemble.points);
  CHECK(loaded.weights == ensemble.weights);
}
