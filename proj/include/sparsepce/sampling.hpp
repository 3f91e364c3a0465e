#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <cstring>
#include <istream>
#include <ostream>
#include <stdexcept>
#include <string>

#include "sparsepce/orthopoly.hpp"
#include "sparsepce/rng.hpp"

namespace sparsepce {

enum class Strategy {
  standard,
  coherence_optimal,
  near_optimal,
};

inline const char* strategy_name(Strategy s) {
  switch (s) {
    case Strategy::standard: return "standard";
    case Strategy::coherence_optimal: return "coherence-optimal";
    case Strategy::near_optimal: return "near-optimal";
  }
  return "?";
}

inline Strategy parse_strategy(const std::string& name) {
  if (name == "standard") return Strategy::standard;
  if (name == "coherence-optimal") return Strategy::coherence_optimal;
  if (name == "near-optimal") return Strategy::near_optimal;
  throw std::invalid_argument("unknown strategy: " + name);
}

/// M points in parameter space with their sampling weights. Weights are
/// identically one for standard ensembles and 1/B(point) otherwise.
struct SampleEnsemble {
  Eigen::MatrixXd points;   // M x d
  Eigen::VectorXd weights;  // M
  Strategy strategy = Strategy::standard;
  std::uint64_t seed = 0;
  Family family = Family::legendre;

  Eigen::Index size() const { return points.rows(); }
  Eigen::Index dim() const { return points.cols(); }
};

/// Markov-chain controls for coherence-optimal sampling. thinning == 0
/// means "use the basis dimension", which scales the decorrelation gap
/// with the number of inputs.
struct McmcConfig {
  int burn_in = 1000;
  int thinning = 0;

  int effective_thinning(int dim) const {
    if (burn_in < 0) throw std::invalid_argument("McmcConfig: burn_in must be >= 0");
    if (thinning < 0) throw std::invalid_argument("McmcConfig: thinning must be >= 1 (0 = auto)");
    return thinning == 0 ? dim : thinning;
  }
};

namespace detail {
inline void draw_from_measure(Family family, Rng& rng, Eigen::Ref<Eigen::VectorXd> out) {
  for (Eigen::Index i = 0; i < out.size(); ++i)
    out[i] = family == Family::legendre ? rng.uniform_pm1() : rng.normal();
}

/// Independence Metropolis-Hastings acceptance for target rho * B^2 with
/// proposal rho: the proposal density cancels, leaving the envelope ratio.
inline bool mh_accept(double b2_proposed, double b2_current, double u) {
  return u * b2_current <= b2_proposed;
}
}  // namespace detail

/// Independent draws from the family's own measure; all weights are one.
inline SampleEnsemble standard_sample(const Basis& basis, Eigen::Index count,
                                      std::uint64_t seed) {
  if (count < 1) throw std::invalid_argument("standard_sample: need at least one point");
  SampleEnsemble ensemble;
  ensemble.points.resize(count, basis.dim());
  ensemble.weights = Eigen::VectorXd::Ones(count);
  ensemble.strategy = Strategy::standard;
  ensemble.seed = seed;
  ensemble.family = basis.family();
  Rng rng(derive_seed(seed, Stream::standard_points));
  Eigen::VectorXd point(basis.dim());
  for (Eigen::Index i = 0; i < count; ++i) {
    detail::draw_from_measure(basis.family(), rng, point);
    ensemble.points.row(i) = point.transpose();
  }
  return ensemble;
}

/// Markov-chain draws from the coherence-optimal measure rho_o, which is
/// proportional to rho * B^2. The chain is independence Metropolis-Hastings
/// with the base measure rho as proposal, so each step accepts with
/// probability min(1, B^2(proposed) / B^2(current)); B >= 1 keeps every
/// ratio finite. States are retained every `thinning` steps once burn-in
/// has passed, and each retained point carries weight 1/B.
inline SampleEnsemble coherence_optimal_sample(const Basis& basis, Eigen::Index count,
                                               std::uint64_t seed,
                                               const McmcConfig& config = {}) {
  if (count < 1) throw std::invalid_argument("coherence_optimal_sample: need at least one point");
  const int gap = config.effective_thinning(basis.dim());

  SampleEnsemble ensemble;
  ensemble.points.resize(count, basis.dim());
  ensemble.weights.resize(count);
  ensemble.strategy = Strategy::coherence_optimal;
  ensemble.seed = seed;
  ensemble.family = basis.family();

  Rng rng(derive_seed(seed, Stream::chain));
  Eigen::VectorXd state(basis.dim());
  Eigen::VectorXd proposal(basis.dim());
  detail::draw_from_measure(basis.family(), rng, state);
  double envelope = basis.envelope(state);

  auto step = [&] {
    detail::draw_from_measure(basis.family(), rng, proposal);
    const double candidate = basis.envelope(proposal);
    if (detail::mh_accept(candidate * candidate, envelope * envelope, rng.uniform01())) {
      state.swap(proposal);
      envelope = candidate;
    }
  };

  for (int i = 0; i < config.burn_in; ++i) step();
  for (Eigen::Index m = 0; m < count; ++m) {
    for (int i = 0; i < gap; ++i) step();
    ensemble.points.row(m) = state.transpose();
    ensemble.weights[m] = 1.0 / envelope;
  }
  return ensemble;
}

/// Candidate pool for greedy selection: a coherence-optimal ensemble of
/// `pool_size` points.
inline SampleEnsemble build_pool(const Basis& basis, Eigen::Index pool_size,
                                 std::uint64_t seed, const McmcConfig& config = {}) {
  return coherence_optimal_sample(basis, pool_size, seed, config);
}

/// CSV: header xi1..xid,weight then one row per point, full precision.
inline void write_ensemble_csv(const SampleEnsemble& ensemble, std::ostream& out) {
  for (Eigen::Index j = 0; j < ensemble.dim(); ++j) out << "xi" << (j + 1) << ",";
  out << "weight\n";
  char buffer[32];
  for (Eigen::Index i = 0; i < ensemble.size(); ++i) {
    for (Eigen::Index j = 0; j < ensemble.dim(); ++j) {
      std::snprintf(buffer, sizeof buffer, "%.17g", ensemble.points(i, j));
      out << buffer << ',';
    }
    std::snprintf(buffer, sizeof buffer, "%.17g", ensemble.weights[i]);
    out << buffer << '\n';
  }
}

inline SampleEnsemble read_ensemble_csv(std::istream& in, Family family) {
  std::string line;
  if (!std::getline(in, line)) throw std::runtime_error("ensemble CSV: empty file");
  Eigen::Index dim = 0;
  for (std::size_t pos = 0; (pos = line.find(',', pos)) != std::string::npos; ++pos) ++dim;
  if (dim < 1) throw std::runtime_error("ensemble CSV: malformed header");
  std::vector<double> values;
  Eigen::Index rows = 0;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::size_t start = 0;
    for (Eigen::Index j = 0; j <= dim; ++j) {
      std::size_t end = line.find(',', start);
      values.push_back(std::stod(line.substr(start, end - start)));
      start = end == std::string::npos ? line.size() : end + 1;
    }
    ++rows;
  }
  SampleEnsemble ensemble;
  ensemble.family = family;
  ensemble.points.resize(rows, dim);
  ensemble.weights.resize(rows);
  for (Eigen::Index i = 0; i < rows; ++i) {
    for (Eigen::Index j = 0; j < dim; ++j)
      ensemble.points(i, j) = values[static_cast<std::size_t>(i * (dim + 1) + j)];
    ensemble.weights[i] = values[static_cast<std::size_t>(i * (dim + 1) + dim)];
  }
  bool weighted = false;
  for (Eigen::Index i = 0; i < rows; ++i)
    if (ensemble.weights[i] != 1.0) weighted = true;
  ensemble.strategy = weighted ? Strategy::coherence_optimal : Strategy::standard;
  return ensemble;
}

/// Binary pool cache: fixed header (family, d, k, M, seed, strategy) then
/// row-major points and the weight vector, little-endian 64-bit floats.
inline void write_ensemble_binary(const SampleEnsemble& ensemble, int order,
                                  std::ostream& out) {
  const char magic[4] = {'S', 'P', 'C', 'E'};
  out.write(magic, 4);
  auto put_u32 = [&](std::uint32_t v) { out.write(reinterpret_cast<const char*>(&v), 4); };
  auto put_u64 = [&](std::uint64_t v) { out.write(reinterpret_cast<const char*>(&v), 8); };
  put_u32(1);  // version
  put_u32(ensemble.family == Family::legendre ? 0u : 1u);
  put_u32(static_cast<std::uint32_t>(ensemble.dim()));
  put_u32(static_cast<std::uint32_t>(order));
  put_u64(static_cast<std::uint64_t>(ensemble.size()));
  put_u64(ensemble.seed);
  put_u32(static_cast<std::uint32_t>(ensemble.strategy));
  for (Eigen::Index i = 0; i < ensemble.size(); ++i)
    for (Eigen::Index j = 0; j < ensemble.dim(); ++j) {
      const double v = ensemble.points(i, j);
      out.write(reinterpret_cast<const char*>(&v), sizeof v);
    }
  out.write(reinterpret_cast<const char*>(ensemble.weights.data()),
            static_cast<std::streamsize>(sizeof(double)) * ensemble.weights.size());
}

inline SampleEnsemble read_ensemble_binary(std::istream& in, int* order_out = nullptr) {
  char magic[4];
  in.read(magic, 4);
  if (!in || std::memcmp(magic, "SPCE", 4) != 0)
    throw std::runtime_error("ensemble cache: bad magic");
  auto get_u32 = [&] {
    std::uint32_t v = 0;
    in.read(reinterpret_cast<char*>(&v), 4);
    return v;
  };
  auto get_u64 = [&] {
    std::uint64_t v = 0;
    in.read(reinterpret_cast<char*>(&v), 8);
    return v;
  };
  if (get_u32() != 1) throw std::runtime_error("ensemble cache: unknown version");
  SampleEnsemble ensemble;
  ensemble.family = get_u32() == 0 ? Family::legendre : Family::hermite;
  const auto dim = static_cast<Eigen::Index>(get_u32());
  const int order = static_cast<int>(get_u32());
  const auto count = static_cast<Eigen::Index>(get_u64());
  ensemble.seed = get_u64();
  ensemble.strategy = static_cast<Strategy>(get_u32());
  if (order_out) *order_out = order;
  ensemble.points.resize(count, dim);
  ensemble.weights.resize(count);
  for (Eigen::Index i = 0; i < count; ++i)
    for (Eigen::Index j = 0; j < dim; ++j) {
      double v = 0;
      in.read(reinterpret_cast<char*>(&v), sizeof v);
      ensemble.points(i, j) = v;
    }
  in.read(reinterpret_cast<char*>(ensemble.weights.data()),
          static_cast<std::streamsize>(sizeof(double)) * ensemble.weights.size());
  if (!in) throw std::runtime_error("ensemble cache: truncated");
  return ensemble;
}

}  // namespace sparsepce
