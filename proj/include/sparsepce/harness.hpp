#pragma once

#include <Eigen/Dense>
#include <atomic>
#include <cctype>
#include <chrono>
#include <cstdint>
#include <cstdlib>
#include <fstream>
#include <istream>
#include <limits>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <json.hpp>

#include "sparsepce/benchmarks.hpp"
#include "sparsepce/greedy_select.hpp"
#include "sparsepce/measurement_matrix.hpp"
#include "sparsepce/sampling.hpp"
#include "sparsepce/spgl1.hpp"
#include "sparsepce/stats.hpp"

namespace sparsepce {

/// Whether near-optimal trials draw a fresh candidate pool per trial
/// (capturing pool-finiteness variability) or share one pool for speed.
enum class PoolMode { per_trial, shared };

inline const char* pool_mode_name(PoolMode m) {
  return m == PoolMode::per_trial ? "per-trial" : "shared";
}

/// Full description of one experiment sweep.
struct ExperimentConfig {
  Problem problem = Problem::poly20d;
  Strategy strategy = Strategy::near_optimal;
  std::vector<Eigen::Index> m_grid;
  int trials = 100;
  std::uint64_t master_seed = 0;
  Eigen::Index pool_size = 10000;
  McmcConfig mcmc{};
  SolverOptions solver{};
  double epsilon = 0.0;
  double success_threshold = 1e-7;
  PoolMode pool_mode = PoolMode::per_trial;
  int diffusion_cells = 512;
  int workers = 1;

  void validate() const {
    if (trials < 1) throw std::invalid_argument("config: trials must be >= 1");
    if (m_grid.empty()) throw std::invalid_argument("config: m_grid must be non-empty");
    for (std::size_t i = 1; i < m_grid.size(); ++i)
      if (m_grid[i] <= m_grid[i - 1])
        throw std::invalid_argument("config: m_grid must be strictly increasing");
    if (m_grid.front() < 1) throw std::invalid_argument("config: sample sizes must be >= 1");
    if (success_threshold <= 0.0)
      throw std::invalid_argument("config: success threshold must be > 0");
    if (pool_size < m_grid.back() && strategy == Strategy::near_optimal)
      throw std::invalid_argument("config: pool smaller than largest sample size");
    if (epsilon < 0.0) throw std::invalid_argument("config: epsilon must be >= 0");
  }
};

/// One recovery experiment: which strategy and sample size produced it,
/// what came out of the solver, and the matrix quality it saw. A failed
/// trial carries an infinite error and converged = false.
struct TrialRecord {
  Problem problem = Problem::poly20d;
  Strategy strategy = Strategy::standard;
  Eigen::Index m = 0;
  int trial = 0;
  double relative_error = std::numeric_limits<double>::infinity();
  double mu = 0.0;
  double gamma = 0.0;
  int iterations = 0;
  bool converged = false;
  double wall_seconds = 0.0;
};

/// Deterministic CSV of a sweep. Wall time stays out of the file so that
/// identical configurations produce byte-identical output.
inline void write_records_csv(const std::vector<TrialRecord>& records, std::ostream& out) {
  out << "problem,strategy,m,trial,rel_error,mu,gamma,iterations,converged\n";
  char buffer[32];
  for (const auto& r : records) {
    out << problem_name(r.problem) << ',' << strategy_name(r.strategy) << ',' << r.m << ','
        << r.trial << ',';
    std::snprintf(buffer, sizeof buffer, "%.17g", r.relative_error);
    out << buffer << ',';
    std::snprintf(buffer, sizeof buffer, "%.17g", r.mu);
    out << buffer << ',';
    std::snprintf(buffer, sizeof buffer, "%.17g", r.gamma);
    out << buffer << ',' << r.iterations << ',' << (r.converged ? 1 : 0) << '\n';
  }
}

inline nlohmann::json config_json(const ExperimentConfig& config) {
  nlohmann::json j;
  j["problem"] = problem_name(config.problem);
  j["strategy"] = strategy_name(config.strategy);
  j["m_grid"] = config.m_grid;
  j["trials"] = config.trials;
  j["master_seed"] = config.master_seed;
  j["pool_size"] = config.pool_size;
  j["burn_in"] = config.mcmc.burn_in;
  j["thinning"] = config.mcmc.thinning;
  j["epsilon"] = config.epsilon;
  j["success_threshold"] = config.success_threshold;
  j["pool_mode"] = pool_mode_name(config.pool_mode);
  j["diffusion_cells"] = config.diffusion_cells;
  j["opt_tol"] = config.solver.opt_tol;
  j["bp_tol"] = config.solver.bp_tol;
  j["dec_tol"] = config.solver.dec_tol;
  j["max_iters"] = config.solver.max_iters;
  j["workers"] = config.workers;
  return j;
}

/// Flat key = value configuration file; '#' starts a comment. Unknown keys
/// are rejected. SPARSEPCE_SEED and SPARSEPCE_WORKERS in the environment
/// override the file.
inline ExperimentConfig parse_config(std::istream& in) {
  ExperimentConfig config;
  std::string line;
  int line_number = 0;
  while (std::getline(in, line)) {
    ++line_number;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.resize(hash);
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      bool blank = true;
      for (char c : line)
        if (!std::isspace(static_cast<unsigned char>(c))) blank = false;
      if (blank) continue;
      throw std::invalid_argument("config line " + std::to_string(line_number) +
                                  ": expected key = value");
    }
    auto trim = [](std::string s) {
      const auto first = s.find_first_not_of(" \t\r");
      const auto last = s.find_last_not_of(" \t\r");
      if (first == std::string::npos) return std::string{};
      return s.substr(first, last - first + 1);
    };
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    try {
      if (key == "problem") {
        config.problem = parse_problem(value);
      } else if (key == "strategy") {
        config.strategy = parse_strategy(value);
      } else if (key == "m_grid") {
        config.m_grid.clear();
        std::stringstream ss(value);
        std::string item;
        while (std::getline(ss, item, ','))
          config.m_grid.push_back(static_cast<Eigen::Index>(std::stoll(item)));
      } else if (key == "trials") {
        config.trials = std::stoi(value);
      } else if (key == "master_seed") {
        config.master_seed = std::stoull(value);
      } else if (key == "pool_size") {
        config.pool_size = static_cast<Eigen::Index>(std::stoll(value));
      } else if (key == "burn_in") {
        config.mcmc.burn_in = std::stoi(value);
      } else if (key == "thinning") {
        config.mcmc.thinning = std::stoi(value);
      } else if (key == "epsilon") {
        config.epsilon = std::stod(value);
      } else if (key == "success_threshold") {
        config.success_threshold = std::stod(value);
      } else if (key == "pool_mode") {
        if (value == "per-trial")
          config.pool_mode = PoolMode::per_trial;
        else if (value == "shared")
          config.pool_mode = PoolMode::shared;
        else
          throw std::invalid_argument("pool_mode must be per-trial or shared");
      } else if (key == "diffusion_cells") {
        config.diffusion_cells = std::stoi(value);
      } else if (key == "opt_tol") {
        config.solver.opt_tol = std::stod(value);
      } else if (key == "bp_tol") {
        config.solver.bp_tol = std::stod(value);
      } else if (key == "dec_tol") {
        config.solver.dec_tol = std::stod(value);
      } else if (key == "max_iters") {
        config.solver.max_iters = std::stoi(value);
      } else if (key == "workers") {
        config.workers = std::stoi(value);
      } else {
        throw std::invalid_argument("unknown key '" + key + "'");
      }
    } catch (const std::invalid_argument&) {
      throw;
    } catch (const std::exception& e) {
      throw std::invalid_argument("config line " + std::to_string(line_number) + ": " + e.what());
    }
  }
  if (const char* seed = std::getenv("SPARSEPCE_SEED")) config.master_seed = std::stoull(seed);
  if (const char* workers = std::getenv("SPARSEPCE_WORKERS")) config.workers = std::stoi(workers);
  return config;
}

namespace detail {

struct TrialContext {
  const ExperimentConfig& config;
  const BenchmarkProblem& problem;
  const Basis& basis;
  const Eigen::VectorXd* truth_coeffs;      // problems with exact coefficients
  const ValidationSet* validation;          // diffusion
  const SampleEnsemble* shared_pool;        // pool_mode == shared
};

/// Ensemble for one trial under the configured strategy.
inline SampleEnsemble trial_ensemble(const TrialContext& ctx, Eigen::Index m,
                                     std::size_t m_index, int trial) {
  const auto& config = ctx.config;
  const std::uint64_t sample_seed =
      derive_seed(config.master_seed, Stream::trial, m_index, static_cast<std::uint64_t>(trial));
  switch (config.strategy) {
    case Strategy::standard:
      return standard_sample(ctx.basis, m, sample_seed);
    case Strategy::coherence_optimal:
      return coherence_optimal_sample(ctx.basis, m, sample_seed, config.mcmc);
    case Strategy::near_optimal: {
      SampleEnsemble local_pool;
      const SampleEnsemble* pool = ctx.shared_pool;
      if (!pool) {
        const std::uint64_t pool_seed = derive_seed(config.master_seed, Stream::pool, m_index,
                                                    static_cast<std::uint64_t>(trial));
        local_pool = build_pool(ctx.basis, config.pool_size, pool_seed, config.mcmc);
        pool = &local_pool;
      }
      const MeasurementMatrix pool_matrix = assemble(*pool, ctx.basis, true);
      const std::uint64_t select_seed = derive_seed(config.master_seed, Stream::selection,
                                                    m_index, static_cast<std::uint64_t>(trial));
      const SelectionResult selection = near_optimal_select(pool_matrix, m, select_seed);
      return select_ensemble(*pool, selection);
    }
  }
  throw std::logic_error("trial_ensemble: bad strategy");
}

inline TrialRecord run_trial(const TrialContext& ctx, Eigen::Index m, std::size_t m_index,
                             int trial) {
  const auto start = std::chrono::steady_clock::now();
  TrialRecord record;
  record.problem = ctx.config.problem;
  record.strategy = ctx.config.strategy;
  record.m = m;
  record.trial = trial;
  try {
    const SampleEnsemble ensemble = trial_ensemble(ctx, m, m_index, trial);
    const MeasurementMatrix matrix = assemble(ensemble, ctx.basis, true);
    record.mu = mutual_coherence(matrix);
    record.gamma = avg_cross_correlation(matrix);

    Eigen::VectorXd data(ensemble.size());
    for (Eigen::Index i = 0; i < ensemble.size(); ++i)
      data[i] = ctx.problem.evaluate(ensemble.points.row(i).transpose());

    RecoverySpec spec;
    spec.matrix = matrix.entries();
    spec.data = ensemble.weights.cwiseProduct(data);
    spec.epsilon = ctx.config.epsilon;
    spec.options = ctx.config.solver;
    const RecoveryResult solution = recover(spec);
    record.iterations = solution.iterations;
    record.converged = solution.converged;

    if (solution.converged) {
      if (ctx.truth_coeffs) {
        record.relative_error = relative_coeff_error(solution.coefficients, *ctx.truth_coeffs);
      } else {
        const Eigen::VectorXd predicted =
            evaluate_expansion(ctx.basis, solution.coefficients, ctx.validation->points);
        record.relative_error = relative_validation_error(predicted, ctx.validation->values);
      }
    }
  } catch (const std::exception&) {
    record.converged = false;
    record.relative_error = std::numeric_limits<double>::infinity();
  }
  record.wall_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return record;
}

}  // namespace detail

/// Run the full sweep: every sample size in the grid, `trials` independent
/// repetitions each. Every trial draws its randomness from substreams of
/// the master seed keyed by (grid position, trial index), so records do not
/// depend on execution order and reruns are bit-identical. Trial failures
/// are recorded, not propagated.
inline std::vector<TrialRecord> run_experiment(const ExperimentConfig& config) {
  config.validate();
  BenchmarkProblem problem = make_problem(config.problem);
  problem.diffusion.cells = config.diffusion_cells;
  const Basis basis = problem.basis();

  Eigen::VectorXd truth;
  ValidationSet validation;
  if (problem.exact_coefficients)
    truth = exact_coefficients(problem);
  else
    validation = validation_set(problem);

  SampleEnsemble shared_pool;
  const bool use_shared_pool =
      config.strategy == Strategy::near_optimal && config.pool_mode == PoolMode::shared;
  if (use_shared_pool)
    shared_pool = build_pool(basis, config.pool_size,
                             derive_seed(config.master_seed, Stream::pool), config.mcmc);

  detail::TrialContext ctx{config,
                           problem,
                           basis,
                           problem.exact_coefficients ? &truth : nullptr,
                           problem.exact_coefficients ? nullptr : &validation,
                           use_shared_pool ? &shared_pool : nullptr};

  const std::size_t total = config.m_grid.size() * static_cast<std::size_t>(config.trials);
  std::vector<TrialRecord> records(total);
  auto slot = [&](std::size_t m_index, int trial) {
    return m_index * static_cast<std::size_t>(config.trials) + static_cast<std::size_t>(trial);
  };

  const int workers = config.workers > 0
                          ? config.workers
                          : std::max(1u, std::thread::hardware_concurrency());
  if (workers <= 1) {
    for (std::size_t mi = 0; mi < config.m_grid.size(); ++mi)
      for (int t = 0; t < config.trials; ++t)
        records[slot(mi, t)] = detail::run_trial(ctx, config.m_grid[mi], mi, t);
  } else {
    std::atomic<std::size_t> next{0};
    auto worker = [&] {
      while (true) {
        const std::size_t task = next.fetch_add(1);
        if (task >= total) return;
        const std::size_t mi = task / static_cast<std::size_t>(config.trials);
        const int t = static_cast<int>(task % static_cast<std::size_t>(config.trials));
        records[slot(mi, t)] = detail::run_trial(ctx, config.m_grid[mi], mi, t);
      }
    };
    std::vector<std::thread> threads;
    threads.reserve(static_cast<std::size_t>(workers));
    for (int w = 0; w < workers; ++w) threads.emplace_back(worker);
    for (auto& thread : threads) thread.join();
  }
  return records;
}

/// Convenience wrapper used by the command line: run, then write the CSV
/// and a JSON sidecar of the resolved configuration.
inline std::vector<TrialRecord> run_experiment_to_files(const ExperimentConfig& config,
                                                        const std::string& prefix) {
  const auto records = run_experiment(config);
  {
    std::ofstream csv(prefix + ".csv", std::ios::binary);
    if (!csv) throw std::runtime_error("cannot write " + prefix + ".csv");
    write_records_csv(records, csv);
  }
  {
    std::ofstream sidecar(prefix + ".json", std::ios::binary);
    if (!sidecar) throw std::runtime_error("cannot write " + prefix + ".json");
    sidecar << config_json(config).dump(2) << '\n';
  }
  return records;
}

}  // namespace sparsepce
