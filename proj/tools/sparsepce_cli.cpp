// Command-line front end: sample generation, matrix metrics, one-shot
// recovery, experiment sweeps, and a built-in invariant check.

#include <CLI11.hpp>
#include <json.hpp>

#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include "sparsepce/benchmarks.hpp"
#include "sparsepce/greedy_select.hpp"
#include "sparsepce/harness.hpp"
#include "sparsepce/measurement_matrix.hpp"
#include "sparsepce/sampling.hpp"
#include "sparsepce/spgl1.hpp"
#include "sparsepce/stats.hpp"

namespace {

using namespace sparsepce;

constexpr int exit_ok = 0;
constexpr int exit_bad_config = 1;
constexpr int exit_runtime = 2;

std::ofstream open_output(const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path);
  return out;
}

int cmd_sample(const std::string& problem_name, const std::string& strategy_name,
               Eigen::Index m, std::uint64_t seed, Eigen::Index pool_size,
               const McmcConfig& mcmc, const std::string& out_path) {
  const BenchmarkProblem problem = make_problem(parse_problem(problem_name));
  const Basis basis = problem.basis();
  const Strategy strategy = parse_strategy(strategy_name);

  SampleEnsemble ensemble;
  switch (strategy) {
    case Strategy::standard:
      ensemble = standard_sample(basis, m, seed);
      break;
    case Strategy::coherence_optimal:
      ensemble = coherence_optimal_sample(basis, m, seed, mcmc);
      break;
    case Strategy::near_optimal: {
      const SampleEnsemble pool =
          build_pool(basis, pool_size, derive_seed(seed, Stream::pool), mcmc);
      const MeasurementMatrix pool_matrix = assemble(pool, basis, true);
      const SelectionResult selection = near_optimal_select(pool_matrix, m, seed);
      ensemble = select_ensemble(pool, selection);
      break;
    }
  }

  if (out_path.empty()) {
    write_ensemble_csv(ensemble, std::cout);
  } else {
    auto out = open_output(out_path);
    write_ensemble_csv(ensemble, out);
  }
  return exit_ok;
}

int cmd_metrics(const std::string& matrix_path, double t) {
  std::ifstream in(matrix_path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read " + matrix_path);
  const Eigen::MatrixXd entries = read_matrix_binary(in);
  const MeasurementMatrix matrix(entries, false);
  const CorrelationMetrics metrics = correlation_metrics(matrix, t);

  nlohmann::json j;
  j["rows"] = matrix.rows();
  j["cols"] = matrix.cols();
  j["mu"] = metrics.mu;
  j["gamma"] = metrics.gamma;
  j["t"] = t;
  if (metrics.mu_t)
    j["mu_t"] = *metrics.mu_t;
  else
    j["mu_t"] = nullptr;
  if (std::isfinite(metrics.spark_lower_bound))
    j["spark_lower_bound"] = metrics.spark_lower_bound;
  else
    j["spark_lower_bound"] = "unbounded";
  std::cout << j.dump(2) << '\n';
  return exit_ok;
}

int cmd_recover(const std::string& problem_name, const std::string& samples_path,
                double epsilon, const std::string& out_path) {
  const BenchmarkProblem problem = make_problem(parse_problem(problem_name));
  const Basis basis = problem.basis();

  std::ifstream in(samples_path);
  if (!in) throw std::runtime_error("cannot read " + samples_path);
  const SampleEnsemble ensemble = read_ensemble_csv(in, problem.family);
  if (ensemble.dim() != basis.dim())
    throw std::runtime_error("sample dimension does not match the problem");

  const MeasurementMatrix matrix = assemble(ensemble, basis, true);
  Eigen::VectorXd data(ensemble.size());
  for (Eigen::Index i = 0; i < ensemble.size(); ++i)
    data[i] = problem.evaluate(ensemble.points.row(i).transpose());

  RecoverySpec spec;
  spec.matrix = matrix.entries();
  spec.data = ensemble.weights.cwiseProduct(data);
  spec.epsilon = epsilon;
  const RecoveryResult result = recover(spec);

  {
    auto out = open_output(out_path);
    const auto& set = basis.index_set();
    for (int i = 0; i < basis.dim(); ++i) out << "alpha" << (i + 1) << ',';
    out << "coefficient\n";
    char buffer[32];
    for (std::size_t jdx = 0; jdx < set.size(); ++jdx) {
      for (int i = 0; i < basis.dim(); ++i) out << set[jdx][static_cast<std::size_t>(i)] << ',';
      std::snprintf(buffer, sizeof buffer, "%.17g",
                    result.coefficients[static_cast<Eigen::Index>(jdx)]);
      out << buffer << '\n';
    }
  }

  nlohmann::json diagnostics;
  diagnostics["m"] = ensemble.size();
  diagnostics["k"] = basis.size();
  diagnostics["residual_norm"] = result.residual_norm;
  diagnostics["l1_norm"] = result.l1_norm;
  diagnostics["iterations"] = result.iterations;
  diagnostics["converged"] = result.converged;
  diagnostics["coefficients_csv"] = out_path;
  std::cout << diagnostics.dump(2) << '\n';
  return result.converged ? exit_ok : exit_runtime;
}

int cmd_benchmark(const std::string& config_path, const std::string& prefix) {
  std::ifstream in(config_path);
  if (!in) {
    std::cerr << "cannot read " << config_path << '\n';
    return exit_bad_config;
  }
  ExperimentConfig config;
  try {
    config = parse_config(in);
    config.validate();
  } catch (const std::exception& e) {
    std::cerr << "invalid config: " << e.what() << '\n';
    return exit_bad_config;
  }
  const auto records = run_experiment_to_files(config, prefix);

  // Per-M summary on stdout.
  for (Eigen::Index m : config.m_grid) {
    std::vector<double> finite_errors, all_errors;
    for (const auto& r : records)
      if (r.m == m) {
        all_errors.push_back(r.relative_error);
        if (std::isfinite(r.relative_error)) finite_errors.push_back(r.relative_error);
      }
    std::cout << "m=" << m;
    if (!finite_errors.empty()) {
      const QuantileSummary s = quantile_summary(finite_errors);
      std::cout << " median=" << s.median << " q25=" << s.q25 << " q75=" << s.q75
                << " mean=" << s.mean;
    }
    std::cout << " success_rate=" << success_rate(all_errors, config.success_threshold) << '\n';
  }
  std::cout << "wrote " << prefix << ".csv and " << prefix << ".json\n";
  return exit_ok;
}

int cmd_validate() {
  int failures = 0;
  auto report = [&](const char* name, bool ok) {
    std::cout << (ok ? "PASS " : "FAIL ") << name << '\n';
    if (!ok) ++failures;
  };

  {
    const Basis basis(Family::legendre, 2, 6);
    const Eigen::MatrixXd gram = quadrature_gram(basis, 8);
    const double deviation =
        (gram - Eigen::MatrixXd::Identity(gram.rows(), gram.cols())).cwiseAbs().maxCoeff();
    report("orthonormality (2,6)", deviation < 1e-10);
  }
  {
    const Basis basis(Family::legendre, 1, 20);
    const Eigen::MatrixXd gram = quadrature_gram(basis, 21);
    const double deviation =
        (gram - Eigen::MatrixXd::Identity(gram.rows(), gram.cols())).cwiseAbs().maxCoeff();
    report("orthonormality (1,20)", deviation < 1e-10);
  }
  {
    bool ok = true;
    Rng rng(99);
    for (int rep = 0; rep < 20 && ok; ++rep) {
      const Eigen::Index rows = 2 + static_cast<Eigen::Index>(rng.below(20));
      const Eigen::Index cols = 2 + static_cast<Eigen::Index>(rng.below(20));
      Eigen::MatrixXd m(rows, cols);
      for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = rng.normal();
      GramState state(cols);
      double mu_inc = 0.0, gamma_inc = 0.0;
      for (Eigen::Index i = 0; i < rows; ++i) {
        const Eigen::VectorXd row = m.row(i).transpose();
        std::tie(mu_inc, gamma_inc) = state.append_metrics(row);
        state.append_row(row);
      }
      const MeasurementMatrix direct(m, false);
      ok = std::abs(mu_inc - mutual_coherence(direct)) < 1e-10 &&
           std::abs(gamma_inc - avg_cross_correlation(direct)) < 1e-10;
    }
    report("incremental gram equivalence", ok);
  }
  {
    Eigen::VectorXd xi = Eigen::VectorXd::Zero(10);
    DiffusionConfig config;
    const double at_uniform = solve_diffusion(xi, config);
    bool ok = std::abs(at_uniform - 0.25) < 1e-6;
    Rng rng(123);
    for (int rep = 0; rep < 2 && ok; ++rep) {
      for (int i = 0; i < 10; ++i) xi[i] = rng.uniform_pm1();
      DiffusionConfig coarse{64}, medium{128}, fine{256};
      const double ratio = std::abs(solve_diffusion(xi, coarse) - solve_diffusion(xi, medium)) /
                           std::abs(solve_diffusion(xi, medium) - solve_diffusion(xi, fine));
      ok = ratio > 3.5 && ratio < 4.5;
    }
    report("diffusion second-order convergence", ok);
  }
  return failures == 0 ? exit_ok : exit_runtime;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Sparse polynomial chaos recovery via compressive sampling"};
  app.require_subcommand(1);

  std::string problem = "poly20d";
  std::string strategy = "near-optimal";
  Eigen::Index m = 100;
  std::uint64_t seed = 0;
  Eigen::Index pool_size = 10000;
  McmcConfig mcmc;
  std::string out_path;

  auto* sample = app.add_subcommand("sample", "Generate a sample ensemble (CSV)");
  sample->add_option("--problem", problem, "poly2d|poly20d|rosenbrock|diffusion");
  sample->add_option("--strategy", strategy, "standard|coherence-optimal|near-optimal");
  sample->add_option("--m", m, "number of samples")->required();
  sample->add_option("--seed", seed, "master seed")->required();
  sample->add_option("--pool-size", pool_size, "candidate pool size (near-optimal)");
  sample->add_option("--burn-in", mcmc.burn_in, "chain burn-in steps");
  sample->add_option("--thinning", mcmc.thinning, "chain thinning (0 = dimension)");
  sample->add_option("--out", out_path, "output CSV (default stdout)");

  std::string matrix_path;
  double threshold = 0.5;
  auto* metrics = app.add_subcommand("metrics", "Cross-correlation metrics of a matrix dump");
  metrics->add_option("--matrix", matrix_path, "binary matrix file")->required();
  metrics->add_option("--t", threshold, "threshold for the t-averaged coherence");

  std::string samples_path;
  double epsilon = 0.0;
  std::string coeff_path = "coefficients.csv";
  auto* recover_cmd = app.add_subcommand("recover", "Recover expansion coefficients from samples");
  recover_cmd->add_option("--problem", problem, "target problem")->required();
  recover_cmd->add_option("--samples", samples_path, "ensemble CSV")->required();
  recover_cmd->add_option("--epsilon", epsilon, "residual tolerance (0 = equality)");
  recover_cmd->add_option("--out", coeff_path, "coefficient CSV path");

  std::string config_path;
  std::string prefix = "experiment";
  auto* benchmark = app.add_subcommand("benchmark", "Run a trial sweep from a config file");
  benchmark->add_option("--config", config_path, "key = value config file")->required();
  benchmark->add_option("--out", prefix, "output prefix for CSV and JSON sidecar");

  app.add_subcommand("validate", "Run the built-in invariant checks");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? exit_ok : exit_bad_config;
  }

  try {
    if (sample->parsed())
      return cmd_sample(problem, strategy, m, seed, pool_size, mcmc, out_path);
    if (metrics->parsed()) return cmd_metrics(matrix_path, threshold);
    if (recover_cmd->parsed()) return cmd_recover(problem, samples_path, epsilon, coeff_path);
    if (benchmark->parsed()) return cmd_benchmark(config_path, prefix);
    return cmd_validate();
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << '\n';
    return exit_bad_config;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return exit_runtime;
  }
}
