#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "sparsepce/orthopoly.hpp"
#include "sparsepce/rng.hpp"
#include "sparsepce/sampling.hpp"

namespace sparsepce {

/// The four benchmark targets, all with uniform inputs on [-1,1]^d:
///   poly2d      low-dimensional high-order polynomial (d=2, trial order 20)
///   poly20d     high-dimensional low-order polynomial (d=20, trial order 2)
///   rosenbrock  generalized Rosenbrock in six dimensions (trial order 4)
///   diffusion   QoI u(0.5) of a 1-D stochastic diffusion equation
///               (d=10, trial order 3)
enum class Problem { poly2d, poly20d, rosenbrock, diffusion };

inline const char* problem_name(Problem p) {
  switch (p) {
    case Problem::poly2d: return "poly2d";
    case Problem::poly20d: return "poly20d";
    case Problem::rosenbrock: return "rosenbrock";
    case Problem::diffusion: return "diffusion";
  }
  return "?";
}

inline Problem parse_problem(const std::string& name) {
  if (name == "poly2d") return Problem::poly2d;
  if (name == "poly20d") return Problem::poly20d;
  if (name == "rosenbrock") return Problem::rosenbrock;
  if (name == "diffusion") return Problem::diffusion;
  throw std::invalid_argument("unknown problem: " + name);
}

/// Sum over i of xi_1^{2i} xi_2^{2i}, i = 1..5: an exactly sparse
/// 20th-order expansion in two dimensions.
inline double eval_poly2d(const Eigen::Ref<const Eigen::VectorXd>& xi) {
  if (xi.size() != 2) throw std::invalid_argument("eval_poly2d: expects 2 inputs");
  const double p = xi[0] * xi[0] * xi[1] * xi[1];
  double term = 1.0, total = 0.0;
  for (int i = 1; i <= 5; ++i) {
    term *= p;
    total += term;
  }
  return total;
}

/// Sum over i of xi_i xi_{i+1}, i = 1..19: an exactly sparse second-order
/// expansion in twenty dimensions.
inline double eval_poly20d(const Eigen::Ref<const Eigen::VectorXd>& xi) {
  if (xi.size() != 20) throw std::invalid_argument("eval_poly20d: expects 20 inputs");
  double total = 0.0;
  for (int i = 0; i < 19; ++i) total += xi[i] * xi[i + 1];
  return total;
}

/// Generalized Rosenbrock over six inputs: sum of
/// 100 (xi_{i+1} - xi_i^2)^2 + (1 - xi_i)^2, an exact degree-4 polynomial.
inline double eval_rosenbrock6(const Eigen::Ref<const Eigen::VectorXd>& xi) {
  if (xi.size() != 6) throw std::invalid_argument("eval_rosenbrock6: expects 6 inputs");
  double total = 0.0;
  for (int i = 0; i < 5; ++i) {
    const double a = xi[i + 1] - xi[i] * xi[i];
    const double b = 1.0 - xi[i];
    total += 100.0 * a * a + b * b;
  }
  return total;
}

/// Grid controls for the diffusion problem. The QoI sits at x = 0.5, which
/// must coincide with a grid node, so the cell count is kept even.
struct DiffusionConfig {
  int cells = 512;

  void validate() const {
    if (cells < 8) throw std::invalid_argument("DiffusionConfig: need at least 8 cells");
    if (cells % 2 != 0) throw std::invalid_argument("DiffusionConfig: cell count must be even");
  }
};

/// Diffusion coefficient a(x, xi) = 1 + sum_k cos(2 pi k x) xi_k / (k pi)^2.
/// The series of bounds sums below one, so a stays strictly positive on
/// [-1,1]^10.
inline double diffusion_coefficient(double x, const Eigen::Ref<const Eigen::VectorXd>& xi) {
  constexpr double pi = 3.14159265358979323846;
  double a = 1.0;
  for (int k = 1; k <= 10; ++k)
    a += std::cos(2.0 * pi * k * x) / (k * k * pi * pi) * xi[k - 1];
  return a;
}

/// Solve -(a u')' = 2 on (0,1) with homogeneous Dirichlet boundaries by
/// conservative second-order finite differences (a at cell interfaces,
/// Thomas tridiagonal solve) and return u at x = 0.5.
inline double solve_diffusion(const Eigen::Ref<const Eigen::VectorXd>& xi,
                              const DiffusionConfig& config = {}) {
  if (xi.size() != 10) throw std::invalid_argument("solve_diffusion: expects 10 inputs");
  config.validate();
  const int n = config.cells;
  const double h = 1.0 / n;
  const int unknowns = n - 1;

  std::vector<double> interface_a(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) {
    interface_a[static_cast<std::size_t>(i)] = diffusion_coefficient((i + 0.5) * h, xi);
    if (interface_a[static_cast<std::size_t>(i)] <= 0.0)
      throw std::runtime_error("solve_diffusion: non-positive interface coefficient");
  }

  // Rows: -a_{i-1/2} u_{i-1} + (a_{i-1/2}+a_{i+1/2}) u_i - a_{i+1/2} u_{i+1} = 2 h^2
  std::vector<double> sweep_upper(static_cast<std::size_t>(unknowns));
  std::vector<double> sweep_rhs(static_cast<std::size_t>(unknowns));
  const double rhs = 2.0 * h * h;
  {
    const double diag = interface_a[0] + interface_a[1];
    sweep_upper[0] = -interface_a[1] / diag;
    sweep_rhs[0] = rhs / diag;
  }
  for (int i = 1; i < unknowns; ++i) {
    const double lower = -interface_a[static_cast<std::size_t>(i)];
    const double diag = interface_a[static_cast<std::size_t>(i)] +
                        interface_a[static_cast<std::size_t>(i + 1)];
    const double upper = -interface_a[static_cast<std::size_t>(i + 1)];
    const double denom = diag - lower * sweep_upper[static_cast<std::size_t>(i - 1)];
    sweep_upper[static_cast<std::size_t>(i)] = upper / denom;
    sweep_rhs[static_cast<std::size_t>(i)] =
        (rhs - lower * sweep_rhs[static_cast<std::size_t>(i - 1)]) / denom;
  }
  // Back substitution down to the midpoint node only.
  const int target = n / 2 - 1;  // unknown index of x = 0.5
  double u = sweep_rhs[static_cast<std::size_t>(unknowns - 1)];
  for (int i = unknowns - 2; i >= target; --i)
    u = sweep_rhs[static_cast<std::size_t>(i)] - sweep_upper[static_cast<std::size_t>(i)] * u;
  return u;
}

/// Definition of one benchmark: trial basis, evaluator, and how ground
/// truth is produced (exact coefficients for the polynomial targets,
/// held-out validation solves for the diffusion problem).
struct BenchmarkProblem {
  Problem id = Problem::poly2d;
  int dim = 2;
  int order = 20;
  Family family = Family::legendre;
  bool exact_coefficients = true;
  DiffusionConfig diffusion{};

  double evaluate(const Eigen::Ref<const Eigen::VectorXd>& xi) const {
    switch (id) {
      case Problem::poly2d: return eval_poly2d(xi);
      case Problem::poly20d: return eval_poly20d(xi);
      case Problem::rosenbrock: return eval_rosenbrock6(xi);
      case Problem::diffusion: return solve_diffusion(xi, diffusion);
    }
    throw std::logic_error("BenchmarkProblem: bad id");
  }

  Basis basis() const { return Basis(family, dim, order); }
};

inline BenchmarkProblem make_problem(Problem id) {
  BenchmarkProblem p;
  p.id = id;
  switch (id) {
    case Problem::poly2d:
      p.dim = 2;
      p.order = 20;
      break;
    case Problem::poly20d:
      p.dim = 20;
      p.order = 2;
      break;
    case Problem::rosenbrock:
      // The target is an exact degree-4 polynomial, so order 4 is the
      // smallest basis that can recover it exactly.
      p.dim = 6;
      p.order = 4;
      break;
    case Problem::diffusion:
      p.dim = 10;
      p.order = 3;
      p.exact_coefficients = false;
      break;
  }
  return p;
}

/// Monomial form of the polynomial targets, used for exact projection.
inline std::vector<MonomialTerm> monomial_terms(Problem id) {
  std::vector<MonomialTerm> terms;
  switch (id) {
    case Problem::poly2d:
      for (int i = 1; i <= 5; ++i) terms.push_back({1.0, {{0, 2 * i}, {1, 2 * i}}});
      break;
    case Problem::poly20d:
      for (int i = 0; i < 19; ++i) terms.push_back({1.0, {{i, 1}, {i + 1, 1}}});
      break;
    case Problem::rosenbrock:
      // 100 (y - x^2)^2 + (1 - x)^2
      //   = 100 y^2 - 200 x^2 y + 100 x^4 + 1 - 2 x + x^2
      for (int i = 0; i < 5; ++i) {
        terms.push_back({100.0, {{i + 1, 2}}});
        terms.push_back({-200.0, {{i, 2}, {i + 1, 1}}});
        terms.push_back({100.0, {{i, 4}}});
        terms.push_back({1.0, {}});
        terms.push_back({-2.0, {{i, 1}}});
        terms.push_back({1.0, {{i, 2}}});
      }
      break;
    case Problem::diffusion:
      throw std::invalid_argument("monomial_terms: diffusion QoI is not polynomial");
  }
  return terms;
}

/// Exact expansion coefficients of the polynomial targets, by projection.
inline Eigen::VectorXd exact_coefficients(const BenchmarkProblem& problem) {
  if (!problem.exact_coefficients)
    throw std::invalid_argument("exact_coefficients: not available for this problem");
  return project_monomials(problem.basis(), monomial_terms(problem.id));
}

/// Held-out validation data: fresh random points with solver-computed QoI
/// values. The seed is a fixed constant distinct from every training
/// stream, so validation points are new regardless of the experiment seed.
struct ValidationSet {
  Eigen::MatrixXd points;
  Eigen::VectorXd values;
};

inline constexpr std::uint64_t validation_seed = 0x76616c696461ULL;

inline ValidationSet validation_set(const BenchmarkProblem& problem, Eigen::Index count = 1000) {
  ValidationSet set;
  set.points.resize(count, problem.dim);
  set.values.resize(count);
  Rng rng(derive_seed(validation_seed, Stream::standard_points));
  Eigen::VectorXd point(problem.dim);
  for (Eigen::Index i = 0; i < count; ++i) {
    for (Eigen::Index j = 0; j < problem.dim; ++j)
      point[j] = problem.family == Family::legendre ? rng.uniform_pm1() : rng.normal();
    set.points.row(i) = point.transpose();
    set.values[i] = problem.evaluate(point);
  }
  return set;
}

/// CSV cache of a validation set (xi..., qoi per row).
inline void write_validation_csv(const ValidationSet& set, std::ostream& out) {
  for (Eigen::Index j = 0; j < set.points.cols(); ++j) out << "xi" << (j + 1) << ",";
  out << "qoi\n";
  char buffer[32];
  for (Eigen::Index i = 0; i < set.points.rows(); ++i) {
    for (Eigen::Index j = 0; j < set.points.cols(); ++j) {
      std::snprintf(buffer, sizeof buffer, "%.17g", set.points(i, j));
      out << buffer << ',';
    }
    std::snprintf(buffer, sizeof buffer, "%.17g", set.values[i]);
    out << buffer << '\n';
  }
}

}  // namespace sparsepce
