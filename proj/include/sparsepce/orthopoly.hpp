#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <functional>
#include <limits>
#include <stdexcept>
#include <utility>
#include <vector>

#include "sparsepce/multi_index.hpp"

namespace sparsepce {

/// Input distribution family; it fixes the orthonormal polynomial family.
enum class Family {
  legendre,  // uniform on [-1, 1]
  hermite,   // standard normal on the real line
};

inline const char* family_name(Family f) {
  return f == Family::legendre ? "legendre" : "hermite";
}

/// Normalization constant of the orthonormal basis members: identically one.
inline constexpr double basis_normalization = 1.0;

/// Orthonormal univariate member of degree n at x, by three-term recurrence.
/// Legendre: sqrt(2n+1) P_n(x) on [-1, 1] (points outside are rejected).
/// Hermite: probabilists' He_n(x) / sqrt(n!), orthonormal under the standard
/// normal density; the recurrence is run in normalized form so no factorial
/// is ever formed.
inline double eval_univariate(Family family, int n, double x) {
  if (n < 0) throw std::invalid_argument("eval_univariate: negative degree");
  if (family == Family::legendre) {
    if (x < -1.0 || x > 1.0)
      throw std::domain_error("eval_univariate: Legendre point outside [-1, 1]");
    double prev = 1.0;
    if (n == 0) return prev;
    double curr = x;
    for (int m = 2; m <= n; ++m) {
      const double next = ((2 * m - 1) * x * curr - (m - 1) * prev) / m;
      prev = curr;
      curr = next;
    }
    return std::sqrt(2.0 * n + 1.0) * curr;
  }
  double prev = 1.0;
  if (n == 0) return prev;
  double curr = x;
  for (int m = 2; m <= n; ++m) {
    const double next = (x * curr - std::sqrt(m - 1.0) * prev) / std::sqrt(double(m));
    prev = curr;
    curr = next;
  }
  return curr;
}

namespace detail {

/// Degrees 0..max_degree of the orthonormal family at x, in one recurrence
/// sweep. `out` must hold max_degree+1 values.
inline void univariate_table(Family family, int max_degree, double x, double* out) {
  out[0] = 1.0;
  if (max_degree == 0) return;
  if (family == Family::legendre) {
    // Run the classical P_n recurrence, scale each degree on the way out.
    double prev = 1.0, curr = x;
    out[1] = std::sqrt(3.0) * curr;
    for (int m = 2; m <= max_degree; ++m) {
      const double next = ((2 * m - 1) * x * curr - (m - 1) * prev) / m;
      prev = curr;
      curr = next;
      out[m] = std::sqrt(2.0 * m + 1.0) * curr;
    }
  } else {
    double prev = 1.0, curr = x;
    out[1] = curr;
    for (int m = 2; m <= max_degree; ++m) {
      const double next = (x * curr - std::sqrt(m - 1.0) * prev) / std::sqrt(double(m));
      prev = curr;
      curr = next;
      out[m] = curr;
    }
  }
}

}  // namespace detail

/// A distribution family bound to a total-degree index set. Evaluates rows
/// of the measurement matrix, the pointwise envelope B, and the sampling
/// weight w = 1/B. Stateless per call; safe to share across threads.
class Basis {
 public:
  Basis(Family family, MultiIndexSet index_set)
      : family_(family), set_(std::move(index_set)) {}

  Basis(Family family, int dim, int order) : Basis(family, MultiIndexSet(dim, order)) {}

  Family family() const { return family_; }
  const MultiIndexSet& index_set() const { return set_; }
  int dim() const { return set_.dim(); }
  int order() const { return set_.order(); }
  std::size_t size() const { return set_.size(); }

  /// All tensor-product members at one point, in the index set's order.
  /// Entry 0 is always 1.
  Eigen::VectorXd row(const Eigen::Ref<const Eigen::VectorXd>& point) const {
    Eigen::VectorXd values(static_cast<Eigen::Index>(set_.size()));
    row_into(point, values.data());
    return values;
  }

  void row_into(const Eigen::Ref<const Eigen::VectorXd>& point, double* out) const {
    const auto table = tables(point);
    const int d = dim();
    const int stride = order() + 1;
    for (std::size_t j = 0; j < set_.size(); ++j) {
      const auto alpha = set_[j];
      double product = 1.0;
      for (int i = 0; i < d; ++i)
        product *= table[static_cast<std::size_t>(i * stride + alpha[static_cast<std::size_t>(i)])];
      out[j] = product;
    }
  }

  /// Pointwise envelope B: the largest |psi_alpha| over the index set.
  /// Computed by a knapsack-style sweep over dimensions (the factors are
  /// non-negative, so the max of the product distributes), which costs
  /// O(d k^2) instead of touching all K members. Always >= 1 because the
  /// constant member contributes 1.
  double envelope(const Eigen::Ref<const Eigen::VectorXd>& point) const {
    const auto table = tables(point);
    const int d = dim();
    const int k = order();
    const int stride = k + 1;
    std::vector<double> best(static_cast<std::size_t>(k + 1), 1.0);
    std::vector<double> next(static_cast<std::size_t>(k + 1));
    for (int i = 0; i < d; ++i) {
      const double* t = table.data() + i * stride;
      for (int budget = 0; budget <= k; ++budget) {
        double value = 0.0;
        for (int deg = 0; deg <= budget; ++deg)
          value = std::max(value, std::abs(t[deg]) * best[static_cast<std::size_t>(budget - deg)]);
        next[static_cast<std::size_t>(budget)] = value;
      }
      best.swap(next);
    }
    return best[static_cast<std::size_t>(k)];
  }

  /// Sampling weight w = 1/B, in (0, 1].
  double weight(const Eigen::Ref<const Eigen::VectorXd>& point) const {
    return 1.0 / envelope(point);
  }

 private:
  std::vector<double> tables(const Eigen::Ref<const Eigen::VectorXd>& point) const {
    if (point.size() != dim())
      throw std::invalid_argument("Basis: point dimension mismatch");
    const int stride = order() + 1;
    std::vector<double> table(static_cast<std::size_t>(dim() * stride));
    for (int i = 0; i < dim(); ++i)
      detail::univariate_table(family_, order(), point[i], table.data() + i * stride);
    return table;
  }

  Family family_;
  MultiIndexSet set_;
};

/// Gauss rule of the family's measure: nodes and weights normalized so the
/// weights sum to one (the measure is a probability measure). Built from the
/// symmetric Jacobi matrix of the recurrence (Golub-Welsch).
struct QuadratureRule {
  Eigen::VectorXd nodes;
  Eigen::VectorXd weights;
};

inline QuadratureRule gauss_rule(Family family, int points) {
  if (points < 1) throw std::invalid_argument("gauss_rule: need at least one point");
  Eigen::VectorXd diag = Eigen::VectorXd::Zero(points);
  Eigen::VectorXd sub(points > 1 ? points - 1 : 0);
  for (int i = 1; i < points; ++i) {
    sub[i - 1] = family == Family::legendre ? i / std::sqrt(4.0 * i * i - 1.0)
                                            : std::sqrt(double(i));
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver;
  solver.computeFromTridiagonal(diag, sub);
  QuadratureRule rule;
  rule.nodes = solver.eigenvalues();
  rule.weights = solver.eigenvectors().row(0).array().square();
  return rule;
}

/// Tensor-product Gauss projection of f onto the basis: coefficient j is
/// the integral of f * psi_j against the family's measure, exact up to
/// round-off when f is a polynomial and `points_per_dim` covers the combined
/// degree (at least (k + deg f)/2 + 1). Rule choice is the caller's
/// responsibility; full tensor grids are limited to dim <= 6.
inline Eigen::VectorXd quadrature_project(
    const Basis& basis, const std::function<double(const Eigen::VectorXd&)>& f,
    int points_per_dim) {
  const int d = basis.dim();
  if (d > 6)
    throw std::invalid_argument("quadrature_project: full tensor grid limited to dim <= 6");
  const QuadratureRule rule = gauss_rule(basis.family(), points_per_dim);
  Eigen::VectorXd coeffs = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(basis.size()));
  Eigen::VectorXd point(d);
  Eigen::VectorXd row(static_cast<Eigen::Index>(basis.size()));
  std::vector<int> odometer(static_cast<std::size_t>(d), 0);
  while (true) {
    double w = 1.0;
    for (int i = 0; i < d; ++i) {
      point[i] = rule.nodes[odometer[static_cast<std::size_t>(i)]];
      w *= rule.weights[odometer[static_cast<std::size_t>(i)]];
    }
    basis.row_into(point, row.data());
    coeffs.noalias() += w * f(point) * row;
    int i = 0;
    for (; i < d; ++i) {
      if (++odometer[static_cast<std::size_t>(i)] < points_per_dim) break;
      odometer[static_cast<std::size_t>(i)] = 0;
    }
    if (i == d) break;
  }
  return coeffs;
}

/// Gram matrix of all basis pairs under tensor Gauss quadrature; equals the
/// identity up to round-off when the rule is exact for degree 2k.
inline Eigen::MatrixXd quadrature_gram(const Basis& basis, int points_per_dim) {
  const int d = basis.dim();
  if (d > 6) throw std::invalid_argument("quadrature_gram: full tensor grid limited to dim <= 6");
  const QuadratureRule rule = gauss_rule(basis.family(), points_per_dim);
  const auto K = static_cast<Eigen::Index>(basis.size());
  Eigen::MatrixXd gram = Eigen::MatrixXd::Zero(K, K);
  Eigen::VectorXd point(d);
  Eigen::VectorXd row(K);
  std::vector<int> odometer(static_cast<std::size_t>(d), 0);
  while (true) {
    double w = 1.0;
    for (int i = 0; i < d; ++i) {
      point[i] = rule.nodes[odometer[static_cast<std::size_t>(i)]];
      w *= rule.weights[odometer[static_cast<std::size_t>(i)]];
    }
    basis.row_into(point, row.data());
    gram.selfadjointView<Eigen::Lower>().rankUpdate(row, w);
    int i = 0;
    for (; i < d; ++i) {
      if (++odometer[static_cast<std::size_t>(i)] < points_per_dim) break;
      odometer[static_cast<std::size_t>(i)] = 0;
    }
    if (i == d) break;
  }
  return gram.selfadjointView<Eigen::Lower>();
}

/// One term of a multivariate polynomial in product form: coefficient times
/// a product of per-dimension monomial powers (dimensions not listed carry
/// power zero).
struct MonomialTerm {
  double coefficient = 1.0;
  std::vector<std::pair<int, int>> powers;  // (dimension, exponent)
};

/// Exact projection of a polynomial given as monomial terms. Because each
/// term is a product of univariate factors, every coefficient reduces to a
/// product of one-dimensional integrals, so the cost is independent of a
/// tensor grid and the routine works at any dimension. Each 1-D integral is
/// evaluated with a Gauss rule exact for its integrand degree.
inline Eigen::VectorXd project_monomials(const Basis& basis,
                                         const std::vector<MonomialTerm>& terms) {
  const auto& set = basis.index_set();
  // Cache of 1-D integrals: integral of x^p * psi_a against the measure.
  const int k = basis.order();
  int max_power = 0;
  for (const auto& term : terms)
    for (const auto& [d, p] : term.powers) max_power = std::max(max_power, p);
  const int rows = max_power + 1;
  Eigen::MatrixXd one_dim = Eigen::MatrixXd::Zero(rows, k + 1);
  for (int p = 0; p <= max_power; ++p) {
    const int npts = (p + k) / 2 + 1;
    const QuadratureRule rule = gauss_rule(basis.family(), npts);
    std::vector<double> table(static_cast<std::size_t>(k + 1));
    for (int q = 0; q < npts; ++q) {
      detail::univariate_table(basis.family(), k, rule.nodes[q], table.data());
      const double xp = std::pow(rule.nodes[q], p);
      for (int a = 0; a <= k; ++a)
        one_dim(p, a) += rule.weights[q] * xp * table[static_cast<std::size_t>(a)];
    }
  }

  Eigen::VectorXd coeffs = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(set.size()));
  std::vector<int> power_of_dim(static_cast<std::size_t>(basis.dim()), 0);
  for (const auto& term : terms) {
    for (const auto& [d, p] : term.powers) power_of_dim[static_cast<std::size_t>(d)] = p;
    for (std::size_t j = 0; j < set.size(); ++j) {
      const auto alpha = set[j];
      double value = term.coefficient;
      for (int i = 0; i < basis.dim() && value != 0.0; ++i)
        value *= one_dim(power_of_dim[static_cast<std::size_t>(i)], alpha[static_cast<std::size_t>(i)]);
      coeffs[static_cast<Eigen::Index>(j)] += value;
    }
    for (const auto& [d, p] : term.powers) power_of_dim[static_cast<std::size_t>(d)] = 0;
  }
  return coeffs;
}

/// Evaluate the expansion with the given coefficients at each row of
/// `points` (one point per row).
inline Eigen::VectorXd evaluate_expansion(const Basis& basis,
                                          const Eigen::Ref<const Eigen::VectorXd>& coeffs,
                                          const Eigen::Ref<const Eigen::MatrixXd>& points) {
  if (coeffs.size() != static_cast<Eigen::Index>(basis.size()))
    throw std::invalid_argument("evaluate_expansion: coefficient length mismatch");
  Eigen::VectorXd out(points.rows());
  Eigen::VectorXd row(static_cast<Eigen::Index>(basis.size()));
  for (Eigen::Index i = 0; i < points.rows(); ++i) {
    basis.row_into(points.row(i).transpose(), row.data());
    out[i] = row.dot(coeffs);
  }
  return out;
}

}  // namespace sparsepce
