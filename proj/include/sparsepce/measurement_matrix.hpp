#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <cstdint>
#include <istream>
#include <limits>
#include <optional>
#include <ostream>
#include <stdexcept>

#include "sparsepce/orthopoly.hpp"
#include "sparsepce/sampling.hpp"

namespace sparsepce {

/// Cross-correlation summary of a measurement matrix.
///   mu:       largest |normalized inner product| over distinct column pairs
///   gamma:    mean squared normalized off-diagonal Gram entry, i.e.
///             ||I - G~||_F^2 / (K (K-1)) with G~ the column-normalized Gram
///   mu_t:     mean of the normalized cross-correlations at least t; absent
///             when no pair reaches the threshold
///   spark_lb: 1 + 1/mu (infinite when mu == 0)
struct CorrelationMetrics {
  double mu = 0.0;
  double gamma = 0.0;
  std::optional<double> mu_t;
  double spark_lower_bound = std::numeric_limits<double>::infinity();
};

/// Lower bound on the spark implied by the mutual coherence.
inline double spark_lower_bound(double mu) {
  if (mu < 0.0 || mu > 1.0) throw std::invalid_argument("spark_lower_bound: mu outside [0, 1]");
  if (mu == 0.0) return std::numeric_limits<double>::infinity();
  return 1.0 + 1.0 / mu;
}

/// Running Gram state of a matrix built row by row: the unnormalized Gram
/// G = Psi^T Psi and the column squared norms (its diagonal). Appending a
/// candidate row is a rank-one update, so the metrics of the grown matrix
/// can be scored in O(K^2) without touching the rows themselves.
///
/// A column whose norm is (still) exactly zero is unrecoverable, so any
/// pair involving one is counted as fully correlated: correlation 1 toward
/// mu and squared correlation 1 toward gamma.
class GramState {
 public:
  explicit GramState(Eigen::Index columns)
      : gram_(Eigen::MatrixXd::Zero(columns, columns)),
        norms_sq_(Eigen::VectorXd::Zero(columns)),
        rows_(0) {}

  Eigen::Index columns() const { return gram_.cols(); }
  Eigen::Index rows() const { return rows_; }
  const Eigen::MatrixXd& gram() const { return gram_; }
  const Eigen::VectorXd& column_norms_sq() const { return norms_sq_; }

  /// Metrics of the matrix with `row` appended, leaving the state untouched.
  std::pair<double, double> append_metrics(const Eigen::Ref<const Eigen::VectorXd>& row) const {
    check(row);
    const Eigen::Index K = columns();
    Eigen::VectorXd inv(K);
    bool any_zero = false;
    for (Eigen::Index j = 0; j < K; ++j) {
      const double m = norms_sq_[j] + row[j] * row[j];
      if (m > 0.0) {
        inv[j] = 1.0 / m;
      } else {
        inv[j] = 0.0;
        any_zero = true;
      }
    }
    double worst_sq = 0.0;
    double total_sq = 0.0;
    const double* r = row.data();
    const double* w = inv.data();
    if (!any_zero) {
      for (Eigen::Index j = 1; j < K; ++j) {
        const double* gram_col = gram_.col(j).data();
        const double rj = r[j];
        const double wj = w[j];
        double col_sum = 0.0;
        double col_max = 0.0;
        // wj is constant along the column; fold it in after the scan.
#pragma omp simd reduction(+ : col_sum) reduction(max : col_max)
        for (Eigen::Index i = 0; i < j; ++i) {
          const double g = gram_col[i] + r[i] * rj;
          const double c2 = g * g * w[i];
          col_sum += c2;
          col_max = col_max < c2 ? c2 : col_max;
        }
        total_sq += col_sum * wj;
        worst_sq = std::max(worst_sq, col_max * wj);
      }
    } else {
      for (Eigen::Index j = 1; j < K; ++j) {
        const double rj = r[j];
        for (Eigen::Index i = 0; i < j; ++i) {
          double c2;
          if (w[i] == 0.0 || w[j] == 0.0) {
            c2 = 1.0;
          } else {
            const double g = gram_(i, j) + r[i] * rj;
            c2 = g * g * w[i] * w[j];
          }
          total_sq += c2;
          worst_sq = std::max(worst_sq, c2);
        }
      }
    }
    const double pairs = static_cast<double>(K) * static_cast<double>(K - 1);
    return {std::sqrt(worst_sq), 2.0 * total_sq / pairs};
  }

  /// Commit a row: rank-one Gram update plus norm update.
  void append_row(const Eigen::Ref<const Eigen::VectorXd>& row) {
    check(row);
    gram_.selfadjointView<Eigen::Upper>().rankUpdate(row, 1.0);
    gram_ = gram_.selfadjointView<Eigen::Upper>();
    norms_sq_ += row.array().square().matrix();
    ++rows_;
  }

 private:
  void check(const Eigen::Ref<const Eigen::VectorXd>& row) const {
    if (row.size() != columns()) throw std::invalid_argument("GramState: row length mismatch");
  }

  Eigen::MatrixXd gram_;
  Eigen::VectorXd norms_sq_;
  Eigen::Index rows_;
};

/// Dense M x K matrix of basis evaluations at sample points, optionally
/// weight-premultiplied row by row. Column squared norms and the Gram
/// product are built at assembly and kept consistent with the entries.
class MeasurementMatrix {
 public:
  MeasurementMatrix(Eigen::MatrixXd entries, bool weighted)
      : entries_(std::move(entries)), weighted_(weighted) {
    if (entries_.cols() < 1) throw std::invalid_argument("MeasurementMatrix: no columns");
    gram_.noalias() = entries_.transpose() * entries_;
    norms_sq_ = gram_.diagonal();
  }

  Eigen::Index rows() const { return entries_.rows(); }
  Eigen::Index cols() const { return entries_.cols(); }
  const Eigen::MatrixXd& entries() const { return entries_; }
  bool weighted() const { return weighted_; }
  const Eigen::MatrixXd& gram() const { return gram_; }
  const Eigen::VectorXd& column_norms_sq() const { return norms_sq_; }

  /// Gram state over the same columns with no rows committed yet.
  GramState empty_state() const { return GramState(cols()); }

 private:
  Eigen::MatrixXd entries_;
  bool weighted_;
  Eigen::MatrixXd gram_;
  Eigen::VectorXd norms_sq_;
};

/// Build the measurement matrix of an ensemble: row i holds the basis
/// members at point i, scaled by the point's weight when requested.
inline MeasurementMatrix assemble(const SampleEnsemble& ensemble, const Basis& basis,
                                  bool apply_weights) {
  if (ensemble.family != basis.family())
    throw std::invalid_argument("assemble: ensemble/basis family mismatch");
  if (ensemble.dim() != basis.dim())
    throw std::invalid_argument("assemble: ensemble/basis dimension mismatch");
  Eigen::MatrixXd entries(ensemble.size(), static_cast<Eigen::Index>(basis.size()));
  Eigen::VectorXd row(static_cast<Eigen::Index>(basis.size()));
  for (Eigen::Index i = 0; i < ensemble.size(); ++i) {
    basis.row_into(ensemble.points.row(i).transpose(), row.data());
    if (apply_weights) row *= ensemble.weights[i];
    entries.row(i) = row.transpose();
  }
  return MeasurementMatrix(std::move(entries), apply_weights);
}

namespace detail {
template <typename PairVisitor>
void visit_normalized_pairs(const Eigen::MatrixXd& gram, const Eigen::VectorXd& norms_sq,
                            PairVisitor&& visit) {
  const Eigen::Index K = gram.cols();
  for (Eigen::Index j = 1; j < K; ++j)
    for (Eigen::Index i = 0; i < j; ++i) {
      if (norms_sq[i] == 0.0 || norms_sq[j] == 0.0)
        visit(1.0);
      else
        visit(std::abs(gram(i, j)) / std::sqrt(norms_sq[i] * norms_sq[j]));
    }
}
}  // namespace detail

/// Largest absolute normalized inner product between distinct columns.
/// Zero for a matrix with orthogonal columns; pairs involving a zero-norm
/// column count as fully correlated.
inline double mutual_coherence(const MeasurementMatrix& m) {
  if (m.cols() < 2) throw std::invalid_argument("mutual_coherence: need at least two columns");
  double worst = 0.0;
  detail::visit_normalized_pairs(m.gram(), m.column_norms_sq(),
                                 [&](double c) { worst = std::max(worst, c); });
  return worst;
}

/// Mean squared normalized off-diagonal Gram entry. The normalized diagonal
/// is exactly one, so this equals ||I - G~||_F^2 / (K (K-1)).
inline double avg_cross_correlation(const MeasurementMatrix& m) {
  if (m.cols() < 2) throw std::invalid_argument("avg_cross_correlation: need at least two columns");
  double total = 0.0;
  detail::visit_normalized_pairs(m.gram(), m.column_norms_sq(),
                                 [&](double c) { total += c * c; });
  const double pairs = static_cast<double>(m.cols()) * static_cast<double>(m.cols() - 1);
  return 2.0 * total / pairs;
}

/// Mean of the normalized cross-correlations at least t; absent when no
/// pair qualifies.
inline std::optional<double> t_averaged_coherence(const MeasurementMatrix& m, double t) {
  if (m.cols() < 2) throw std::invalid_argument("t_averaged_coherence: need at least two columns");
  if (t <= 0.0 || t >= 1.0) throw std::invalid_argument("t_averaged_coherence: t outside (0, 1)");
  double total = 0.0;
  std::int64_t qualifying = 0;
  detail::visit_normalized_pairs(m.gram(), m.column_norms_sq(), [&](double c) {
    if (c >= t) {
      total += c;
      ++qualifying;
    }
  });
  if (qualifying == 0) return std::nullopt;
  return total / static_cast<double>(qualifying);
}

inline CorrelationMetrics correlation_metrics(const MeasurementMatrix& m,
                                              std::optional<double> t = std::nullopt) {
  CorrelationMetrics metrics;
  metrics.mu = mutual_coherence(m);
  metrics.gamma = avg_cross_correlation(m);
  if (t) metrics.mu_t = t_averaged_coherence(m, *t);
  metrics.spark_lower_bound = spark_lower_bound(metrics.mu);
  return metrics;
}

/// Dense binary dump: header of two 64-bit counts (M, K) followed by the
/// entries in row-major order as 64-bit floats.
inline void write_matrix_binary(const Eigen::MatrixXd& matrix, std::ostream& out) {
  const std::uint64_t rows = static_cast<std::uint64_t>(matrix.rows());
  const std::uint64_t cols = static_cast<std::uint64_t>(matrix.cols());
  out.write(reinterpret_cast<const char*>(&rows), 8);
  out.write(reinterpret_cast<const char*>(&cols), 8);
  for (Eigen::Index i = 0; i < matrix.rows(); ++i)
    for (Eigen::Index j = 0; j < matrix.cols(); ++j) {
      const double v = matrix(i, j);
      out.write(reinterpret_cast<const char*>(&v), sizeof v);
    }
}

inline Eigen::MatrixXd read_matrix_binary(std::istream& in) {
  std::uint64_t rows = 0, cols = 0;
  in.read(reinterpret_cast<char*>(&rows), 8);
  in.read(reinterpret_cast<char*>(&cols), 8);
  if (!in) throw std::runtime_error("matrix file: truncated header");
  Eigen::MatrixXd matrix(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
  for (std::uint64_t i = 0; i < rows; ++i)
    for (std::uint64_t j = 0; j < cols; ++j) {
      double v = 0;
      in.read(reinterpret_cast<char*>(&v), sizeof v);
      matrix(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = v;
    }
  if (!in) throw std::runtime_error("matrix file: truncated payload");
  return matrix;
}

}  // namespace sparsepce
