#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <vector>

namespace sparsepce {

/// L1 recovery controls. The defaults target noiseless recovery well below
/// a 1e-7 relative-error success threshold.
struct SolverOptions {
  double opt_tol = 1e-9;   // duality-gap and root-finding optimality
  double bp_tol = 1e-9;    // residual feasibility, relative to the data norm
  double dec_tol = 1e-7;   // objective stall that triggers a Newton root step
  int max_iters = 10000;   // total projected-gradient iterations
  double step_min = 1e-16;
  double step_max = 1e5;
  double suff_descent = 1e-4;
  int linesearch_iters = 12;
  int max_line_errors = 10;
  int history = 10;  // nonmonotone line-search window
};

/// One basis-pursuit(-denoising) instance: minimize ||c||_1 subject to
/// ||matrix c - data||_2 <= epsilon. epsilon == 0 requests the equality
/// formulation, handled by driving the residual root to feasibility
/// tolerance.
struct RecoverySpec {
  Eigen::MatrixXd matrix;
  Eigen::VectorXd data;
  double epsilon = 0.0;
  SolverOptions options{};
};

struct RecoveryResult {
  Eigen::VectorXd coefficients;
  double residual_norm = 0.0;
  double l1_norm = 0.0;
  int iterations = 0;
  bool converged = false;
};

/// Euclidean projection onto the l1 ball of radius tau, by magnitude sort
/// and soft threshold.
inline void project_l1_ball(const Eigen::VectorXd& v, double tau, Eigen::VectorXd& out) {
  const Eigen::Index n = v.size();
  if (tau <= 0.0) {
    out = Eigen::VectorXd::Zero(n);
    return;
  }
  if (v.lpNorm<1>() <= tau) {
    out = v;
    return;
  }
  std::vector<double> magnitude(static_cast<std::size_t>(n));
  for (Eigen::Index i = 0; i < n; ++i) magnitude[static_cast<std::size_t>(i)] = std::abs(v[i]);
  std::sort(magnitude.begin(), magnitude.end(), std::greater<double>());
  double excess = -tau;
  double threshold = 0.0;
  for (Eigen::Index i = 0; i < n; ++i) {
    excess += magnitude[static_cast<std::size_t>(i)];
    const double level = excess / static_cast<double>(i + 1);
    if (level >= magnitude[static_cast<std::size_t>(i)]) break;
    threshold = level;
  }
  out.resize(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const double shrunk = std::abs(v[i]) - threshold;
    out[i] = shrunk > 0.0 ? std::copysign(shrunk, v[i]) : 0.0;
  }
}

namespace detail {

/// Dense matrix behind the solver's apply / adjoint-apply interface; any
/// operator with the same three members can stand in for it.
class DenseOperator {
 public:
  explicit DenseOperator(const Eigen::MatrixXd& m) : m_(m) {}
  Eigen::Index rows() const { return m_.rows(); }
  Eigen::Index cols() const { return m_.cols(); }
  void apply(const Eigen::VectorXd& x, Eigen::VectorXd& out) const { out.noalias() = m_ * x; }
  void apply_adjoint(const Eigen::VectorXd& y, Eigen::VectorXd& out) const {
    out.noalias() = m_.transpose() * y;
  }

 private:
  const Eigen::MatrixXd& m_;
};

enum class SpgExit {
  none,
  residual_feasible,   // ||r|| fell below the basis-pursuit floor
  dual_feasible,       // ||A'r||_inf fell below the floor
  root_found,          // ||r|| meets epsilon to optimality tolerance
  suboptimal_feasible, // ||r|| <= epsilon with the gap closed
  stalled_gradient,    // A'r vanished; nothing left to move
  line_error,          // repeated line-search failures
  iterations,          // iteration budget exhausted
};

/// Spectral projected gradient for min ||Ax-b||^2/2 on the l1 ball of
/// radius tau, wrapped in Newton root finding on the Pareto curve
/// phi(tau) = ||r(tau)|| = epsilon. Structure follows the SPGL1 method of
/// van den Berg & Friedlander: a nonmonotone projected line search with
/// Barzilai-Borwein step lengths, and a tau update whenever the subproblem
/// objective stalls.
template <typename Operator>
RecoveryResult spg_solve(const Operator& op, const Eigen::VectorXd& b, double sigma,
                         const SolverOptions& opt) {
  const Eigen::Index n = op.cols();
  RecoveryResult result;
  result.coefficients = Eigen::VectorXd::Zero(n);

  const double b_norm = b.norm();
  if (b_norm <= sigma) {
    // The zero vector is already feasible, and nothing has smaller l1 norm.
    result.residual_norm = b_norm;
    result.converged = true;
    return result;
  }

  Eigen::VectorXd x = Eigen::VectorXd::Zero(n);
  Eigen::VectorXd r = b;
  Eigen::VectorXd g(n);
  op.apply_adjoint(r, g);
  g = -g;
  double f = 0.5 * r.squaredNorm();
  double tau = 0.0;
  double step_max = opt.step_max;

  // Spectral step length seeded from the first projected gradient move.
  Eigen::VectorXd work(n), trial(n), r_trial(b.size());
  project_l1_ball(x - g, tau, work);
  const double dx_inf = (work - x).lpNorm<Eigen::Infinity>();
  double bb_step = dx_inf < 1.0 / step_max ? step_max
                                           : std::min(step_max, std::max(opt.step_min, 1.0 / dx_inf));

  std::vector<double> history(static_cast<std::size_t>(opt.history),
                              -std::numeric_limits<double>::infinity());
  history[0] = f;
  double f_best = f;
  Eigen::VectorXd x_best = x;

  int iterations = 0;
  int line_errors = 0;
  SpgExit exit = SpgExit::none;

  auto refresh_at = [&](const Eigen::VectorXd& point) {
    x = point;
    op.apply(x, r_trial);
    r = b - r_trial;
    f = 0.5 * r.squaredNorm();
    op.apply_adjoint(r, g);
    g = -g;
  };

  while (exit == SpgExit::none) {
    // Newton step on the Pareto curve toward phi(tau) = sigma.
    const double g_norm = g.lpNorm<Eigen::Infinity>();
    const double r_norm = r.norm();
    if (g_norm <= 0.0) {
      exit = SpgExit::stalled_gradient;
      break;
    }
    const double tau_next = std::max(0.0, tau + r_norm * (r_norm - sigma) / g_norm);
    if (tau_next < tau) {
      project_l1_ball(x, tau_next, work);
      refresh_at(work);
      std::fill(history.begin(), history.end(), -std::numeric_limits<double>::infinity());
      history[0] = f;
    }
    tau = tau_next;

    // Solve the current lasso subproblem until its gap closes or the
    // objective stalls enough to warrant the next root step.
    bool update_tau = false;
    while (exit == SpgExit::none && !update_tau) {
      ++iterations;
      const double f_prev = f;
      const Eigen::VectorXd x_prev = x;
      const Eigen::VectorXd g_prev = g;
      const double f_max = *std::max_element(history.begin(), history.end());

      // Stage one: projected backtracking along the scaled gradient.
      bool accepted = false;
      {
        double step = 1.0;
        double scale = 1.0;
        double prev_dx_norm = 0.0, dx_norm = 0.0;
        int damping = 0;
        for (int ls = 0; ls <= opt.linesearch_iters; ++ls) {
          project_l1_ball(x - (step * scale * bb_step) * g, tau, trial);
          op.apply(trial, r_trial);
          r_trial = b - r_trial;
          const double f_trial = 0.5 * r_trial.squaredNorm();
          const double gtd = scale * bb_step * g.dot(trial - x);
          if (gtd >= 0.0) break;  // projection stopped descending
          if (f_trial < f_max + opt.suff_descent * step * gtd) {
            x = trial;
            r = r_trial;
            f = f_trial;
            accepted = true;
            break;
          }
          step *= 0.5;
          // When huge steps project to nearly the same point, damp the
          // direction itself.
          prev_dx_norm = dx_norm;
          dx_norm = (trial - x).norm() / std::sqrt(static_cast<double>(n));
          if (std::abs(dx_norm - prev_dx_norm) <= 1e-6 * dx_norm) {
            const double dir_norm = bb_step * g.norm() / std::sqrt(static_cast<double>(n));
            scale = dx_norm / dir_norm / std::pow(2.0, damping);
            ++damping;
          }
        }
      }

      // Stage two: nonmonotone search along the feasible direction
      // P(x - bb_step g) - x with safeguarded quadratic interpolation.
      if (!accepted) {
        project_l1_ball(x - bb_step * g, tau, work);
        const Eigen::VectorXd direction = work - x;
        const double gtd = -std::abs(g.dot(direction));
        double step = 1.0;
        for (int ls = 0; ls <= opt.linesearch_iters; ++ls) {
          trial = x + step * direction;
          op.apply(trial, r_trial);
          r_trial = b - r_trial;
          const double f_trial = 0.5 * r_trial.squaredNorm();
          if (f_trial < f_max + opt.suff_descent * step * gtd) {
            x = trial;
            r = r_trial;
            f = f_trial;
            accepted = true;
            break;
          }
          double next = step * 0.5;
          if (step > 0.1) {
            const double interp =
                -gtd * step * step / (2.0 * (f_trial - f - step * gtd));
            if (std::isfinite(interp) && interp >= 0.1 * step && interp <= 0.9 * step)
              next = interp;
          }
          step = next;
        }
      }

      if (!accepted) {
        if (++line_errors >= opt.max_line_errors) {
          exit = SpgExit::line_error;
          break;
        }
        // Damp the spectral step ceiling and retry from the same iterate.
        step_max /= 10.0;
        bb_step = std::min(bb_step, step_max);
        f = f_prev;
        continue;
      }

      // Barzilai-Borwein scaling from the accepted move.
      op.apply_adjoint(r, g);
      g = -g;
      const Eigen::VectorXd dx = x - x_prev;
      const double sts = dx.squaredNorm();
      const double sty = dx.dot(g - g_prev);
      bb_step = sty <= 0.0 ? step_max
                           : std::min(step_max, std::max(opt.step_min, sts / sty));

      if (f > 0.5 * sigma * sigma) {
        history[static_cast<std::size_t>(iterations % opt.history)] = f;
        if (f < f_best) {
          f_best = f;
          x_best = x;
        }
      }

      // Exit and root-update tests.
      const double r_now = r.norm();
      const double lambda = g.lpNorm<Eigen::Infinity>();
      const double gap = r.dot(r - b) + tau * lambda;
      const double gap_rel = std::abs(gap) / std::max(1.0, f);
      const double r_err_abs = r_now - sigma;
      const double r_err_rel = std::abs(r_err_abs) / std::max(1.0, r_now);
      const double f_err_rel = std::abs(f - 0.5 * sigma * sigma) / std::max(1.0, f);

      if (gap_rel <= std::max(opt.opt_tol, f_err_rel) || r_err_rel <= opt.opt_tol) {
        if (r_now <= opt.bp_tol * b_norm) exit = SpgExit::residual_feasible;
        if (lambda <= opt.bp_tol * b_norm) exit = SpgExit::dual_feasible;
        if (r_err_rel <= opt.opt_tol) exit = SpgExit::root_found;
        if (r_now <= sigma) exit = SpgExit::suboptimal_feasible;
      }
      if (exit == SpgExit::none) {
        // Move tau only once the subproblem objective has stalled; Newton
        // steps taken from unsolved subproblems overshoot the root and end
        // at feasible but l1-suboptimal points.
        const bool stall_far = std::abs(f - f_prev) <= opt.dec_tol * f && r_now > 2.0 * sigma;
        const bool stall_near =
            std::abs(f - f_prev) <= opt.dec_tol * f * std::abs(r_err_abs) && r_now <= 2.0 * sigma;
        update_tau = stall_far || stall_near;
        if (iterations >= opt.max_iters) exit = SpgExit::iterations;
      }
    }
  }

  if (f_best < f) {
    refresh_at(x_best);
  }

  // Support polish: once the iterate has singled out a candidate support,
  // least squares on those columns closes the last digits of the residual.
  // The polished point is kept only when it improves the residual without
  // growing the l1 norm, so it can only move toward the constrained
  // optimum, never away from it.
  {
    const double x_inf = x.lpNorm<Eigen::Infinity>();
    for (const double cut : {1e-9, 1e-7, 1e-5, 1e-3}) {
      std::vector<Eigen::Index> support;
      for (Eigen::Index j = 0; j < n; ++j)
        if (std::abs(x[j]) > cut * x_inf) support.push_back(j);
      if (support.empty() || static_cast<Eigen::Index>(support.size()) > op.rows()) continue;
      Eigen::MatrixXd columns(op.rows(), static_cast<Eigen::Index>(support.size()));
      Eigen::VectorXd unit = Eigen::VectorXd::Zero(n);
      Eigen::VectorXd column(op.rows());
      for (std::size_t s = 0; s < support.size(); ++s) {
        unit[support[s]] = 1.0;
        op.apply(unit, column);
        columns.col(static_cast<Eigen::Index>(s)) = column;
        unit[support[s]] = 0.0;
      }
      const Eigen::VectorXd fitted = columns.colPivHouseholderQr().solve(b);
      const Eigen::VectorXd fit_residual = b - columns * fitted;
      Eigen::VectorXd polished = Eigen::VectorXd::Zero(n);
      for (std::size_t s = 0; s < support.size(); ++s)
        polished[support[s]] = fitted[static_cast<Eigen::Index>(s)];
      if (fit_residual.norm() < r.norm() &&
          polished.lpNorm<1>() <= x.lpNorm<1>() * (1.0 + 1e-9) + 1e-12) {
        x = polished;
        r = fit_residual;
        break;
      }
    }
  }

  result.coefficients = x;
  result.residual_norm = r.norm();
  result.l1_norm = x.lpNorm<1>();
  result.iterations = iterations;
  // Whatever path ended the iteration, converged means the feasibility
  // contract holds: the residual meets epsilon up to the solver slack. A
  // dual exit on an infeasible system, a stall, or an exhausted budget all
  // land here with an honest flag.
  result.converged = result.residual_norm <=
                     sigma + opt.bp_tol * b_norm + opt.opt_tol * std::max(1.0, result.residual_norm);
  return result;
}

}  // namespace detail

/// Solve min ||c||_1 subject to ||matrix c - data|| <= epsilon.
/// Non-convergence within the iteration budget is reported through the
/// `converged` flag, never silently.
inline RecoveryResult recover(const RecoverySpec& spec) {
  if (spec.matrix.rows() != spec.data.size())
    throw std::invalid_argument("recover: matrix rows and data length differ");
  if (spec.matrix.cols() < 1) throw std::invalid_argument("recover: matrix has no columns");
  if (spec.epsilon < 0.0) throw std::invalid_argument("recover: epsilon must be >= 0");
  if (!spec.matrix.allFinite() || !spec.data.allFinite())
    throw std::invalid_argument("recover: non-finite entries");
  detail::DenseOperator op(spec.matrix);
  return detail::spg_solve(op, spec.data, spec.epsilon, spec.options);
}

/// Weighted recovery: scale each equation by its positive weight and solve;
/// guarantees matrix and data receive the same weighting.
inline RecoveryResult recover_weighted(const Eigen::MatrixXd& matrix,
                                       const Eigen::VectorXd& weights,
                                       const Eigen::VectorXd& data, double epsilon,
                                       const SolverOptions& options = {}) {
  if (weights.size() != matrix.rows())
    throw std::invalid_argument("recover_weighted: weight length mismatch");
  if ((weights.array() <= 0.0).any())
    throw std::invalid_argument("recover_weighted: weights must be positive");
  RecoverySpec spec;
  spec.matrix = weights.asDiagonal() * matrix;
  spec.data = weights.cwiseProduct(data);
  spec.epsilon = epsilon;
  spec.options = options;
  return recover(spec);
}

}  // namespace sparsepce
