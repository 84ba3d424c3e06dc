#pragma once

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <numeric>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Cholesky>

#include "slores/dataset.hpp"
#include "slores/dual.hpp"
#include "slores/types.hpp"

namespace slores {

struct fit_options {
  double tol_gap = 1e-9;  // stop once the certified duality gap falls below this
  long max_iters = 100000;
  std::vector<double>* objective_trace = nullptr;  // accepted objective per iteration
};

struct primal_solution {
  vec beta;                 // full feature length; zeros off the kept set
  double intercept = 0.0;
  double lambda = 0.0;
  double objective = 0.0;   // loss + lambda * ||beta||_1
  double gap = 0.0;         // duality gap certified at termination
  long iterations = 0;
  vec theta;                // dual-feasible certificate for the fitted problem
};

/// Coefficients with magnitude at or below this are treated as exact zeros
/// when counting sparsity or auditing screening.
inline double zero_threshold(const vec& beta) {
  const double top = beta.size() ? beta.cwiseAbs().maxCoeff() : 0.0;
  return 1e-8 * std::max(1.0, top);
}

/// Smooth part of the objective: (1/m) sum_i log(1 + exp(-<beta, xbar_i> - b_i c)).
inline double smooth_loss(const dataset& ds, const vec& beta, double intercept);

/// Gradient of smooth_loss with respect to (beta, intercept).
inline std::pair<vec, double> smooth_gradient(const dataset& ds, const vec& beta,
                                              double intercept);

namespace detail {

inline double logistic_loss(const vec& z) {
  double acc = 0.0;
  for (index_t i = 0; i < z.size(); ++i)
    acc += z[i] > 0.0 ? std::log1p(std::exp(-z[i]))
                      : -z[i] + std::log1p(std::exp(z[i]));
  return acc / static_cast<double>(z.size());
}

inline void sigmoid_neg(const vec& z, vec& s) {  // s_i = 1 / (1 + exp(z_i))
  s.resize(z.size());
  for (index_t i = 0; i < z.size(); ++i) {
    if (z[i] >= 0.0) {
      const double e = std::exp(-z[i]);
      s[i] = e / (1.0 + e);
    } else {
      s[i] = 1.0 / (1.0 + std::exp(z[i]));
    }
  }
}

inline double soft_threshold(double v, double t) {
  if (v > t) return v - t;
  if (v < -t) return v + t;
  return 0.0;
}

inline void margins(const dataset& ds, const vec& beta, double intercept,
                    vec& z) {
  z = intercept * ds.labels;
  for (index_t j = 0; j < ds.cols(); ++j) {
    const double bj = beta[j];
    if (bj == 0.0) continue;
    for (sparse_matrix::InnerIterator it(ds.xbar, j); it; ++it)
      z[it.row()] += bj * it.value();
  }
}

// gradient of the smooth loss w.r.t. (beta_j for j in idx, intercept), given
// s_i = sigma(-z_i)
inline void loss_gradient(const dataset& ds, const std::vector<index_t>& idx,
                          const vec& s, vec& grad_beta, double& grad_c) {
  const double inv_m = 1.0 / static_cast<double>(ds.rows());
  grad_c = -inv_m * ds.labels.dot(s);
  for (index_t j : idx) {
    double dot = 0.0;
    for (sparse_matrix::InnerIterator it(ds.xbar, j); it; ++it)
      dot += it.value() * s[it.row()];
    grad_beta[j] = -inv_m * dot;
  }
}

// Dual candidate from a primal margin vector: re-center against b, scale into
// the feasible slab, clip into the open box.  Returns the candidate and the
// max |<theta, xbar^j>| over the given columns (post-repair).
struct dual_candidate {
  vec theta;
  double max_abs_dot;
  double b_residual;
};

inline dual_candidate repair_dual(const vec& theta_raw, const dataset& ds,
                                  double lambda,
                                  const std::vector<index_t>& cols) {
  const double m = static_cast<double>(ds.rows());
  // center first: scaling is multiplicative, so it keeps <theta, b> = 0,
  // whereas shifting after the scale would push dots back out of the slab
  vec theta = theta_raw;
  theta -= (ds.labels.dot(theta) / m) * ds.labels;

  double max_raw = 0.0;
  for (index_t j : cols) {
    double dot = 0.0;
    for (sparse_matrix::InnerIterator it(ds.xbar, j); it; ++it)
      dot += it.value() * theta[it.row()];
    max_raw = std::max(max_raw, std::abs(dot));
  }
  if (max_raw > m * lambda) {
    // shave a hair below the boundary so the re-measured dots cannot land
    // above m*lambda through rounding; the dual value moves by O(1e-13)
    theta *= (m * lambda / max_raw) * (1.0 - 1e-13);
  }
  for (index_t i = 0; i < theta.size(); ++i)
    theta[i] = std::clamp(theta[i], 1e-12, 1.0 - 1e-12);

  double max_dot = 0.0;
  for (index_t j : cols) {
    double dot = 0.0;
    for (sparse_matrix::InnerIterator it(ds.xbar, j); it; ++it)
      dot += it.value() * theta[it.row()];
    max_dot = std::max(max_dot, std::abs(dot));
  }
  const double b_residual = std::abs(ds.labels.dot(theta));
  return {std::move(theta), max_dot, b_residual};
}

// Worst first-order optimality violation over the candidate features: active
// coefficients must sit exactly on their subgradient face, zero coefficients
// inside it, and the intercept gradient at zero.  This is the quantity the
// dual certificate is sensitive to: an active-face overshoot of eps forces
// the repaired dual point to deflate by eps, which costs O(eps) of gap.
inline double kkt_residual(const dataset& ds, double lambda,
                           const std::vector<index_t>& idx, const vec& beta,
                           const vec& s) {
  const double inv_m = 1.0 / static_cast<double>(ds.rows());
  double res = std::abs(inv_m * ds.labels.dot(s));
  for (index_t j : idx) {
    double dot = 0.0;
    for (sparse_matrix::InnerIterator it(ds.xbar, j); it; ++it)
      dot += it.value() * s[it.row()];
    const double g = inv_m * dot;
    const double r = beta[j] != 0.0
                         ? std::abs(g - (beta[j] > 0.0 ? lambda : -lambda))
                         : std::max(0.0, std::abs(g) - lambda);
    res = std::max(res, r);
  }
  return res;
}

// Damped Newton step on the fixed-sign restriction of the objective.  With
// the support and signs frozen the l1 term is linear, so the restricted
// problem is smooth and a second-order step polishes the last digits far
// faster than first-order iterations can; this matters because the dual
// certificate reads the margins to first order while the objective is flat
// to second order.  Near the floor the per-step objective decrease drops
// below one ulp, so acceptance is on strict decrease of the first-order
// residual instead, with the objective allowed to move by a few ulps; a sign
// that would flip during the line search is clamped to zero.
inline bool newton_polish(const dataset& ds, double lambda,
                          const std::vector<index_t>& idx, vec& beta, double& c,
                          vec& z, double& obj) {
  const index_t m = ds.rows();
  const double inv_m = 1.0 / static_cast<double>(m);
  std::vector<index_t> support;
  for (index_t j : idx)
    if (beta[j] != 0.0) support.push_back(j);
  const std::size_t k = support.size();

  Eigen::MatrixXd cols(m, k + 1);
  cols.setZero();
  for (std::size_t a = 0; a < k; ++a)
    for (sparse_matrix::InnerIterator it(ds.xbar, support[a]); it; ++it)
      cols(it.row(), static_cast<index_t>(a)) = it.value();
  cols.col(static_cast<index_t>(k)) = ds.labels;

  vec s(m);
  sigmoid_neg(z, s);
  const double res0 = kkt_residual(ds, lambda, idx, beta, s);
  vec w(m);
  for (index_t i = 0; i < m; ++i) w[i] = s[i] * (1.0 - s[i]);

  Eigen::MatrixXd h = inv_m * cols.transpose() * w.asDiagonal() * cols;
  h.diagonal().array() += 1e-10 * (h.trace() / static_cast<double>(k + 1) + 1e-30);
  Eigen::VectorXd rhs(k + 1);
  for (std::size_t a = 0; a < k; ++a) {
    const double sign = beta[support[a]] > 0.0 ? 1.0 : -1.0;
    rhs[static_cast<index_t>(a)] =
        inv_m * cols.col(static_cast<index_t>(a)).dot(s) - lambda * sign;
  }
  rhs[static_cast<index_t>(k)] = inv_m * ds.labels.dot(s);

  const Eigen::VectorXd delta = h.ldlt().solve(rhs);
  if (!delta.allFinite()) return false;

  vec beta_cand(beta.size());
  vec z_cand(m), s_cand(m);
  const double obj_slack = 1e-15 * std::max(1.0, std::abs(obj));
  for (double t = 1.0; t >= 1e-6; t *= 0.5) {
    beta_cand = beta;
    for (std::size_t a = 0; a < k; ++a) {
      const index_t j = support[a];
      const double stepped = beta[j] + t * delta[static_cast<index_t>(a)];
      beta_cand[j] = (stepped * beta[j] > 0.0) ? stepped : 0.0;
    }
    const double c_cand = c + t * delta[static_cast<index_t>(k)];
    margins(ds, beta_cand, c_cand, z_cand);
    double l1 = 0.0;
    for (index_t j : idx) l1 += std::abs(beta_cand[j]);
    const double obj_cand = logistic_loss(z_cand) + lambda * l1;
    sigmoid_neg(z_cand, s_cand);
    const double res_cand = kkt_residual(ds, lambda, idx, beta_cand, s_cand);
    if (obj_cand <= obj + obj_slack && res_cand <= 0.99 * res0) {
      beta.swap(beta_cand);
      c = c_cand;
      z.swap(z_cand);
      obj = obj_cand;
      return true;
    }
  }
  return false;
}

}  // namespace detail

inline double smooth_loss(const dataset& ds, const vec& beta, double intercept) {
  if (beta.size() != ds.cols()) throw invalid_input("smooth_loss: beta has wrong length");
  vec z(ds.rows());
  detail::margins(ds, beta, intercept, z);
  return detail::logistic_loss(z);
}

inline std::pair<vec, double> smooth_gradient(const dataset& ds, const vec& beta,
                                              double intercept) {
  if (beta.size() != ds.cols())
    throw invalid_input("smooth_gradient: beta has wrong length");
  vec z(ds.rows()), s(ds.rows());
  detail::margins(ds, beta, intercept, z);
  detail::sigmoid_neg(z, s);
  std::vector<index_t> all(static_cast<std::size_t>(ds.cols()));
  std::iota(all.begin(), all.end(), index_t{0});
  vec grad = vec::Zero(ds.cols());
  double grad_c = 0.0;
  detail::loss_gradient(ds, all, s, grad, grad_c);
  return {std::move(grad), grad_c};
}

/// Solves the l1-regularized logistic regression problem at `lambda`,
/// optionally restricted to the `kept` feature subset (coefficients off the
/// subset are pinned at zero).  Proximal gradient with FISTA momentum, made
/// monotone by re-starting from the incumbent whenever the accelerated
/// candidate would increase the objective, so the reported objective never
/// increases from one accepted step to the next.  Termination is by duality
/// gap certificate: a dual-feasible point of the (restricted) dual problem
/// whose objective matches the primal to within tol_gap.
inline primal_solution fit(const dataset& ds, double lambda,
                           const std::vector<index_t>* kept = nullptr,
                           const primal_solution* warm = nullptr,
                           const fit_options& opts = {}) {
  if (!(lambda > 0.0)) throw invalid_input("fit: lambda must be positive");
  if (!(opts.tol_gap > 0.0)) throw invalid_input("fit: tol_gap must be positive");
  if (opts.max_iters < 1) throw invalid_input("fit: max_iters must be at least 1");
  const index_t m = ds.rows();
  const index_t p = ds.cols();
  const double m_lambda = static_cast<double>(m) * lambda;

  std::vector<index_t> idx;
  if (kept) {
    idx = *kept;
    for (std::size_t k = 0; k < idx.size(); ++k) {
      if (idx[k] < 0 || idx[k] >= p)
        throw invalid_input("fit: kept index out of range");
      if (k > 0 && idx[k] <= idx[k - 1])
        throw invalid_input("fit: kept indices must be strictly increasing");
    }
  } else {
    idx.resize(static_cast<std::size_t>(p));
    std::iota(idx.begin(), idx.end(), index_t{0});
  }

  vec beta = vec::Zero(p);
  // intercept-only maximum-likelihood start; exact whenever lambda >= lambda_max
  double c = std::log(static_cast<double>(ds.n_pos) / static_cast<double>(ds.n_neg));
  if (warm) {
    if (warm->beta.size() != p) throw invalid_input("fit: warm start has wrong length");
    c = warm->intercept;
    for (index_t j : idx) beta[j] = warm->beta[j];
  }

  auto l1_norm = [&](const vec& b_vec) {
    double acc = 0.0;
    for (index_t j : idx) acc += std::abs(b_vec[j]);
    return acc;
  };

  vec z_x(m);
  detail::margins(ds, beta, c, z_x);
  double obj_x = detail::logistic_loss(z_x) + lambda * l1_norm(beta);

  vec beta_prev = beta, z_prev = z_x;
  double c_prev = c;
  vec beta_y = beta, z_y = z_x;
  double c_y = c;

  vec s(m), grad(p), beta_cand(p), z_cand(m);
  double L = 1.0;
  double t_momentum = 1.0;
  double gap = std::numeric_limits<double>::infinity();
  vec theta_cert;
  long iter = 0;

  while (iter < opts.max_iters) {
    ++iter;

    detail::sigmoid_neg(z_y, s);
    const double loss_y = detail::logistic_loss(z_y);
    double grad_c = 0.0;
    detail::loss_gradient(ds, idx, s, grad, grad_c);

    double loss_cand = 0.0, c_cand = 0.0;
    while (true) {
      const double step = 1.0 / L;
      beta_cand = beta_y;
      for (index_t j : idx)
        beta_cand[j] = detail::soft_threshold(beta_y[j] - step * grad[j], step * lambda);
      c_cand = c_y - step * grad_c;

      z_cand = z_y + (c_cand - c_y) * ds.labels;
      double diff_sq = (c_cand - c_y) * (c_cand - c_y);
      double inner = grad_c * (c_cand - c_y);
      for (index_t j : idx) {
        const double d = beta_cand[j] - beta_y[j];
        if (d != 0.0) {
          for (sparse_matrix::InnerIterator it(ds.xbar, j); it; ++it)
            z_cand[it.row()] += d * it.value();
        }
        diff_sq += d * d;
        inner += grad[j] * d;
      }

      loss_cand = detail::logistic_loss(z_cand);
      if (loss_cand <= loss_y + inner + 0.5 * L * diff_sq + 1e-15 * std::abs(loss_y))
        break;
      L *= 2.0;
      if (L > 1e18)
        throw convergence_failure("fit: line search failed at lambda = " +
                                  std::to_string(lambda));
    }

    // refresh the candidate margins from scratch: incremental roundoff from
    // the line search must not leak into the objective or the certificates
    detail::margins(ds, beta_cand, c_cand, z_cand);
    const double obj_cand =
        detail::logistic_loss(z_cand) + lambda * l1_norm(beta_cand);
    // accept within a few ulps: near the floor, progress along nearly flat
    // directions is invisible in the objective but still sharpens the dual
    // certificate, so an exact monotone gate would freeze the iterate early
    const double slack = 1e-15 * std::max(1.0, std::abs(obj_x));
    if (obj_cand <= obj_x + slack) {
      beta_prev.swap(beta);
      z_prev.swap(z_x);
      c_prev = c;
      beta = beta_cand;
      z_x.swap(z_cand);
      c = c_cand;
      obj_x = obj_cand;

      const double t_next = 0.5 * (1.0 + std::sqrt(1.0 + 4.0 * t_momentum * t_momentum));
      const double w = (t_momentum - 1.0) / t_next;
      t_momentum = t_next;
      beta_y = beta;
      for (index_t j : idx) beta_y[j] = beta[j] + w * (beta[j] - beta_prev[j]);
      c_y = c + w * (c - c_prev);
      z_y = z_x + w * (z_x - z_prev);
    } else {
      // accelerated candidate overshot: restart momentum at the incumbent;
      // the next step is plain proximal descent and cannot increase
      t_momentum = 1.0;
      beta_y = beta;
      c_y = c;
      z_y = z_x;
    }
    if (opts.objective_trace) opts.objective_trace->push_back(obj_x);
    L = std::max(L * 0.9, 1e-12);

    if (iter % 10 == 0 || iter == opts.max_iters) {
      bool polished = false;
      int rounds = 0;
      do {
        detail::sigmoid_neg(z_x, s);
        detail::dual_candidate cand = detail::repair_dual(s, ds, lambda, idx);
        // only a near-exactly feasible candidate can certify: an overshoot of
        // eps here biases the dual value by ~eps, which would fake (or block)
        // certificates at the 1e-12 scale; infeasible repairs are skipped
        const bool feasible = cand.max_abs_dot <= m_lambda * (1.0 + 1e-13) &&
                              cand.b_residual <= 1e-13 * static_cast<double>(m);
        if (feasible) {
          const double cand_gap = obj_x + detail::entropy_sum(cand.theta);
          if (cand_gap < gap) {
            gap = cand_gap;
            theta_cert = cand.theta;
          }
        }
        // once first-order steps have brought the iterate close, finish with
        // second-order polish rounds and re-certify after each one
        polished = gap > opts.tol_gap && gap < 1e-4 &&
                   detail::newton_polish(ds, lambda, idx, beta, c, z_x, obj_x);
        if (polished) {
          beta_prev = beta;
          c_prev = c;
          z_prev = z_x;
          beta_y = beta;
          c_y = c;
          z_y = z_x;
          t_momentum = 1.0;
        }
      } while (polished && ++rounds < 8);
      if (gap <= opts.tol_gap) break;
    }
  }

  if (!(gap <= opts.tol_gap)) {
    char msg[160];
    std::snprintf(msg, sizeof(msg),
                  "fit: no duality-gap certificate below tol after %ld iterations"
                  " (lambda = %.6e, best gap = %.6e)",
                  static_cast<long>(iter), lambda, gap);
    throw convergence_failure(msg);
  }

  primal_solution out;
  out.beta = std::move(beta);
  out.intercept = c;
  out.lambda = lambda;
  out.objective = obj_x;
  out.gap = gap;
  out.iterations = iter;
  out.theta = std::move(theta_cert);
  return out;
}

struct recovered_dual {
  vec raw;             // sigma(-margin); may saturate to {0,1} in floating point
  dual_point feasible; // scaled into the slab, re-centered against b, clipped
};

/// Maps a primal point to its dual candidate theta_i = 1/(1+exp(margin_i))
/// and repairs it into a feasible point of the dual at sol.lambda.
inline recovered_dual recover_dual(const primal_solution& sol, const dataset& ds) {
  if (sol.beta.size() != ds.cols())
    throw invalid_input("recover_dual: solution does not match dataset");
  vec z(ds.rows());
  detail::margins(ds, sol.beta, sol.intercept, z);
  vec raw(ds.rows());
  detail::sigmoid_neg(z, raw);

  std::vector<index_t> all(static_cast<std::size_t>(ds.cols()));
  std::iota(all.begin(), all.end(), index_t{0});
  detail::dual_candidate cand = detail::repair_dual(raw, ds, sol.lambda, all);
  return {std::move(raw), dual_point(std::move(cand.theta))};
}

/// Primal objective minus the (negated) dual objective at a feasible theta.
/// Nonnegative up to roundoff; theta must satisfy the dual constraints at
/// `lambda` within 1e-7.
inline double duality_gap(const primal_solution& sol, const dual_point& theta,
                          const dataset& ds, double lambda) {
  if (theta.size() != ds.rows()) throw invalid_input("duality_gap: theta has wrong length");
  if (sol.beta.size() != ds.cols())
    throw invalid_input("duality_gap: solution does not match dataset");
  const double m = static_cast<double>(ds.rows());
  const vec dots = ds.xbar.transpose() * theta.values();
  if (dots.size() > 0 && dots.cwiseAbs().maxCoeff() > m * lambda * (1.0 + 1e-7))
    throw invalid_input("duality_gap: theta violates the slab constraint");
  if (std::abs(theta.values().dot(ds.labels)) > 1e-7 * m)
    throw invalid_input("duality_gap: theta is not orthogonal to the labels");

  vec z(ds.rows());
  detail::margins(ds, sol.beta, sol.intercept, z);
  const double primal = detail::logistic_loss(z) + lambda * sol.beta.lpNorm<1>();
  return primal + detail::entropy_sum(theta.values());
}

struct kkt_report {
  double max_violation = 0.0;        // worst relative excess over the 1e-5 window
  std::vector<index_t> offenders;    // features outside their stationarity window
  bool ok() const { return offenders.empty(); }
};

/// Stationarity check: for beta_j above the zero threshold,
/// <theta, xbar^j> must equal sign(beta_j) * m * lambda within a relative
/// window of 1e-5; for zero coefficients, |<theta, xbar^j>| must not exceed
/// m * lambda by more than the same window.
inline kkt_report kkt_check(const primal_solution& sol, const dual_point& theta,
                            const dataset& ds, double lambda) {
  if (theta.size() != ds.rows()) throw invalid_input("kkt_check: theta has wrong length");
  const double m_lambda = static_cast<double>(ds.rows()) * lambda;
  const double tau = zero_threshold(sol.beta);
  const double delta = 1e-5;
  const vec dots = ds.xbar.transpose() * theta.values();

  kkt_report report;
  for (index_t j = 0; j < ds.cols(); ++j) {
    double excess;
    if (sol.beta[j] > tau)
      excess = std::abs(dots[j] - m_lambda) / m_lambda - delta;
    else if (sol.beta[j] < -tau)
      excess = std::abs(dots[j] + m_lambda) / m_lambda - delta;
    else
      excess = (std::abs(dots[j]) - m_lambda) / m_lambda - delta;
    if (excess > 0.0) {
      report.offenders.push_back(j);
      report.max_violation = std::max(report.max_violation, excess);
    }
  }
  return report;
}

}  // namespace slores
