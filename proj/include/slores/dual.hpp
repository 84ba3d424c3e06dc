#pragma once

#include <cmath>
#include <utility>

#include "slores/dataset.hpp"
#include "slores/types.hpp"

namespace slores {

// A point of the logistic dual domain: a vector with every entry strictly
// inside (0,1).  Construction validates once so downstream code can take the
// open-box constraint for granted.
class dual_point {
 public:
  explicit dual_point(vec values) : values_(std::move(values)) {
    for (index_t i = 0; i < values_.size(); ++i) {
      const double t = values_[i];
      if (!(t > 0.0 && t < 1.0))
        throw invalid_input("dual_point: entries must lie strictly in (0,1)");
    }
  }

  const vec& values() const { return values_; }
  index_t size() const { return values_.size(); }
  double operator[](index_t i) const { return values_[i]; }

 private:
  vec values_;
};

namespace detail {

inline double entropy_pair(double t) {
  // t*log(t) + (1-t)*log(1-t), stable near both endpoints
  const double log_t = (t > 0.5) ? std::log1p(t - 1.0) : std::log(t);
  const double log_1t = (t < 0.5) ? std::log1p(-t) : std::log(1.0 - t);
  return t * log_t + (1.0 - t) * log_1t;
}

inline double entropy_sum(const vec& theta) {
  double acc = 0.0;
  for (index_t i = 0; i < theta.size(); ++i) acc += entropy_pair(theta[i]);
  return acc / static_cast<double>(theta.size());
}

}  // namespace detail

/// Dual objective g(theta) = (1/m) sum_i [theta_i log theta_i +
/// (1-theta_i) log(1-theta_i)].  Always in [-log 2, 0).
inline double dual_objective(const dual_point& theta) {
  return detail::entropy_sum(theta.values());
}

/// Gradient of g: component i is (1/m) log(theta_i / (1-theta_i)).
inline vec dual_gradient(const dual_point& theta) {
  const vec& t = theta.values();
  const double inv_m = 1.0 / static_cast<double>(t.size());
  vec g(t.size());
  for (index_t i = 0; i < t.size(); ++i) {
    const double log_t = (t[i] > 0.5) ? std::log1p(t[i] - 1.0) : std::log(t[i]);
    const double log_1t = (t[i] < 0.5) ? std::log1p(-t[i]) : std::log(1.0 - t[i]);
    g[i] = inv_m * (log_t - log_1t);
  }
  return g;
}

/// Projection onto the complement of span{b}: Pv = v - (<v,b>/m) b.
/// Idempotent, and <Pv, b> = 0 up to roundoff.
inline vec project_complement_b(const vec& v, const dataset& ds) {
  if (v.size() != ds.rows())
    throw invalid_input("project_complement_b: dimension mismatch");
  const double scale = ds.labels.dot(v) / static_cast<double>(ds.rows());
  return v - scale * ds.labels;
}

struct lambda_max_result {
  double value;     // smallest lambda at which the solution is all-zero
  dual_point theta; // dual optimum shared by every lambda >= value
  index_t j0;       // smallest feature index attaining the max
  int sign0;        // sign of <theta, xbar^{j0}>
};

/// The dual optimum above lambda_max has the closed form
/// theta_i = n_neg/m for positive samples and n_pos/m for negative ones;
/// lambda_max itself is (1/m) max_j |<theta, xbar^j>|.
inline lambda_max_result lambda_max(const dataset& ds) {
  const index_t m = ds.rows();
  const double t_pos = static_cast<double>(ds.n_neg) / static_cast<double>(m);
  const double t_neg = static_cast<double>(ds.n_pos) / static_cast<double>(m);
  vec theta(m);
  for (index_t i = 0; i < m; ++i) theta[i] = ds.labels[i] > 0 ? t_pos : t_neg;

  const vec dots = ds.xbar.transpose() * theta;
  double best = 0.0;
  index_t j0 = -1;
  for (index_t j = 0; j < dots.size(); ++j) {
    const double a = std::abs(dots[j]);
    if (a > best) {
      best = a;
      j0 = j;
    }
  }
  if (j0 < 0)
    throw degenerate_problem("lambda_max: all feature columns are orthogonal to theta");

  return {best / static_cast<double>(m), dual_point(std::move(theta)), j0,
          dots[j0] >= 0.0 ? 1 : -1};
}

}  // namespace slores
