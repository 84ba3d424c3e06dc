#pragma once

#include <cmath>
#include <utility>
#include <vector>

#include "slores/dataset.hpp"
#include "slores/dual.hpp"
#include "slores/precompute.hpp"
#include "slores/types.hpp"

namespace slores {

// Everything screening needs about a reference point (lambda0, theta0), where
// theta0 is the dual optimum at lambda0.  Built once per reference point with
// a single pass over the data; bounds at any lambda < lambda0 then read from
// the feature table without touching the matrix again.
struct screening_geometry {
  double lambda0;
  dual_point theta0;
  double lam_max;          // lambda_max of the dataset
  index_t j0;              // smallest active feature at lambda0
  int sign0;               // sign of <theta0, xbar^{j0}>
  double proj_xstar_norm;  // ||P xbar*||, xbar* = sign0 * xbar^{j0}
  double g_theta0;         // g(theta0)
  double grad_dot_theta0;  // <grad g(theta0), theta0>
  bool degenerate;         // P xbar* vanishes; bounds unavailable
  index_t m;
  std::vector<feature_stats> features;
};

/// Radius of the dual ball centered at theta0 that is guaranteed to contain
/// the dual optimum at lambda:
///   r = sqrt((m/2) [ g((lambda/lambda0) theta0) - g(theta0)
///                    + (1 - lambda/lambda0) <grad g(theta0), theta0> ]).
/// Zero exactly at lambda = lambda0 and decreasing in lambda.
inline double radius(double lambda, const screening_geometry& geom) {
  if (!(lambda > 0.0)) throw invalid_input("radius: lambda must be positive");
  if (lambda > geom.lambda0)
    throw invalid_input("radius: defined only for lambda <= lambda0");
  const double scale = lambda / geom.lambda0;
  const double bracket = detail::entropy_sum(scale * geom.theta0.values()) -
                         geom.g_theta0 + (1.0 - scale) * geom.grad_dot_theta0;
  // mathematically >= 0 by convexity; tiny negatives are roundoff
  if (bracket < -1e-12) throw internal_error("radius: negative bracket");
  return std::sqrt(0.5 * static_cast<double>(geom.m) * std::max(bracket, 0.0));
}

/// Validates (lambda0, theta0) as a dual reference point and assembles the
/// screening geometry.  theta0 must be dual-feasible at lambda0 and have a
/// nonempty active set {j : |<theta0, xbar^j>| >= m lambda0 (1 - 1e-7)};
/// an empty set signals that theta0 is not a dual optimum at lambda0.
inline screening_geometry build_geometry(const dataset& ds, double lambda0,
                                         const dual_point& theta0) {
  const index_t m = ds.rows();
  if (theta0.size() != m) throw invalid_input("build_geometry: theta0 has wrong length");
  if (!(lambda0 > 0.0)) throw invalid_input("build_geometry: lambda0 must be positive");

  const double m_lambda0 = static_cast<double>(m) * lambda0;
  const vec dots = ds.xbar.transpose() * theta0.values();
  if (dots.cwiseAbs().maxCoeff() > m_lambda0 * (1.0 + 1e-7))
    throw invalid_input("build_geometry: theta0 is not dual-feasible at lambda0");
  if (std::abs(theta0.values().dot(ds.labels)) > 1e-7 * static_cast<double>(m))
    throw invalid_input("build_geometry: theta0 is not orthogonal to the labels");

  const lambda_max_result lm = lambda_max(ds);
  if (lambda0 > lm.value * (1.0 + 1e-9))
    throw invalid_input("build_geometry: lambda0 exceeds lambda_max");

  index_t j0 = -1;
  for (index_t j = 0; j < dots.size(); ++j) {
    if (std::abs(dots[j]) >= m_lambda0 * (1.0 - 1e-7)) {
      j0 = j;
      break;
    }
  }
  if (j0 < 0)
    throw geometry_error(
        "build_geometry: no feature is active at lambda0; "
        "theta0 does not look like a dual optimum");
  const int sign0 = dots[j0] >= 0.0 ? 1 : -1;

  std::vector<feature_stats> features = precompute(ds, theta0, j0, sign0);
  const feature_stats& f0 = features[static_cast<std::size_t>(j0)];
  const bool degenerate = f0.proj_norm <= 1e-10 * std::sqrt(f0.norm_sq);

  double grad_dot = 0.0;
  {
    const vec& t = theta0.values();
    for (index_t i = 0; i < m; ++i) {
      const double log_t = (t[i] > 0.5) ? std::log1p(t[i] - 1.0) : std::log(t[i]);
      const double log_1t = (t[i] < 0.5) ? std::log1p(-t[i]) : std::log(1.0 - t[i]);
      grad_dot += t[i] * (log_t - log_1t);
    }
    grad_dot /= static_cast<double>(m);
  }

  return {lambda0,
          theta0,
          lm.value,
          j0,
          sign0,
          f0.proj_norm,
          dual_objective(theta0),
          grad_dot,
          degenerate,
          m,
          std::move(features)};
}

}  // namespace slores
