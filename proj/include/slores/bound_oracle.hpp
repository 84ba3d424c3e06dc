#pragma once

#include <algorithm>
#include <cmath>

#include "slores/dual.hpp"
#include "slores/geometry.hpp"
#include "slores/types.hpp"

namespace slores {

/// Reference bound used to cross-check bound_feature: maximizes
/// <theta, xi * xbar^j> over the screening region
///   { ||theta - theta0|| <= r } ∩ { <theta,b> = 0 } ∩ { <theta,xbar*> <= m lambda }
/// from first principles.  If the ball-and-hyperplane maximizer
/// theta0 + r Pv/||Pv|| satisfies the halfspace it is optimal; otherwise the
/// value is min over mu >= 0 of
///   F(mu) = <theta0, v - mu xbar*> + r ||P(v - mu xbar*)|| + mu m lambda,
/// found by bisecting the sign change of F' (at the kink the directional term
/// is taken as zero).  Works on dense columns and shares no precomputed
/// statistics with bound_feature.
inline double oracle_bound(index_t j, int xi, double lambda,
                           const screening_geometry& geom, const dataset& ds) {
  if (j < 0 || j >= ds.cols()) throw invalid_input("oracle_bound: feature out of range");
  if (xi != 1 && xi != -1) throw invalid_input("oracle_bound: xi must be +1 or -1");
  const index_t m = ds.rows();

  vec v = vec::Zero(m);
  for (sparse_matrix::InnerIterator it(ds.xbar, j); it; ++it)
    v[it.row()] = xi * it.value();
  vec xs = vec::Zero(m);
  for (sparse_matrix::InnerIterator it(ds.xbar, geom.j0); it; ++it)
    xs[it.row()] = geom.sign0 * it.value();

  const double r = radius(lambda, geom);
  const double m_lambda = static_cast<double>(m) * lambda;
  const vec& t0 = geom.theta0.values();
  const vec pv = project_complement_b(v, ds);
  const vec pxs = project_complement_b(xs, ds);
  const double pv_norm = pv.norm();

  if (pv_norm == 0.0) return t0.dot(v);

  const double unconstrained = t0.dot(v) + r * pv_norm;
  const double at_xstar = t0.dot(xs) + r * pv.dot(pxs) / pv_norm;
  if (at_xstar <= m_lambda) return unconstrained;

  if (pxs.norm() == 0.0)
    throw geometry_error("oracle_bound: halfspace normal has zero projection");

  const double dot0_v = t0.dot(v);
  const double dot0_xs = t0.dot(xs);
  auto f_value = [&](double mu) {
    return dot0_v - mu * dot0_xs + r * (pv - mu * pxs).norm() + mu * m_lambda;
  };
  auto f_slope = [&](double mu) {
    const vec w = pv - mu * pxs;
    const double nw = w.norm();
    const double directional = (nw == 0.0) ? 0.0 : w.dot(pxs) / nw;
    return -dot0_xs + m_lambda - r * directional;
  };

  double lo = 0.0, hi = 1.0;
  while (f_slope(hi) < 0.0 && hi < 1e15) hi *= 2.0;
  while (hi - lo > 1e-12 * std::max(1.0, hi)) {
    const double mid = 0.5 * (lo + hi);
    (f_slope(mid) < 0.0 ? lo : hi) = mid;
  }
  return std::min({f_value(lo), f_value(0.5 * (lo + hi)), f_value(hi)});
}

}  // namespace slores
