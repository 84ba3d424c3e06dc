#pragma once

#include <algorithm>
#include <cmath>
#include <vector>

#include "slores/geometry.hpp"
#include "slores/types.hpp"

namespace slores {

enum class bound_case {
  zero_projection,     // P xbar^j = 0: the dual product is constant over the region
  halfspace_inactive,  // ball + hyperplane maximizer already satisfies the halfspace
  halfspace_active     // maximizer sits on the halfspace boundary
};

struct quad_coeffs {
  double a2 = 0.0, a1 = 0.0, a0 = 0.0, delta = 0.0;
};

struct sign_bound {
  double t = 0.0;
  bound_case kind = bound_case::zero_projection;
  double u2 = 0.0;    // halfspace multiplier (halfspace_active only)
  quad_coeffs quad;   // quadratic solved for u2 (halfspace_active only)
};

// Upper bounds on <theta, xi * xbar^j> over the screening region, one per
// sign.  Feature j is safe to discard at lambda when t < m * lambda.
struct bound_result {
  index_t feature = -1;
  double d = 0.0;  // normalized distance from theta0 to the halfspace boundary
  sign_bound plus;
  sign_bound minus;
  double t = 0.0;  // max(plus.t, minus.t)
};

// Per-lambda quantities shared by every feature in a screening sweep.
struct bound_context {
  double lambda;
  double r;         // ball radius at lambda
  double d;         // m(lambda0 - lambda) / (r ||P xbar*||), clamped to <= 1
  double gap_m;     // m (lambda0 - lambda)
  double m_lambda;  // m lambda
};

inline bound_context make_bound_context(double lambda,
                                        const screening_geometry& geom) {
  if (geom.degenerate)
    throw geometry_error(
        "bound_context: reference feature has zero projection; bounds unavailable");
  if (!(lambda > 0.0 && lambda < geom.lambda0))
    throw invalid_input("bound_context: bounds require 0 < lambda < lambda0");
  const double r = radius(lambda, geom);
  if (r <= 0.0)
    throw invalid_input("bound_context: radius underflowed to zero at this lambda");
  const double gap_m = static_cast<double>(geom.m) * (geom.lambda0 - lambda);
  const double d_raw = gap_m / (r * geom.proj_xstar_norm);
  // d <= 1 holds mathematically whenever theta0 is a dual optimum at lambda0
  if (d_raw > 1.0 + 1e-9)
    throw internal_error("bound_context: d exceeds 1 beyond roundoff");
  return {lambda, r, std::min(d_raw, 1.0), gap_m,
          static_cast<double>(geom.m) * lambda};
}

namespace detail {

inline sign_bound bound_one_sign(int xi, const feature_stats& f,
                                 const bound_context& ctx,
                                 const screening_geometry& geom) {
  // The bound is written in terms of x = -xi * xbar^j.
  const double dot0 = -xi * f.dot_theta0;        // <theta0, x>
  const double cross = -xi * f.dot_proj_xstar;   // <Px, P xbar*>
  const double nx = f.proj_norm;
  const double ns = geom.proj_xstar_norm;
  const double cbar = std::clamp(cross / (nx * ns), -1.0, 1.0);

  if (cbar >= ctx.d)
    return {ctx.r * nx - dot0, bound_case::halfspace_inactive, 0.0, {}};

  const double ns2 = ns * ns;
  const double one_md2 = 1.0 - ctx.d * ctx.d;
  quad_coeffs q;
  q.a2 = ns2 * ns2 * one_md2;
  q.a1 = 2.0 * cross * ns2 * one_md2;
  q.a0 = cross * cross - ctx.d * ctx.d * nx * nx * ns2;

  double u2;
  if (cbar <= -1.0 + 1e-12) {
    // Collinear with -xbar*: the quadratic degenerates but its root has the
    // closed form below (the one_md2 factor cancels), with delta = 0.
    q.delta = 0.0;
    u2 = -cross / ns2;
  } else {
    if (q.a2 <= 1e-14 * ns2 * ns2)
      throw internal_error(
          "bound_feature: quadratic degenerates off the collinear ray (d == 1)");
    double gram = nx * nx * ns2 - cross * cross;  // >= 0 by Cauchy-Schwarz
    if (gram < -1e-10 * nx * nx * ns2)
      throw internal_error("bound_feature: negative Gram determinant");
    gram = std::max(gram, 0.0);
    q.delta = 4.0 * ctx.d * ctx.d * one_md2 * ns2 * ns2 * gram;
    u2 = std::max((-q.a1 + std::sqrt(q.delta)) / (2.0 * q.a2), 0.0);
  }

  const double combo_sq =
      std::max(nx * nx + 2.0 * u2 * cross + u2 * u2 * ns2, 0.0);
  const double t = ctx.r * std::sqrt(combo_sq) - u2 * ctx.gap_m - dot0;
  return {t, bound_case::halfspace_active, u2, q};
}

inline bool zero_projection(const feature_stats& f) {
  return f.proj_norm <= 1e-10 * std::sqrt(f.norm_sq);
}

}  // namespace detail

inline bound_result bound_feature(index_t j, const bound_context& ctx,
                                  const screening_geometry& geom,
                                  const std::vector<feature_stats>& pre) {
  if (j < 0 || j >= static_cast<index_t>(pre.size()))
    throw invalid_input("bound_feature: feature index out of range");
  const feature_stats& f = pre[static_cast<std::size_t>(j)];

  bound_result out;
  out.feature = j;
  out.d = ctx.d;
  if (detail::zero_projection(f)) {
    // <theta, xbar^j> = (dot_b/m) <theta, b> = 0 over the whole region
    out.plus = out.minus = {0.0, bound_case::zero_projection, 0.0, {}};
    out.t = 0.0;
    return out;
  }
  out.plus = detail::bound_one_sign(+1, f, ctx, geom);
  out.minus = detail::bound_one_sign(-1, f, ctx, geom);
  out.t = std::max(out.plus.t, out.minus.t);
  return out;
}

/// Upper bound for a single feature at one lambda.  Sweeps over many features
/// at the same lambda should build the context once and use the overload
/// above.
inline bound_result bound_feature(index_t j, double lambda,
                                  const screening_geometry& geom,
                                  const std::vector<feature_stats>& pre) {
  return bound_feature(j, make_bound_context(lambda, geom), geom, pre);
}

inline bound_result bound_feature(index_t j, double lambda,
                                  const screening_geometry& geom) {
  return bound_feature(j, lambda, geom, geom.features);
}

}  // namespace slores
