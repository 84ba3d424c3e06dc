#pragma once

#include <chrono>
#include <cmath>
#include <numeric>
#include <optional>
#include <vector>

#include "slores/bounds.hpp"
#include "slores/geometry.hpp"
#include "slores/solver.hpp"
#include "slores/types.hpp"

namespace slores {

enum class screen_rule { slores, strong, none };

inline const char* rule_name(screen_rule r) {
  switch (r) {
    case screen_rule::slores: return "slores";
    case screen_rule::strong: return "strong";
    case screen_rule::none: return "none";
  }
  return "?";
}

struct screen_result {
  screen_rule rule;
  double lambda;
  double lambda0;
  std::vector<index_t> kept;       // ascending
  std::vector<index_t> discarded;  // ascending; disjoint from kept
  double seconds = 0.0;            // wall clock of the rule evaluation alone
};

/// Safe screening at lambda against the reference geometry: a feature is
/// discarded only when its dual-product upper bound over the screening region
/// falls below m*lambda, which guarantees its coefficient is zero at the
/// optimum.  At lambda >= lambda_max everything is discarded (the solution is
/// identically zero); at lambda == lambda0 < lambda_max the region is a point
/// and nothing useful can be discarded, so everything is kept, as it also is
/// when the reference feature has zero projection.
inline screen_result slores(const dataset& ds, double lambda,
                            const screening_geometry& geom) {
  if (!(lambda > 0.0)) throw invalid_input("slores: lambda must be positive");
  if (ds.rows() != geom.m || ds.cols() != static_cast<index_t>(geom.features.size()))
    throw invalid_input("slores: geometry does not match dataset");
  const auto start = std::chrono::steady_clock::now();

  screen_result out{screen_rule::slores, lambda, geom.lambda0, {}, {}, 0.0};
  const index_t p = ds.cols();

  if (lambda >= geom.lam_max) {
    out.discarded.resize(static_cast<std::size_t>(p));
    std::iota(out.discarded.begin(), out.discarded.end(), index_t{0});
  } else if (lambda > geom.lambda0) {
    throw invalid_input("slores: lambda must not exceed lambda0");
  } else if (lambda == geom.lambda0 || geom.degenerate) {
    out.kept.resize(static_cast<std::size_t>(p));
    std::iota(out.kept.begin(), out.kept.end(), index_t{0});
  } else {
    const bound_context ctx = make_bound_context(lambda, geom);
    // discard margin: strict inequality with a hair of slack so bounds that
    // land exactly on m*lambda (the reference feature does) are kept
    const double threshold = ctx.m_lambda * (1.0 - 1e-9);
    for (index_t j = 0; j < p; ++j) {
      const feature_stats& f = geom.features[static_cast<std::size_t>(j)];
      bool discard;
      if (detail::zero_projection(f)) {
        discard = true;
      } else {
        const double t_plus = detail::bound_one_sign(+1, f, ctx, geom).t;
        const double t_minus = detail::bound_one_sign(-1, f, ctx, geom).t;
        discard = std::max(t_plus, t_minus) < threshold;
      }
      (discard ? out.discarded : out.kept).push_back(j);
    }
  }

  out.seconds = std::chrono::duration<double>(
                    std::chrono::steady_clock::now() - start).count();
  return out;
}

/// The (unsafe) strong-rule baseline: discard j when
/// |<theta0, xbar^j>| < m (2 lambda - lambda0).  The threshold is negative or
/// zero for lambda <= lambda0/2, where the rule discards nothing.
inline screen_result strong_rule(const dataset& ds, double lambda,
                                 double lambda0, const dual_point& theta0) {
  if (!(lambda > 0.0 && lambda0 > 0.0))
    throw invalid_input("strong_rule: lambdas must be positive");
  if (theta0.size() != ds.rows())
    throw invalid_input("strong_rule: theta0 has wrong length");
  const auto start = std::chrono::steady_clock::now();

  screen_result out{screen_rule::strong, lambda, lambda0, {}, {}, 0.0};
  const double threshold =
      static_cast<double>(ds.rows()) * (2.0 * lambda - lambda0);
  if (threshold <= 0.0) {
    out.kept.resize(static_cast<std::size_t>(ds.cols()));
    std::iota(out.kept.begin(), out.kept.end(), index_t{0});
  } else {
    const vec dots = ds.xbar.transpose() * theta0.values();
    for (index_t j = 0; j < ds.cols(); ++j)
      (std::abs(dots[j]) < threshold ? out.discarded : out.kept).push_back(j);
  }

  out.seconds = std::chrono::duration<double>(
                    std::chrono::steady_clock::now() - start).count();
  return out;
}

/// Fraction of the solver's zero coefficients that screening discarded.
/// Empty when the solution has no zeros to reject.
inline std::optional<double> rejection_ratio(const screen_result& sr,
                                             const primal_solution& sol) {
  const double tau = zero_threshold(sol.beta);
  index_t n_zero = 0;
  for (index_t j = 0; j < sol.beta.size(); ++j)
    if (std::abs(sol.beta[j]) <= tau) ++n_zero;
  if (n_zero == 0) return std::nullopt;
  return static_cast<double>(sr.discarded.size()) / static_cast<double>(n_zero);
}

}  // namespace slores
