#pragma once

#include <cmath>
#include <vector>

#include "slores/dataset.hpp"
#include "slores/dual.hpp"
#include "slores/types.hpp"

namespace slores {

// Per-feature statistics the screening bound consumes.  Everything here is
// filled by one pass over the stored columns, which is the whole point: after
// this table exists, screening a feature at any lambda costs O(1).
struct feature_stats {
  double dot_b = 0.0;           // <xbar^j, b>
  double norm_sq = 0.0;         // ||xbar^j||^2
  double proj_norm = 0.0;       // ||P xbar^j||
  double dot_theta0 = 0.0;      // <xbar^j, theta0>
  double dot_proj_xstar = 0.0;  // <P xbar^j, P xbar*>
};

/// Builds the statistics table for every column against a reference dual point
/// and the signed reference feature xbar* = xstar_sign * xbar^{xstar_index}.
inline std::vector<feature_stats> precompute(const dataset& ds,
                                             const dual_point& theta0,
                                             index_t xstar_index,
                                             int xstar_sign) {
  const index_t m = ds.rows();
  const index_t p = ds.cols();
  if (theta0.size() != m) throw invalid_input("precompute: theta0 has wrong length");
  if (xstar_index < 0 || xstar_index >= p)
    throw invalid_input("precompute: xstar_index out of range");
  if (xstar_sign != 1 && xstar_sign != -1)
    throw invalid_input("precompute: xstar_sign must be +1 or -1");

  vec xstar = vec::Zero(m);
  for (sparse_matrix::InnerIterator it(ds.xbar, xstar_index); it; ++it)
    xstar[it.row()] = xstar_sign * it.value();
  const double xstar_dot_b = xstar.dot(ds.labels);
  const double inv_m = 1.0 / static_cast<double>(m);

  std::vector<feature_stats> table(static_cast<std::size_t>(p));
  const vec& theta = theta0.values();
  for (index_t j = 0; j < p; ++j) {
    feature_stats& f = table[static_cast<std::size_t>(j)];
    double dot_xstar = 0.0;
    for (sparse_matrix::InnerIterator it(ds.xbar, j); it; ++it) {
      const double v = it.value();
      f.dot_b += v * ds.labels[it.row()];
      f.norm_sq += v * v;
      f.dot_theta0 += v * theta[it.row()];
      dot_xstar += v * xstar[it.row()];
    }
    // ||P x||^2 = ||x||^2 - <x,b>^2/m is nonnegative by Cauchy-Schwarz;
    // anything below -1e-12 relative would mean corrupted inputs.
    double proj_sq = f.norm_sq - f.dot_b * f.dot_b * inv_m;
    if (proj_sq < -1e-12 * f.norm_sq)
      throw internal_error("precompute: negative projected norm");
    f.proj_norm = std::sqrt(std::max(proj_sq, 0.0));
    f.dot_proj_xstar = dot_xstar - f.dot_b * xstar_dot_b * inv_m;
  }
  return table;
}

}  // namespace slores
