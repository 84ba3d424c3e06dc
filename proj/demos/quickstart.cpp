// Minimal end-to-end usage: build a synthetic problem, screen at one lambda,
// solve the reduced problem, and confirm the discards were safe.

#include <cstdio>

#include <slores/slores.hpp>

int main() {
  const slores::dataset ds = slores::synthesize(200, 2000, 0.1, 0.5, 42);

  const slores::lambda_max_result lm = slores::lambda_max(ds);
  std::printf("lambda_max = %.6e (feature %lld)\n", lm.value,
              static_cast<long long>(lm.j0 + 1));

  const slores::screening_geometry geom =
      slores::build_geometry(ds, lm.value, lm.theta);
  const double lambda = 0.9 * lm.value;
  const slores::screen_result sr = slores::slores(ds, lambda, geom);
  std::printf("at lambda/lambda_max = 0.9: discarded %zu of %lld features\n",
              sr.discarded.size(), static_cast<long long>(ds.cols()));

  slores::fit_options opts;
  opts.tol_gap = 1e-9;
  const slores::primal_solution reduced =
      slores::fit(ds, lambda, &sr.kept, nullptr, opts);
  const slores::primal_solution full = slores::fit(ds, lambda, nullptr, nullptr, opts);
  std::printf("reduced objective %.12f vs full %.12f (gap %.1e / %.1e)\n",
              reduced.objective, full.objective, reduced.gap, full.gap);

  const double tau = slores::zero_threshold(full.beta);
  long violations = 0;
  for (slores::index_t j : sr.discarded)
    if (std::abs(full.beta[j]) > tau) ++violations;
  std::printf("safety violations: %ld\n", violations);
  return violations == 0 ? 0 : 1;
}
