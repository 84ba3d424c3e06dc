// Command-line front end: screen / solve / verify on one dataset, or `path`
// to run the full regularization-path benchmark and emit a CSV/JSON report.

#include <cinttypes>
#include <cstdio>
#include <exception>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include <slores/slores.hpp>

namespace {

struct data_options {
  std::string data;
  std::string synthetic;
  std::uint64_t seed = 0;
};

void add_data_options(CLI::App* cmd, data_options& opt) {
  auto* d = cmd->add_option("--data", opt.data, "svmlight/libsvm input file");
  auto* s = cmd->add_option("--synthetic", opt.synthetic,
                            "synthetic problem spec: m,p,density,correlation");
  d->excludes(s);
  s->excludes(d);
  cmd->add_option("--seed", opt.seed, "seed for synthetic data / subsampling");
}

slores::synthetic_spec parse_synthetic(const std::string& s) {
  slores::synthetic_spec spec;
  long long m = 0, p = 0;
  char trailing = 0;
  const int n = std::sscanf(s.c_str(), "%lld,%lld,%lf,%lf%c", &m, &p,
                            &spec.density, &spec.correlation, &trailing);
  if (n != 4)
    throw slores::invalid_input(
        "--synthetic expects m,p,density,correlation (e.g. 200,2000,0.1,0.5)");
  spec.m = m;
  spec.p = p;
  return spec;
}

slores::dataset make_dataset(const data_options& opt) {
  if (!opt.synthetic.empty()) {
    const slores::synthetic_spec spec = parse_synthetic(opt.synthetic);
    return slores::synthesize(spec.m, spec.p, spec.density, spec.correlation,
                              opt.seed);
  }
  if (opt.data.empty())
    throw slores::invalid_input("provide --data FILE or --synthetic m,p,density,corr");
  return slores::load_svmlight(opt.data);
}

double resolve_lambda(double ratio, double lambda_abs, double lam_max) {
  if (ratio > 0.0 && lambda_abs > 0.0)
    throw slores::invalid_input("--ratio and --lambda are mutually exclusive");
  if (ratio > 0.0) return ratio * lam_max;
  if (lambda_abs > 0.0) return lambda_abs;
  throw slores::invalid_input("provide --ratio R or --lambda L");
}

std::vector<slores::screen_rule> parse_rules(const std::string& csv) {
  std::vector<slores::screen_rule> rules;
  std::size_t pos = 0;
  while (pos <= csv.size()) {
    const std::size_t comma = csv.find(',', pos);
    const std::string tok =
        csv.substr(pos, comma == std::string::npos ? std::string::npos : comma - pos);
    if (tok == "slores")
      rules.push_back(slores::screen_rule::slores);
    else if (tok == "strong")
      rules.push_back(slores::screen_rule::strong);
    else if (tok == "none")
      rules.push_back(slores::screen_rule::none);
    else
      throw slores::invalid_input("unknown rule '" + tok +
                                  "' (expected slores, strong, or none)");
    if (comma == std::string::npos) break;
    pos = comma + 1;
  }
  return rules;
}

int run_path_cmd(const data_options& data, slores::path_config cfg,
                 const std::string& grid, const std::string& rules,
                 const std::string& lambda0, const std::string& out_dir,
                 const std::string& format) {
  if (!data.synthetic.empty())
    cfg.synthetic = parse_synthetic(data.synthetic);
  else
    cfg.data_path = data.data;
  cfg.seed = data.seed;

  char trailing = 0;
  if (std::sscanf(grid.c_str(), "%lf:%lf:%d%c", &cfg.ratio_lo, &cfg.ratio_hi,
                  &cfg.grid_size, &trailing) != 3)
    throw slores::invalid_input("--grid expects lo:hi:n (e.g. 0.1:0.95:86)");
  cfg.rules = parse_rules(rules);
  if (lambda0 == "max")
    cfg.policy = slores::lambda0_policy::lambda_max;
  else if (lambda0 == "sequential")
    cfg.policy = slores::lambda0_policy::sequential;
  else
    throw slores::invalid_input("--lambda0 must be 'max' or 'sequential'");

  slores::report_format fmt;
  if (format == "csv")
    fmt = slores::report_format::csv;
  else if (format == "json")
    fmt = slores::report_format::json;
  else
    throw slores::invalid_input("--format must be 'csv' or 'json'");

  const slores::path_report report = slores::run_path(cfg);
  const std::string file = slores::emit_report(report, out_dir, fmt);

  long violations = 0;
  for (const auto& row : report.rows) violations += row.safety_violations;
  std::printf("lambda_max   %.17e\n", report.lam_max);
  std::printf("rows         %zu\n", report.rows.size());
  std::printf("report       %s\n", file.c_str());
  if (report.geometry_fallbacks > 0)
    std::printf("fallbacks    %ld (sequential reference rejected, used lambda_max)\n",
                report.geometry_fallbacks);
  if (violations > 0) {
    std::printf("SAFETY VIOLATIONS: %ld\n", violations);
    return 2;
  }
  return 0;
}

int run_screen_cmd(const data_options& data, double ratio, double lambda_abs,
                   const std::string& rule, bool print_indices) {
  const slores::dataset ds = make_dataset(data);
  const slores::lambda_max_result lm = slores::lambda_max(ds);
  const double lambda = resolve_lambda(ratio, lambda_abs, lm.value);

  slores::screen_result sr = [&] {
    if (rule == "strong") return slores::strong_rule(ds, lambda, lm.value, lm.theta);
    if (rule != "slores")
      throw slores::invalid_input("--rule must be 'slores' or 'strong'");
    const slores::screening_geometry geom =
        slores::build_geometry(ds, lm.value, lm.theta);
    return slores::slores(ds, lambda, geom);
  }();

  std::printf("samples      %lld\n", static_cast<long long>(ds.rows()));
  std::printf("features     %lld\n", static_cast<long long>(ds.cols()));
  std::printf("lambda_max   %.17e\n", lm.value);
  std::printf("lambda       %.17e\n", lambda);
  std::printf("rule         %s\n", slores::rule_name(sr.rule));
  std::printf("discarded    %zu\n", sr.discarded.size());
  std::printf("kept         %zu\n", sr.kept.size());
  if (print_indices) {
    std::printf("kept_indices");
    for (slores::index_t j : sr.kept)
      std::printf(" %lld", static_cast<long long>(j + 1));
    std::printf("\n");
  }
  return 0;
}

int run_solve_cmd(const data_options& data, double ratio, double lambda_abs,
                  double tol, bool screen_first) {
  const slores::dataset ds = make_dataset(data);
  const slores::lambda_max_result lm = slores::lambda_max(ds);
  const double lambda = resolve_lambda(ratio, lambda_abs, lm.value);

  slores::fit_options opts;
  opts.tol_gap = tol;
  std::optional<slores::screen_result> sr;
  if (screen_first && lambda < lm.value) {
    const slores::screening_geometry geom =
        slores::build_geometry(ds, lm.value, lm.theta);
    sr = slores::slores(ds, lambda, geom);
  }
  const slores::primal_solution sol =
      slores::fit(ds, lambda, sr ? &sr->kept : nullptr, nullptr, opts);

  const double tau = slores::zero_threshold(sol.beta);
  long long nnz = 0;
  for (slores::index_t j = 0; j < sol.beta.size(); ++j)
    if (std::abs(sol.beta[j]) > tau) ++nnz;

  std::printf("lambda       %.17e\n", lambda);
  if (sr) std::printf("screened_out %zu\n", sr->discarded.size());
  std::printf("objective    %.17e\n", sol.objective);
  std::printf("gap          %.3e\n", sol.gap);
  std::printf("iterations   %ld\n", sol.iterations);
  std::printf("nonzeros     %lld\n", nnz);
  std::printf("intercept    %.17e\n", sol.intercept);
  return 0;
}

int run_verify_cmd(const data_options& data, double tol) {
  const slores::dataset ds = make_dataset(data);
  int failures = 0;
  auto check = [&](bool ok, const std::string& name, const std::string& detail) {
    std::printf("%s  %-22s %s\n", ok ? "ok " : "FAIL", name.c_str(), detail.c_str());
    if (!ok) ++failures;
  };
  char detail[160];

  const slores::lambda_max_result lm = slores::lambda_max(ds);
  const slores::screening_geometry geom =
      slores::build_geometry(ds, lm.value, lm.theta);
  const double m = static_cast<double>(ds.rows());

  {
    double worst = 0.0;
    for (const auto& f : geom.features) {
      const double lhs = f.proj_norm * f.proj_norm + f.dot_b * f.dot_b / m;
      worst = std::max(worst, std::abs(lhs - f.norm_sq) / std::max(1.0, f.norm_sq));
    }
    std::snprintf(detail, sizeof detail, "max relative defect %.2e", worst);
    check(worst <= 1e-10, "projection identity", detail);
  }
  {
    double worst = 0.0;
    const double prev = slores::radius(lm.value, geom);
    double last = prev;
    for (int k = 1; k <= 10; ++k) {
      const double r = slores::radius(lm.value * (1.0 - 0.09 * k), geom);
      worst = std::min(worst, r - last);  // should stay >= 0
      last = r;
    }
    std::snprintf(detail, sizeof detail, "r(lambda0) = %.2e, min increment %.2e",
                  prev, worst);
    check(prev == 0.0 && worst >= 0.0, "radius shrinks with lambda", detail);
  }
  {
    slores::fit_options opts;
    opts.tol_gap = 1e-10;
    const slores::primal_solution sol = slores::fit(ds, 1.01 * lm.value, nullptr,
                                                    nullptr, opts);
    const double beta_max = sol.beta.size() ? sol.beta.cwiseAbs().maxCoeff() : 0.0;
    const double c_ref = std::log(static_cast<double>(ds.n_pos) /
                                  static_cast<double>(ds.n_neg));
    const bool ok = beta_max <= slores::zero_threshold(sol.beta) &&
                    std::abs(sol.intercept - c_ref) <= 1e-6 && sol.gap <= 1e-10;
    std::snprintf(detail, sizeof detail,
                  "||beta||_inf %.2e, |c - log(m+/m-)| %.2e, gap %.2e", beta_max,
                  std::abs(sol.intercept - c_ref), sol.gap);
    check(ok, "all-zero above lambda_max", detail);
  }

  slores::fit_options opts;
  opts.tol_gap = tol;
  for (const double ratio : {0.5, 0.9}) {
    const double lambda = ratio * lm.value;
    const slores::primal_solution full = slores::fit(ds, lambda, nullptr, nullptr, opts);

    const double r = slores::radius(lambda, geom);
    const double dist =
        (slores::recover_dual(full, ds).feasible.values() - geom.theta0.values())
            .norm();
    // the recovered dual sits within sqrt(m*gap/2) of the exact dual optimum
    const double slack = std::sqrt(0.5 * m * full.gap) + 1e-9;
    std::snprintf(detail, sizeof detail, "ratio %.2f: ||theta - theta0|| %.6e, r %.6e",
                  ratio, dist, r);
    check(dist <= r + slack, "ball contains dual optimum", detail);

    const slores::screen_result sr = slores::slores(ds, lambda, geom);
    const double tau = slores::zero_threshold(full.beta);
    long bad = 0;
    for (slores::index_t j : sr.discarded)
      if (std::abs(full.beta[j]) > tau) ++bad;
    std::snprintf(detail, sizeof detail,
                  "ratio %.2f: discarded %zu of %lld, violations %ld", ratio,
                  sr.discarded.size(), static_cast<long long>(ds.cols()), bad);
    check(bad == 0, "screening is safe", detail);

    const slores::kkt_report kkt = slores::kkt_check(
        full, slores::recover_dual(full, ds).feasible, ds, lambda);
    std::snprintf(detail, sizeof detail, "ratio %.2f: offenders %zu, worst %.2e",
                  ratio, kkt.offenders.size(), kkt.max_violation);
    check(kkt.ok(), "stationarity", detail);
  }
  {
    const double lambda = 0.7 * lm.value;
    const slores::bound_context ctx = slores::make_bound_context(lambda, geom);
    double worst = 0.0;
    const slores::index_t step = std::max<slores::index_t>(1, ds.cols() / 20);
    for (slores::index_t j = 0; j < ds.cols(); j += step) {
      const slores::bound_result br =
          slores::bound_feature(j, ctx, geom, geom.features);
      const double plus = slores::oracle_bound(j, +1, lambda, geom, ds);
      const double minus = slores::oracle_bound(j, -1, lambda, geom, ds);
      worst = std::max({worst, std::abs(br.plus.t - plus),
                        std::abs(br.minus.t - minus)});
    }
    const double allow = std::max(1e-8, 1e-6 * m * lambda);
    std::snprintf(detail, sizeof detail, "max |closed-form - reference| %.2e (allow %.2e)",
                  worst, allow);
    check(worst <= allow, "bound cross-check", detail);
  }

  if (failures > 0) {
    std::printf("%d check(s) failed\n", failures);
    return 1;
  }
  std::printf("all checks passed\n");
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{
      "Safe feature screening for l1-regularized logistic regression.\n"
      "Discards features guaranteed to have zero coefficients before solving."};
  app.require_subcommand(1);

  // --- path ---
  auto* path_cmd = app.add_subcommand(
      "path", "benchmark screening rules over a lambda/lambda_max grid");
  data_options path_data;
  add_data_options(path_cmd, path_data);
  slores::path_config cfg;
  std::string grid = "0.1:0.95:86";
  std::string rules = "slores,strong,none";
  std::string lambda0 = "max";
  std::string out_dir = ".";
  std::string format = "csv";
  path_cmd->add_option("--grid", grid, "ratio grid lo:hi:n (default 0.1:0.95:86; n=1 uses hi)");
  path_cmd->add_option("--rules", rules, "comma list of slores,strong,none");
  path_cmd->add_option("--lambda0", lambda0,
                       "reference point: 'max' (exact, safe) or 'sequential' "
                       "(previous grid point's recovered dual)");
  path_cmd->add_option("--tol", cfg.tol_gap, "solver duality-gap tolerance");
  path_cmd->add_option("--out", out_dir, "output directory for the report");
  path_cmd->add_option("--format", format, "csv or json");
  path_cmd->add_option("--repeats", cfg.repeats, "row-subsampled repetitions");
  path_cmd->add_option("--subsample", cfg.subsample, "row fraction per repetition");
  path_cmd->add_flag("--zero-timings", cfg.zero_timings,
                     "write zeros to the timing columns so identical runs "
                     "produce byte-identical reports");

  // --- screen ---
  auto* screen_cmd =
      app.add_subcommand("screen", "report kept/discarded features at one lambda");
  data_options screen_data;
  add_data_options(screen_cmd, screen_data);
  double screen_ratio = 0.0, screen_lambda = 0.0;
  std::string screen_rule_name = "slores";
  bool print_indices = false;
  screen_cmd->add_option("--ratio", screen_ratio, "lambda as a fraction of lambda_max");
  screen_cmd->add_option("--lambda", screen_lambda, "absolute lambda");
  screen_cmd->add_option("--rule", screen_rule_name, "slores (safe) or strong (heuristic)");
  screen_cmd->add_flag("--print-indices", print_indices, "print kept feature indices (1-based)");

  // --- solve ---
  auto* solve_cmd = app.add_subcommand("solve", "fit at one lambda");
  data_options solve_data;
  add_data_options(solve_cmd, solve_data);
  double solve_ratio = 0.0, solve_lambda = 0.0, solve_tol = 1e-9;
  bool screen_first = false;
  solve_cmd->add_option("--ratio", solve_ratio, "lambda as a fraction of lambda_max");
  solve_cmd->add_option("--lambda", solve_lambda, "absolute lambda");
  solve_cmd->add_option("--tol", solve_tol, "duality-gap tolerance");
  solve_cmd->add_flag("--screen", screen_first, "apply safe screening before solving");

  // --- verify ---
  auto* verify_cmd = app.add_subcommand(
      "verify", "run internal consistency checks against this dataset");
  data_options verify_data;
  add_data_options(verify_cmd, verify_data);
  double verify_tol = 1e-9;
  verify_cmd->add_option("--tol", verify_tol, "duality-gap tolerance for the solves");

  CLI11_PARSE(app, argc, argv);

  try {
    if (path_cmd->parsed())
      return run_path_cmd(path_data, cfg, grid, rules, lambda0, out_dir, format);
    if (screen_cmd->parsed())
      return run_screen_cmd(screen_data, screen_ratio, screen_lambda,
                            screen_rule_name, print_indices);
    if (solve_cmd->parsed())
      return run_solve_cmd(solve_data, solve_ratio, solve_lambda, solve_tol,
                           screen_first);
    if (verify_cmd->parsed()) return run_verify_cmd(verify_data, verify_tol);
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return 0;
}
