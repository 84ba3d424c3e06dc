#pragma once

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "slores/dataset.hpp"
#include "slores/geometry.hpp"
#include "slores/screening.hpp"
#include "slores/solver.hpp"
#include "slores/types.hpp"

namespace slores {

struct synthetic_spec {
  index_t m = 0;
  index_t p = 0;
  double density = 0.1;
  double correlation = 0.0;
};

enum class lambda0_policy {
  lambda_max,  // screen every grid point against the exact lambda_max geometry
  sequential   // screen against the previous grid point's solver-recovered dual
};

enum class report_format { csv, json };

struct path_config {
  std::string data_path;                 // svmlight input; ignored when synthetic is set
  std::optional<synthetic_spec> synthetic;
  double ratio_lo = 0.1;                 // grid of lambda/lambda_max ratios
  double ratio_hi = 0.95;
  int grid_size = 86;
  std::vector<screen_rule> rules{screen_rule::slores, screen_rule::strong,
                                 screen_rule::none};
  lambda0_policy policy = lambda0_policy::lambda_max;
  double tol_gap = 1e-9;
  std::uint64_t seed = 0;
  int repeats = 1;
  double subsample = 1.0;   // row fraction per repeat
  bool zero_timings = false;  // write exact zeros to the timing columns
};

struct path_row {
  double lambda_ratio = 0.0;
  screen_rule rule = screen_rule::none;
  index_t n_discarded = 0;
  index_t n_zero = 0;
  std::optional<double> rejection;  // absent when the solution has no zeros
  double screen_ms = 0.0;
  double solve_ms = 0.0;
  double solve_ms_unscreened = 0.0;
  double gap = 0.0;
  long safety_violations = 0;
};

struct path_report {
  std::vector<path_row> rows;  // descending ratio, rules in name order per ratio
  double lam_max = 0.0;
  double geometry_ms = 0.0;    // one-time reference-point construction
  long geometry_fallbacks = 0; // sequential mode only
};

namespace detail {

inline void validate_config(const path_config& cfg) {
  if (!cfg.synthetic && cfg.data_path.empty())
    throw invalid_input("path: provide a data file or a synthetic spec");
  if (!(cfg.ratio_lo > 0.0 && cfg.ratio_lo <= cfg.ratio_hi && cfg.ratio_hi < 1.0))
    throw invalid_input("path: grid ratios must satisfy 0 < lo <= hi < 1");
  if (cfg.grid_size < 1) throw invalid_input("path: grid size must be at least 1");
  if (!(cfg.tol_gap > 0.0)) throw invalid_input("path: tol must be positive");
  if (cfg.repeats < 1) throw invalid_input("path: repeats must be at least 1");
  if (!(cfg.subsample > 0.0 && cfg.subsample <= 1.0))
    throw invalid_input("path: subsample must be in (0, 1]");
  if (cfg.rules.empty()) throw invalid_input("path: no rules selected");
  for (std::size_t a = 0; a < cfg.rules.size(); ++a)
    for (std::size_t b = a + 1; b < cfg.rules.size(); ++b)
      if (cfg.rules[a] == cfg.rules[b])
        throw invalid_input("path: duplicate rule selected");
}

inline std::vector<double> ratio_grid(const path_config& cfg) {
  std::vector<double> ratios;
  ratios.reserve(static_cast<std::size_t>(cfg.grid_size));
  if (cfg.grid_size == 1) {
    ratios.push_back(cfg.ratio_hi);
    return ratios;
  }
  const double step = (cfg.ratio_hi - cfg.ratio_lo) /
                      static_cast<double>(cfg.grid_size - 1);
  for (int k = 0; k < cfg.grid_size; ++k)
    ratios.push_back(cfg.ratio_hi - static_cast<double>(k) * step);
  return ratios;
}

inline dataset subsample_rows(const dataset& ds, double fraction,
                              std::uint64_t seed) {
  const index_t m = ds.rows();
  index_t k = std::min<index_t>(
      m, std::max<index_t>(2, static_cast<index_t>(std::llround(
                                  fraction * static_cast<double>(m)))));
  for (std::uint64_t salt = 0;; ++salt) {
    std::vector<index_t> order(static_cast<std::size_t>(m));
    std::iota(order.begin(), order.end(), index_t{0});
    std::uint64_t ctr = 0;
    for (index_t i = m - 1; i > 0; --i) {
      const std::uint64_t r =
          stream_bits(seed ^ (salt * 0x1000193ull), ctr++) %
          static_cast<std::uint64_t>(i + 1);
      std::swap(order[static_cast<std::size_t>(i)], order[static_cast<std::size_t>(r)]);
    }
    order.resize(static_cast<std::size_t>(k));
    std::sort(order.begin(), order.end());

    bool pos = false, neg = false;
    for (index_t i : order) (ds.labels[i] > 0 ? pos : neg) = true;
    if (!pos || !neg) continue;  // resalt until both classes survive

    vec labels(k);
    std::vector<index_t> row_of(static_cast<std::size_t>(m), index_t{-1});
    for (index_t r = 0; r < k; ++r) {
      row_of[static_cast<std::size_t>(order[static_cast<std::size_t>(r)])] = r;
      labels[r] = ds.labels[order[static_cast<std::size_t>(r)]];
    }
    std::vector<Eigen::Triplet<double>> cells;
    for (index_t j = 0; j < ds.cols(); ++j)
      for (sparse_matrix::InnerIterator it(ds.xbar, j); it; ++it) {
        const index_t r = row_of[static_cast<std::size_t>(it.row())];
        if (r >= 0)
          cells.emplace_back(static_cast<int>(r), static_cast<int>(j), it.value());
      }
    sparse_matrix xbar(k, ds.cols());
    xbar.setFromTriplets(cells.begin(), cells.end());
    return finish_dataset(std::move(xbar), std::move(labels));
  }
}

inline double elapsed_ms(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration<double, std::milli>(
             std::chrono::steady_clock::now() - start).count();
}

inline std::vector<screen_rule> sorted_rules(std::vector<screen_rule> rules) {
  std::sort(rules.begin(), rules.end(), [](screen_rule a, screen_rule b) {
    return std::string(rule_name(a)) < std::string(rule_name(b));
  });
  return rules;
}

inline path_report run_single_path(const dataset& ds, const path_config& cfg) {
  path_report report;
  const lambda_max_result lm = lambda_max(ds);
  report.lam_max = lm.value;

  const auto geom_start = std::chrono::steady_clock::now();
  screening_geometry geom = build_geometry(ds, lm.value, lm.theta);
  report.geometry_ms = cfg.zero_timings ? 0.0 : elapsed_ms(geom_start);

  const std::vector<double> ratios = ratio_grid(cfg);
  const std::vector<screen_rule> rules = sorted_rules(cfg.rules);

  std::optional<primal_solution> warm_full;
  std::optional<primal_solution> warm_slores;
  std::optional<primal_solution> warm_strong;
  fit_options fopts;
  fopts.tol_gap = cfg.tol_gap;

  for (const double ratio : ratios) {
    const double lambda = ratio * lm.value;

    const auto full_start = std::chrono::steady_clock::now();
    primal_solution full =
        fit(ds, lambda, nullptr, warm_full ? &*warm_full : nullptr, fopts);
    const double full_ms = elapsed_ms(full_start);

    const double tau = zero_threshold(full.beta);
    index_t n_zero = 0;
    for (index_t j = 0; j < full.beta.size(); ++j)
      if (std::abs(full.beta[j]) <= tau) ++n_zero;

    for (const screen_rule rule : rules) {
      path_row row;
      row.lambda_ratio = ratio;
      row.rule = rule;
      row.n_zero = n_zero;
      row.solve_ms_unscreened = full_ms;

      if (rule == screen_rule::none) {
        row.solve_ms = full_ms;
        row.gap = full.gap;
        if (n_zero > 0) row.rejection = 0.0;
      } else {
        const screen_result sr =
            rule == screen_rule::slores
                ? slores(ds, lambda, geom)
                : strong_rule(ds, lambda, geom.lambda0, geom.theta0);
        row.screen_ms = sr.seconds * 1e3;
        row.n_discarded = static_cast<index_t>(sr.discarded.size());
        row.rejection = rejection_ratio(sr, full);
        for (index_t j : sr.discarded)
          if (std::abs(full.beta[j]) > tau) ++row.safety_violations;

        std::optional<primal_solution>& warm =
            rule == screen_rule::slores ? warm_slores : warm_strong;
        if (sr.kept.size() == static_cast<std::size_t>(ds.cols())) {
          row.solve_ms = full_ms;
          row.gap = full.gap;
          warm = full;
        } else {
          const auto solve_start = std::chrono::steady_clock::now();
          primal_solution sol =
              fit(ds, lambda, &sr.kept, warm ? &*warm : nullptr, fopts);
          row.solve_ms = elapsed_ms(solve_start);
          row.gap = sol.gap;
          warm = std::move(sol);
        }
      }

      if (cfg.zero_timings) {
        row.screen_ms = 0.0;
        row.solve_ms = 0.0;
        row.solve_ms_unscreened = 0.0;
      }
      report.rows.push_back(std::move(row));
    }

    if (cfg.policy == lambda0_policy::sequential && ratio != ratios.back()) {
      try {
        geom = build_geometry(ds, lambda, recover_dual(full, ds).feasible);
      } catch (const geometry_error&) {
        // the recovered dual was too loose to define a reference point;
        // keep screening against the exact lambda_max geometry
        geom = build_geometry(ds, lm.value, lm.theta);
        ++report.geometry_fallbacks;
      }
    }
    warm_full = std::move(full);
  }
  return report;
}

}  // namespace detail

/// Runs the full benchmark: solve the lambda path with each selected rule,
/// auditing every discard against the unscreened solution.  With repeats > 1
/// the path is re-run on row subsamples and numeric columns are averaged
/// (safety violations are summed, never averaged away).
inline path_report run_path(const path_config& cfg) {
  detail::validate_config(cfg);
  const dataset base = cfg.synthetic
                           ? synthesize(cfg.synthetic->m, cfg.synthetic->p,
                                        cfg.synthetic->density,
                                        cfg.synthetic->correlation, cfg.seed)
                           : load_svmlight(cfg.data_path);

  if (cfg.repeats == 1 && cfg.subsample == 1.0)
    return detail::run_single_path(base, cfg);

  path_report agg;
  std::vector<long> rejection_counts;
  for (int rep = 0; rep < cfg.repeats; ++rep) {
    const dataset ds =
        cfg.subsample < 1.0
            ? detail::subsample_rows(base, cfg.subsample,
                                     cfg.seed + 0x9e37ull * static_cast<std::uint64_t>(rep + 1))
            : base;
    path_report one = detail::run_single_path(ds, cfg);
    if (rep > 0 && one.rows.size() != agg.rows.size())
      throw internal_error("run_path: repeat produced a different row count");
    if (rep == 0) {
      agg = std::move(one);
      rejection_counts.assign(agg.rows.size(), 0);
      for (std::size_t i = 0; i < agg.rows.size(); ++i)
        if (agg.rows[i].rejection) rejection_counts[i] = 1;
      continue;
    }
    agg.lam_max += one.lam_max;
    agg.geometry_ms += one.geometry_ms;
    agg.geometry_fallbacks += one.geometry_fallbacks;
    for (std::size_t i = 0; i < agg.rows.size(); ++i) {
      path_row& a = agg.rows[i];
      const path_row& b = one.rows[i];
      a.n_discarded += b.n_discarded;
      a.n_zero += b.n_zero;
      a.screen_ms += b.screen_ms;
      a.solve_ms += b.solve_ms;
      a.solve_ms_unscreened += b.solve_ms_unscreened;
      a.gap += b.gap;
      a.safety_violations += b.safety_violations;
      if (b.rejection) {
        a.rejection = a.rejection.value_or(0.0) + *b.rejection;
        ++rejection_counts[i];
      }
    }
  }
  const double inv = 1.0 / static_cast<double>(cfg.repeats);
  agg.lam_max *= inv;
  agg.geometry_ms *= inv;
  for (std::size_t i = 0; i < agg.rows.size(); ++i) {
    path_row& a = agg.rows[i];
    a.n_discarded = static_cast<index_t>(std::llround(a.n_discarded * inv));
    a.n_zero = static_cast<index_t>(std::llround(a.n_zero * inv));
    a.screen_ms *= inv;
    a.solve_ms *= inv;
    a.solve_ms_unscreened *= inv;
    a.gap *= inv;
    if (rejection_counts[i] > 0)
      a.rejection = *a.rejection / static_cast<double>(rejection_counts[i]);
  }
  return agg;
}

// --- report emission --------------------------------------------------------

inline constexpr const char* csv_header =
    "lambda_ratio,rule,n_discarded,n_zero,rejection_ratio,"
    "screen_ms,solve_ms,solve_ms_unscreened,gap,safety_violations";

inline void write_csv(const path_report& report, std::ostream& out) {
  out << csv_header << '\n';
  char buf[32];
  auto num = [&](double v) {
    std::snprintf(buf, sizeof buf, "%.17e", v);
    out << buf;
  };
  for (const path_row& r : report.rows) {
    num(r.lambda_ratio);
    out << ',' << rule_name(r.rule) << ',' << r.n_discarded << ',' << r.n_zero
        << ',';
    if (r.rejection) num(*r.rejection);
    out << ',';
    num(r.screen_ms);
    out << ',';
    num(r.solve_ms);
    out << ',';
    num(r.solve_ms_unscreened);
    out << ',';
    num(r.gap);
    out << ',' << r.safety_violations << '\n';
  }
}

inline void write_json(const path_report& report, std::ostream& out) {
  nlohmann::ordered_json doc;
  doc["lambda_max"] = report.lam_max;
  doc["geometry_ms"] = report.geometry_ms;
  doc["geometry_fallbacks"] = report.geometry_fallbacks;
  doc["rows"] = nlohmann::ordered_json::array();
  for (const path_row& r : report.rows) {
    nlohmann::ordered_json row;
    row["lambda_ratio"] = r.lambda_ratio;
    row["rule"] = rule_name(r.rule);
    row["n_discarded"] = r.n_discarded;
    row["n_zero"] = r.n_zero;
    if (r.rejection)
      row["rejection_ratio"] = *r.rejection;
    else
      row["rejection_ratio"] = nullptr;
    row["screen_ms"] = r.screen_ms;
    row["solve_ms"] = r.solve_ms;
    row["solve_ms_unscreened"] = r.solve_ms_unscreened;
    row["gap"] = r.gap;
    row["safety_violations"] = r.safety_violations;
    doc["rows"].push_back(std::move(row));
  }
  out << doc.dump(2) << '\n';
}

/// Writes path_report.csv or path_report.json under `dir` (created if needed)
/// and returns the file path.
inline std::string emit_report(const path_report& report, const std::string& dir,
                               report_format format) {
  namespace fs = std::filesystem;
  fs::create_directories(dir);
  const fs::path file =
      fs::path(dir) /
      (format == report_format::csv ? "path_report.csv" : "path_report.json");
  std::ofstream out(file);
  if (!out) throw error("emit_report: cannot write '" + file.string() + "'");
  if (format == report_format::csv)
    write_csv(report, out);
  else
    write_json(report, out);
  if (!out) throw error("emit_report: write to '" + file.string() + "' failed");
  return file.string();
}

}  // namespace slores
