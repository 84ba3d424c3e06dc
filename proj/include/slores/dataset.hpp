#pragma once

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <ostream>
#include <string>
#include <vector>

#include "slores/types.hpp"

namespace slores {

// Design matrix with the labels already folded in: row i holds b_i * x_i, so
// every downstream quantity (dual products, screening statistics) reads
// straight off the columns.  Labels are +-1 and both classes are present.
struct dataset {
  sparse_matrix xbar;  // m x p, column-major
  vec labels;          // entries +-1
  index_t n_pos = 0;
  index_t n_neg = 0;

  index_t rows() const { return xbar.rows(); }
  index_t cols() const { return xbar.cols(); }
};

namespace detail {

inline void validate_dataset(const dataset& ds) {
  if (ds.labels.size() != ds.xbar.rows())
    throw invalid_input("dataset: label count does not match row count");
  index_t pos = 0, neg = 0;
  for (index_t i = 0; i < ds.labels.size(); ++i) {
    const double b = ds.labels[i];
    if (b == 1.0)
      ++pos;
    else if (b == -1.0)
      ++neg;
    else
      throw invalid_input("dataset: labels must be +1 or -1");
  }
  if (pos == 0 || neg == 0)
    throw degenerate_problem("dataset: both classes must be present");
  for (index_t j = 0; j < ds.xbar.outerSize(); ++j)
    for (sparse_matrix::InnerIterator it(ds.xbar, j); it; ++it)
      if (!std::isfinite(it.value()))
        throw invalid_input("dataset: non-finite feature value");
}

inline dataset finish_dataset(sparse_matrix xbar, vec labels) {
  dataset ds;
  ds.xbar = std::move(xbar);
  ds.labels = std::move(labels);
  validate_dataset(ds);
  for (index_t i = 0; i < ds.labels.size(); ++i)
    (ds.labels[i] > 0 ? ds.n_pos : ds.n_neg)++;
  return ds;
}

}  // namespace detail

// --- svmlight i/o -----------------------------------------------------------

namespace detail {

[[noreturn]] inline void parse_fail(std::size_t line_no, const std::string& what) {
  throw parse_error("svmlight: line " + std::to_string(line_no) + ": " + what);
}

inline double parse_double(const std::string& tok, std::size_t line_no) {
  std::size_t used = 0;
  double v;
  try {
    v = std::stod(tok, &used);
  } catch (const std::exception&) {
    parse_fail(line_no, "expected a number, got '" + tok + "'");
  }
  if (used != tok.size()) parse_fail(line_no, "trailing characters in '" + tok + "'");
  if (!std::isfinite(v)) parse_fail(line_no, "non-finite value '" + tok + "'");
  return v;
}

}  // namespace detail

/// Reads an svmlight/libsvm file: `label idx:val idx:val ...` with 1-based,
/// strictly increasing feature indices.  Labels may be +-1 or 0/1; the 0/1
/// convention is mapped to -1/+1 with one warning on `warn` (stderr when
/// null).  `n_features` overrides the inferred feature count (it must be at
/// least the largest index seen); 0 means infer.
inline dataset load_svmlight(const std::string& path, index_t n_features = 0,
                             std::ostream* warn = nullptr) {
  std::ifstream in(path);
  if (!in) throw parse_error("svmlight: cannot open '" + path + "'");

  std::vector<Eigen::Triplet<double>> cells;
  std::vector<double> raw_labels;
  index_t max_index = 0;
  bool saw_zero_label = false;
  std::string line;
  std::size_t line_no = 0;

  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    const std::size_t hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);

    std::size_t pos = 0;
    auto next_token = [&](std::string& tok) {
      while (pos < line.size() && (line[pos] == ' ' || line[pos] == '\t')) ++pos;
      if (pos >= line.size()) return false;
      const std::size_t start = pos;
      while (pos < line.size() && line[pos] != ' ' && line[pos] != '\t') ++pos;
      tok.assign(line, start, pos - start);
      return true;
    };

    std::string tok;
    if (!next_token(tok)) continue;  // blank or comment-only line

    const double label = detail::parse_double(tok, line_no);
    if (label != 1.0 && label != -1.0 && label != 0.0)
      detail::parse_fail(line_no, "label must be +1, -1, 0, or 1");
    if (label == 0.0) saw_zero_label = true;
    raw_labels.push_back(label);
    const index_t row = static_cast<index_t>(raw_labels.size()) - 1;

    index_t prev_index = 0;
    while (next_token(tok)) {
      const std::size_t colon = tok.find(':');
      if (colon == std::string::npos || colon == 0 || colon + 1 == tok.size())
        detail::parse_fail(line_no, "expected idx:value, got '" + tok + "'");
      const double idx_raw = detail::parse_double(tok.substr(0, colon), line_no);
      const index_t idx = static_cast<index_t>(idx_raw);
      if (idx_raw != static_cast<double>(idx) || idx < 1)
        detail::parse_fail(line_no, "feature index must be a positive integer");
      if (idx <= prev_index)
        detail::parse_fail(line_no, "feature indices must be strictly increasing");
      prev_index = idx;
      max_index = std::max(max_index, idx);
      const double value = detail::parse_double(tok.substr(colon + 1), line_no);
      cells.emplace_back(static_cast<int>(row), static_cast<int>(idx - 1), value);
    }
  }

  if (raw_labels.empty()) throw parse_error("svmlight: '" + path + "' has no samples");
  if (n_features == 0) n_features = max_index;
  if (n_features < max_index)
    throw invalid_input("svmlight: n_features is smaller than the largest index seen");
  if (n_features == 0) throw degenerate_problem("svmlight: no features present");

  const index_t m = static_cast<index_t>(raw_labels.size());
  vec labels(m);
  for (index_t i = 0; i < m; ++i) {
    const double b = raw_labels[static_cast<std::size_t>(i)];
    labels[i] = (b == 0.0) ? -1.0 : b;
  }
  if (saw_zero_label) {
    std::ostream& out = warn ? *warn : std::cerr;
    out << "svmlight: '" << path << "' uses 0/1 labels; mapped 0 -> -1, 1 -> +1\n";
  }

  // fold labels into the rows
  for (auto& t : cells)
    t = {t.row(), t.col(), labels[t.row()] * t.value()};

  sparse_matrix xbar(m, n_features);
  xbar.setFromTriplets(cells.begin(), cells.end());
  return detail::finish_dataset(std::move(xbar), std::move(labels));
}

/// Writes `ds` back out in svmlight form (unfolding the labels), with enough
/// digits that load_svmlight . save_svmlight is the identity on datasets.
inline void save_svmlight(const dataset& ds, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw error("svmlight: cannot write '" + path + "'");

  std::vector<std::vector<std::pair<index_t, double>>> rows(
      static_cast<std::size_t>(ds.rows()));
  for (index_t j = 0; j < ds.cols(); ++j)
    for (sparse_matrix::InnerIterator it(ds.xbar, j); it; ++it)
      rows[static_cast<std::size_t>(it.row())].emplace_back(j, it.value());

  char buf[64];
  for (index_t i = 0; i < ds.rows(); ++i) {
    out << (ds.labels[i] > 0 ? "+1" : "-1");
    for (const auto& [j, folded] : rows[static_cast<std::size_t>(i)]) {
      std::snprintf(buf, sizeof buf, " %lld:%.17g",
                    static_cast<long long>(j + 1), ds.labels[i] * folded);
      out << buf;
    }
    out << '\n';
  }
  if (!out) throw error("svmlight: write to '" + path + "' failed");
}

// --- synthetic data ---------------------------------------------------------

namespace detail {

// Counter-based generator: every drawn number is a pure function of
// (seed, stream index), so output is identical across platforms and across
// any evaluation order.  Mixer is splitmix64 (Steele et al.), constants
// 0x9e3779b97f4a7c15 / 0xbf58476d1ce4e5b9 / 0x94d049bb133111eb.
inline std::uint64_t splitmix64(std::uint64_t z) {
  z += 0x9e3779b97f4a7c15ull;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
  return z ^ (z >> 31);
}

inline std::uint64_t stream_bits(std::uint64_t seed, std::uint64_t stream) {
  return splitmix64(splitmix64(seed ^ 0x6a09e667f3bcc909ull) + stream);
}

inline double unit_open(std::uint64_t bits) {  // (0,1]
  return static_cast<double>((bits >> 11) + 1) * 0x1.0p-53;
}

inline double normal_at(std::uint64_t seed, std::uint64_t stream) {
  const double u1 = unit_open(stream_bits(seed, stream));
  const double u2 = unit_open(stream_bits(seed, stream + 1));
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * M_PI * u2);
}

}  // namespace detail

/// Deterministic synthetic problem: labels alternate +1/-1 (classes balanced
/// to within one sample), each feature cell is nonzero with probability
/// `density`, and nonzero values are standard Gaussian mixed with a shared
/// per-row factor: sqrt(1-correlation)*g_ij + sqrt(correlation)*h_i, which
/// gives features pairwise correlation ~`correlation` on common support.
inline dataset synthesize(index_t m, index_t p, double density,
                          double correlation, std::uint64_t seed) {
  if (m < 2 || p < 1) throw invalid_input("synthesize: need m >= 2 and p >= 1");
  if (!(density > 0.0 && density <= 1.0))
    throw invalid_input("synthesize: density must be in (0, 1]");
  if (!(correlation >= 0.0 && correlation < 1.0))
    throw invalid_input("synthesize: correlation must be in [0, 1)");

  vec labels(m);
  for (index_t i = 0; i < m; ++i) labels[i] = (i % 2 == 0) ? 1.0 : -1.0;

  const double w_own = std::sqrt(1.0 - correlation);
  const double w_shared = std::sqrt(correlation);
  const std::uint64_t row_stream_base =
      3ull * static_cast<std::uint64_t>(m) * static_cast<std::uint64_t>(p);

  std::vector<Eigen::Triplet<double>> cells;
  cells.reserve(static_cast<std::size_t>(density * static_cast<double>(m * p)) + 16);
  for (index_t j = 0; j < p; ++j) {
    for (index_t i = 0; i < m; ++i) {
      const std::uint64_t cell =
          static_cast<std::uint64_t>(j) * static_cast<std::uint64_t>(m) +
          static_cast<std::uint64_t>(i);
      if (detail::unit_open(detail::stream_bits(seed, 3 * cell)) > density) continue;
      double v = w_own * detail::normal_at(seed, 3 * cell + 1);
      if (correlation > 0.0)
        v += w_shared * detail::normal_at(seed, row_stream_base + 2 * static_cast<std::uint64_t>(i));
      cells.emplace_back(static_cast<int>(i), static_cast<int>(j), labels[i] * v);
    }
  }

  sparse_matrix xbar(m, p);
  xbar.setFromTriplets(cells.begin(), cells.end());
  return detail::finish_dataset(std::move(xbar), std::move(labels));
}

}  // namespace slores
