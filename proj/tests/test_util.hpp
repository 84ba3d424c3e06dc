#pragma once

#include <unistd.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <random>
#include <string>
#include <vector>

#include <slores/dataset.hpp>
#include <slores/geometry.hpp>

namespace test_util {

inline std::string fixture_path(const std::string& name) {
  return std::string(TEST_DATA_DIR) + "/" + name;
}

// Temporary file that removes itself; content written on construction.
class temp_file {
 public:
  explicit temp_file(const std::string& content, const std::string& tag = "t") {
    static int counter = 0;
    path_ = (std::filesystem::temp_directory_path() /
             ("slores_" + tag + "_" + std::to_string(::getpid()) + "_" +
              std::to_string(counter++)))
                .string();
    std::ofstream out(path_);
    out << content;
  }
  ~temp_file() { std::filesystem::remove(path_); }
  const std::string& path() const { return path_; }

 private:
  std::string path_;
};

// Builds a dataset directly from a dense label-folded matrix; rows of
// `xbar` are b_i * x_i already.
inline slores::dataset from_xbar(const Eigen::MatrixXd& xbar,
                                 const slores::vec& labels) {
  std::vector<Eigen::Triplet<double>> cells;
  for (slores::index_t j = 0; j < xbar.cols(); ++j)
    for (slores::index_t i = 0; i < xbar.rows(); ++i)
      if (xbar(i, j) != 0.0)
        cells.emplace_back(static_cast<int>(i), static_cast<int>(j), xbar(i, j));
  slores::sparse_matrix sp(xbar.rows(), xbar.cols());
  sp.setFromTriplets(cells.begin(), cells.end());
  return slores::detail::finish_dataset(std::move(sp), labels);
}

// Dense random problem in raw-feature form: labels alternate, entries are
// sparse Gaussians; returned matrix is already label-folded.
inline slores::dataset random_dataset(slores::index_t m, slores::index_t p,
                                      double density, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::normal_distribution<double> gauss(0.0, 1.0);
  slores::vec labels(m);
  for (slores::index_t i = 0; i < m; ++i) labels[i] = (i % 2 == 0) ? 1.0 : -1.0;
  Eigen::MatrixXd xbar = Eigen::MatrixXd::Zero(m, p);
  for (slores::index_t j = 0; j < p; ++j)
    for (slores::index_t i = 0; i < m; ++i)
      if (unit(rng) < density) xbar(i, j) = labels[i] * gauss(rng);
  return from_xbar(xbar, labels);
}

inline slores::vec random_dual_vector(slores::index_t m, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> box(0.05, 0.95);
  slores::vec t(m);
  for (slores::index_t i = 0; i < m; ++i) t[i] = box(rng);
  return t;
}

// Appends one extra column, given directly in label-folded form.
inline slores::dataset append_column(const slores::dataset& ds,
                                     const slores::vec& xbar_col) {
  Eigen::MatrixXd xbar(ds.rows(), ds.cols() + 1);
  xbar.leftCols(ds.cols()) = Eigen::MatrixXd(ds.xbar);
  xbar.col(ds.cols()) = xbar_col;
  return from_xbar(xbar, ds.labels);
}

// A label-folded column orthogonal to b whose cosine against P xbar* is
// exactly `cosine`, scaled so it never disturbs lambda_max or the reference
// feature.  Requires the geometry of `ds` at lambda_max.
inline slores::vec engineered_column(const slores::dataset& ds,
                                     const slores::screening_geometry& geom,
                                     double cosine, std::mt19937_64& rng) {
  const slores::index_t m = ds.rows();
  slores::vec xstar = slores::vec::Zero(m);
  for (slores::sparse_matrix::InnerIterator it(ds.xbar, geom.j0); it; ++it)
    xstar[it.row()] = geom.sign0 * it.value();
  const slores::vec pxs = slores::project_complement_b(xstar, ds);
  const slores::vec unit_s = pxs / pxs.norm();

  // random direction orthogonal to both b and P xbar*
  std::normal_distribution<double> gauss(0.0, 1.0);
  slores::vec w(m);
  for (;;) {
    for (slores::index_t i = 0; i < m; ++i) w[i] = gauss(rng);
    w = slores::project_complement_b(w, ds);
    w -= w.dot(unit_s) * unit_s;
    const double n = w.norm();
    if (n > 1e-8) {
      w /= n;
      break;
    }
  }

  slores::vec u = cosine * unit_s +
                  std::sqrt(std::max(0.0, 1.0 - cosine * cosine)) * w;
  const double dot0 = std::abs(u.dot(geom.theta0.values()));
  const double cap = 0.3 * static_cast<double>(m) * geom.lam_max;
  if (dot0 > 1e-12) u *= std::min(1.0, cap / dot0);
  return u;
}

}  // namespace test_util
