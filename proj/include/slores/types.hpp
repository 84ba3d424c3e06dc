#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

#include <Eigen/Core>
#include <Eigen/SparseCore>

namespace slores {

using index_t = Eigen::Index;
using vec = Eigen::VectorXd;
using sparse_matrix = Eigen::SparseMatrix<double, Eigen::ColMajor>;

struct error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Malformed input files (carries a 1-based line number in the message).
struct parse_error : error {
  using error::error;
};

// Caller-visible precondition violations: bad dimensions, out-of-range
// parameters, infeasible dual points, invalid configurations.
struct invalid_input : error {
  using error::error;
};

// Problem instances the method cannot act on (all-zero data, single class).
struct degenerate_problem : error {
  using error::error;
};

// Geometry construction failed: the supplied dual point does not look like a
// dual optimum at lambda0 (empty active set after tolerance).
struct geometry_error : error {
  using error::error;
};

struct convergence_failure : error {
  using error::error;
};

// Numeric identities that hold mathematically were violated beyond roundoff
// slack; indicates inconsistent inputs rather than a caller mistake.
struct internal_error : error {
  using error::error;
};

}  // namespace slores
