// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <Eigen/Dense>

#include <stdexcept>
#include <string>

namespace ddn {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

/// 0/1 label assignment. Entries are validated at the API boundary; internal
/// code assumes they are already binary.
using BitVec = Eigen::VectorXi;

struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Thrown when an input's length/shape disagrees with the model.
struct DimensionError : Error {
  DimensionError(const std::string& axis, Eigen::Index expected, Eigen::Index got)
      : Error("dimension mismatch on axis '" + axis + "': expected " +
              std::to_string(expected) + ", got " + std::to_string(got)) {}
};

/// Thrown on malformed input files or invalid serialized values.
struct DataError : Error {
  using Error::Error;
};

inline Vector to_real(const BitVec& x) { return x.cast<double>(); }

}  // namespace ddn
