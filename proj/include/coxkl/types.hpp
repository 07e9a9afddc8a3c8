#pragma once

#include <Eigen/Dense>
#include <stdexcept>
#include <string>

namespace coxkl {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

/// Base class for all errors raised by this library.
struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Malformed input text (bad numeric cell, missing column, ...).
struct ParseError : Error {
  using Error::Error;
};

/// Structurally valid input that violates a model requirement
/// (negative time, no events, misaligned scores, ...).
struct ValidationError : Error {
  using Error::Error;
};

/// A metric or estimate is undefined for the given input.
struct UndefinedMetricError : Error {
  using Error::Error;
};

}  // namespace coxkl
