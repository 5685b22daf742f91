#pragma once

#include <Eigen/Dense>

#include <stdexcept>
#include <string>

namespace ehz {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

/// Base of every error thrown by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class DimensionError : public Error {
 public:
  using Error::Error;
};

/// Gauge-based operation on a body whose interior does not contain the origin.
class OriginNotInteriorError : public Error {
 public:
  using Error::Error;
};

/// Direction-valued oracle evaluated at the zero vector.
class UndefinedDirectionError : public Error {
 public:
  using Error::Error;
};

/// Oracle requested from a variant that cannot provide it (e.g. gauge Hessian of a polytope).
class CapabilityError : public Error {
 public:
  using Error::Error;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

inline void require_dim(Eigen::Index expected, Eigen::Index got, const char* what) {
  if (expected != got) {
    throw DimensionError(std::string(what) + ": expected dimension " + std::to_string(expected) +
                         ", got " + std::to_string(got));
  }
}

}  // namespace ehz
