#pragma once

#include <stdexcept>
#include <string>

namespace qflow {

struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Density below the configured floor at an evaluation point.
struct NodeError : Error {
  using Error::Error;
};

struct DomainError : Error {
  using Error::Error;
};

struct ArityError : Error {
  using Error::Error;
};

// A series term left the representable range.
struct OverflowError : Error {
  using Error::Error;
};

// Vanishing denominator in the effective-well geometry.
struct SingularityError : Error {
  using Error::Error;
};

struct ValidationError : Error {
  using Error::Error;
};

struct ParseError : Error {
  using Error::Error;
};

struct MissingArtifactError : Error {
  using Error::Error;
};

}  // namespace qflow
