#pragma once

#include <stdexcept>
#include <string>

namespace rabm {

/// Malformed input text (CSV rows, config lines). Messages carry the source and line.
class ParseError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Well-formed input whose values violate a domain constraint.
class ValidationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// An operation was called outside its documented preconditions.
class ContractError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

/// Iterative estimation failed to converge or hit a singular system.
class EstimationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace rabm
