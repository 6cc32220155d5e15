#pragma once

#include <stdexcept>
#include <string>

namespace cstarframe {

/// Dimension, rank or algebra-spec mismatch between operands.
class StructuralError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Operand outside the domain of an operation (non-positive sqrt, singular frame operator, ...).
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// Random instance generation ran out of retries.
class GenerationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Two independent routes to the same verdict disagree beyond tolerance.
class ConsistencyError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed JSON input. The message carries the location of the offending node.
class ParseError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Bad command-line or configuration input (unknown suite id, bad flag value).
class UsageError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

}  // namespace cstarframe
