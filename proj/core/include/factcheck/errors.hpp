#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace factcheck {

/// Base for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A value violates a domain invariant (empty triple field, bad distribution, ...).
class InvalidArgument : public Error {
 public:
  using Error::Error;
};

/// Malformed input file. `line()` is 1-based; 0 means "not line-addressable".
class ParseError : public Error {
 public:
  ParseError(std::size_t line, const std::string& field, const std::string& what)
      : Error(format(line, field, what)), line_(line), field_(field) {}

  std::size_t line() const noexcept { return line_; }
  const std::string& field() const noexcept { return field_; }

 private:
  static std::string format(std::size_t line, const std::string& field,
                            const std::string& what) {
    std::string msg;
    if (line > 0) msg += "line " + std::to_string(line) + ": ";
    if (!field.empty()) msg += "field '" + field + "': ";
    return msg + what;
  }

  std::size_t line_;
  std::string field_;
};

/// Base for NLI backend failures. Carries the index of the offending pair
/// within the request that failed.
class BackendError : public Error {
 public:
  BackendError(std::size_t pair_index, const std::string& what)
      : Error(what), pair_index_(pair_index) {}

  std::size_t pair_index() const noexcept { return pair_index_; }

 private:
  std::size_t pair_index_;
};

/// Transport failure after all retries were spent.
class BackendUnavailable : public BackendError {
 public:
  using BackendError::BackendError;
};

/// Fixture table has no entry (and no default) for a requested pair.
class FixtureIncomplete : public BackendError {
 public:
  using BackendError::BackendError;
};

/// The server answered, but not in the agreed wire format.
class ProtocolError : public BackendError {
 public:
  using BackendError::BackendError;
};

/// Spearman correlation is undefined (constant input vector).
class UndefinedCorrelation : public Error {
 public:
  using Error::Error;
};

}  // namespace factcheck
