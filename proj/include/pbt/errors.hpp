#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace pbt {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// An argument lies outside the mathematical domain of an operation.
class DomainError : public Error {
public:
  using Error::Error;
};

/// Invalid configuration: bad ranges, inconsistent shapes, unknown fields.
class ConfigError : public Error {
public:
  using Error::Error;
};

/// Keyed inputs (richness, bundles, quality means) disagree with the selected set.
class KeyMismatchError : public Error {
public:
  using Error::Error;
};

/// The stage-1 game has no equilibrium on the branch the closed form covers.
class InfeasibleError : public Error {
public:
  using Error::Error;
};

class IoError : public Error {
public:
  using Error::Error;
};

class ParseError : public Error {
public:
  ParseError(std::size_t line, const std::string& what)
      : Error(line == 0 ? what : "line " + std::to_string(line) + ": " + what), line_(line) {}

  /// 1-based line number of the offending row, or 0 when not tied to a row.
  std::size_t line() const noexcept { return line_; }

private:
  std::size_t line_;
};

}  // namespace pbt
