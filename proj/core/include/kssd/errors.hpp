#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace kssd {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// Shapes do not conform, or a dimension product overflows.
class DimensionError : public Error {
public:
  using Error::Error;
};

/// An argument lies outside its documented domain (probabilities, counts, indices).
class InvalidArgument : public Error {
public:
  using Error::Error;
};

/// A basis or design matrix is numerically rank deficient.
class SingularityError : public Error {
public:
  SingularityError(const std::string& what, std::size_t deficient_columns)
      : Error(what), deficient_columns_(deficient_columns) {}

  std::size_t deficient_columns() const noexcept { return deficient_columns_; }

private:
  std::size_t deficient_columns_;
};

/// Too few observations for the restricted subspace to be identifiable.
class UndersampledError : public SingularityError {
public:
  using SingularityError::SingularityError;
};

/// The signal is degenerate for the requested quantity (e.g. all zeros).
class DegenerateSignalError : public Error {
public:
  using Error::Error;
};

/// Malformed text input. Line and column are 1-based; 0 means unknown.
class ParseError : public Error {
public:
  ParseError(const std::string& what, std::size_t line, std::size_t column)
      : Error(what), line_(line), column_(column) {}

  std::size_t line() const noexcept { return line_; }
  std::size_t column() const noexcept { return column_; }

private:
  std::size_t line_;
  std::size_t column_;
};

}  // namespace kssd
