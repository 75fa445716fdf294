#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace soarl {

/// Malformed domain-description document.
class ParseError : public std::runtime_error {
 public:
  ParseError(std::size_t line, std::string token, const std::string& what)
      : std::runtime_error("line " + std::to_string(line) + ", token '" +
                           token + "': " + what),
        line_(line),
        token_(std::move(token)) {}

  std::size_t line() const { return line_; }
  const std::string& token() const { return token_; }

 private:
  std::size_t line_;
  std::string token_;
};

/// Malformed ASCII map document. Row and column are 1-based.
class MapParseError : public std::runtime_error {
 public:
  MapParseError(std::size_t row, std::size_t column, const std::string& what)
      : std::runtime_error("map row " + std::to_string(row) + ", column " +
                           std::to_string(column) + ": " + what),
        row_(row),
        column_(column) {}

  std::size_t row() const { return row_; }
  std::size_t column() const { return column_; }

 private:
  std::size_t row_;
  std::size_t column_;
};

class NotExecutable : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

class ContractViolation : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

class MissingPair : public std::out_of_range {
 public:
  using std::out_of_range::out_of_range;
};

class UnmappedAction : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

class NoExperience : public std::out_of_range {
 public:
  using std::out_of_range::out_of_range;
};

// Annotator backend failures.

class AnnotatorError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class AnnotatorTimeout : public AnnotatorError {
 public:
  using AnnotatorError::AnnotatorError;
};

class HttpError : public AnnotatorError {
 public:
  HttpError(int status, const std::string& what)
      : AnnotatorError(what), status_(status) {}
  int status() const { return status_; }

 private:
  int status_;
};

/// The raw backend output did not match the expected response grammar.
class ParseFailure : public AnnotatorError {
 public:
  ParseFailure(std::string raw, const std::string& what)
      : AnnotatorError(what), raw_(std::move(raw)) {}
  const std::string& raw() const { return raw_; }

 private:
  std::string raw_;
};

class AnnotatorUnavailable : public AnnotatorError {
 public:
  using AnnotatorError::AnnotatorError;
};

// Persistence.

class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class SchemaVersionMismatch : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

}  // namespace soarl
