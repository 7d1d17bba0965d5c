#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace classtalk {

// Base for every error raised by the library. The CLI maps subclasses to
// exit codes.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// A named column/feature is missing or has the wrong shape.
class SchemaError : public Error {
 public:
  SchemaError(const std::string& what, std::string column)
      : Error(what), column_(std::move(column)) {}
  const std::string& column() const { return column_; }

 private:
  std::string column_;
};

// A single source row could not be interpreted.
class RowError : public Error {
 public:
  RowError(const std::string& what, std::size_t row_index)
      : Error(what), row_index_(row_index) {}
  std::size_t row_index() const { return row_index_; }

 private:
  std::size_t row_index_;
};

// Malformed input file (roster, lexicon, precomputed labels, ...).
class ParseError : public Error {
 public:
  ParseError(const std::string& what, std::size_t line = 0)
      : Error(what), line_(line) {}
  // 1-based line number, 0 when not applicable.
  std::size_t line() const { return line_; }

 private:
  std::size_t line_;
};

class IoError : public Error {
 public:
  IoError(const std::string& what, std::string path)
      : Error(what), path_(std::move(path)) {}
  const std::string& path() const { return path_; }

 private:
  std::string path_;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

class PreconditionError : public Error {
 public:
  using Error::Error;
};

// Service unreachable, timed out, or answered with a non-success status
// after all retries.
class TransportError : public Error {
 public:
  using Error::Error;
};

// Service answered, but the payload violates the wire contract.
class ProtocolError : public Error {
 public:
  using Error::Error;
};

class UndefinedDenominatorError : public Error {
 public:
  using Error::Error;
};

}  // namespace classtalk
