#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace vsql {

enum class ErrorKind {
  parse,          // malformed input text
  unsupported,    // valid SQL outside the supported subset
  validation,     // structurally well-formed but violates an invariant
  resolution,     // unknown / ambiguous relation or column
  reconstruction, // a rewrite stage failed
  gateway,        // LLM provider or extraction failure
  execution,      // database backend error
  timeout,
  config,
  io,
};

const char* to_string(ErrorKind kind) noexcept;

// Base of every error the library raises. The message always names the
// offending element (table, column, construct, stage...).
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message)
      : std::runtime_error(message), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

class ParseError : public Error {
 public:
  ParseError(const std::string& message, std::size_t offset, std::size_t line, std::size_t column)
      : Error(ErrorKind::parse, message + " at line " + std::to_string(line) + ", column " +
                                    std::to_string(column)),
        offset_(offset), line_(line), column_(column) {}

  std::size_t offset() const noexcept { return offset_; }
  std::size_t line() const noexcept { return line_; }
  std::size_t column() const noexcept { return column_; }

 private:
  std::size_t offset_;
  std::size_t line_;
  std::size_t column_;
};

class UnsupportedError : public Error {
 public:
  explicit UnsupportedError(const std::string& construct)
      : Error(ErrorKind::unsupported, "unsupported construct: " + construct), construct_(construct) {}

  const std::string& construct() const noexcept { return construct_; }

 private:
  std::string construct_;
};

class ValidationError : public Error {
 public:
  explicit ValidationError(const std::string& message) : Error(ErrorKind::validation, message) {}
};

class ResolutionError : public Error {
 public:
  enum class Reason { unknown_relation, unknown_column, ambiguous_column };

  ResolutionError(Reason reason, const std::string& name, const std::string& message)
      : Error(ErrorKind::resolution, message), reason_(reason), name_(name) {}

  Reason reason() const noexcept { return reason_; }
  // The offending name, e.g. "hero_attribute.attribute_name".
  const std::string& name() const noexcept { return name_; }

 private:
  Reason reason_;
  std::string name_;
};

// Wraps a failure of one reconstruction / pipeline stage.
class StageError : public Error {
 public:
  StageError(std::string stage, const std::string& message)
      : Error(ErrorKind::reconstruction, stage + ": " + message), stage_(std::move(stage)) {}

  const std::string& stage() const noexcept { return stage_; }

 private:
  std::string stage_;
};

class ExecutionError : public Error {
 public:
  explicit ExecutionError(const std::string& message) : Error(ErrorKind::execution, message) {}
};

class TimeoutError : public Error {
 public:
  explicit TimeoutError(const std::string& message) : Error(ErrorKind::timeout, message) {}
};

class ConfigError : public Error {
 public:
  explicit ConfigError(const std::string& message) : Error(ErrorKind::config, message) {}
};

class IoError : public Error {
 public:
  explicit IoError(const std::string& message) : Error(ErrorKind::io, message) {}
};

std::string read_file(const std::string& path);

}  // namespace vsql
