#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

namespace qsic {

enum class ErrorKind : std::uint8_t {
  Parse,
  Sort,
  UnsupportedSymbol,
  UnsupportedStructure,
  UnboundSymbol,
  ModelShape,
  MissingEntry,
  IncompleteModel,
  MalformedRule,
  SolverNotFound,
  Io,
  InvalidArgument,
  NoArraySymbols,
  Internal,
};

const char *to_string(ErrorKind kind);

// Every failure inside the library is reported as a qsic::Error. The C API
// maps the kind onto a status code.
class Error : public std::runtime_error {
public:
  Error(ErrorKind kind, const std::string &message)
      : std::runtime_error(message), kind_(kind) {}

  ErrorKind kind() const { return kind_; }

private:
  ErrorKind kind_;
};

// Parse errors carry a 1-based source position.
class ParseError : public Error {
public:
  ParseError(std::size_t line, std::size_t column, const std::string &message)
      : Error(ErrorKind::Parse, std::to_string(line) + ":" +
                                    std::to_string(column) + ": " + message),
        line_(line), column_(column) {}

  std::size_t line() const { return line_; }
  std::size_t column() const { return column_; }

private:
  std::size_t line_;
  std::size_t column_;
};

} // namespace qsic
