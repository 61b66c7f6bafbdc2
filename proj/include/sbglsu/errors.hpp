#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace sbglsu {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Operand dimensions do not agree.
class ShapeError : public Error {
 public:
  using Error::Error;
};

// A configuration value is outside its admissible range.
class ParameterError : public Error {
 public:
  using Error::Error;
};

// A factorization failed or an iterate became non-finite.
class NumericalError : public Error {
 public:
  using Error::Error;
};

// A file's structure disagrees with its header or schema.
class FormatError : public Error {
 public:
  using Error::Error;
};

// Malformed text input; carries the 1-based line number.
class ParseError : public Error {
 public:
  ParseError(const std::string& what, std::size_t line)
      : Error("line " + std::to_string(line) + ": " + what), line_(line) {}
  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

// A metric is undefined for the given inputs (e.g. SRE of an all-zero truth).
class MetricError : public Error {
 public:
  using Error::Error;
};

}  // namespace sbglsu
