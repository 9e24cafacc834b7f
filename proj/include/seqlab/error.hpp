#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace seqlab {

// Broad failure classes. The CLI maps these onto exit codes.
enum class ErrorKind {
  kConfig,   // bad arguments or parameter combinations
  kData,     // malformed or inconsistent input data
  kNumeric,  // non-finite values during training or inference
};

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(what), kind_(kind) {}
  ErrorKind kind() const { return kind_; }

 private:
  ErrorKind kind_;
};

class ConfigError : public Error {
 public:
  explicit ConfigError(const std::string& what) : Error(ErrorKind::kConfig, what) {}
};

class DataError : public Error {
 public:
  explicit DataError(const std::string& what) : Error(ErrorKind::kData, what) {}
};

class NumericError : public Error {
 public:
  explicit NumericError(const std::string& what) : Error(ErrorKind::kNumeric, what) {}
};

// A data error tied to a 1-based input line.
class LineError : public DataError {
 public:
  LineError(const std::string& what, std::size_t line)
      : DataError("line " + std::to_string(line) + ": " + what), line_(line) {}
  std::size_t line() const { return line_; }

 private:
  std::size_t line_;
};

class ParseError : public LineError {
 public:
  using LineError::LineError;
};

class LabelError : public LineError {
 public:
  using LineError::LineError;
};

class EmptyCorpusError : public DataError {
 public:
  using DataError::DataError;
};

class AlignmentError : public DataError {
 public:
  using DataError::DataError;
};

class FormatError : public DataError {
 public:
  using DataError::DataError;
};

class CorruptionError : public DataError {
 public:
  using DataError::DataError;
};

class MappingError : public DataError {
 public:
  using DataError::DataError;
};

class BoundsError : public Error {
 public:
  explicit BoundsError(const std::string& what) : Error(ErrorKind::kConfig, what) {}
};

}  // namespace seqlab
