#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace cograph {

// Base type for all library errors.
class Error : public std::runtime_error {
 public:
  explicit Error(const std::string& what) : std::runtime_error(what) {}
};

// Tensor rank/dimension mismatch or index out of range.
class ShapeError : public Error {
  using Error::Error;
};

// Numerically invalid input: log of a non-positive value, zero-norm vector, ...
class DomainError : public Error {
  using Error::Error;
};

// Malformed serialized payload; carries the byte offset of the failure.
class ParseError : public Error {
 public:
  ParseError(const std::string& what, std::size_t offset)
      : Error(what + " (at byte " + std::to_string(offset) + ")"),
        offset_(offset) {}
  std::size_t offset() const noexcept { return offset_; }

 private:
  std::size_t offset_;
};

class ConfigError : public Error {
  using Error::Error;
};

// Bad or insufficient input data: missing files, short sequences, ...
class DataError : public Error {
  using Error::Error;
};

// Document retains no vocabulary words; callers skip such documents.
class DegenerateDocumentError : public DataError {
  using DataError::DataError;
};

}  // namespace cograph
