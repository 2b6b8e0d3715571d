#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace ske {

// Base class for all library errors.
class Error : public std::runtime_error {
public:
  explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

class DomainError : public Error {
public:
  using Error::Error;
};

// Input vector has zero norm; the argmax hash is undefined.
class ZeroVectorError : public Error {
public:
  using Error::Error;
};

class ShapeMismatchError : public Error {
public:
  using Error::Error;
};

class DuplicateXError : public Error {
public:
  using Error::Error;
};

class InsufficientPointsError : public Error {
public:
  using Error::Error;
};

class InconsistentPointsError : public Error {
public:
  using Error::Error;
};

class SecretTooLargeError : public Error {
public:
  using Error::Error;
};

// Fewer than k distinct hash indices after all reseed attempts.
class InsufficientDiversityError : public Error {
public:
  using Error::Error;
};

class MalformedContainerError : public Error {
public:
  using Error::Error;
};

class VersionUnsupportedError : public Error {
public:
  using Error::Error;
};

class InvariantViolationError : public Error {
public:
  using Error::Error;
};

class EmptyScoresError : public Error {
public:
  using Error::Error;
};

class ParseError : public Error {
public:
  ParseError(const std::string& msg, std::size_t line, std::size_t column)
      : Error(msg + " (line " + std::to_string(line) + ", column " +
              std::to_string(column) + ")"),
        line(line),
        column(column) {}
  std::size_t line;
  std::size_t column;
};

class DimensionMismatchError : public Error {
public:
  using Error::Error;
};

}  // namespace ske
