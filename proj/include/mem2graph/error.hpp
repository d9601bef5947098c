#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace mem2graph {

// Base for every recoverable failure raised by the library. Callers that
// process many files catch this, log, and move on to the next pair.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class FormatError : public Error {
 public:
  using Error::Error;
};

class RangeError : public Error {
 public:
  using Error::Error;
};

class IoError : public Error {
 public:
  using Error::Error;
};

// Annotation file is empty or not parseable as JSON.
class BrokenAnnotation : public Error {
 public:
  using Error::Error;
};

// Annotation parses but carries values that contradict the heap dump.
class InvalidAnnotation : public Error {
 public:
  using Error::Error;
};

// The malloc chunk chain hits a header whose size cannot be a chunk.
class BrokenChaining : public Error {
 public:
  using Error::Error;
};

// Annotation and heap content disagree (annotated free chunk, key not at a
// chunk start, two keys in one chunk, ...).
class IntegrityError : public Error {
 public:
  using Error::Error;
};

class ContractViolation : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

// Bad combination of pipeline options.
class UsageError : public Error {
 public:
  using Error::Error;
};

class DotParseError : public Error {
 public:
  DotParseError(std::size_t line, const std::string& what)
      : Error("line " + std::to_string(line) + ": " + what), line_(line) {}

  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

}  // namespace mem2graph
