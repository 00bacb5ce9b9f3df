// Exception types thrown by the zipper library.
//
// Each family maps to one CLI exit code (see tools/zipper.cpp).

#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace zipper {

struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Malformed fixed-column record. Carries the 1-based line number.
struct ParseError : Error {
  ParseError(std::size_t line, const std::string& msg)
    : Error("line " + std::to_string(line) + ": " + msg), line_number(line) {}
  std::size_t line_number;
};

// Unreadable or unwritable file.
struct IOError : Error {
  using Error::Error;
};

// Structure shape violations (duplicate chains, missing backbone, ...).
struct StructureError : Error {
  using Error::Error;
};

struct NotFoundError : Error {
  using Error::Error;
};

struct AmbiguityError : Error {
  using Error::Error;
};

// Value cannot be written in the fixed-column layout.
struct FormatError : Error {
  using Error::Error;
};

struct LabelError : Error {
  using Error::Error;
};

struct ArgumentError : Error {
  using Error::Error;
};

// Two atoms closer than the distance floor.
struct SingularityError : Error {
  explicit SingularityError(const std::string& msg) : Error(msg) {}
  SingularityError(std::size_t i, std::size_t j, const std::string& msg)
    : Error(msg), first(i), second(j) {}
  std::size_t first = 0;
  std::size_t second = 0;
};

struct FetchError : Error {
  using Error::Error;
};

struct ValidationError : Error {
  using Error::Error;
};

}  // namespace zipper
