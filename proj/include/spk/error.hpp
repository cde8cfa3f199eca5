#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace spk {

// Base of every error the toolkit throws on bad input or impossible requests.
class Error : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

// Malformed grammar text. Carries the 1-based line (0 when not line-specific).
class ParseError : public Error {
public:
  ParseError(std::size_t line, const std::string& what)
      : Error(line ? "line " + std::to_string(line) + ": " + what : what),
        line_(line) {}
  std::size_t line() const noexcept { return line_; }

private:
  std::size_t line_;
};

// A symbol that is not part of the governing alphabet.
class AlphabetError : public Error {
public:
  using Error::Error;
};

// A request that violates a configured size cap (k cap, length cap, enumeration limit).
class CapacityError : public Error {
public:
  using Error::Error;
};

// The language (or a length slice of it) is empty where a string was required.
class EmptyLanguageError : public Error {
public:
  using Error::Error;
};

class IoError : public Error {
public:
  using Error::Error;
};

// Dataset metadata does not belong to the grammar it is being used with, or a
// stored line does not belong to the language.
class DatasetError : public Error {
public:
  using Error::Error;
};

// A model assigned probability zero to an observed event.
class ZeroProbabilityError : public Error {
public:
  using Error::Error;
};

}  // namespace spk
