#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace hesitancy {

// Bad user input: malformed files, invalid configuration, out-of-range values.
class InvalidInput : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class ParseError : public InvalidInput {
 public:
  ParseError(const std::string& file, std::size_t line, const std::string& message)
      : InvalidInput(file + ":" + std::to_string(line) + ": " + message), line_(line) {}

  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

// Argument outside the mathematical domain of a density or formula.
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

// An upstream artifact (e.g. posterior.csv before `ate`) is not present.
class MissingArtifact : public std::runtime_error {
 public:
  explicit MissingArtifact(const std::string& path)
      : std::runtime_error("missing required artifact: " + path), path_(path) {}

  const std::string& path() const noexcept { return path_; }

 private:
  std::string path_;
};

// Numerical blow-up inside the model (non-finite predictions).
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace hesitancy
