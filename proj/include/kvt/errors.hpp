#pragma once

#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace kvt {

/// Root of every error the library throws.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Caller passed an argument outside an operation's contract (bad index,
/// nonpositive step, mismatched grids).
class UsageError : public Error {
 public:
  using Error::Error;
};

/// A documented precondition on field data does not hold (e.g. a
/// displacement that is not zero on the Dirichlet boundary).
class PreconditionError : public Error {
 public:
  using Error::Error;
};

/// Input lies outside the mathematical domain of a function (theta <= 0).
class DomainError : public Error {
 public:
  using Error::Error;
};

/// The frozen temperature lost positivity, so the heat operator is no
/// longer parabolic.
class DegeneracyError : public Error {
 public:
  using Error::Error;
};

/// An iterative method ran out of iterations.
class ConvergenceError : public Error {
 public:
  using Error::Error;
};

class IoError : public Error {
 public:
  IoError(std::string path, const std::string& what)
      : Error(path + ": " + what), path_(std::move(path)) {}
  const std::string& path() const noexcept { return path_; }

 private:
  std::string path_;
};

/// Configuration problems. Carries every violation found, not just the first.
class ConfigError : public Error {
 public:
  explicit ConfigError(std::vector<std::string> violations)
      : Error(join(violations)), violations_(std::move(violations)) {}
  const std::vector<std::string>& violations() const noexcept { return violations_; }

 private:
  static std::string join(const std::vector<std::string>& items) {
    std::string out;
    for (const auto& s : items) {
      if (!out.empty()) out += "\n";
      out += s;
    }
    return out;
  }
  std::vector<std::string> violations_;
};

}  // namespace kvt
