#pragma once

#include <stdexcept>
#include <string>

namespace logsym {

/// Base class for every error raised by the library. `kind()` is a stable
/// identifier used in the CLI's machine-readable error line.
class Error : public std::runtime_error {
 public:
  Error(std::string kind, const std::string& message)
      : std::runtime_error(message), kind_(std::move(kind)) {}
  const std::string& kind() const noexcept { return kind_; }

 private:
  std::string kind_;
};

struct DomainError : Error {
  explicit DomainError(const std::string& m) : Error("DomainError", m) {}
};

struct SingularityError : Error {
  explicit SingularityError(const std::string& m) : Error("SingularityError", m) {}
};

struct LengthError : Error {
  explicit LengthError(const std::string& m) : Error("LengthError", m) {}
};

struct NonFiniteError : Error {
  explicit NonFiniteError(const std::string& m) : Error("NonFiniteError", m) {}
};

struct ConvergenceError : Error {
  explicit ConvergenceError(const std::string& m) : Error("ConvergenceError", m) {}
};

struct NonStationaryError : Error {
  explicit NonStationaryError(const std::string& m) : Error("NonStationaryError", m) {}
};

struct RankDeficientError : Error {
  explicit RankDeficientError(const std::string& m) : Error("RankDeficientError", m) {}
};

struct IoError : Error {
  explicit IoError(const std::string& m) : Error("IoError", m) {}
};

struct ParseError : Error {
  explicit ParseError(const std::string& m) : Error("ParseError", m) {}
};

struct ConfigError : Error {
  explicit ConfigError(const std::string& m) : Error("ConfigError", m) {}
};

}  // namespace logsym
