#pragma once

#include <stdexcept>
#include <string>
#include <utility>

namespace d2d {

// Error taxonomy. Every error carries a stable machine-readable kind, used by
// the CLI when it reports failures as JSON.
class Error : public std::runtime_error {
 public:
  Error(std::string kind, const std::string& what)
      : std::runtime_error(what), kind_(std::move(kind)) {}
  const std::string& kind() const noexcept { return kind_; }

 private:
  std::string kind_;
};

class InvalidParameter : public Error {
 public:
  explicit InvalidParameter(const std::string& what) : Error("invalid-parameter", what) {}
};

class InvalidState : public Error {
 public:
  explicit InvalidState(const std::string& what) : Error("invalid-state", what) {}
};

class Infeasible : public Error {
 public:
  explicit Infeasible(const std::string& what) : Error("infeasible", what) {}
};

class TooLarge : public Error {
 public:
  explicit TooLarge(const std::string& what) : Error("too-large", what) {}
};

}  // namespace d2d
