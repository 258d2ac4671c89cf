#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace edgebound {

// Bad argument value or violated precondition.
class DomainError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

class SingularMatrixError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// A certificate cannot be evaluated because a side condition fails.
class InfeasibleError : public std::runtime_error {
 public:
  InfeasibleError(std::string condition, const std::string& detail)
      : std::runtime_error("infeasible: " + condition + " (" + detail + ")"),
        condition_(std::move(condition)) {}
  const std::string& condition() const noexcept { return condition_; }

 private:
  std::string condition_;
};

class MissingInputError : public std::invalid_argument {
 public:
  explicit MissingInputError(std::vector<std::string> names)
      : std::invalid_argument(format(names)), names_(std::move(names)) {}
  const std::vector<std::string>& names() const noexcept { return names_; }

 private:
  static std::string format(const std::vector<std::string>& names) {
    std::string msg = "missing inputs:";
    for (const auto& n : names) msg += " " + n;
    return msg;
  }
  std::vector<std::string> names_;
};

}  // namespace edgebound
