#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

namespace conic_lmcf {

// Input-validation failures derive from std::invalid_argument; numerical
// failures from std::runtime_error. The CLI maps them to exit codes 2 and 1.

class InvalidInput : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// A count or fit was requested outside the exponent window a table covers.
class WindowTooSmall : public InvalidInput {
 public:
  using InvalidInput::InvalidInput;
};

/// A weight coincides (within tolerance) with an exceptional exponent.
class ExceptionalWeight : public InvalidInput {
 public:
  ExceptionalWeight(const std::string& what, std::vector<std::size_t> components)
      : InvalidInput(what), components_(std::move(components)) {}
  const std::vector<std::size_t>& components() const noexcept { return components_; }

 private:
  std::vector<std::size_t> components_;
};

class MixedHomogeneity : public InvalidInput {
 public:
  using InvalidInput::InvalidInput;
};

class NumericalFailure : public std::runtime_error {
 public:
  explicit NumericalFailure(const std::string& what, long step = -1)
      : std::runtime_error(what), step_(step) {}
  long step() const noexcept { return step_; }

 private:
  long step_;
};

/// Identity + Hess u lost invertibility somewhere on the grid.
class GraphConditionViolation : public NumericalFailure {
 public:
  GraphConditionViolation(const std::string& what, std::vector<std::size_t> nodes,
                          double suggested_dt = 0.0)
      : NumericalFailure(what), nodes_(std::move(nodes)), suggested_dt_(suggested_dt) {}
  const std::vector<std::size_t>& nodes() const noexcept { return nodes_; }
  double suggested_dt() const noexcept { return suggested_dt_; }

 private:
  std::vector<std::size_t> nodes_;
  double suggested_dt_;
};

}  // namespace conic_lmcf
