#pragma once

#include <stdexcept>
#include <string>

namespace coolshape {

/// Invalid argument to a library routine (wrong sizes, out-of-range parameters).
class ArgumentError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Contour violates a geometric invariant (self-intersection, outside the domain, ...).
class GeometryError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Linear solve failed or is too ill-conditioned to trust.
class NumericalError : public std::runtime_error {
 public:
  NumericalError(const std::string& what, double condition_estimate = 0.0)
      : std::runtime_error(what), condition_estimate_(condition_estimate) {}

  double condition_estimate() const noexcept { return condition_estimate_; }

 private:
  double condition_estimate_;
};

}  // namespace coolshape
