#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace curvlab {

/// Base of every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Violated precondition or malformed input (bad config, wrong shapes).
class InvalidArgument : public Error {
 public:
  using Error::Error;
};

/// A numerical guard tripped: conditioning, decay, loss of definiteness.
class NumericalAbort : public Error {
 public:
  using Error::Error;
};

class NotPositiveDefinite : public NumericalAbort {
 public:
  NotPositiveDefinite(std::size_t pivot, const std::string& context)
      : NumericalAbort("not positive definite (pivot " + std::to_string(pivot) +
                       ")" + (context.empty() ? "" : ": " + context)),
        pivot_(pivot) {}
  std::size_t pivot() const noexcept { return pivot_; }

 private:
  std::size_t pivot_;
};

class DegenerateHessian : public NumericalAbort {
 public:
  using NumericalAbort::NumericalAbort;
};

}  // namespace curvlab
