#pragma once

#include <stdexcept>
#include <string>

namespace flatlab {

// Thrown when a numerical procedure cannot reach its accuracy target or
// produces a value outside its contract (non-convergent quadrature,
// indefinite gram matrix, zero denominator).  Carries the name of the
// operation that failed so callers can surface it in diagnostics.
class NumericError : public std::runtime_error {
public:
    NumericError(std::string operation, const std::string& what)
        : std::runtime_error(operation + ": " + what),
          operation_(std::move(operation)) {}

    const std::string& operation() const noexcept { return operation_; }

private:
    std::string operation_;
};

}  // namespace flatlab
