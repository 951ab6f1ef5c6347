#pragma once

#include <stdexcept>
#include <string>

namespace hyst {

// Base class for all library failures; catch this to handle anything thrown here.
struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Query outside a curve's invertible range, or an input outside a stated domain.
struct OutOfRange : Error {
    using Error::Error;
};

// The lower constraint curve exceeded the upper one at some input.
struct ConstraintOrderViolation : Error {
    using Error::Error;
};

// Derivative requested where the object has none (step truncations).
struct SlopeUnavailable : Error {
    using Error::Error;
};

// Explicit initial internal state violates the admissibility band.
struct InadmissibleInit : Error {
    using Error::Error;
};

// Operation is undefined for this model kind (e.g. plane signature of a curve-pair model).
struct NotApplicable : Error {
    using Error::Error;
};

// Calibration produced a negative weight; the input curve is not convex enough.
struct NegativeWeight : Error {
    using Error::Error;
};

// A slope needed as a divisor is zero or not finite.
struct DegenerateSlope : Error {
    using Error::Error;
};

// Iterative solve exhausted its iteration budget without meeting tolerance.
struct NoConvergence : Error {
    using Error::Error;
};

// Malformed user input: file syntax, inconsistent sizes, bad flag combinations.
struct BadInput : Error {
    using Error::Error;
};

}  // namespace hyst
