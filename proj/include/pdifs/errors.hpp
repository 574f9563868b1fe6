#pragma once

#include <stdexcept>
#include <string>

namespace pdifs {

struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Residual construction asked to subtract a measure that is not dominated.
struct ViolatedDomination : Error {
  using Error::Error;
};

// Sampling from a measure with zero total mass.
struct EmptyMeasure : Error {
  using Error::Error;
};

// An exact enumeration or transport instance grew past its configured cap.
struct SupportCapExceeded : Error {
  using Error::Error;
};

// Operation only defined for place-independent (constant-weight) inputs.
struct NotApplicable : Error {
  using Error::Error;
};

// Too few usable points for a fit.
struct InsufficientData : Error {
  using Error::Error;
};

// Sampling region has empty interior.
struct DegenerateRegion : Error {
  using Error::Error;
};

// Scenario file failed validation; message names the offending key.
struct ScenarioError : Error {
  using Error::Error;
};

}  // namespace pdifs
