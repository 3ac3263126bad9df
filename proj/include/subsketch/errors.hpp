#pragma once

#include <stdexcept>
#include <string>

namespace subsketch {

// Base class for all toolkit errors.
struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

#define SUBSKETCH_ERROR(Name)                             \
  struct Name : Error {                                   \
    explicit Name(const std::string& msg) : Error(msg) {} \
  }

// Array model
SUBSKETCH_ERROR(AngleOutOfRange);
SUBSKETCH_ERROR(WrongGeometry);
SUBSKETCH_ERROR(NotUnitVector);
SUBSKETCH_ERROR(GridTooCoarse);

// Channel / sampling
SUBSKETCH_ERROR(EmptyProfile);
SUBSKETCH_ERROR(InvalidDim);
SUBSKETCH_ERROR(DimMismatch);

// Solver
SUBSKETCH_ERROR(NonCanonicalGrid);
SUBSKETCH_ERROR(NonpositiveAlpha);
SUBSKETCH_ERROR(ConfigInvalid);
SUBSKETCH_ERROR(ScaleTooLarge);

// Metrics
SUBSKETCH_ERROR(ZeroMatrix);
SUBSKETCH_ERROR(NotPSD);
SUBSKETCH_ERROR(NotUnitary);
SUBSKETCH_ERROR(LengthMismatch);
SUBSKETCH_ERROR(DegenerateProfile);

// Tracking
SUBSKETCH_ERROR(InvalidQ);

// SVT baseline
SUBSKETCH_ERROR(UnsupportedOperator);

// CLI / experiment runner
SUBSKETCH_ERROR(ConfigParse);
SUBSKETCH_ERROR(OutputUnwritable);

#undef SUBSKETCH_ERROR

}  // namespace subsketch
