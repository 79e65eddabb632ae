#pragma once

#include <functional>
#include <stdexcept>
#include <string>

namespace bloch2d {

/// Base of every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

#define BLOCH2D_ERROR(Name)             \
  class Name : public Error {           \
   public:                              \
    using Error::Error;                 \
  }

BLOCH2D_ERROR(InvalidArgument);
BLOCH2D_ERROR(NonRationalDirection);
BLOCH2D_ERROR(ZeroField);
BLOCH2D_ERROR(WindowTooSmall);
BLOCH2D_ERROR(WindowTooLarge);
BLOCH2D_ERROR(QuadratureFailure);
BLOCH2D_ERROR(TimeDependentField);
BLOCH2D_ERROR(PhaseMismatch);
BLOCH2D_ERROR(MissingMoment);
BLOCH2D_ERROR(UnsupportedCouplingSet);
BLOCH2D_ERROR(NotDivergentDirection);
BLOCH2D_ERROR(IncompleteChiTable);
BLOCH2D_ERROR(BoundaryOverflow);

#undef BLOCH2D_ERROR

/// Non-fatal diagnostic, e.g. amplitude leaking onto the window boundary.
struct Warning {
  std::string code;
  std::string message;
  double value = 0.0;
};

using WarningSink = std::function<void(const Warning&)>;

/// Sink used when a caller passes an empty one: prints to stderr.
void emit_warning(const WarningSink& sink, const Warning& w);

}  // namespace bloch2d
