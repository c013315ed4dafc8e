#pragma once

#include <stdexcept>
#include <string>

namespace ximpact {

struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

#define XIMPACT_ERROR(Name)                      \
  struct Name : Error {                          \
    explicit Name(const std::string& what)       \
        : Error(std::string(#Name ": ") + what) {} \
  }

XIMPACT_ERROR(SymmetryViolation);
XIMPACT_ERROR(NotPSD);
XIMPACT_ERROR(NotPD);
XIMPACT_ERROR(BasisError);
XIMPACT_ERROR(ShapeError);
XIMPACT_ERROR(DegenerateLiquidity);
XIMPACT_ERROR(ZeroVolatility);
XIMPACT_ERROR(PreconditionError);
XIMPACT_ERROR(InvalidWeight);
XIMPACT_ERROR(DegenerateDenominator);
XIMPACT_ERROR(OrderingError);
XIMPACT_ERROR(EmptySession);
XIMPACT_ERROR(InsufficientData);
XIMPACT_ERROR(UnknownAsset);
XIMPACT_ERROR(ValidationError);

#undef XIMPACT_ERROR

}  // namespace ximpact
