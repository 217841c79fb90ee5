#pragma once

#include <stdexcept>
#include <string>

namespace idfd {

// Every failure raised by the library derives from Error so callers can
// catch the whole family at once; the concrete type names the failure mode.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

#define IDFD_DEFINE_ERROR(Name)            \
    class Name : public Error {            \
    public:                                \
        using Error::Error;                \
    }

IDFD_DEFINE_ERROR(ZeroRow);
IDFD_DEFINE_ERROR(NotSymmetric);
IDFD_DEFINE_ERROR(ConvergenceFailure);
IDFD_DEFINE_ERROR(ShapeMismatch);
IDFD_DEFINE_ERROR(IndexOutOfRange);
IDFD_DEFINE_ERROR(DegenerateFeature);
IDFD_DEFINE_ERROR(DomainError);
IDFD_DEFINE_ERROR(EmptyInput);
IDFD_DEFINE_ERROR(LengthMismatch);
IDFD_DEFINE_ERROR(DivisibilityError);
IDFD_DEFINE_ERROR(InfeasibleSeparation);
IDFD_DEFINE_ERROR(BadMagic);
IDFD_DEFINE_ERROR(TruncatedFile);
IDFD_DEFINE_ERROR(DimensionMismatch);
IDFD_DEFINE_ERROR(ConfigError);

#undef IDFD_DEFINE_ERROR

}  // namespace idfd
