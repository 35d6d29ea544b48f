#pragma once

#include <stdexcept>
#include <string>

namespace activecq {

struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

#define ACTIVECQ_DEFINE_ERROR(Name)                   \
    struct Name : Error {                             \
        using Error::Error;                           \
    }

ACTIVECQ_DEFINE_ERROR(NotSymmetricError);
ACTIVECQ_DEFINE_ERROR(NotFactorizableError);
ACTIVECQ_DEFINE_ERROR(DimensionMismatchError);
ACTIVECQ_DEFINE_ERROR(NonFiniteError);
ACTIVECQ_DEFINE_ERROR(InvalidScaleError);
ACTIVECQ_DEFINE_ERROR(MissingBlockError);
ACTIVECQ_DEFINE_ERROR(EmptyTrainingError);
ACTIVECQ_DEFINE_ERROR(FactorizationFailureError);
ACTIVECQ_DEFINE_ERROR(KernelMismatchError);
ACTIVECQ_DEFINE_ERROR(ZeroCountError);
ACTIVECQ_DEFINE_ERROR(MissingContextError);
ACTIVECQ_DEFINE_ERROR(SamplerUnavailableError);
ACTIVECQ_DEFINE_ERROR(EmptyAnchorsError);
ACTIVECQ_DEFINE_ERROR(NegativeVarianceError);
ACTIVECQ_DEFINE_ERROR(PoolExhaustedError);
ACTIVECQ_DEFINE_ERROR(InconsistentKindError);
ACTIVECQ_DEFINE_ERROR(LengthMismatchError);
ACTIVECQ_DEFINE_ERROR(ParseError);
ACTIVECQ_DEFINE_ERROR(EmptyFileError);
ACTIVECQ_DEFINE_ERROR(NoContinuousColumnsError);
ACTIVECQ_DEFINE_ERROR(UnknownMechanismError);
ACTIVECQ_DEFINE_ERROR(SchemaError);
ACTIVECQ_DEFINE_ERROR(VersionError);
ACTIVECQ_DEFINE_ERROR(IoError);

#undef ACTIVECQ_DEFINE_ERROR

}  // namespace activecq
