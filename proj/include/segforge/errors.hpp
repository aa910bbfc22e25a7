#ifndef SEGFORGE_ERRORS_HPP
#define SEGFORGE_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace segforge {

// Base for all domain errors. The CLI maps these to exit code 1.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

#define SEGFORGE_DEFINE_ERROR(NAME)             \
    class NAME : public Error {                 \
    public:                                     \
        using Error::Error;                     \
    }

// volume-core
SEGFORGE_DEFINE_ERROR(BadMagic);
SEGFORGE_DEFINE_ERROR(UnsupportedDatatype);
SEGFORGE_DEFINE_ERROR(UnsupportedDimension);
SEGFORGE_DEFINE_ERROR(TruncatedData);
SEGFORGE_DEFINE_ERROR(NonPositiveSpacing);
SEGFORGE_DEFINE_ERROR(IoError);
SEGFORGE_DEFINE_ERROR(FormatVersionMismatch);

// preprocess
SEGFORGE_DEFINE_ERROR(InterpMismatch);
SEGFORGE_DEFINE_ERROR(DegenerateWindow);
SEGFORGE_DEFINE_ERROR(GeometryMismatch);

// labels
SEGFORGE_DEFINE_ERROR(UnknownLabel);
SEGFORGE_DEFINE_ERROR(SchemaViolation);

// sampling
SEGFORGE_DEFINE_ERROR(NoForeground);

// nn
SEGFORGE_DEFINE_ERROR(InvalidConfig);
SEGFORGE_DEFINE_ERROR(ShapeMismatch);
SEGFORGE_DEFINE_ERROR(LengthMismatch);

// splits
SEGFORGE_DEFINE_ERROR(TooFewCases);
SEGFORGE_DEFINE_ERROR(InsufficientCases);

// phantom / pipeline
SEGFORGE_DEFINE_ERROR(InvalidSpec);
SEGFORGE_DEFINE_ERROR(EmptyTrainingSet);

#undef SEGFORGE_DEFINE_ERROR

} // namespace segforge

#endif
