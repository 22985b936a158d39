#pragma once

#include <stdexcept>
#include <string>

namespace semmp {

/// Input or configuration rejected by a module contract (CLI exit status 1).
class ValidationError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Filesystem or codec failure (CLI exit status 2).
class IoError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

#define SEMMP_DEFINE_ERROR(Name, Base)                 \
    class Name : public Base {                         \
    public:                                            \
        explicit Name(const std::string& what)         \
            : Base(#Name ": " + what) {}               \
    }

SEMMP_DEFINE_ERROR(IoFailure, IoError);
SEMMP_DEFINE_ERROR(UnsupportedFormat, IoError);
SEMMP_DEFINE_ERROR(CorruptData, IoError);

SEMMP_DEFINE_ERROR(ImageTooSmall, ValidationError);
SEMMP_DEFINE_ERROR(DegenerateImage, ValidationError);
SEMMP_DEFINE_ERROR(NoPoresFound, ValidationError);
SEMMP_DEFINE_ERROR(MalformedLine, ValidationError);
SEMMP_DEFINE_ERROR(OutOfRange, ValidationError);
SEMMP_DEFINE_ERROR(DegeneratePolygon, ValidationError);
SEMMP_DEFINE_ERROR(DimensionMismatch, ValidationError);
SEMMP_DEFINE_ERROR(MissingConfidence, ValidationError);
SEMMP_DEFINE_ERROR(InvalidConfig, ValidationError);
SEMMP_DEFINE_ERROR(PlacementFailure, ValidationError);
SEMMP_DEFINE_ERROR(MalformedInput, ValidationError);

#undef SEMMP_DEFINE_ERROR

}  // namespace semmp
