#pragma once

#include <stdexcept>
#include <string>

namespace rayalign {

/// Base class for all library errors.
struct Error : std::runtime_error {
    explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

#define RAYALIGN_DEFINE_ERROR(Name)                                        \
    struct Name : Error {                                                  \
        explicit Name(const std::string& msg = #Name) : Error(msg) {}      \
    }

// geom
RAYALIGN_DEFINE_ERROR(ZeroVector);
RAYALIGN_DEFINE_ERROR(DegenerateConfiguration);

// camera-models
RAYALIGN_DEFINE_ERROR(OutOfDomain);
RAYALIGN_DEFINE_ERROR(InvalidOrder);
RAYALIGN_DEFINE_ERROR(CoefficientMismatch);
RAYALIGN_DEFINE_ERROR(RankDeficient);

// pointmap
RAYALIGN_DEFINE_ERROR(DimensionMismatch);
RAYALIGN_DEFINE_ERROR(EmptyPointmap);

// losses
RAYALIGN_DEFINE_ERROR(LengthMismatch);

// scenegraph
RAYALIGN_DEFINE_ERROR(NotReciprocal);

// align
RAYALIGN_DEFINE_ERROR(IsolatedView);
RAYALIGN_DEFINE_ERROR(NoValidPixels);
RAYALIGN_DEFINE_ERROR(EmptyGraph);
RAYALIGN_DEFINE_ERROR(Disconnected);
RAYALIGN_DEFINE_ERROR(NonFiniteObjective);

// simkit
RAYALIGN_DEFINE_ERROR(RayEscapes);

// metrics
RAYALIGN_DEFINE_ERROR(EmptyList);

// io
RAYALIGN_DEFINE_ERROR(FormatError);
RAYALIGN_DEFINE_ERROR(ConfigError);

#undef RAYALIGN_DEFINE_ERROR

}  // namespace rayalign
