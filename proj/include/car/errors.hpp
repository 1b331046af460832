#pragma once

#include <stdexcept>
#include <string>

namespace car {

// Base class for all estimation errors. `name()` is the stable identifier
// reported on stderr by the CLI.
class Error : public std::runtime_error {
public:
    Error(std::string name, const std::string& what)
        : std::runtime_error(name + ": " + what), name_(std::move(name)) {}
    const std::string& name() const noexcept { return name_; }

private:
    std::string name_;
};

#define CAR_DEFINE_ERROR(NAME)                                       \
    class NAME : public Error {                                      \
    public:                                                          \
        explicit NAME(const std::string& what = "")                  \
            : Error(#NAME, what) {}                                  \
    }

CAR_DEFINE_ERROR(IllPosedFit);
CAR_DEFINE_ERROR(AllPointsIllPosed);
CAR_DEFINE_ERROR(DegenerateSample);
CAR_DEFINE_ERROR(TooFewPoints);
CAR_DEFINE_ERROR(AllPointsExcluded);
CAR_DEFINE_ERROR(DegenerateDesign);
CAR_DEFINE_ERROR(MeanNearZero);
CAR_DEFINE_ERROR(EmptySegment);
CAR_DEFINE_ERROR(EmptyRetainedSet);
CAR_DEFINE_ERROR(InvalidGridPoints);
CAR_DEFINE_ERROR(MethodInapplicable);
CAR_DEFINE_ERROR(ZeroMeanDistortion);
CAR_DEFINE_ERROR(ParseError);

#undef CAR_DEFINE_ERROR

}  // namespace car
