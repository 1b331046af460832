#include "car/sample.hpp"

#include "car/errors.hpp"

namespace car {

void DistortedSample::validate() const {
    if (u.size() != x_tilde.size() || u.size() != y_tilde.size())
        throw DegenerateSample("column lengths differ");
    if (u.size() < 20) throw TooFewPoints("need n >= 20");
}

}  // namespace car
