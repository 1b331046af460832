#pragma once

#include <cstddef>
#include <vector>

namespace car {

// Observed triples (U_i, X~_i, Y~_i). The confounder is expected to live in
// [0,1]; CSV ingestion rescales when needed.
struct DistortedSample {
    std::vector<double> u;
    std::vector<double> x_tilde;
    std::vector<double> y_tilde;

    std::size_t n() const { return u.size(); }
    void validate() const;  // throws TooFewPoints / DegenerateSample
};

}  // namespace car
