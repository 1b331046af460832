#pragma once

#include <span>
#include <vector>

#include "car/bandwidth.hpp"
#include "car/distortion.hpp"
#include "car/sample.hpp"

namespace car {

enum class EstimatorMethod { Oracle, Naive, New1, New2, New3 };

// Generated predictors (X^_i, Y^_i) plus the index bookkeeping of the
// ridge trimming set and the low-density trimming of the confounder.
struct PredictorSet {
    std::vector<double> x_hat;
    std::vector<double> y_hat;
    std::vector<std::size_t> retained;         // sorted, after ridge trimming
    std::vector<std::size_t> density_trimmed;  // removed by density trimming
    EstimatorMethod method = EstimatorMethod::New1;
    RidgePair rho;

    // retained minus density_trimmed, sorted.
    std::vector<std::size_t> active() const;
};

// X^_i = X~_i / phi^(U_i), Y^_i = Y~_i / psi^(U_i); keeps indices whose
// unscaled distortion magnitude clears the ridge thresholds. New1 ignores
// rho (no trimming). Throws EmptyRetainedSet when nothing survives.
PredictorSet build_predictors(const DistortedSample& sample,
                              const DistortionFit& phifit,
                              const DistortionFit& psifit, RidgePair rho,
                              EstimatorMethod method);

// Indices of the floor(fraction*n) smallest kernel density values f^_U(U_i)
// (Silverman bandwidth), ties broken by smaller index.
std::vector<std::size_t> density_trim(std::span<const double> u, double fraction);

}  // namespace car
