#pragma once

#include <optional>
#include <span>
#include <vector>

#include "car/distortion.hpp"
#include "car/estimator.hpp"
#include "car/predictors.hpp"
#include "car/sample.hpp"

namespace car {

// End-to-end fit of one method on one sample: plug-in bandwidths, ridge
// parameters, distortion estimation, predictors, density trimming, final
// smoother. Every stage can be overridden.
struct PipelineOptions {
    int degree = 1;
    double trim_fraction = 0.05;
    std::optional<double> g1, g2, h;
    std::optional<double> rho1, rho2;
    // Per-variable distortion method for the New estimators (auto mixing
    // per the dispatch rule lives in the CLI); unset means the estimator's
    // default.
    std::optional<DistortionMethod> x_method;
    std::optional<DistortionMethod> y_method;
    SignChangeConfig sign_cfg;
};

struct PipelineResult {
    RegressionFit fit;
    double g1 = 0.0, g2 = 0.0, h = 0.0;
    RidgePair rho;
    std::vector<double> tau_x, tau_y;
    std::size_t active_count = 0;
};

// `method` selects the estimator; for New1/New2/New3 the distortion
// methods default to Basic/Signed/General on both variables.
PipelineResult run_pipeline(const DistortedSample& sample, EstimatorMethod method,
                            std::span<const double> grid,
                            PipelineOptions opts = {});

// Default per-variable distortion method of each estimator.
DistortionMethod default_distortion_method(EstimatorMethod method);

}  // namespace car
