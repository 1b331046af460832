#pragma once

#include <functional>
#include <span>

#include "car/local_poly.hpp"
#include "car/predictors.hpp"
#include "car/sample.hpp"

namespace car {

struct RegressionFit {
    Curve curve;
    double h = 0.0;
    EstimatorMethod method_tag = EstimatorMethod::Oracle;
    int degree = 1;  // 0 = Nadaraya-Watson, 1 = local linear
};

// Final regression estimate on the retained (minus density-trimmed)
// predictors.
RegressionFit fit_mhat(const PredictorSet& pred, std::span<const double> grid,
                       double h, int degree);

// Standard smoother on the undistorted (X_i, Y_i); simulation benchmark.
RegressionFit fit_oracle(std::span<const double> x, std::span<const double> y,
                         std::span<const double> grid, double h, int degree);

// Standard smoother applied directly to the distorted data; inconsistent.
RegressionFit fit_naive(const DistortedSample& sample,
                        std::span<const double> grid, double h, int degree);

// Trapezoid rule of (m^ - m)^2 over grid points in [a, b]. Throws
// InvalidGridPoints when an in-range grid point is not valid.
double ise(const RegressionFit& fit, const std::function<double(double)>& truth,
           double a, double b);

}  // namespace car
