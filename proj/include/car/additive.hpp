#pragma once

#include <cstddef>
#include <vector>

#include "car/distortion.hpp"
#include "car/local_poly.hpp"

namespace car {

// Observations for the additive model: columns 1..d1 of x_tilde are
// undistorted, columns d1+1..d are multiplied by unknown curves of U, and
// the response is distorted as in the univariate setting.
struct AdditiveSample {
    std::vector<double> u;
    std::vector<std::vector<double>> x_tilde;  // d columns of length n
    std::vector<double> y_tilde;
    std::size_t d1 = 0;

    std::size_t n() const { return u.size(); }
    std::size_t d() const { return x_tilde.size(); }
    void validate() const;
};

struct AdditiveConfig {
    std::size_t max_iter = 50;
    double tol = 1e-4;  // relative sup-change per component
    double trim_fraction = 0.05;
    std::size_t grid_points = 101;
};

struct AdditiveFit {
    double m0_hat = 0.0;
    std::vector<Curve> components;  // one per column, sample-mean 0
    std::size_t iterations = 0;
    bool converged = false;
    std::vector<std::size_t> retained;       // indices the backfit used
    std::vector<double> bandwidths;          // per component, frozen at sweep 1
    std::vector<double> sweep_objectives;    // residual sum of squares per sweep
    double predict(const std::vector<double>& x) const;
};

// Cyclic backfitting on generated predictors/response. per_variable_method
// has one entry per distorted column (d1+1..d) plus a final entry for the
// response; empty means Signed throughout. Failing to converge within
// max_iter is reported via the flag, not an error.
AdditiveFit backfit(const AdditiveSample& sample,
                    std::vector<DistortionMethod> per_variable_method = {},
                    const AdditiveConfig& config = {});

}  // namespace car
