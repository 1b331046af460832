#include "car/estimator.hpp"

#include <cmath>

#include "car/errors.hpp"

namespace car {

RegressionFit fit_mhat(const PredictorSet& pred, std::span<const double> grid,
                       double h, int degree) {
    const std::vector<std::size_t> active = pred.active();
    if (active.empty()) throw EmptyRetainedSet("no active predictor indices");
    std::vector<double> xs, ys;
    xs.reserve(active.size());
    ys.reserve(active.size());
    for (std::size_t i : active) {
        xs.push_back(pred.x_hat[i]);
        ys.push_back(pred.y_hat[i]);
    }
    RegressionFit fit;
    fit.curve = SortedDesign(xs, ys).fit_on(grid, degree, h);
    fit.h = h;
    fit.method_tag = pred.method;
    fit.degree = degree;
    return fit;
}

RegressionFit fit_oracle(std::span<const double> x, std::span<const double> y,
                         std::span<const double> grid, double h, int degree) {
    RegressionFit fit;
    fit.curve = SortedDesign(x, y).fit_on(grid, degree, h);
    fit.h = h;
    fit.method_tag = EstimatorMethod::Oracle;
    fit.degree = degree;
    return fit;
}

RegressionFit fit_naive(const DistortedSample& sample,
                        std::span<const double> grid, double h, int degree) {
    RegressionFit fit = fit_oracle(sample.x_tilde, sample.y_tilde, grid, h, degree);
    fit.method_tag = EstimatorMethod::Naive;
    return fit;
}

double ise(const RegressionFit& fit, const std::function<double(double)>& truth,
           double a, double b) {
    const Curve& c = fit.curve;
    std::vector<double> xs, e2;
    for (std::size_t i = 0; i < c.size(); ++i) {
        if (c.grid[i] < a || c.grid[i] > b) continue;
        if (!c.valid_mask[i])
            throw InvalidGridPoints("ill-posed grid point inside [a,b]");
        const double err = c.values[i] - truth(c.grid[i]);
        xs.push_back(c.grid[i]);
        e2.push_back(err * err);
    }
    if (xs.size() < 2) throw InvalidGridPoints("fewer than 2 grid points in [a,b]");
    double total = 0.0;
    for (std::size_t i = 0; i + 1 < xs.size(); ++i)
        total += 0.5 * (e2[i] + e2[i + 1]) * (xs[i + 1] - xs[i]);
    return total;
}

}  // namespace car
