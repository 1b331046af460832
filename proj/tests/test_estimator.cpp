#include <doctest.h>

#include <cmath>
#include <vector>

#include "car/errors.hpp"
#include "car/estimator.hpp"
#include "car/pipeline.hpp"
#include "car/rng.hpp"

using namespace car;

TEST_CASE("ise is the trapezoid rule of the squared error") {
    RegressionFit fit;
    fit.curve.grid = linspace(0.0, 1.0, 101);
    fit.curve.values.assign(101, 0.0);
    fit.curve.valid_mask.assign(101, true);
    // Truth is x: integral of x^2 over [0,1] is 1/3.
    const double got = ise(fit, [](double x) { return x; }, 0.0, 1.0);
    CHECK(got == doctest::Approx(1.0 / 3.0).epsilon(1e-3));
    // Constant error e over [a,b] integrates to e^2 (b-a) exactly.
    const double flat = ise(fit, [](double) { return 3.0; }, 0.2, 0.8);
    CHECK(flat == doctest::Approx(9.0 * 0.6).epsilon(1e-12));
    // An invalid in-range grid point is an error...
    fit.curve.valid_mask[50] = false;
    CHECK_THROWS_AS(ise(fit, [](double) { return 0.0; }, 0.0, 1.0),
                    InvalidGridPoints);
    // ...but out-of-range invalid points are fine.
    CHECK_NOTHROW(ise(fit, [](double) { return 0.0; }, 0.6, 1.0));
}

TEST_CASE("oracle fit recovers a smooth curve") {
    Rng rng(61);
    std::vector<double> x, y;
    for (int i = 0; i < 800; ++i) {
        x.push_back(3.0 * rng.uniform());
        y.push_back(std::sin(x.back()) + 0.1 * rng.normal());
    }
    const std::vector<double> grid = linspace(0.3, 2.7, 101);
    const RegressionFit fit = fit_oracle(x, y, grid, 0.25, 1);
    const double err = ise(fit, [](double v) { return std::sin(v); }, 0.3, 2.7);
    CHECK(err < 5e-3);
}

TEST_CASE("identity distortion makes the pipeline match the naive fit") {
    Rng rng(67);
    DistortedSample s;
    for (int i = 0; i < 500; ++i) {
        const double x = 1.0 + rng.normal();
        s.u.push_back(rng.uniform());
        s.x_tilde.push_back(x);
        s.y_tilde.push_back(2.0 * x + 0.1 * rng.normal());
    }
    const std::vector<double> grid = linspace(0.0, 2.0, 51);
    PipelineOptions opts;
    const PipelineResult naive = run_pipeline(s, EstimatorMethod::Naive, grid, opts);
    const PipelineResult adj = run_pipeline(s, EstimatorMethod::New2, grid, opts);
    // With no distortion both estimates are close to the same line.
    for (std::size_t i = 0; i < grid.size(); i += 10) {
        if (!naive.fit.curve.valid_mask[i] || !adj.fit.curve.valid_mask[i]) continue;
        CHECK(adj.fit.curve.values[i] ==
              doctest::Approx(naive.fit.curve.values[i]).epsilon(0.08));
    }
}

TEST_CASE("pipeline honors explicit overrides") {
    Rng rng(71);
    DistortedSample s;
    for (int i = 0; i < 300; ++i) {
        const double u = rng.uniform();
        const double x = 1.0 + 1.5 * rng.normal();
        s.u.push_back(u);
        s.x_tilde.push_back((u + 0.4) * x);
        s.y_tilde.push_back((u + 0.6) * (std::sin(x) + 0.1 * rng.normal()));
    }
    const std::vector<double> grid = linspace(-1.0, 3.0, 41);
    PipelineOptions opts;
    opts.g1 = 0.12;
    opts.g2 = 0.14;
    opts.h = 0.5;
    opts.rho1 = 0.0;
    opts.rho2 = 0.0;
    const PipelineResult res = run_pipeline(s, EstimatorMethod::New2, grid, opts);
    CHECK(res.g1 == 0.12);
    CHECK(res.g2 == 0.14);
    CHECK(res.h == 0.5);
    CHECK(res.fit.h == 0.5);
    CHECK(res.rho.rho1 == 0.0);
    CHECK(res.active_count > 250);
}
