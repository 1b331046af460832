#include "car/pipeline.hpp"

#include <algorithm>
#include <cmath>

#include "car/bandwidth.hpp"
#include "car/errors.hpp"

namespace car {

namespace {

std::vector<double> abs_of(std::span<const double> v) {
    std::vector<double> out(v.begin(), v.end());
    for (double& x : out) x = std::abs(x);
    return out;
}

RidgeFlavor flavor_of(DistortionMethod m) {
    return m == DistortionMethod::General ? RidgeFlavor::Absolute
                                          : RidgeFlavor::Signed;
}

}  // namespace

DistortionMethod default_distortion_method(EstimatorMethod method) {
    switch (method) {
        case EstimatorMethod::New1: return DistortionMethod::Basic;
        case EstimatorMethod::New2: return DistortionMethod::Signed;
        default: return DistortionMethod::General;
    }
}

PipelineResult run_pipeline(const DistortedSample& sample, EstimatorMethod method,
                            std::span<const double> grid, PipelineOptions opts) {
    sample.validate();
    const std::size_t n = sample.n();
    PipelineResult res;

    if (method == EstimatorMethod::Oracle || method == EstimatorMethod::Naive) {
        res.h = opts.h ? *opts.h : plugin_bandwidth(sample.x_tilde, sample.y_tilde);
        res.fit = fit_naive(sample, grid, res.h, opts.degree);
        res.fit.method_tag = method;
        res.active_count = n;
        return res;
    }

    const DistortionMethod mx =
        opts.x_method.value_or(default_distortion_method(method));
    const DistortionMethod my =
        opts.y_method.value_or(default_distortion_method(method));

    // Plug-in bandwidths for the distortion fits; the Basic method smooths
    // absolute responses, so its pilot runs on them too.
    const std::vector<double> abs_x = abs_of(sample.x_tilde);
    const std::vector<double> abs_y = abs_of(sample.y_tilde);
    const double g1pi = plugin_bandwidth(
        sample.u, mx == DistortionMethod::Basic ? abs_x : sample.x_tilde);
    const double g2pi = plugin_bandwidth(
        sample.u, my == DistortionMethod::Basic ? abs_y : sample.y_tilde);
    const double undersmooth = std::pow(static_cast<double>(n), -0.1);
    res.g1 = opts.g1 ? *opts.g1 : undersmooth * g1pi;
    res.g2 = opts.g2 ? *opts.g2 : undersmooth * g2pi;

    const DistortionFit phi = estimate_distortion(sample, DistortionTarget::X, mx,
                                                  res.g1, {}, opts.sign_cfg);
    const DistortionFit psi = estimate_distortion(sample, DistortionTarget::Y, my,
                                                  res.g2, {}, opts.sign_cfg);
    res.tau_x = phi.tau;
    res.tau_y = psi.tau;

    if (method == EstimatorMethod::New1) {
        res.rho = {0.0, 0.0};
    } else {
        res.rho.rho1 = opts.rho1 ? *opts.rho1
                                 : ridge_param_side(sample.u, sample.x_tilde,
                                                    flavor_of(mx), g1pi);
        res.rho.rho2 = opts.rho2 ? *opts.rho2
                                 : ridge_param_side(sample.u, sample.y_tilde,
                                                    flavor_of(my), g2pi);
    }

    PredictorSet pred = build_predictors(sample, phi, psi, res.rho, method);
    if (opts.trim_fraction > 0.0) {
        const std::vector<std::size_t> trimmed = density_trim(sample.u, opts.trim_fraction);
        std::vector<std::size_t> kept;
        std::set_difference(pred.retained.begin(), pred.retained.end(),
                            trimmed.begin(), trimmed.end(), std::back_inserter(kept));
        pred.retained = std::move(kept);
        pred.density_trimmed = trimmed;
        if (pred.retained.empty())
            throw EmptyRetainedSet("density trimming removed all retained points");
    }
    res.active_count = pred.retained.size();

    if (opts.h) {
        res.h = *opts.h;
    } else {
        std::vector<double> xs, ys;
        for (std::size_t i : pred.retained) {
            xs.push_back(pred.x_hat[i]);
            ys.push_back(pred.y_hat[i]);
        }
        res.h = plugin_bandwidth(xs, ys);
    }
    res.fit = fit_mhat(pred, grid, res.h, opts.degree);
    return res;
}

}  // namespace car
