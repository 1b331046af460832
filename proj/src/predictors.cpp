#include "car/predictors.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "car/errors.hpp"
#include "car/kde.hpp"

namespace car {

std::vector<std::size_t> PredictorSet::active() const {
    std::vector<std::size_t> out;
    out.reserve(retained.size());
    std::set_difference(retained.begin(), retained.end(), density_trimmed.begin(),
                        density_trimmed.end(), std::back_inserter(out));
    return out;
}

PredictorSet build_predictors(const DistortedSample& sample,
                              const DistortionFit& phifit,
                              const DistortionFit& psifit, RidgePair rho,
                              EstimatorMethod method) {
    const std::size_t n = sample.n();
    if (phifit.at_sample.size() != n || psifit.at_sample.size() != n)
        throw DegenerateSample("distortion fits do not match the sample");

    PredictorSet out;
    out.method = method;
    out.rho = method == EstimatorMethod::New1 ? RidgePair{0.0, 0.0} : rho;
    out.x_hat.resize(n);
    out.y_hat.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        out.x_hat[i] = sample.x_tilde[i] / phifit.at_sample[i];
        out.y_hat[i] = sample.y_tilde[i] / psifit.at_sample[i];
    }
    for (std::size_t i = 0; i < n; ++i) {
        if (phifit.trim_stat(i) >= out.rho.rho1 && psifit.trim_stat(i) >= out.rho.rho2 &&
            std::isfinite(out.x_hat[i]) && std::isfinite(out.y_hat[i]))
            out.retained.push_back(i);
    }
    if (out.retained.empty()) throw EmptyRetainedSet("ridge trimming removed all points");
    return out;
}

std::vector<std::size_t> density_trim(std::span<const double> u, double fraction) {
    if (fraction < 0.0 || fraction >= 0.5)
        throw DegenerateSample("trim fraction must be in [0, 0.5)");
    const std::size_t remove = static_cast<std::size_t>(fraction * u.size());
    if (remove == 0) return {};
    const std::vector<double> density = kde(u, std::nullopt, u);
    std::vector<std::size_t> order(u.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        return density[a] < density[b];
    });
    order.resize(remove);
    std::sort(order.begin(), order.end());
    return order;
}

}  // namespace car
