#include "car/kde.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "car/errors.hpp"

namespace car {

double silverman_bandwidth(std::span<const double> us) {
    const std::size_t n = us.size();
    if (n < 2) throw DegenerateSample("need at least 2 points");
    const double mean = std::accumulate(us.begin(), us.end(), 0.0) / n;
    double ss = 0.0;
    for (double u : us) ss += (u - mean) * (u - mean);
    const double sd = std::sqrt(ss / (n - 1));
    if (sd == 0.0) throw DegenerateSample("sd(us) = 0");
    return 1.06 * sd * std::pow(static_cast<double>(n), -0.2);
}

std::vector<double> kde(std::span<const double> us,
                        std::optional<double> bandwidth,
                        std::span<const double> eval_at, const KernelSpec& k) {
    if (us.size() < 2) throw DegenerateSample("need at least 2 points");
    const double h = bandwidth ? *bandwidth : silverman_bandwidth(us);
    std::vector<double> sorted(us.begin(), us.end());
    std::sort(sorted.begin(), sorted.end());
    std::vector<double> out(eval_at.size(), 0.0);
    const double scale = 1.0 / (static_cast<double>(us.size()) * h);
    for (std::size_t j = 0; j < eval_at.size(); ++j) {
        const double x = eval_at[j];
        auto lo = std::lower_bound(sorted.begin(), sorted.end(), x - h);
        auto hi = std::upper_bound(lo, sorted.end(), x + h);
        double sum = 0.0;
        for (auto it = lo; it != hi; ++it) sum += eval_kernel(k, (x - *it) / h);
        out[j] = sum * scale;
    }
    return out;
}

}  // namespace car
