#include "car/rng.hpp"

#include <cmath>

namespace car {

namespace {

constexpr std::uint64_t kGolden = 0x9E3779B97F4A7C15ULL;

std::uint64_t mix(std::uint64_t z) {
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

}  // namespace

std::uint64_t Rng::derive(std::uint64_t seed, std::uint64_t stream) {
    return mix(seed + kGolden * (stream + 1));
}

std::uint64_t Rng::next_u64() {
    state_ += kGolden;
    return mix(state_);
}

double Rng::uniform() {
    // 53-bit mantissa, shifted off zero.
    return (static_cast<double>(next_u64() >> 11) + 0.5) * 0x1.0p-53;
}

double Rng::normal() {
    if (have_spare_) {
        have_spare_ = false;
        return spare_;
    }
    const double u1 = uniform();
    const double u2 = uniform();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double theta = 2.0 * M_PI * u2;
    spare_ = r * std::sin(theta);
    have_spare_ = true;
    return r * std::cos(theta);
}

double Rng::gamma(double shape, double scale) {
    if (shape < 1.0) {
        // Boost: Gamma(a) = Gamma(a+1) * U^{1/a}.
        const double g = gamma(shape + 1.0, 1.0);
        return g * std::pow(uniform(), 1.0 / shape) * scale;
    }
    const double d = shape - 1.0 / 3.0;
    const double c = 1.0 / std::sqrt(9.0 * d);
    for (;;) {
        double x, v;
        do {
            x = normal();
            v = 1.0 + c * x;
        } while (v <= 0.0);
        v = v * v * v;
        const double u = uniform();
        if (u < 1.0 - 0.0331 * x * x * x * x) return d * v * scale;
        if (std::log(u) < 0.5 * x * x + d * (1.0 - v + std::log(v))) return d * v * scale;
    }
}

double Rng::beta(double a, double b) {
    const double ga = gamma(a, 1.0);
    const double gb = gamma(b, 1.0);
    return ga / (ga + gb);
}

}  // namespace car
