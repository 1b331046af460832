#pragma once

#include <cstdint>

namespace car {

// Self-contained counter-seeded generator so simulation output is
// bit-identical across platforms and worker counts. splitmix64 core;
// Normal via Box-Muller, Gamma via Marsaglia-Tsang, Beta from two Gammas.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : state_(seed) {}

    // Stream seed for replication `stream` of a study seeded with `seed`.
    static std::uint64_t derive(std::uint64_t seed, std::uint64_t stream);

    std::uint64_t next_u64();
    double uniform();  // (0, 1)
    double normal();   // N(0, 1)
    double gamma(double shape, double scale);
    double beta(double a, double b);
    double chisq(double df) { return gamma(df / 2.0, 2.0); }

private:
    std::uint64_t state_;
    bool have_spare_ = false;
    double spare_ = 0.0;
};

}  // namespace car
