#pragma once

#include <optional>
#include <span>
#include <vector>

#include "car/kernel.hpp"

namespace car {

// Silverman rule-of-thumb bandwidth 1.06 * sd * n^{-1/5}.
double silverman_bandwidth(std::span<const double> us);

// Standard kernel density estimate at each evaluation point. Empty
// `bandwidth` means the Silverman rule. Throws DegenerateSample when all
// observations coincide and the bandwidth is automatic.
std::vector<double> kde(std::span<const double> us,
                        std::optional<double> bandwidth,
                        std::span<const double> eval_at,
                        const KernelSpec& k = {});

}  // namespace car
