#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "car/kernel.hpp"
#include "car/sample.hpp"

namespace car {

struct BandwidthSet {
    double g1 = 0.0;  // distortion-X smoothing
    double g2 = 0.0;  // distortion-Y smoothing
    double h = 0.0;   // final regression
    double h2 = 0.0;  // pilot for theta2
};

struct RidgePair {
    double rho1 = 0.0;
    double rho2 = 0.0;
};

struct AmiseInputs {
    double sigma2_hat = 0.0;
    double theta2_hat = 0.0;
    double omega_mass = 0.0;
    std::size_t n = 0;
    KernelSpec kernel;
};

enum class RidgeFlavor { Signed, Absolute };

// Difference-based variance estimate sum (z_{[i+1]} - z_{[i]})^2 / (2(n-1)).
// Input must already be ordered as concomitants of the sorted covariate.
double diff_variance(std::span<const double> zs_ordered_by_v);

// theta2 = n^{-1} sum {gamma''(V_i)}^2 omega(V_i), gamma'' from degree-3
// local fits at bandwidth h2. Ill-posed points are skipped; throws
// AllPointsExcluded when nothing remains.
double theta2_hat(std::span<const double> vs, std::span<const double> zs,
                  double h2, const std::vector<bool>& omega);

// AMISE_w(gamma, g) = mu_{K,2}^2 g^4/4 theta2 + nu_{K,0}/(ng) sigma2 *
// omega_mass.
double amise_w(const AmiseInputs& inp, double g);

// Closed-form minimizer of amise_w over g.
double amise_minimizer(const AmiseInputs& inp);

// Two-stage direct plug-in bandwidth for local linear regression of zs on
// vs. Throws TooFewPoints (n < 20) or DegenerateDesign (var(vs) = 0).
double plugin_bandwidth(std::span<const double> vs, std::span<const double> zs);

// Ridge parameters (rho1, rho2) = (max(0.1, rho1*), max(0.1, rho2*)) with
// rho* the square root of the estimated weighted AMISE of the distortion
// curve at its plug-in bandwidth. Signed flavor targets the fits of
// (U, X~)/(U, Y~); Absolute targets the fits of (U, |X~|)/(U, |Y~|).
RidgePair ridge_params(const DistortedSample& sample, RidgeFlavor flavor,
                       double g1pi, double g2pi);

// One side of ridge_params (the rho for a single distorted variable).
double ridge_param_side(std::span<const double> u, std::span<const double> z,
                        RidgeFlavor flavor, double gpi);

// Internal stages, exposed for direct testing of the plug-in recipe.
namespace detail {
// Pilot curvature from a global quartic least-squares fit, averaged over
// the omega-weighted points.
double quartic_pilot_theta2(std::span<const double> vs, std::span<const double> zs,
                            const std::vector<bool>& omega);
// AMISE plug-in assembled from precomputed ingredients, with the
// flat-curvature clamp applied against v_range.
double bandwidth_from_amise(double sigma2, double theta2, double omega_mass,
                            std::size_t n, double v_range);
}  // namespace detail

}  // namespace car
