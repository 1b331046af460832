#pragma once

#include <span>
#include <vector>

#include "car/local_poly.hpp"
#include "car/sample.hpp"

namespace car {

enum class DistortionMethod { Basic, Signed, General };
enum class DistortionTarget { X, Y };

// An estimated distortion curve (phi-hat or psi-hat), normalized so that
// its sample mean is 1 (exactly, for the General method).
struct DistortionFit {
    Curve curve;
    std::vector<double> at_sample;  // estimate at each U_i
    std::vector<double> tau;        // sign-change points, may be empty
    double scale = 1.0;             // estimate of E|X| (or |EX| for Signed)
    double orientation = 1.0;       // +1 or -1
    DistortionMethod method = DistortionMethod::Basic;

    // Magnitude of the unscaled curve at sample point i; this is the
    // statistic thresholded by the ridge parameters.
    double trim_stat(std::size_t i) const { return std::abs(at_sample[i]) * scale; }
};

struct SignChangeConfig {
    double kappa = 2.0;           // slope-jump threshold in pooled-SE units
    double value_quantile = 0.25; // candidate must sit below this quantile
    double merge_factor = 2.0;    // merge radius = merge_factor * g
};

// 201 equally spaced points on [min u, max u].
std::vector<double> default_distortion_grid(std::span<const double> u);

// Signed curve: degree-1 fit of z~ on u divided by mean(z~). Throws
// MeanNearZero when |mean| <= 1e-8 * sd (caller should switch to General).
DistortionFit estimate_signed(std::span<const double> u,
                              std::span<const double> z_tilde, double g,
                              std::span<const double> grid);

// Positive-distortion curve: degree-1 fit of |z~| on u divided by
// mean(|z~|). Valid only when the distortion is positive everywhere.
DistortionFit estimate_basic(std::span<const double> u,
                             std::span<const double> z_tilde, double g,
                             std::span<const double> grid);

// Raw fit of |z~| on u: an estimate of |distortion| times E|Z|, neither
// signed nor scaled. May overshoot below zero; no clipping.
Curve estimate_abs_curve(std::span<const double> u,
                         std::span<const double> z_tilde, double g,
                         std::span<const double> grid);

struct SignChange {
    double tau = 0.0;
    double slope_jump = 0.0;
    double pooled_se = 0.0;
    double star_value = 0.0;
};

// Estimated zeros of the distortion: local minima of the absolute-value
// curve whose one-sided slopes jump by more than kappa pooled standard
// errors, merged within 2g and kept away from the boundary.
std::vector<double> detect_sign_changes(const Curve& star,
                                        std::span<const double> u,
                                        std::span<const double> abs_z, double g,
                                        const SignChangeConfig& cfg = {});

// Same rule, keeping the slope-jump statistics for reporting.
std::vector<SignChange> detect_sign_changes_detailed(
    const Curve& star, std::span<const double> u, std::span<const double> abs_z,
    double g, const SignChangeConfig& cfg = {});

// Piecewise assembly: alternate segment signs across the tau's, orient by
// the sign of the sample sum, scale by the sample mean. The resulting
// at_sample has mean exactly 1. star_segments[j] is the per-segment fit
// evaluated on the shared grid (values outside segment j are ignored).
DistortionFit assemble_general(const std::vector<Curve>& star_segments,
                               std::span<const double> tau,
                               std::span<const double> u,
                               std::span<const double> grid);

// Dispatch: Basic / Signed directly, General = abs curve -> sign-change
// detection -> per-segment refits -> assembly.
DistortionFit estimate_distortion(const DistortedSample& sample,
                                  DistortionTarget target,
                                  DistortionMethod method, double g,
                                  std::span<const double> grid,
                                  const SignChangeConfig& cfg = {});

}  // namespace car
