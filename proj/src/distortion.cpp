#include "car/distortion.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "car/errors.hpp"

namespace car {

namespace {

double mean_of(std::span<const double> v) {
    return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

double sd_of(std::span<const double> v) {
    const double m = mean_of(v);
    double ss = 0.0;
    for (double x : v) ss += (x - m) * (x - m);
    return std::sqrt(ss / static_cast<double>(v.size()));
}

// Curve value at each U_i: direct local fit where well-posed, grid
// interpolation otherwise.
std::vector<double> evaluate_at_sample(const SortedDesign& design,
                                       std::span<const double> u, double g,
                                       const Curve& curve) {
    std::vector<double> out(u.size());
    for (std::size_t i = 0; i < u.size(); ++i) {
        try {
            out[i] = design.fit_at(u[i], 1, g).coefficients[0];
        } catch (const IllPosedFit&) {
            out[i] = curve.interpolate(u[i]);
        }
    }
    return out;
}

struct SlopeFit {
    double slope = 0.0;
    double se = 0.0;
    std::size_t count = 0;
};

// Unweighted least-squares slope with its standard error over a window.
SlopeFit ols_slope(std::span<const double> u, std::span<const double> z,
                   double lo, double hi) {
    SlopeFit out;
    double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
    std::size_t m = 0;
    for (std::size_t i = 0; i < u.size(); ++i) {
        if (u[i] < lo || u[i] > hi) continue;
        ++m;
        sx += u[i];
        sy += z[i];
        sxx += u[i] * u[i];
        sxy += u[i] * z[i];
    }
    out.count = m;
    if (m < 3) return out;
    const double n = static_cast<double>(m);
    const double varx = sxx - sx * sx / n;
    if (varx <= 0.0) {
        out.count = 0;
        return out;
    }
    out.slope = (sxy - sx * sy / n) / varx;
    const double intercept = (sy - out.slope * sx) / n;
    double rss = 0.0;
    for (std::size_t i = 0; i < u.size(); ++i) {
        if (u[i] < lo || u[i] > hi) continue;
        const double r = z[i] - intercept - out.slope * u[i];
        rss += r * r;
    }
    out.se = std::sqrt(rss / (n - 2.0) / varx);
    return out;
}

double quantile_of_valid(const Curve& c, double p) {
    std::vector<double> vals;
    for (std::size_t i = 0; i < c.size(); ++i)
        if (c.valid_mask[i]) vals.push_back(c.values[i]);
    std::sort(vals.begin(), vals.end());
    const double idx = p * static_cast<double>(vals.size() - 1);
    const std::size_t lo = static_cast<std::size_t>(idx);
    const std::size_t hi = std::min(lo + 1, vals.size() - 1);
    return vals[lo] + (idx - lo) * (vals[hi] - vals[lo]);
}

// Index of the segment of x under breakpoints tau (I_0 left of tau_1, ...).
std::size_t segment_of(double x, std::span<const double> tau) {
    return std::upper_bound(tau.begin(), tau.end(), x) - tau.begin();
}

}  // namespace

std::vector<double> default_distortion_grid(std::span<const double> u) {
    auto [mn, mx] = std::minmax_element(u.begin(), u.end());
    return linspace(*mn, *mx, 201);
}

DistortionFit estimate_signed(std::span<const double> u,
                              std::span<const double> z_tilde, double g,
                              std::span<const double> grid) {
    const double mean = mean_of(z_tilde);
    const double sd = sd_of(z_tilde);
    if (std::abs(mean) <= 1e-8 * sd)
        throw MeanNearZero("mean(z~) within guard of 0; use the General method");

    SortedDesign design(u, z_tilde);
    DistortionFit fit;
    fit.method = DistortionMethod::Signed;
    fit.scale = std::abs(mean);
    fit.orientation = mean > 0 ? 1.0 : -1.0;
    fit.curve = design.fit_on(grid, 1, g);
    fit.at_sample = evaluate_at_sample(design, u, g, fit.curve);
    for (double& v : fit.curve.values) v /= mean;
    for (double& v : fit.at_sample) v /= mean;
    return fit;
}

DistortionFit estimate_basic(std::span<const double> u,
                             std::span<const double> z_tilde, double g,
                             std::span<const double> grid) {
    std::vector<double> abs_z(z_tilde.begin(), z_tilde.end());
    for (double& v : abs_z) v = std::abs(v);
    const double mean = mean_of(abs_z);
    if (mean == 0.0) throw DegenerateSample("all z~ are zero");

    SortedDesign design(u, abs_z);
    DistortionFit fit;
    fit.method = DistortionMethod::Basic;
    fit.scale = mean;
    fit.orientation = 1.0;
    fit.curve = design.fit_on(grid, 1, g);
    fit.at_sample = evaluate_at_sample(design, u, g, fit.curve);
    for (double& v : fit.curve.values) v /= mean;
    for (double& v : fit.at_sample) v /= mean;
    return fit;
}

Curve estimate_abs_curve(std::span<const double> u,
                         std::span<const double> z_tilde, double g,
                         std::span<const double> grid) {
    std::vector<double> abs_z(z_tilde.begin(), z_tilde.end());
    for (double& v : abs_z) v = std::abs(v);
    if (mean_of(abs_z) == 0.0) throw DegenerateSample("all z~ are zero");
    return SortedDesign(u, abs_z).fit_on(grid, 1, g);
}

std::vector<SignChange> detect_sign_changes_detailed(
    const Curve& star, std::span<const double> u, std::span<const double> abs_z,
    double g, const SignChangeConfig& cfg) {
    if (star.size() < 21) throw DegenerateSample("star curve needs >= 21 grid points");
    const double u_lo = star.grid.front(), u_hi = star.grid.back();
    const double threshold = quantile_of_valid(star, cfg.value_quantile);

    std::vector<SignChange> kept;
    for (std::size_t i = 1; i + 1 < star.size(); ++i) {
        if (!star.valid_mask[i] || !star.valid_mask[i - 1] || !star.valid_mask[i + 1])
            continue;
        if (!(star.values[i] < star.values[i - 1] && star.values[i] < star.values[i + 1]))
            continue;
        const double tau = star.grid[i];
        if (tau < u_lo + g || tau > u_hi - g) continue;  // interior only
        if (star.values[i] > threshold) continue;

        const SlopeFit left = ols_slope(u, abs_z, tau - g, tau);
        const SlopeFit right = ols_slope(u, abs_z, tau, tau + g);
        if (left.count < 3 || right.count < 3) continue;
        const double jump = std::abs(right.slope - left.slope);
        const double se = std::sqrt(left.se * left.se + right.se * right.se);
        if (jump <= cfg.kappa * se) continue;
        kept.push_back({tau, jump, se, star.values[i]});
    }

    // Merge candidates closer than merge_factor*g, keeping the deeper one.
    std::sort(kept.begin(), kept.end(),
              [](const SignChange& a, const SignChange& b) { return a.tau < b.tau; });
    std::vector<SignChange> merged;
    for (const SignChange& c : kept) {
        if (!merged.empty() && c.tau - merged.back().tau < cfg.merge_factor * g) {
            if (c.star_value < merged.back().star_value) merged.back() = c;
        } else {
            merged.push_back(c);
        }
    }
    return merged;
}

std::vector<double> detect_sign_changes(const Curve& star,
                                        std::span<const double> u,
                                        std::span<const double> abs_z, double g,
                                        const SignChangeConfig& cfg) {
    std::vector<double> tau;
    for (const SignChange& c : detect_sign_changes_detailed(star, u, abs_z, g, cfg))
        tau.push_back(c.tau);
    return tau;
}

DistortionFit assemble_general(const std::vector<Curve>& star_segments,
                               std::span<const double> tau,
                               std::span<const double> u,
                               std::span<const double> grid) {
    const std::size_t n_seg = tau.size() + 1;
    if (star_segments.size() != n_seg)
        throw DegenerateSample("segment count does not match tau count");

    for (std::size_t j = 0; j < n_seg; ++j) {
        std::size_t count = 0;
        for (double ui : u)
            if (segment_of(ui, tau) == j) ++count;
        if (count < 5)
            throw EmptySegment("segment " + std::to_string(j) + " has " +
                               std::to_string(count) + " sample points");
    }

    // Restrict each segment curve to its own interval so interpolation
    // never leaks across a sign change.
    std::vector<Curve> restricted(n_seg);
    for (std::size_t j = 0; j < n_seg; ++j) {
        Curve c = star_segments[j];
        bool any = false;
        for (std::size_t gidx = 0; gidx < c.size(); ++gidx) {
            if (segment_of(c.grid[gidx], tau) != j) c.valid_mask[gidx] = false;
            any = any || c.valid_mask[gidx];
        }
        if (!any)
            throw EmptySegment("segment " + std::to_string(j) +
                               " has no valid grid point");
        restricted[j] = std::move(c);
    }

    DistortionFit fit;
    fit.method = DistortionMethod::General;
    fit.tau.assign(tau.begin(), tau.end());
    fit.curve.grid.assign(grid.begin(), grid.end());
    fit.curve.values.resize(grid.size());
    fit.curve.valid_mask.assign(grid.size(), true);
    for (std::size_t gidx = 0; gidx < grid.size(); ++gidx) {
        const std::size_t j = segment_of(grid[gidx], tau);
        const double sign = (j % 2 == 0) ? 1.0 : -1.0;
        fit.curve.values[gidx] = sign * restricted[j].interpolate(grid[gidx]);
    }
    fit.at_sample.resize(u.size());
    for (std::size_t i = 0; i < u.size(); ++i) {
        const std::size_t j = segment_of(u[i], tau);
        const double sign = (j % 2 == 0) ? 1.0 : -1.0;
        fit.at_sample[i] = sign * restricted[j].interpolate(u[i]);
    }

    const double mean = mean_of(fit.at_sample);
    if (mean == 0.0) throw ZeroMeanDistortion("assembled curve sums to zero");
    fit.orientation = mean > 0 ? 1.0 : -1.0;
    fit.scale = std::abs(mean);
    for (double& v : fit.curve.values) v /= mean;
    for (double& v : fit.at_sample) v /= mean;
    return fit;
}

DistortionFit estimate_distortion(const DistortedSample& sample,
                                  DistortionTarget target,
                                  DistortionMethod method, double g,
                                  std::span<const double> grid,
                                  const SignChangeConfig& cfg) {
    std::span<const double> z = target == DistortionTarget::X
                                    ? std::span<const double>(sample.x_tilde)
                                    : std::span<const double>(sample.y_tilde);
    std::vector<double> default_grid;
    if (grid.empty()) {
        default_grid = default_distortion_grid(sample.u);
        grid = default_grid;
    }

    switch (method) {
        case DistortionMethod::Basic:
            return estimate_basic(sample.u, z, g, grid);
        case DistortionMethod::Signed:
            return estimate_signed(sample.u, z, g, grid);
        case DistortionMethod::General:
            break;
    }

    std::vector<double> abs_z(z.begin(), z.end());
    for (double& v : abs_z) v = std::abs(v);

    // Detection runs on the 201-point default grid even if the caller
    // asked for a coarser output grid.
    std::vector<double> det_grid = default_distortion_grid(sample.u);
    const Curve star = estimate_abs_curve(sample.u, z, g, det_grid);
    const std::vector<double> tau = detect_sign_changes(star, sample.u, abs_z, g, cfg);

    std::vector<Curve> segments(tau.size() + 1);
    for (std::size_t j = 0; j < segments.size(); ++j) {
        std::vector<double> su, sz;
        for (std::size_t i = 0; i < sample.n(); ++i) {
            if (segment_of(sample.u[i], tau) == j) {
                su.push_back(sample.u[i]);
                sz.push_back(abs_z[i]);
            }
        }
        if (su.size() < 5)
            throw EmptySegment("segment " + std::to_string(j) + " has " +
                               std::to_string(su.size()) + " sample points");
        try {
            segments[j] = SortedDesign(su, sz).fit_on(grid, 1, g);
        } catch (const AllPointsIllPosed&) {
            throw EmptySegment("segment " + std::to_string(j) + " fit ill-posed");
        }
    }
    return assemble_general(segments, tau, sample.u, grid);
}

}  // namespace car
