#include "car/bandwidth.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "car/errors.hpp"
#include "car/local_poly.hpp"

namespace car {

namespace {

double sample_range(std::span<const double> v) {
    auto [mn, mx] = std::minmax_element(v.begin(), v.end());
    return *mx - *mn;
}

double quantile_type7(std::vector<double> v, double p) {
    std::sort(v.begin(), v.end());
    const double idx = p * static_cast<double>(v.size() - 1);
    const std::size_t lo = static_cast<std::size_t>(idx);
    const std::size_t hi = std::min(lo + 1, v.size() - 1);
    const double frac = idx - static_cast<double>(lo);
    return v[lo] + frac * (v[hi] - v[lo]);
}

// Response values reordered as concomitants of sorted vs.
std::vector<double> concomitants(std::span<const double> vs,
                                 std::span<const double> zs) {
    std::vector<std::size_t> order(vs.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return vs[a] < vs[b]; });
    std::vector<double> out(zs.size());
    for (std::size_t i = 0; i < order.size(); ++i) out[i] = zs[order[i]];
    return out;
}

// theta2_hat that widens the pilot bandwidth when every weighted point is
// ill-posed (sparse designs).
double robust_theta2(std::span<const double> vs, std::span<const double> zs,
                     double h2, const std::vector<bool>& omega, double v_range) {
    for (;;) {
        try {
            return theta2_hat(vs, zs, h2, omega);
        } catch (const AllPointsExcluded&) {
            if (h2 >= v_range) throw;
            h2 = std::min(2.0 * h2, v_range);
        }
    }
}

struct PluginIngredients {
    double sigma2 = 0.0;
    double theta2 = 0.0;
    double omega_mass = 0.0;
    double v_range = 0.0;
};

}  // namespace

double diff_variance(std::span<const double> zs_ordered_by_v) {
    const std::size_t n = zs_ordered_by_v.size();
    if (n < 2) throw TooFewPoints("diff_variance needs n >= 2");
    double sum = 0.0;
    for (std::size_t i = 0; i + 1 < n; ++i) {
        const double d = zs_ordered_by_v[i + 1] - zs_ordered_by_v[i];
        sum += d * d;
    }
    return sum / (2.0 * static_cast<double>(n - 1));
}

double theta2_hat(std::span<const double> vs, std::span<const double> zs,
                  double h2, const std::vector<bool>& omega) {
    if (vs.size() != zs.size() || vs.size() != omega.size())
        throw DegenerateSample("length mismatch");
    if (!(h2 > 0.0)) throw DegenerateSample("h2 must be positive");
    SortedDesign design(vs, zs);
    double sum = 0.0;
    std::size_t used = 0;
    bool any_weighted = false;
    for (std::size_t i = 0; i < vs.size(); ++i) {
        if (!omega[i]) continue;
        any_weighted = true;
        try {
            const LocalFit fit = design.fit_at(vs[i], 3, h2);
            const double d2 = fit.coefficients[2];
            sum += d2 * d2;
            ++used;
        } catch (const IllPosedFit&) {
        }
    }
    if (!any_weighted) throw AllPointsExcluded("omega is identically 0");
    if (used == 0) throw AllPointsExcluded("all weighted points ill-posed");
    return sum / static_cast<double>(vs.size());
}

double amise_w(const AmiseInputs& inp, double g) {
    const double mu2 = kernel_moment(inp.kernel, 2);
    const double nu0 = kernel_sq_moment(inp.kernel, 0);
    return mu2 * mu2 * g * g * g * g / 4.0 * inp.theta2_hat +
           nu0 / (static_cast<double>(inp.n) * g) * inp.sigma2_hat * inp.omega_mass;
}

double amise_minimizer(const AmiseInputs& inp) {
    const double mu2 = kernel_moment(inp.kernel, 2);
    const double nu0 = kernel_sq_moment(inp.kernel, 0);
    return std::pow(nu0 * inp.sigma2_hat * inp.omega_mass /
                        (static_cast<double>(inp.n) * mu2 * mu2 * inp.theta2_hat),
                    0.2);
}

namespace detail {

double quartic_pilot_theta2(std::span<const double> vs, std::span<const double> zs,
                            const std::vector<bool>& omega) {
    const std::size_t n = vs.size();
    const double mean = std::accumulate(vs.begin(), vs.end(), 0.0) / n;
    double ss = 0.0;
    for (double v : vs) ss += (v - mean) * (v - mean);
    const double sd = std::sqrt(ss / n);
    if (sd == 0.0) return 0.0;

    // Normal equations for z ~ poly(t, 4), t = (v - mean)/sd.
    double sm[9] = {0};
    double tm[5] = {0};
    for (std::size_t i = 0; i < n; ++i) {
        const double t = (vs[i] - mean) / sd;
        double p = 1.0;
        for (int m = 0; m <= 8; ++m) {
            sm[m] += p;
            if (m <= 4) tm[m] += p * zs[i];
            p *= t;
        }
    }
    std::vector<double> a(25);
    std::vector<double> b(5);
    for (int r = 0; r < 5; ++r) {
        for (int c = 0; c < 5; ++c) a[r * 5 + c] = sm[r + c];
        b[r] = tm[r];
    }
    // Tiny dense solve (partial pivoting).
    for (int col = 0; col < 5; ++col) {
        int piv = col;
        for (int r = col + 1; r < 5; ++r)
            if (std::abs(a[r * 5 + col]) > std::abs(a[piv * 5 + col])) piv = r;
        if (std::abs(a[piv * 5 + col]) < 1e-12 * sm[0]) return 0.0;
        for (int c = 0; c < 5; ++c) std::swap(a[col * 5 + c], a[piv * 5 + c]);
        std::swap(b[col], b[piv]);
        for (int r = col + 1; r < 5; ++r) {
            const double f = a[r * 5 + col] / a[col * 5 + col];
            for (int c = col; c < 5; ++c) a[r * 5 + c] -= f * a[col * 5 + c];
            b[r] -= f * b[col];
        }
    }
    for (int r = 4; r >= 0; --r) {
        for (int c = r + 1; c < 5; ++c) b[r] -= a[r * 5 + c] * b[c];
        b[r] /= a[r * 5 + r];
    }

    double sum = 0.0;
    std::size_t count = 0;
    for (std::size_t i = 0; i < n; ++i) {
        if (!omega[i]) continue;
        const double t = (vs[i] - mean) / sd;
        const double d2 = (2.0 * b[2] + 6.0 * b[3] * t + 12.0 * b[4] * t * t) / (sd * sd);
        sum += d2 * d2;
        ++count;
    }
    return count ? sum / static_cast<double>(n) : 0.0;
}

double bandwidth_from_amise(double sigma2, double theta2, double omega_mass,
                            std::size_t n, double v_range) {
    if (theta2 <= 1e-8 * sigma2 || theta2 <= 0.0) return 0.5 * v_range;
    AmiseInputs inp;
    inp.sigma2_hat = sigma2;
    inp.theta2_hat = theta2;
    inp.omega_mass = omega_mass;
    inp.n = n;
    double g = amise_minimizer(inp);
    // Floor guards the noiseless case (sigma2 ~ 0 gives g* -> 0).
    g = std::max(g, 1e-3 * v_range);
    return std::min(g, v_range);
}

}  // namespace detail

double plugin_bandwidth(std::span<const double> vs, std::span<const double> zs) {
    const std::size_t n = vs.size();
    if (n < 20) throw TooFewPoints("plugin_bandwidth needs n >= 20");
    if (vs.size() != zs.size()) throw DegenerateSample("length mismatch");
    const double range = sample_range(vs);
    if (range == 0.0) throw DegenerateDesign("var(vs) = 0");

    const double sigma2 = diff_variance(concomitants(vs, zs));

    // omega restricts to the inner 90% of the v-range.
    const double vmin = *std::min_element(vs.begin(), vs.end());
    const double lo = vmin + 0.05 * range, hi = vmin + 0.95 * range;
    std::vector<bool> omega(n);
    for (std::size_t i = 0; i < n; ++i) omega[i] = vs[i] >= lo && vs[i] <= hi;
    const double omega_mass = 0.9 * range;

    // Pilot bandwidth: rule-of-thumb curvature from a global quartic fit,
    // inflated by n^{2/35} to move from the n^{-1/5} to the n^{-1/7} scale
    // appropriate for second-derivative estimation.
    const double theta2_rot = detail::quartic_pilot_theta2(vs, zs, omega);
    double h2 = detail::bandwidth_from_amise(sigma2, theta2_rot, omega_mass, n, range) *
                std::pow(static_cast<double>(n), 2.0 / 35.0);
    h2 = std::clamp(h2, 1e-3 * range, range);

    const double theta2 = robust_theta2(vs, zs, h2, omega, range);
    return detail::bandwidth_from_amise(sigma2, theta2, omega_mass, n, range);
}

double ridge_param_side(std::span<const double> u, std::span<const double> z_raw,
                        RidgeFlavor flavor, double gpi) {
    const std::size_t n = u.size();
    if (n < 20) throw TooFewPoints("ridge_param_side needs n >= 20");
    const double u_range = sample_range(u);

    std::vector<double> z(z_raw.begin(), z_raw.end());
    if (flavor == RidgeFlavor::Absolute)
        for (double& v : z) v = std::abs(v);

    SortedDesign design(u, z);
    std::vector<double> at_sample(n);
    std::vector<bool> usable(n, false);
    std::vector<double> abs_vals;
    for (std::size_t i = 0; i < n; ++i) {
        try {
            at_sample[i] = design.fit_at(u[i], 1, gpi).coefficients[0];
            usable[i] = true;
            abs_vals.push_back(std::abs(at_sample[i]));
        } catch (const IllPosedFit&) {
        }
    }
    if (abs_vals.empty()) throw AllPointsExcluded("distortion curve ill-posed everywhere");
    const double q = quantile_type7(abs_vals, 0.2);

    std::vector<bool> omega(n, false);
    std::size_t count = 0;
    for (std::size_t i = 0; i < n; ++i) {
        omega[i] = usable[i] && std::abs(at_sample[i]) <= q;
        count += omega[i];
    }

    AmiseInputs inp;
    inp.sigma2_hat = diff_variance(concomitants(u, z));
    inp.omega_mass = static_cast<double>(count) / static_cast<double>(n) * u_range;
    inp.n = n;

    const double theta2_rot = detail::quartic_pilot_theta2(u, z, omega);
    double h2 = detail::bandwidth_from_amise(inp.sigma2_hat, theta2_rot,
                                             inp.omega_mass, n, u_range) *
                std::pow(static_cast<double>(n), 2.0 / 35.0);
    h2 = std::clamp(h2, 1e-3 * u_range, u_range);
    inp.theta2_hat = robust_theta2(u, z, h2, omega, u_range);

    return std::max(0.1, std::sqrt(amise_w(inp, gpi)));
}

RidgePair ridge_params(const DistortedSample& sample, RidgeFlavor flavor,
                       double g1pi, double g2pi) {
    if (sample.n() < 20) throw TooFewPoints("ridge_params needs n >= 20");
    RidgePair out;
    out.rho1 = ridge_param_side(sample.u, sample.x_tilde, flavor, g1pi);
    out.rho2 = ridge_param_side(sample.u, sample.y_tilde, flavor, g2pi);
    return out;
}

}  // namespace car
