#include "car/additive.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "car/bandwidth.hpp"
#include "car/errors.hpp"
#include "car/predictors.hpp"

namespace car {

void AdditiveSample::validate() const {
    if (x_tilde.empty()) throw DegenerateDesign("additive sample needs d >= 1");
    if (d1 > d()) throw DegenerateDesign("d1 exceeds the column count");
    for (const auto& col : x_tilde)
        if (col.size() != n())
            throw DegenerateDesign("column length mismatch");
    if (y_tilde.size() != n()) throw DegenerateDesign("response length mismatch");
    if (n() < 20) throw TooFewPoints("additive backfit needs n >= 20");
}

double AdditiveFit::predict(const std::vector<double>& x) const {
    double out = m0_hat;
    for (std::size_t j = 0; j < components.size(); ++j)
        out += components[j].interpolate(x[j]);
    return out;
}

namespace {

struct Generated {
    std::vector<double> values;  // X^ (or Y^) at every index
    double rho = 0.0;
    const DistortionFit* fit = nullptr;
};

DistortionFit fit_column(std::span<const double> u, std::span<const double> z,
                         DistortionMethod method, double g,
                         std::span<const double> grid) {
    // General needs the full dispatch (sign-change detection); the other
    // two have direct entry points.
    if (method == DistortionMethod::General) {
        DistortedSample tmp;
        tmp.u.assign(u.begin(), u.end());
        tmp.x_tilde.assign(z.begin(), z.end());
        tmp.y_tilde.assign(z.begin(), z.end());
        return estimate_distortion(tmp, DistortionTarget::X, method, g, grid);
    }
    if (method == DistortionMethod::Basic)
        return estimate_basic(u, z, g, grid);
    return estimate_signed(u, z, g, grid);
}

}  // namespace

AdditiveFit backfit(const AdditiveSample& sample,
                    std::vector<DistortionMethod> per_variable_method,
                    const AdditiveConfig& config) {
    sample.validate();
    const std::size_t n = sample.n();
    const std::size_t d = sample.d();
    const std::size_t n_distorted = d - sample.d1;
    // d1 == d marks a fully undistorted sample: predictors are taken as
    // observed (response included) and no ridge trimming applies.
    const bool undistorted = n_distorted == 0;

    if (!undistorted && per_variable_method.empty())
        per_variable_method.assign(n_distorted + 1, DistortionMethod::Signed);
    if (per_variable_method.size() != (undistorted ? 0 : n_distorted + 1))
        throw ParseError("need one method per distorted column plus the response");

    const std::vector<double> dgrid = default_distortion_grid(sample.u);
    std::vector<DistortionFit> fits;  // distorted columns, then response
    fits.reserve(n_distorted + 1);
    std::vector<double> rhos;

    std::vector<std::vector<double>> x_hat(d);
    for (std::size_t j = 0; j < d; ++j) {
        if (j < sample.d1) {
            x_hat[j] = sample.x_tilde[j];
            continue;
        }
        const DistortionMethod method = per_variable_method[j - sample.d1];
        std::vector<double> pilot = sample.x_tilde[j];
        if (method == DistortionMethod::Basic)
            for (double& v : pilot) v = std::abs(v);
        const double gpi = plugin_bandwidth(sample.u, pilot);
        const double g = std::pow(static_cast<double>(n), -0.1) * gpi;
        fits.push_back(fit_column(sample.u, sample.x_tilde[j], method, g, dgrid));
        rhos.push_back(method == DistortionMethod::Basic
                           ? 0.0
                           : ridge_param_side(sample.u, sample.x_tilde[j],
                                              method == DistortionMethod::General
                                                  ? RidgeFlavor::Absolute
                                                  : RidgeFlavor::Signed,
                                              gpi));
        x_hat[j].resize(n);
        for (std::size_t i = 0; i < n; ++i)
            x_hat[j][i] = sample.x_tilde[j][i] / fits.back().at_sample[i];
    }

    std::vector<double> y_hat = sample.y_tilde;
    if (!undistorted) {
        const DistortionMethod y_method = per_variable_method.back();
        std::vector<double> pilot = sample.y_tilde;
        if (y_method == DistortionMethod::Basic)
            for (double& v : pilot) v = std::abs(v);
        const double gpi = plugin_bandwidth(sample.u, pilot);
        const double g = std::pow(static_cast<double>(n), -0.1) * gpi;
        fits.push_back(fit_column(sample.u, sample.y_tilde, y_method, g, dgrid));
        rhos.push_back(y_method == DistortionMethod::Basic
                           ? 0.0
                           : ridge_param_side(sample.u, sample.y_tilde,
                                              y_method == DistortionMethod::General
                                                  ? RidgeFlavor::Absolute
                                                  : RidgeFlavor::Signed,
                                              gpi));
        for (std::size_t i = 0; i < n; ++i)
            y_hat[i] = sample.y_tilde[i] / fits.back().at_sample[i];
    }

    // Ridge trimming set across all distorted variables, then the usual
    // low-density trim on U.
    std::vector<std::size_t> retained;
    for (std::size_t i = 0; i < n; ++i) {
        bool keep = std::isfinite(y_hat[i]);
        for (std::size_t j = 0; j < d && keep; ++j)
            keep = std::isfinite(x_hat[j][i]);
        for (std::size_t f = 0; f < fits.size() && keep; ++f)
            keep = fits[f].trim_stat(i) >= rhos[f];
        if (keep) retained.push_back(i);
    }
    if (retained.empty()) throw EmptyRetainedSet("nothing survives ridge trimming");

    const std::vector<std::size_t> trimmed = density_trim(sample.u, config.trim_fraction);
    std::vector<std::size_t> active;
    std::set_difference(retained.begin(), retained.end(), trimmed.begin(),
                        trimmed.end(), std::back_inserter(active));
    if (active.size() < 20) throw TooFewPoints("too few active points after trimming");
    const std::size_t na = active.size();

    std::vector<std::vector<double>> xa(d, std::vector<double>(na));
    std::vector<double> ya(na);
    for (std::size_t i = 0; i < na; ++i) {
        ya[i] = y_hat[active[i]];
        for (std::size_t j = 0; j < d; ++j) xa[j][i] = x_hat[j][active[i]];
    }

    AdditiveFit out;
    out.retained = active;
    out.m0_hat = std::accumulate(ya.begin(), ya.end(), 0.0) / static_cast<double>(na);
    out.bandwidths.assign(d, 0.0);
    out.components.resize(d);
    for (std::size_t j = 0; j < d; ++j) {
        const auto [lo, hi] = std::minmax_element(xa[j].begin(), xa[j].end());
        out.components[j].grid = linspace(*lo, *hi, config.grid_points);
        out.components[j].values.assign(config.grid_points, 0.0);
        out.components[j].valid_mask.assign(config.grid_points, true);
    }

    // comp_at[j][i]: current component j evaluated at X^_ij.
    std::vector<std::vector<double>> comp_at(d, std::vector<double>(na, 0.0));
    std::vector<double> resid(na);

    for (std::size_t iter = 1; iter <= config.max_iter; ++iter) {
        double max_change = 0.0;
        for (std::size_t j = 0; j < d; ++j) {
            for (std::size_t i = 0; i < na; ++i) {
                resid[i] = ya[i] - out.m0_hat;
                for (std::size_t k = 0; k < d; ++k)
                    if (k != j) resid[i] -= comp_at[k][i];
            }
            if (out.bandwidths[j] == 0.0)
                out.bandwidths[j] = plugin_bandwidth(xa[j], resid);
            Curve updated = fit_curve(xa[j], resid, out.components[j].grid, 1,
                                      out.bandwidths[j]);
            // Identifiability: shift the component to sample-mean zero and
            // move the mean into the intercept.
            double mean = 0.0;
            for (std::size_t i = 0; i < na; ++i)
                mean += updated.interpolate(xa[j][i]);
            mean /= static_cast<double>(na);
            for (double& v : updated.values) v -= mean;
            out.m0_hat += mean;

            double sup_change = 0.0, sup_new = 0.0;
            for (std::size_t gp = 0; gp < updated.size(); ++gp) {
                if (!updated.valid_mask[gp]) continue;
                sup_new = std::max(sup_new, std::abs(updated.values[gp]));
                sup_change = std::max(
                    sup_change, std::abs(updated.values[gp] -
                                         out.components[j].values[gp]));
            }
            max_change = std::max(max_change, sup_change / (1.0 + sup_new));
            out.components[j] = std::move(updated);
            for (std::size_t i = 0; i < na; ++i)
                comp_at[j][i] = out.components[j].interpolate(xa[j][i]);
        }
        out.iterations = iter;
        double rss = 0.0;
        for (std::size_t i = 0; i < na; ++i) {
            double e = ya[i] - out.m0_hat;
            for (std::size_t k = 0; k < d; ++k) e -= comp_at[k][i];
            rss += e * e;
        }
        out.sweep_objectives.push_back(rss);
        if (max_change < config.tol) {
            out.converged = true;
            break;
        }
    }
    return out;
}

}  // namespace car
