#include "car/simulate.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <thread>

#include "car/bandwidth.hpp"
#include "car/errors.hpp"
#include "car/kernel.hpp"

namespace car {

namespace {

double normal_pdf(double x, double mu, double sd) {
    const double t = (x - mu) / sd;
    return std::exp(-0.5 * t * t) / (sd * std::sqrt(2.0 * M_PI));
}

double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::sqrt(2.0)); }

// Quantile by bisection on the exact CDF; only evaluated a handful of
// times per study, so no closed-form approximation is needed.
double bisect_quantile(const std::function<double(double)>& cdf, double p,
                       double lo, double hi) {
    for (int i = 0; i < 200; ++i) {
        const double mid = 0.5 * (lo + hi);
        (cdf(mid) < p ? lo : hi) = mid;
    }
    return 0.5 * (lo + hi);
}

// chi-square(4) CDF has the closed form 1 - e^{-x/2}(1 + x/2).
double chisq4_cdf(double x) {
    if (x <= 0.0) return 0.0;
    return 1.0 - std::exp(-0.5 * x) * (1.0 + 0.5 * x);
}

double quantile_type7(std::vector<double> v, double p) {
    std::sort(v.begin(), v.end());
    const double idx = p * static_cast<double>(v.size() - 1);
    const std::size_t lo = static_cast<std::size_t>(idx);
    const std::size_t hi = std::min(lo + 1, v.size() - 1);
    return v[lo] + (idx - lo) * (v[hi] - v[lo]);
}

}  // namespace

double m1_curve(double x) {
    const double t = x - 1.0;
    const double sign = t > 0.0 ? 1.0 : (t < 0.0 ? -1.0 : 0.0);
    return std::sin(M_PI * t / 2.0) / (1.0 + 2.0 * t * t * (sign + 1.0));
}

double m2_curve(double x) { return x * x * normal_pdf(x, 0.0, 1.0); }

double m3_curve(double x) { return 2.0 * x + normal_pdf(x, 0.5, 0.1); }

double XDist::draw(Rng& rng) const {
    if (kind == Kind::Normal) return mu + sigma * rng.normal();
    return scale * (rng.chisq(df) + shift);
}

double XDist::quantile(double p) const {
    if (kind == Kind::Normal) {
        const double z = bisect_quantile(normal_cdf, p, -40.0, 40.0);
        return mu + sigma * z;
    }
    if (df != 4.0) throw DegenerateSample("only chi-square(4) is supported");
    const double q = bisect_quantile(chisq4_cdf, p, 0.0, 1000.0);
    return scale * (q + shift);
}

double BetaDist::pdf(double u) const {
    if (u <= 0.0 || u >= 1.0) return 0.0;
    const double lbeta = std::lgamma(a) + std::lgamma(b) - std::lgamma(a + b);
    return std::exp((a - 1.0) * std::log(u) + (b - 1.0) * std::log(1.0 - u) - lbeta);
}

double BetaDist::draw(Rng& rng) const { return rng.beta(a, b); }

double normalizing_constant(const std::function<double(double)>& phi_raw,
                            const BetaDist& u_dist) {
    const QuadratureRule& rule = gauss_legendre(128);
    double mean = 0.0;
    for (std::size_t i = 0; i < rule.nodes.size(); ++i) {
        const double u = 0.5 * (rule.nodes[i] + 1.0);  // map [-1,1] -> [0,1]
        mean += 0.5 * rule.weights[i] * phi_raw(u) * u_dist.pdf(u);
    }
    if (std::abs(mean) < 1e-10)
        throw ZeroMeanDistortion("E{phi_raw(U)} is numerically zero");
    return 1.0 / mean;
}

namespace {

std::vector<SimModel> build_catalog() {
    std::vector<SimModel> models;

    const auto quad_phi = [](double u) { return (u + 0.25) * (u + 0.25); };
    const auto quad_psi = [](double u) { return (u + 0.5) * (u + 0.5); };
    const auto osc = [](double u) { return m1_curve(5.0 * u - 2.0); };

    const BetaDist beta25{2.0, 5.0};
    const BetaDist beta35{3.0, 5.0};

    struct Design {
        std::string id;
        std::function<double(double)> m;
        std::function<double(double)> sigma;
        XDist x;
        bool oscillating;  // phi=psi=c*m1(5u-2) with U~Beta(3,5)
        bool new1_ok, new2_ok;
    };

    const auto constant = [](double s) {
        return [s](double) { return s; };
    };
    const auto hetero = [](double s) {
        return [s](double x) { return s * std::sqrt(1.0 + x * x); };
    };
    const XDist n_1_15{XDist::Kind::Normal, 1.0, 1.5};
    const XDist n_05_075{XDist::Kind::Normal, 0.5, 0.75};
    const XDist n_2_15{XDist::Kind::Normal, 2.0, 1.5};
    const XDist n_15_075{XDist::Kind::Normal, 1.5, 0.75};
    const XDist n_0_15{XDist::Kind::Normal, 0.0, 1.5};
    const XDist n_0_075{XDist::Kind::Normal, 0.0, 0.75};
    XDist chi_half{XDist::Kind::ScaledShiftedChiSq};
    chi_half.df = 4.0; chi_half.shift = -4.0; chi_half.scale = 0.5;
    XDist chi_35 = chi_half;
    chi_35.scale = 1.0 / 3.5;

    const auto m1s = [](double s) { return [s](double x) { return m1_curve(x - s); }; };
    const auto m2s = [](double s) { return [s](double x) { return m2_curve(x - s); }; };
    const auto m3s = [](double s) { return [s](double x) { return m3_curve(x - s); }; };

    std::vector<Design> designs = {
        {"i.a", m1s(0.0), constant(0.3), n_1_15, false, true, true},
        {"ii.a", m2s(0.0), constant(0.05), n_1_15, false, true, true},
        {"iii.a", m3s(0.0), constant(0.55), n_05_075, false, true, true},
        {"i.b", [](double x) { return m1_curve(x - 1.0) + 2.0; }, constant(0.3),
         n_2_15, false, true, true},
        {"ii.b", m2s(1.0), constant(0.05), n_2_15, false, true, true},
        {"iii.b", m3s(1.0), constant(0.55), n_15_075, false, true, true},
        {"i.c", m1s(0.0), constant(0.3), n_1_15, true, false, true},
        {"ii.c", m2s(0.0), constant(0.05), n_1_15, true, false, true},
        {"iii.c", m3s(0.0), constant(0.55), n_05_075, true, false, true},
        {"i.d", [](double x) { return m1_curve(x - 1.0) + 2.0; }, constant(0.3),
         n_2_15, true, false, true},
        {"ii.d", m2s(1.0), constant(0.05), n_2_15, true, false, true},
        {"iii.d", m3s(1.0), constant(0.55), n_15_075, true, false, true},
        {"iv.a", m1s(-1.0), constant(0.3), n_0_15, true, false, false},
        {"v.a", m2s(-1.0), constant(0.05), n_0_15, true, false, false},
        {"vi.a", m3s(-0.5), constant(0.55), n_0_075, true, false, false},
        {"iv.b", m1s(0.0), constant(0.3), chi_half, true, false, false},
        {"v.b", m2s(0.0), constant(0.05), chi_half, true, false, false},
        {"vi.b", m3s(0.0), constant(0.55), chi_35, true, false, false},
        {"iv.c", m1s(-1.0), hetero(0.15), n_0_15, true, false, false},
        {"v.c", m2s(-1.0), hetero(0.025), n_0_15, true, false, false},
        {"vi.c", m3s(-0.5), hetero(0.275), n_0_075, true, false, false},
    };

    for (Design& d : designs) {
        SimModel model;
        model.id = d.id;
        model.m = std::move(d.m);
        model.sigma = std::move(d.sigma);
        model.x_dist = d.x;
        model.new1_ok = d.new1_ok;
        model.new2_ok = d.new2_ok;
        if (d.oscillating) {
            model.u_dist = beta35;
            model.phi_raw = osc;
            model.psi_raw = osc;
        } else {
            model.u_dist = beta25;
            model.phi_raw = quad_phi;
            model.psi_raw = quad_psi;
        }
        model.c_phi = normalizing_constant(model.phi_raw, model.u_dist);
        model.c_psi = normalizing_constant(model.psi_raw, model.u_dist);
        models.push_back(std::move(model));
    }
    return models;
}

}  // namespace

const std::vector<SimModel>& catalog() {
    static const std::vector<SimModel> models = build_catalog();
    return models;
}

const SimModel& model_by_id(const std::string& id) {
    for (const SimModel& m : catalog())
        if (m.id == id) return m;
    throw ParseError("unknown model id: " + id);
}

GeneratedSample generate_sample(const SimModel& model, std::size_t n,
                                std::uint64_t seed) {
    Rng rng(seed);
    GeneratedSample out;
    out.obs.u.resize(n);
    out.obs.x_tilde.resize(n);
    out.obs.y_tilde.resize(n);
    out.x.resize(n);
    out.y.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        const double u = model.u_dist.draw(rng);
        const double x = model.x_dist.draw(rng);
        const double eps = rng.normal();
        const double y = model.m(x) + model.sigma(x) * eps;
        out.obs.u[i] = u;
        out.x[i] = x;
        out.y[i] = y;
        out.obs.x_tilde[i] = model.phi(u) * x;
        out.obs.y_tilde[i] = model.psi(u) * y;
    }
    return out;
}

std::string method_name(EstimatorMethod m) {
    switch (m) {
        case EstimatorMethod::Oracle: return "ORACLE";
        case EstimatorMethod::Naive: return "NAIVE";
        case EstimatorMethod::New1: return "NEW1";
        case EstimatorMethod::New2: return "NEW2";
        case EstimatorMethod::New3: return "NEW3";
    }
    return "?";
}

StudySummary run_study(const SimModel& model, std::size_t n, std::size_t reps,
                       std::uint64_t seed, std::vector<EstimatorMethod> methods,
                       const StudyConfig& config) {
    for (EstimatorMethod m : methods) {
        if (m == EstimatorMethod::New1 && !model.new1_ok)
            throw MethodInapplicable("NEW1 needs strictly positive distortions (" +
                                     model.id + ")");
        if (m == EstimatorMethod::New2 && !model.new2_ok)
            throw MethodInapplicable("NEW2 needs EX, EY away from zero (" +
                                     model.id + ")");
    }

    const double a = model.x_dist.quantile(0.025);
    const double b = model.x_dist.quantile(0.975);
    const std::vector<double> grid = linspace(a, b, config.grid_points);

    // results[m][r]: 100*ISE, NaN = failed replication. Indexed by rep so
    // the outcome does not depend on the worker count.
    std::vector<std::vector<double>> results(
        methods.size(), std::vector<double>(reps, std::numeric_limits<double>::quiet_NaN()));

    std::atomic<std::size_t> next_rep{0};
    auto worker = [&] {
        for (;;) {
            const std::size_t r = next_rep.fetch_add(1);
            if (r >= reps) return;
            const GeneratedSample gen =
                generate_sample(model, n, Rng::derive(seed, r));
            for (std::size_t mi = 0; mi < methods.size(); ++mi) {
                try {
                    RegressionFit fit;
                    if (methods[mi] == EstimatorMethod::Oracle) {
                        const double h = plugin_bandwidth(gen.x, gen.y);
                        fit = fit_oracle(gen.x, gen.y, grid, h, config.degree);
                    } else {
                        PipelineOptions opts;
                        opts.degree = config.degree;
                        fit = run_pipeline(gen.obs, methods[mi], grid, opts).fit;
                    }
                    results[mi][r] = 100.0 * ise(fit, model.m, a, b);
                } catch (const Error&) {
                }
            }
        }
    };

    std::size_t workers = config.workers;
    if (workers == 0) workers = std::max(1u, std::thread::hardware_concurrency());
    workers = std::min(workers, reps);
    std::vector<std::thread> pool;
    for (std::size_t w = 1; w < workers; ++w) pool.emplace_back(worker);
    worker();
    for (std::thread& t : pool) t.join();

    StudySummary summary;
    summary.model_id = model.id;
    summary.n = n;
    summary.reps = reps;
    summary.seed = seed;
    for (std::size_t mi = 0; mi < methods.size(); ++mi) {
        StudyRow row;
        row.method = methods[mi];
        std::vector<double> ok;
        for (double v : results[mi])
            if (std::isfinite(v)) ok.push_back(v);
        row.failures = reps - ok.size();
        if (!ok.empty()) {
            row.q1 = quantile_type7(ok, 0.25);
            row.median = quantile_type7(ok, 0.5);
            row.q3 = quantile_type7(ok, 0.75);
        } else {
            row.q1 = row.median = row.q3 = std::numeric_limits<double>::quiet_NaN();
        }
        summary.rows.push_back(row);
    }
    return summary;
}

std::string study_csv(const StudySummary& s) {
    std::string out = "model,n,method,q1,median,q3,failures,reps,seed\n";
    char buf[256];
    for (const StudyRow& row : s.rows) {
        std::snprintf(buf, sizeof(buf), "%s,%zu,%s,%.17g,%.17g,%.17g,%zu,%zu,%llu\n",
                      s.model_id.c_str(), s.n, method_name(row.method).c_str(),
                      row.q1, row.median, row.q3, row.failures, s.reps,
                      static_cast<unsigned long long>(s.seed));
        out += buf;
    }
    return out;
}

}  // namespace car
