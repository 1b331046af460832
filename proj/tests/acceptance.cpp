// Acceptance suite: one line per criterion, nonzero exit when any fails.
#include <cmath>
#include <cstdio>
#include <string>
#include <vector>

#include "car/additive.hpp"
#include "car/bandwidth.hpp"
#include "car/distortion.hpp"
#include "car/errors.hpp"
#include "car/kernel.hpp"
#include "car/local_poly.hpp"
#include "car/rng.hpp"
#include "car/simulate.hpp"

using namespace car;

namespace {

int failures_total = 0;

void report(int number, const std::string& name, bool pass,
            const std::string& detail) {
    std::printf("%s  criterion %d (%s): %s\n", pass ? "PASS" : "FAIL", number,
                name.c_str(), detail.c_str());
    if (!pass) ++failures_total;
    std::fflush(stdout);
}

double median_of(const StudySummary& s, EstimatorMethod m) {
    for (const StudyRow& row : s.rows)
        if (row.method == m) return row.median;
    return std::numeric_limits<double>::quiet_NaN();
}

void criterion1() {
    const StudySummary s = run_study(
        model_by_id("i.a"), 200, 500, 7,
        {EstimatorMethod::Oracle, EstimatorMethod::New1, EstimatorMethod::Naive},
        {});
    // Reference quartile bands widened by half their width on each side.
    struct Band {
        EstimatorMethod m;
        double lo, hi;
    };
    const std::vector<Band> bands = {
        {EstimatorMethod::Oracle, 4.0 - 1.5, 7.0 + 1.5},
        {EstimatorMethod::New1, 6.0 - 2.5, 11.0 + 2.5},
        {EstimatorMethod::Naive, 52.0 - 12.5, 77.0 + 12.5},
    };
    bool pass = true;
    char detail[256];
    std::string msg;
    for (const Band& b : bands) {
        const double med = median_of(s, b.m);
        pass = pass && med >= b.lo && med <= b.hi;
        std::snprintf(detail, sizeof(detail), "%s=%.2f in [%.1f,%.1f] ",
                      method_name(b.m).c_str(), med, b.lo, b.hi);
        msg += detail;
    }
    report(1, "quartile bands, model i.a n=200", pass, msg);
}

void criterion2() {
    bool pass = true;
    std::string msg;
    char buf[160];
    for (const char* id : {"i.a", "ii.a", "iii.a"}) {
        const StudySummary s = run_study(
            model_by_id(id), 200, 500, 7,
            {EstimatorMethod::Oracle, EstimatorMethod::New1,
             EstimatorMethod::Naive, EstimatorMethod::New2},
            {});
        const double o = median_of(s, EstimatorMethod::Oracle);
        const double n1 = median_of(s, EstimatorMethod::New1);
        const double n2 = median_of(s, EstimatorMethod::New2);
        const double nv = median_of(s, EstimatorMethod::Naive);
        const bool ok = o < n1 && n1 < nv && n1 < n2;
        pass = pass && ok;
        std::snprintf(buf, sizeof(buf), "%s:%s ", id, ok ? "ok" : "BAD");
        msg += buf;
    }
    for (const char* id : {"i.c", "ii.c", "iii.c"}) {
        const StudySummary s = run_study(
            model_by_id(id), 500, 500, 7,
            {EstimatorMethod::New3, EstimatorMethod::New2, EstimatorMethod::Naive},
            {});
        const double n3 = median_of(s, EstimatorMethod::New3);
        const double n2 = median_of(s, EstimatorMethod::New2);
        const double nv = median_of(s, EstimatorMethod::Naive);
        const bool ok = n3 < n2 && n2 < nv;
        pass = pass && ok;
        std::snprintf(buf, sizeof(buf), "%s:%s ", id, ok ? "ok" : "BAD");
        msg += buf;
    }
    report(2, "method orderings", pass, msg);
}

void criterion3() {
    const std::vector<EstimatorMethod> methods = {EstimatorMethod::Oracle,
                                                  EstimatorMethod::New1};
    const StudySummary small = run_study(model_by_id("i.a"), 100, 200, 7, methods, {});
    const StudySummary big = run_study(model_by_id("i.a"), 1000, 200, 7, methods, {});
    const double ro = median_of(big, EstimatorMethod::Oracle) /
                      median_of(small, EstimatorMethod::Oracle);
    const double r1 = median_of(big, EstimatorMethod::New1) /
                      median_of(small, EstimatorMethod::New1);
    char buf[128];
    std::snprintf(buf, sizeof(buf), "ratio ORACLE=%.3f NEW1=%.3f (need <= 0.25)",
                  ro, r1);
    report(3, "convergence rate n=100 vs n=1000", ro <= 0.25 && r1 <= 0.25, buf);
}

void criterion4() {
    bool pass = true;
    std::string worst_id = "-";
    double worst = 1e300;
    for (const SimModel& model : catalog()) {
        const StudySummary s =
            run_study(model, 1000, 200, 11,
                      {EstimatorMethod::Oracle, EstimatorMethod::Naive}, {});
        const double ratio = median_of(s, EstimatorMethod::Naive) /
                             median_of(s, EstimatorMethod::Oracle);
        if (ratio < worst) {
            worst = ratio;
            worst_id = model.id;
        }
        pass = pass && ratio >= 10.0;
    }
    char buf[128];
    std::snprintf(buf, sizeof(buf), "worst NAIVE/ORACLE ratio %.1f on %s (need >= 10)",
                  worst, worst_id.c_str());
    report(4, "naive inconsistency across the catalog", pass, buf);
}

std::vector<double> detect_for_rep(const SimModel& model, std::size_t n,
                                   std::uint64_t seed) {
    const GeneratedSample gen = generate_sample(model, n, seed);
    std::vector<double> abs_x = gen.obs.x_tilde;
    for (double& v : abs_x) v = std::abs(v);
    const double gpi = plugin_bandwidth(gen.obs.u, abs_x);
    const double g = std::pow(static_cast<double>(n), -0.1) * gpi;
    const std::vector<double> grid = default_distortion_grid(gen.obs.u);
    const Curve star = estimate_abs_curve(gen.obs.u, gen.obs.x_tilde, g, grid);
    return detect_sign_changes(star, gen.obs.u, abs_x, g);
}

void criterion5() {
    const std::size_t reps = 200;
    std::size_t both_found = 0;
    for (std::size_t r = 0; r < reps; ++r) {
        const std::vector<double> taus =
            detect_for_rep(model_by_id("iv.a"), 1000, Rng::derive(31, r));
        bool f02 = false, f06 = false;
        for (double t : taus) {
            f02 = f02 || std::abs(t - 0.2) <= 0.05;
            f06 = f06 || std::abs(t - 0.6) <= 0.05;
        }
        if (f02 && f06) ++both_found;
    }
    std::size_t clean = 0;
    for (std::size_t r = 0; r < reps; ++r)
        if (detect_for_rep(model_by_id("i.a"), 1000, Rng::derive(33, r)).empty())
            ++clean;
    char buf[160];
    std::snprintf(buf, sizeof(buf),
                  "both zeros found %.0f%% (need >= 85), clean on positive %.0f%% (need >= 80)",
                  100.0 * both_found / reps, 100.0 * clean / reps);
    report(5, "sign-change detection", both_found >= 170 && clean >= 160, buf);
}

void criterion6() {
    const std::vector<EstimatorMethod> methods = {
        EstimatorMethod::Oracle, EstimatorMethod::Naive, EstimatorMethod::New2};
    std::string csvs[3];
    const std::size_t workers[3] = {1, 4, 8};
    for (int i = 0; i < 3; ++i) {
        StudyConfig cfg;
        cfg.workers = workers[i];
        csvs[i] = study_csv(run_study(model_by_id("i.a"), 200, 60, 17, methods, cfg));
    }
    const bool pass = csvs[0] == csvs[1] && csvs[0] == csvs[2];
    report(6, "byte-identical output for 1/4/8 workers", pass,
           pass ? "identical" : "outputs differ");
}

// Brute-force WLS in the raw basis; independent of the production solver.
std::vector<double> brute_wls(const std::vector<double>& xs,
                              const std::vector<double>& ys, double x0,
                              int degree, double h, bool& ok) {
    const int p = degree + 1;
    std::vector<std::vector<double>> a(p, std::vector<double>(p, 0.0));
    std::vector<double> b(p, 0.0);
    KernelSpec k;
    int carriers = 0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        const double w = eval_kernel(k, (xs[i] - x0) / h);
        if (w <= 0.0) continue;
        ++carriers;
        std::vector<double> basis(p, 1.0);
        for (int j = 1; j < p; ++j) basis[j] = basis[j - 1] * (xs[i] - x0);
        for (int r = 0; r < p; ++r) {
            b[r] += w * basis[r] * ys[i];
            for (int c = 0; c < p; ++c) a[r][c] += w * basis[r] * basis[c];
        }
    }
    ok = carriers >= p;
    double max_diag = 0.0;
    for (int r = 0; r < p; ++r) max_diag = std::max(max_diag, a[r][r]);
    for (int col = 0; col < p && ok; ++col) {
        int piv = col;
        for (int r = col + 1; r < p; ++r)
            if (std::abs(a[r][col]) > std::abs(a[piv][col])) piv = r;
        std::swap(a[col], a[piv]);
        std::swap(b[col], b[piv]);
        // Ill-conditioned normal equations: rounding dominates both
        // solvers, so the instance carries no information. Skip it.
        if (std::abs(a[col][col]) < 1e-6 * max_diag) ok = false;
        for (int r = col + 1; r < p && ok; ++r) {
            const double f = a[r][col] / a[col][col];
            for (int c = col; c < p; ++c) a[r][c] -= f * a[col][c];
            b[r] -= f * b[col];
        }
    }
    std::vector<double> beta(p, 0.0);
    if (ok) {
        for (int r = p - 1; r >= 0; --r) {
            double acc = b[r];
            for (int c = r + 1; c < p; ++c) acc -= a[r][c] * beta[c];
            beta[r] = acc / a[r][r];
        }
        double fact = 1.0;
        for (int v = 0; v < p; ++v) {
            beta[v] *= fact;
            fact *= (v + 1);
        }
    }
    return beta;
}

void criterion7() {
    Rng rng(777);
    int compared = 0;
    double worst = 0.0;
    for (int trial = 0; trial < 1000; ++trial) {
        const std::size_t n = 6 + static_cast<std::size_t>(rng.uniform() * 15);
        std::vector<double> xs(n), ys(n);
        for (std::size_t i = 0; i < n; ++i) {
            xs[i] = rng.uniform() * 2.0 - 1.0;
            ys[i] = std::sin(2.0 * xs[i]) + rng.normal();
        }
        const int degree = static_cast<int>(rng.uniform() * 4.0);
        const double x0 = rng.uniform() * 2.0 - 1.0;
        const double h = 0.8 + rng.uniform();
        bool ok = true;
        const std::vector<double> want = brute_wls(xs, ys, x0, degree, h, ok);
        if (!ok) continue;
        LocalFit fit;
        try {
            fit = local_poly_fit(xs, ys, x0, degree, h);
        } catch (const Error&) {
            continue;  // near-singular instance both solvers refuse
        }
        ++compared;
        for (std::size_t v = 0; v < want.size(); ++v) {
            const double rel = std::abs(fit.coefficients[v] - want[v]) /
                               std::max(1.0, std::abs(want[v]));
            worst = std::max(worst, rel);
        }
    }
    char buf[128];
    std::snprintf(buf, sizeof(buf), "%d instances compared, worst relative error %.2e",
                  compared, worst);
    report(7, "smoothing oracle equivalence", compared >= 900 && worst < 1e-9, buf);
}

void criterion8() {
    KernelSpec k;
    const bool moments = std::abs(kernel_moment(k, 2) - 1.0 / 9.0) < 1e-10 &&
                         std::abs(kernel_sq_moment(k, 0) - 350.0 / 429.0) < 1e-10;

    AmiseInputs inp;
    inp.sigma2_hat = 0.7;
    inp.theta2_hat = 2.3;
    inp.omega_mass = 0.9;
    inp.n = 321;
    const double closed = amise_minimizer(inp);
    double best_g = 0.0, best = 1e300;
    for (int i = 1; i <= 2000000; ++i) {
        const double g = i * 1e-6;
        const double v = amise_w(inp, g);
        if (v < best) {
            best = v;
            best_g = g;
        }
    }
    const bool minimizer = std::abs(best_g - closed) / closed < 1e-5 &&
                           amise_w(inp, closed) <= best + 1e-14;

    Rng rng(888);
    double worst_mean = 0.0;
    for (int s = 0; s < 100; ++s) {
        const std::size_t n = 300 + static_cast<std::size_t>(rng.uniform() * 500);
        DistortedSample sample;
        const double shift = 0.3 + 0.4 * rng.uniform();
        for (std::size_t i = 0; i < n; ++i) {
            const double u = rng.uniform();
            sample.u.push_back(u);
            sample.x_tilde.push_back((u - shift) * (1.0 + 1.5 * rng.normal()));
            sample.y_tilde.push_back(sample.x_tilde.back());
        }
        const std::vector<double> grid = default_distortion_grid(sample.u);
        DistortionFit fit;
        try {
            fit = estimate_distortion(sample, DistortionTarget::X,
                                      DistortionMethod::General, 0.08, grid);
        } catch (const Error&) {
            continue;
        }
        double mean = 0.0;
        for (double v : fit.at_sample) mean += v;
        mean /= static_cast<double>(fit.at_sample.size());
        worst_mean = std::max(worst_mean, std::abs(mean - 1.0));
    }
    char buf[160];
    std::snprintf(buf, sizeof(buf),
                  "moments:%s minimizer:%s worst |mean-1| = %.2e (need < 1e-12)",
                  moments ? "ok" : "BAD", minimizer ? "ok" : "BAD", worst_mean);
    report(8, "analytic identities", moments && minimizer && worst_mean < 1e-12, buf);
}

void criterion9() {
    Rng rng(909);
    AdditiveSample s;
    s.d1 = 2;
    s.x_tilde.resize(2);
    for (int i = 0; i < 2000; ++i) {
        const double x1 = rng.uniform() * 2.0 - 1.0;
        const double x2 = rng.uniform() * 2.0 - 1.0;
        s.u.push_back(rng.uniform());
        s.x_tilde[0].push_back(x1);
        s.x_tilde[1].push_back(x2);
        s.y_tilde.push_back(1.0 + x1 + 2.0 * x2 + 0.1 * rng.normal());
    }
    s.d1 = 2;  // fully undistorted sample
    const AdditiveFit fit = backfit(s);
    const double s1 = (fit.components[0].interpolate(0.8) -
                       fit.components[0].interpolate(-0.8)) / 1.6;
    const double s2 = (fit.components[1].interpolate(0.8) -
                       fit.components[1].interpolate(-0.8)) / 1.6;
    const bool slopes =
        std::abs(s1 - 1.0) <= 0.1 && std::abs(s2 - 2.0) / 2.0 <= 0.1;

    std::size_t monotone = 0;
    for (int seed = 0; seed < 50; ++seed) {
        Rng r2(1000 + seed);
        AdditiveSample t;
        t.d1 = 0;
        t.x_tilde.resize(2);
        for (int i = 0; i < 400; ++i) {
            const double u = r2.uniform();
            const double x1 = 2.0 * r2.uniform();  // positive mean: signed
            const double x2 = 2.0 * r2.uniform();  // curves stay identified
            const double y = std::sin(2.0 * x1) + x2 * x2 + 0.2 * r2.normal();
            t.u.push_back(u);
            t.x_tilde[0].push_back((u + 0.4) / 0.9 * x1);
            t.x_tilde[1].push_back((u + 0.5) / 1.0 * x2);
            t.y_tilde.push_back((u + 0.6) / 1.1 * y);
        }
        AdditiveFit f;
        try {
            f = backfit(t);
        } catch (const Error&) {
            continue;
        }
        // Components enter the partial residuals through interpolation on
        // their 101-point grids, which injects O(spacing^2) wobble into the
        // training objective; monotone up to 1% relative covers it.
        bool ok = true;
        for (std::size_t i = 1; i < f.sweep_objectives.size(); ++i)
            ok = ok && f.sweep_objectives[i] <=
                           f.sweep_objectives[i - 1] * (1.0 + 1e-2);
        if (ok) ++monotone;
    }
    char buf[160];
    std::snprintf(buf, sizeof(buf),
                  "slopes %.3f / %.3f (targets 1, 2), monotone objective %zu/50",
                  s1, s2, monotone);
    report(9, "backfitting sanity", slopes && monotone == 50, buf);
}

}  // namespace

int main() {
    criterion1();
    criterion2();
    criterion3();
    criterion4();
    criterion5();
    criterion6();
    criterion7();
    criterion8();
    criterion9();
    if (failures_total == 0) {
        std::printf("all 9 acceptance criteria passed\n");
        return 0;
    }
    std::printf("%d acceptance criteria FAILED\n", failures_total);
    return 1;
}
