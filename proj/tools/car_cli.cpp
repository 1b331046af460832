#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <numeric>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "car/additive.hpp"
#include "car/csv.hpp"
#include "car/errors.hpp"
#include "car/pipeline.hpp"
#include "car/simulate.hpp"

namespace {

constexpr int kExitParse = 2;
constexpr int kExitEstimation = 3;
constexpr int kExitInapplicable = 4;

struct Options {
    std::string input, output, method = "auto", model;
    std::size_t n = 200, reps = 1000, seed = 1, workers = 0, d1 = 0;
    int grid_points = 101;
    double trim = 0.05;
    std::optional<double> g1, g2, h, rho1, rho2, grid_min, grid_max;
    std::string methods;  // comma list for simulate
};

void emit(const Options& opt, const std::string& text) {
    if (opt.output.empty()) {
        std::cout << text;
        return;
    }
    std::ofstream out(opt.output);
    out << text;
    if (!out) throw car::ParseError("cannot write " + opt.output);
}

double mean_of(const std::vector<double>& v) {
    return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

double sd_of(const std::vector<double>& v) {
    const double m = mean_of(v);
    double s = 0.0;
    for (double x : v) s += (x - m) * (x - m);
    return std::sqrt(s / static_cast<double>(v.size() - 1));
}

car::EstimatorMethod parse_method(const std::string& name) {
    if (name == "new1") return car::EstimatorMethod::New1;
    if (name == "new2") return car::EstimatorMethod::New2;
    if (name == "new3") return car::EstimatorMethod::New3;
    if (name == "naive") return car::EstimatorMethod::Naive;
    if (name == "oracle") return car::EstimatorMethod::Oracle;
    throw car::ParseError("unknown method '" + name + "'");
}

std::vector<double> fit_grid(const Options& opt, const std::vector<double>& x) {
    const auto [lo, hi] = std::minmax_element(x.begin(), x.end());
    const double a = opt.grid_min.value_or(*lo);
    const double b = opt.grid_max.value_or(*hi);
    if (!(a < b)) throw car::ParseError("empty grid range");
    return car::linspace(a, b, static_cast<std::size_t>(opt.grid_points));
}

int cmd_fit_additive(const Options& opt) {
    car::AdditiveSample sample = car::read_additive_csv(opt.input, opt.d1);
    if (car::rescale_u(sample.u)) std::cerr << "note: u rescaled to [0,1]\n";
    car::AdditiveConfig config;
    config.trim_fraction = opt.trim;
    config.grid_points = static_cast<std::size_t>(opt.grid_points);
    const car::AdditiveFit fit = car::backfit(sample, {}, config);
    std::cerr << "m0_hat=" << car::format_double(fit.m0_hat)
              << " iterations=" << fit.iterations
              << " converged=" << (fit.converged ? "yes" : "no") << "\n";
    std::string text = "component,grid,value,valid\n";
    text += "m0," + car::format_double(fit.m0_hat) + ",0,1\n";
    for (std::size_t j = 0; j < fit.components.size(); ++j) {
        const car::Curve& c = fit.components[j];
        for (std::size_t i = 0; i < c.size(); ++i)
            text += "m" + std::to_string(j + 1) + "," +
                    car::format_double(c.grid[i]) + "," +
                    car::format_double(c.values[i]) + "," +
                    (c.valid_mask[i] ? "1" : "0") + "\n";
    }
    emit(opt, text);
    return 0;
}

int cmd_fit(const Options& opt) {
    if (opt.d1 > 0) return cmd_fit_additive(opt);
    car::DistortedSample sample = car::read_distorted_csv(opt.input);
    if (car::rescale_u(sample.u)) std::cerr << "note: u rescaled to [0,1]\n";
    sample.validate();

    car::EstimatorMethod method;
    car::PipelineOptions popts;
    if (opt.method == "auto") {
        const bool x_small =
            std::abs(mean_of(sample.x_tilde)) < 0.1 * sd_of(sample.x_tilde);
        const bool y_small =
            std::abs(mean_of(sample.y_tilde)) < 0.1 * sd_of(sample.y_tilde);
        if (x_small || y_small) {
            method = car::EstimatorMethod::New3;
            popts.x_method = x_small ? car::DistortionMethod::General
                                     : car::DistortionMethod::Signed;
            popts.y_method = y_small ? car::DistortionMethod::General
                                     : car::DistortionMethod::Signed;
            if (x_small) std::cerr << "auto: NEW3 chosen for X (mean near zero)\n";
            if (y_small) std::cerr << "auto: NEW3 chosen for Y (mean near zero)\n";
            if (!x_small || !y_small)
                std::cerr << "auto: signed curve kept for the other variable\n";
        } else {
            method = car::EstimatorMethod::New2;
            std::cerr << "auto: NEW2 chosen\n";
        }
    } else {
        method = parse_method(opt.method);
    }

    popts.trim_fraction = opt.trim;
    popts.g1 = opt.g1;
    popts.g2 = opt.g2;
    popts.h = opt.h;
    popts.rho1 = opt.rho1;
    popts.rho2 = opt.rho2;

    const std::vector<double> grid = fit_grid(opt, sample.x_tilde);
    const car::PipelineResult result = car::run_pipeline(sample, method, grid, popts);
    std::cerr << "g1=" << car::format_double(result.g1)
              << " g2=" << car::format_double(result.g2)
              << " h=" << car::format_double(result.h)
              << " rho1=" << car::format_double(result.rho.rho1)
              << " rho2=" << car::format_double(result.rho.rho2) << "\n";
    for (double t : result.tau_x)
        std::cerr << "tau_x=" << car::format_double(t) << "\n";
    for (double t : result.tau_y)
        std::cerr << "tau_y=" << car::format_double(t) << "\n";
    emit(opt, car::fit_csv(result.fit.curve));
    return 0;
}

int cmd_zeros(const Options& opt) {
    car::DistortedSample sample = car::read_distorted_csv(opt.input);
    if (car::rescale_u(sample.u)) std::cerr << "note: u rescaled to [0,1]\n";
    sample.validate();
    const std::vector<double> grid = car::default_distortion_grid(sample.u);
    std::string text;
    const std::pair<const char*, const std::vector<double>*> vars[] = {
        {"x", &sample.x_tilde}, {"y", &sample.y_tilde}};
    for (const auto& [label, z] : vars) {
        std::vector<double> abs_z = *z;
        for (double& v : abs_z) v = std::abs(v);
        const double gpi = car::plugin_bandwidth(sample.u, abs_z);
        const double g =
            std::pow(static_cast<double>(sample.n()), -0.1) * gpi;
        const car::Curve star = car::estimate_abs_curve(sample.u, *z, g, grid);
        const auto changes =
            car::detect_sign_changes_detailed(star, sample.u, abs_z, g);
        if (changes.empty()) {
            text += std::string(label) + ": none detected\n";
            continue;
        }
        for (const car::SignChange& c : changes)
            text += std::string(label) + ": tau=" + car::format_double(c.tau) +
                    " slope_jump=" + car::format_double(c.slope_jump) +
                    " pooled_se=" + car::format_double(c.pooled_se) +
                    " value=" + car::format_double(c.star_value) + "\n";
    }
    emit(opt, text);
    return 0;
}

int cmd_simulate(const Options& opt) {
    const car::SimModel& model = car::model_by_id(opt.model);
    std::vector<car::EstimatorMethod> methods;
    if (opt.methods.empty()) {
        methods = {car::EstimatorMethod::Oracle, car::EstimatorMethod::Naive};
        if (model.new1_ok) methods.push_back(car::EstimatorMethod::New1);
        if (model.new2_ok) methods.push_back(car::EstimatorMethod::New2);
        methods.push_back(car::EstimatorMethod::New3);
    } else {
        std::stringstream ss(opt.methods);
        std::string name;
        while (std::getline(ss, name, ','))
            methods.push_back(parse_method(name));
        if (methods.empty()) throw car::ParseError("empty --methods list");
    }
    car::StudyConfig config;
    config.workers = opt.workers;
    config.grid_points = static_cast<std::size_t>(opt.grid_points);
    const car::StudySummary summary =
        car::run_study(model, opt.n, opt.reps, opt.seed, methods, config);
    emit(opt, car::study_csv(summary));
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"nonparametric regression under multiplicative covariate distortion"};
    app.set_help_flag("--help", "print usage");
    app.require_subcommand(1);
    Options opt;

    const auto add_common = [&](CLI::App* sub) {
        sub->add_option("--output", opt.output, "output path (default stdout)");
        sub->add_option("--grid-points", opt.grid_points, "grid size")
            ->check(CLI::PositiveNumber);
        sub->add_option("--trim", opt.trim, "density trim fraction")
            ->check(CLI::Range(0.0, 0.499999));
    };

    CLI::App* fit = app.add_subcommand("fit", "fit m(x) from a CSV sample");
    fit->add_option("--input", opt.input, "input CSV")->required();
    fit->add_option("--method", opt.method,
                    "auto|new1|new2|new3|naive|oracle");
    fit->add_option("--g1", opt.g1)->check(CLI::PositiveNumber);
    fit->add_option("--g2", opt.g2)->check(CLI::PositiveNumber);
    fit->add_option("--h", opt.h)->check(CLI::PositiveNumber);
    fit->add_option("--rho1", opt.rho1)->check(CLI::NonNegativeNumber);
    fit->add_option("--rho2", opt.rho2)->check(CLI::NonNegativeNumber);
    fit->add_option("--grid-min", opt.grid_min);
    fit->add_option("--grid-max", opt.grid_max);
    fit->add_option("--d1", opt.d1, "undistorted columns (additive mode)");
    add_common(fit);

    CLI::App* sim = app.add_subcommand("simulate", "Monte Carlo study");
    sim->add_option("--model", opt.model, "catalog model id")->required();
    sim->add_option("--n", opt.n)->check(CLI::PositiveNumber);
    sim->add_option("--reps", opt.reps)->check(CLI::PositiveNumber);
    sim->add_option("--seed", opt.seed);
    sim->add_option("--methods", opt.methods, "comma list, default all applicable");
    sim->add_option("--workers", opt.workers, "0 = hardware concurrency");
    add_common(sim);

    CLI::App* zeros = app.add_subcommand("zeros", "report detected sign changes");
    zeros->add_option("--input", opt.input, "input CSV")->required();
    add_common(zeros);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : kExitParse;
    }

    try {
        if (fit->parsed()) return cmd_fit(opt);
        if (zeros->parsed()) return cmd_zeros(opt);
        return cmd_simulate(opt);
    } catch (const car::MethodInapplicable& e) {
        std::cerr << e.what() << "\n";
        return kExitInapplicable;
    } catch (const car::ParseError& e) {
        std::cerr << e.what() << "\n";
        return kExitParse;
    } catch (const car::Error& e) {
        std::cerr << e.what() << "\n";
        return kExitEstimation;
    }
}
