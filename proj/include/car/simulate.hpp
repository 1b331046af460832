#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "car/pipeline.hpp"
#include "car/rng.hpp"
#include "car/sample.hpp"

namespace car {

// Test curves used throughout the study designs.
double m1_curve(double x);
double m2_curve(double x);
double m3_curve(double x);

struct XDist {
    enum class Kind { Normal, ScaledShiftedChiSq };
    Kind kind = Kind::Normal;
    double mu = 0.0, sigma = 1.0;  // Normal
    double df = 4.0, shift = 0.0, scale = 1.0;  // scale*(chi2(df)+shift)

    double draw(Rng& rng) const;
    double quantile(double p) const;  // analytic
};

struct BetaDist {
    double a = 2.0, b = 5.0;
    double pdf(double u) const;
    double draw(Rng& rng) const;
};

struct SimModel {
    std::string id;
    std::function<double(double)> m;
    std::function<double(double)> sigma;
    XDist x_dist;
    BetaDist u_dist;
    std::function<double(double)> phi_raw, psi_raw;
    double c_phi = 1.0, c_psi = 1.0;
    bool new1_ok = true;   // distortions strictly positive
    bool new2_ok = true;   // EX, EY away from zero

    double phi(double u) const { return c_phi * phi_raw(u); }
    double psi(double u) const { return c_psi * psi_raw(u); }
};

// 1/E{phi_raw(U)} via 128-node Gauss-Legendre against the Beta density.
// Throws ZeroMeanDistortion when |E| < 1e-10.
double normalizing_constant(const std::function<double(double)>& phi_raw,
                            const BetaDist& u_dist);

// All 21 study designs.
const std::vector<SimModel>& catalog();
const SimModel& model_by_id(const std::string& id);  // throws ParseError

struct GeneratedSample {
    DistortedSample obs;
    std::vector<double> x, y;  // hidden truth, for the oracle and the ISE
};

GeneratedSample generate_sample(const SimModel& model, std::size_t n,
                                std::uint64_t seed);

struct StudyRow {
    EstimatorMethod method;
    double q1 = 0.0, median = 0.0, q3 = 0.0;  // of 100 x ISE, over successes
    std::size_t failures = 0;
};

struct StudySummary {
    std::string model_id;
    std::size_t n = 0;
    std::size_t reps = 0;
    std::uint64_t seed = 0;
    std::vector<StudyRow> rows;
};

struct StudyConfig {
    int degree = 1;
    std::size_t workers = 0;       // 0 = hardware concurrency
    std::size_t grid_points = 101;
};

// Monte Carlo study: rep r uses the derived stream seed (seed, r); output
// is independent of the worker count. Throws MethodInapplicable when a
// method cannot run on the model.
StudySummary run_study(const SimModel& model, std::size_t n, std::size_t reps,
                       std::uint64_t seed, std::vector<EstimatorMethod> methods,
                       const StudyConfig& config = {});

std::string method_name(EstimatorMethod m);
std::string study_csv(const StudySummary& s);

}  // namespace car
