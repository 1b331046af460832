#include <doctest.h>

#include <cmath>
#include <vector>

#include "car/errors.hpp"
#include "car/local_poly.hpp"
#include "car/rng.hpp"

using namespace car;

namespace {

// Brute-force weighted least squares in the raw (unscaled) basis
// (x - x0)^j, solved by its own Gaussian elimination. Independent of the
// production solver, which works in the scaled basis.
std::vector<double> brute_wls(const std::vector<double>& xs,
                              const std::vector<double>& ys, double x0,
                              int degree, double h) {
    const int p = degree + 1;
    std::vector<std::vector<double>> a(p, std::vector<double>(p, 0.0));
    std::vector<double> b(p, 0.0);
    KernelSpec k;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        const double w = eval_kernel(k, (xs[i] - x0) / h);
        if (w <= 0.0) continue;
        std::vector<double> basis(p);
        basis[0] = 1.0;
        for (int j = 1; j < p; ++j) basis[j] = basis[j - 1] * (xs[i] - x0);
        for (int r = 0; r < p; ++r) {
            b[r] += w * basis[r] * ys[i];
            for (int c = 0; c < p; ++c) a[r][c] += w * basis[r] * basis[c];
        }
    }
    // Gaussian elimination with partial pivoting.
    for (int col = 0; col < p; ++col) {
        int piv = col;
        for (int r = col + 1; r < p; ++r)
            if (std::abs(a[r][col]) > std::abs(a[piv][col])) piv = r;
        std::swap(a[col], a[piv]);
        std::swap(b[col], b[piv]);
        for (int r = col + 1; r < p; ++r) {
            const double f = a[r][col] / a[col][col];
            for (int c = col; c < p; ++c) a[r][c] -= f * a[col][c];
            b[r] -= f * b[col];
        }
    }
    std::vector<double> beta(p);
    for (int r = p - 1; r >= 0; --r) {
        double acc = b[r];
        for (int c = r + 1; c < p; ++c) acc -= a[r][c] * beta[c];
        beta[r] = acc / a[r][r];
    }
    // Convert to derivative units: beta_v * v!.
    double fact = 1.0;
    for (int v = 0; v < p; ++v) {
        beta[v] *= fact;
        fact *= (v + 1);
    }
    return beta;
}

}  // namespace

TEST_CASE("local fits agree with brute-force WLS on random instances") {
    Rng rng(20240817);
    std::size_t hardest = 0;
    for (int trial = 0; trial < 1000; ++trial) {
        const std::size_t n = 30 + static_cast<std::size_t>(rng.uniform() * 70);
        std::vector<double> xs(n), ys(n);
        for (std::size_t i = 0; i < n; ++i) {
            xs[i] = rng.uniform() * 4.0 - 2.0;
            ys[i] = std::sin(3.0 * xs[i]) + 0.5 * rng.normal();
        }
        const int degree = static_cast<int>(rng.uniform() * 4.0);
        const double x0 = rng.uniform() * 3.0 - 1.5;
        const double h = 0.6 + rng.uniform();
        LocalFit fit;
        try {
            fit = local_poly_fit(xs, ys, x0, degree, h);
        } catch (const IllPosedFit&) {
            continue;  // both solvers would reject; nothing to compare
        }
        const std::vector<double> want = brute_wls(xs, ys, x0, degree, h);
        REQUIRE(fit.coefficients.size() == want.size());
        for (std::size_t v = 0; v < want.size(); ++v) {
            const double denom = std::max(1.0, std::abs(want[v]));
            CHECK(std::abs(fit.coefficients[v] - want[v]) / denom < 1e-9);
        }
        ++hardest;
    }
    CHECK(hardest > 900);  // nearly all instances must be well-posed
}

TEST_CASE("polynomial reproduction") {
    std::vector<double> xs, ys;
    for (int i = 0; i <= 60; ++i) {
        const double x = i / 60.0;
        xs.push_back(x);
        ys.push_back(2.0 - x + 3.0 * x * x);
    }
    const LocalFit fit = local_poly_fit(xs, ys, 0.5, 2, 0.3);
    CHECK(fit.coefficients[0] == doctest::Approx(2.25).epsilon(1e-10));
    CHECK(fit.coefficients[1] == doctest::Approx(2.0).epsilon(1e-9));
    CHECK(fit.coefficients[2] == doctest::Approx(6.0).epsilon(1e-8));
}

TEST_CASE("shift and scale equivariance of the local linear value") {
    std::vector<double> xs, ys;
    Rng rng(7);
    for (int i = 0; i < 80; ++i) {
        xs.push_back(rng.uniform());
        ys.push_back(std::cos(4.0 * xs.back()) + 0.1 * rng.normal());
    }
    const LocalFit base = local_poly_fit(xs, ys, 0.4, 1, 0.2);
    std::vector<double> xs_shift = xs, ys_scaled = ys;
    for (double& x : xs_shift) x += 5.0;
    const LocalFit shifted = local_poly_fit(xs_shift, ys, 5.4, 1, 0.2);
    CHECK(shifted.coefficients[0] ==
          doctest::Approx(base.coefficients[0]).epsilon(1e-10));
    for (double& y : ys_scaled) y *= -3.0;
    const LocalFit scaled = local_poly_fit(xs, ys_scaled, 0.4, 1, 0.2);
    CHECK(scaled.coefficients[0] ==
          doctest::Approx(-3.0 * base.coefficients[0]).epsilon(1e-10));
}

TEST_CASE("ill-posed and degenerate inputs") {
    std::vector<double> xs = {0.0, 0.1, 0.2, 0.9, 1.0};
    std::vector<double> ys = {1.0, 1.0, 1.0, 1.0, 1.0};
    CHECK_THROWS_AS(local_poly_fit(xs, ys, 0.55, 3, 0.05), IllPosedFit);
    // No weight at all near x0.
    CHECK_THROWS_AS(local_poly_fit(xs, ys, 10.0, 1, 0.1), IllPosedFit);
}

TEST_CASE("SortedDesign matches local_poly_fit") {
    Rng rng(99);
    std::vector<double> xs, ys;
    for (int i = 0; i < 200; ++i) {
        xs.push_back(rng.uniform() * 2.0);
        ys.push_back(xs.back() * xs.back() + 0.05 * rng.normal());
    }
    SortedDesign design(xs, ys);
    for (double x0 : {0.1, 0.5, 1.0, 1.7}) {
        const LocalFit a = local_poly_fit(xs, ys, x0, 1, 0.25);
        const LocalFit b = design.fit_at(x0, 1, 0.25);
        CHECK(a.coefficients[0] == doctest::Approx(b.coefficients[0]).epsilon(1e-12));
        CHECK(a.effective_points == b.effective_points);
    }
}

TEST_CASE("curve interpolation is linear between valid points") {
    Curve c;
    c.grid = {0.0, 1.0, 2.0};
    c.values = {0.0, 2.0, 0.0};
    c.valid_mask = {true, true, true};
    CHECK(c.interpolate(0.5) == doctest::Approx(1.0));
    CHECK(c.interpolate(-1.0) == doctest::Approx(0.0));  // flat extension
    CHECK(c.interpolate(3.0) == doctest::Approx(0.0));
    c.valid_mask[1] = false;  // skips invalid grid points
    CHECK(c.interpolate(1.0) == doctest::Approx(0.0));
}
