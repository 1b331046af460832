#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "car/kernel.hpp"

namespace car {

// Result of one kernel-weighted polynomial fit centered at x0.
// coefficients[v] is already in derivative units: it estimates the v-th
// derivative of the regression curve at x0.
struct LocalFit {
    std::vector<double> coefficients;
    std::size_t effective_points = 0;
};

// A curve evaluated on a strictly increasing grid. valid_mask marks grid
// points where the local fit was well-posed.
struct Curve {
    std::vector<double> grid;
    std::vector<double> values;
    std::vector<bool> valid_mask;

    std::size_t size() const { return grid.size(); }
    // Linear interpolation over valid points; flat extension beyond them.
    double interpolate(double x) const;
    bool any_valid() const;
};

std::vector<double> linspace(double lo, double hi, std::size_t count);

// Kernel-weighted least squares of degree `degree` (0..3) centered at x0,
// bandwidth h. Throws IllPosedFit when fewer than degree+1 points carry
// weight or the normal equations fail the conditioning guard even after
// one ridge retry.
LocalFit local_poly_fit(std::span<const double> xs, std::span<const double> ys,
                        double x0, int degree, double h,
                        const KernelSpec& k = {});

// local_poly_fit evaluated at every grid point (degree 0 or 1).
// Ill-posed points get valid_mask=false. Throws AllPointsIllPosed when no
// grid point is valid.
Curve fit_curve(std::span<const double> xs, std::span<const double> ys,
                std::span<const double> grid, int degree, double h,
                const KernelSpec& k = {});

// Data sorted by x once, so repeated local fits only touch the points
// inside the kernel window. Fits are identical to local_poly_fit.
class SortedDesign {
public:
    SortedDesign(std::span<const double> xs, std::span<const double> ys);

    LocalFit fit_at(double x0, int degree, double h,
                    const KernelSpec& k = {}) const;
    Curve fit_on(std::span<const double> grid, int degree, double h,
                 const KernelSpec& k = {}) const;

    const std::vector<double>& x() const { return x_; }
    const std::vector<double>& y() const { return y_; }

private:
    std::vector<double> x_;
    std::vector<double> y_;
};

}  // namespace car
