#include "car/local_poly.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "car/errors.hpp"

namespace car {

std::vector<double> linspace(double lo, double hi, std::size_t count) {
    std::vector<double> out(count);
    if (count == 1) {
        out[0] = lo;
        return out;
    }
    const double step = (hi - lo) / static_cast<double>(count - 1);
    for (std::size_t i = 0; i < count; ++i) out[i] = lo + step * static_cast<double>(i);
    out.back() = hi;
    return out;
}

double Curve::interpolate(double x) const {
    double prev_x = 0.0, prev_v = 0.0;
    bool have_prev = false;
    for (std::size_t i = 0; i < grid.size(); ++i) {
        if (!valid_mask[i]) continue;
        if (grid[i] >= x) {
            if (!have_prev) return values[i];
            const double t = (x - prev_x) / (grid[i] - prev_x);
            return prev_v + t * (values[i] - prev_v);
        }
        prev_x = grid[i];
        prev_v = values[i];
        have_prev = true;
    }
    if (have_prev) return prev_v;
    return 0.0;
}

bool Curve::any_valid() const {
    return std::any_of(valid_mask.begin(), valid_mask.end(), [](bool b) { return b; });
}

namespace {

constexpr double kPivotGuard = 1e-12;
constexpr double kRidgeScale = 1e-8;

// Gaussian elimination with partial pivoting on an in-place (p+1)x(p+1)
// system. Returns false when a pivot falls below guard.
bool solve_inplace(std::vector<double>& a, std::vector<double>& b, int dim,
                   double guard) {
    for (int col = 0; col < dim; ++col) {
        int pivot = col;
        for (int r = col + 1; r < dim; ++r)
            if (std::abs(a[r * dim + col]) > std::abs(a[pivot * dim + col])) pivot = r;
        if (std::abs(a[pivot * dim + col]) < guard) return false;
        if (pivot != col) {
            for (int c = 0; c < dim; ++c) std::swap(a[col * dim + c], a[pivot * dim + c]);
            std::swap(b[col], b[pivot]);
        }
        const double inv = 1.0 / a[col * dim + col];
        for (int r = col + 1; r < dim; ++r) {
            const double f = a[r * dim + col] * inv;
            if (f == 0.0) continue;
            for (int c = col; c < dim; ++c) a[r * dim + c] -= f * a[col * dim + c];
            b[r] -= f * b[col];
        }
    }
    for (int r = dim - 1; r >= 0; --r) {
        double s = b[r];
        for (int c = r + 1; c < dim; ++c) s -= a[r * dim + c] * b[c];
        b[r] = s / a[r * dim + r];
    }
    return true;
}

// Core fit over the index range [lo, hi) of x-sorted (or arbitrary) data.
LocalFit fit_range(const double* xs, const double* ys, std::size_t lo, std::size_t hi,
                   double x0, int degree, double h, const KernelSpec& k) {
    const int dim = degree + 1;
    // Moment sums in the scaled variable t = (x - x0)/h.
    double s[7] = {0};
    double t[4] = {0};
    std::size_t effective = 0;
    for (std::size_t i = lo; i < hi; ++i) {
        const double u = (xs[i] - x0) / h;
        const double w = eval_kernel(k, u) / h;
        if (w <= 0.0) continue;
        ++effective;
        double p = w;
        for (int m = 0; m <= 2 * degree; ++m) {
            s[m] += p;
            if (m <= degree) t[m] += p * ys[i];
            p *= u;
        }
    }
    if (effective < static_cast<std::size_t>(dim))
        throw IllPosedFit("only " + std::to_string(effective) + " points in window");

    std::vector<double> mat(static_cast<std::size_t>(dim) * dim);
    std::vector<double> rhs(dim);
    double max_diag = 0.0, trace = 0.0;
    for (int r = 0; r < dim; ++r) {
        for (int c = 0; c < dim; ++c) mat[r * dim + c] = s[r + c];
        rhs[r] = t[r];
        max_diag = std::max(max_diag, std::abs(s[2 * r]));
        trace += s[2 * r];
    }

    auto a = mat;
    auto b = rhs;
    if (!solve_inplace(a, b, dim, kPivotGuard * max_diag)) {
        // Ridge retry: add lambda*I once, then give up.
        const double lambda = kRidgeScale * trace / dim;
        a = mat;
        b = rhs;
        for (int r = 0; r < dim; ++r) a[r * dim + r] += lambda;
        if (!solve_inplace(a, b, dim, 0.0))
            throw IllPosedFit("conditioning guard failed after ridge retry");
    }

    LocalFit fit;
    fit.effective_points = effective;
    fit.coefficients.resize(dim);
    double fact = 1.0, hpow = 1.0;
    for (int v = 0; v < dim; ++v) {
        if (v > 0) {
            fact *= v;
            hpow *= h;
        }
        fit.coefficients[v] = b[v] * fact / hpow;
    }
    return fit;
}

Curve fit_grid(const double* xs, const double* ys, std::size_t n, bool sorted,
               std::span<const double> grid, int degree, double h,
               const KernelSpec& k) {
    Curve out;
    out.grid.assign(grid.begin(), grid.end());
    out.values.assign(grid.size(), 0.0);
    out.valid_mask.assign(grid.size(), false);
    for (std::size_t g = 0; g < grid.size(); ++g) {
        std::size_t lo = 0, hi = n;
        if (sorted) {
            lo = std::lower_bound(xs, xs + n, grid[g] - h) - xs;
            hi = std::upper_bound(xs + lo, xs + n, grid[g] + h) - xs;
        }
        try {
            LocalFit fit = fit_range(xs, ys, lo, hi, grid[g], degree, h, k);
            out.values[g] = fit.coefficients[0];
            out.valid_mask[g] = true;
        } catch (const IllPosedFit&) {
        }
    }
    if (!out.any_valid()) throw AllPointsIllPosed("no valid grid point");
    return out;
}

}  // namespace

LocalFit local_poly_fit(std::span<const double> xs, std::span<const double> ys,
                        double x0, int degree, double h, const KernelSpec& k) {
    if (xs.size() != ys.size()) throw DegenerateSample("xs/ys length mismatch");
    if (degree < 0 || degree > 3) throw DegenerateSample("degree must be 0..3");
    if (!(h > 0.0)) throw DegenerateSample("bandwidth must be positive");
    return fit_range(xs.data(), ys.data(), 0, xs.size(), x0, degree, h, k);
}

Curve fit_curve(std::span<const double> xs, std::span<const double> ys,
                std::span<const double> grid, int degree, double h,
                const KernelSpec& k) {
    if (xs.size() != ys.size()) throw DegenerateSample("xs/ys length mismatch");
    if (!(h > 0.0)) throw DegenerateSample("bandwidth must be positive");
    return fit_grid(xs.data(), ys.data(), xs.size(), false, grid, degree, h, k);
}

SortedDesign::SortedDesign(std::span<const double> xs, std::span<const double> ys) {
    if (xs.size() != ys.size()) throw DegenerateSample("xs/ys length mismatch");
    std::vector<std::size_t> order(xs.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return xs[a] < xs[b]; });
    x_.resize(xs.size());
    y_.resize(xs.size());
    for (std::size_t i = 0; i < order.size(); ++i) {
        x_[i] = xs[order[i]];
        y_[i] = ys[order[i]];
    }
}

LocalFit SortedDesign::fit_at(double x0, int degree, double h,
                              const KernelSpec& k) const {
    const std::size_t lo =
        std::lower_bound(x_.begin(), x_.end(), x0 - h) - x_.begin();
    const std::size_t hi =
        std::upper_bound(x_.begin() + lo, x_.end(), x0 + h) - x_.begin();
    return fit_range(x_.data(), y_.data(), lo, hi, x0, degree, h, k);
}

Curve SortedDesign::fit_on(std::span<const double> grid, int degree, double h,
                           const KernelSpec& k) const {
    return fit_grid(x_.data(), y_.data(), x_.size(), true, grid, degree, h, k);
}

}  // namespace car
