#include "car/kernel.hpp"

#include <array>
#include <cmath>
#include <map>
#include <mutex>

namespace car {

namespace {

QuadratureRule compute_gauss_legendre(std::size_t order) {
    QuadratureRule rule;
    rule.nodes.resize(order);
    rule.weights.resize(order);
    const std::size_t m = (order + 1) / 2;
    for (std::size_t i = 0; i < m; ++i) {
        // Chebyshev-based initial guess for the i-th root of P_order.
        double x = std::cos(M_PI * (static_cast<double>(i) + 0.75) /
                            (static_cast<double>(order) + 0.5));
        double dp = 0.0;
        for (int iter = 0; iter < 100; ++iter) {
            // Legendre recurrence: evaluate P_order(x) and P'_order(x).
            double p0 = 1.0, p1 = x;
            for (std::size_t j = 2; j <= order; ++j) {
                const double pj = ((2.0 * j - 1.0) * x * p1 - (j - 1.0) * p0) / j;
                p0 = p1;
                p1 = pj;
            }
            dp = order * (x * p1 - p0) / (x * x - 1.0);
            const double dx = p1 / dp;
            x -= dx;
            if (std::abs(dx) < 1e-15) break;
        }
        rule.nodes[i] = -x;
        rule.nodes[order - 1 - i] = x;
        const double w = 2.0 / ((1.0 - x * x) * dp * dp);
        rule.weights[i] = w;
        rule.weights[order - 1 - i] = w;
    }
    return rule;
}

}  // namespace

const QuadratureRule& gauss_legendre(std::size_t order) {
    static std::mutex mu;
    static std::map<std::size_t, QuadratureRule> cache;
    std::lock_guard<std::mutex> lock(mu);
    auto it = cache.find(order);
    if (it == cache.end()) it = cache.emplace(order, compute_gauss_legendre(order)).first;
    return it->second;
}

double eval_kernel(const KernelSpec& k, double t) {
    (void)k;  // single kernel for now
    if (std::abs(t) > 1.0) return 0.0;
    const double s = 1.0 - t * t;
    return (35.0 / 32.0) * s * s * s;
}

namespace {

double quad_integral(const KernelSpec& k, unsigned power, bool squared) {
    const QuadratureRule& rule = gauss_legendre(64);
    double sum = 0.0;
    for (std::size_t i = 0; i < rule.nodes.size(); ++i) {
        const double t = rule.nodes[i];
        double v = eval_kernel(k, t);
        if (squared) v *= v;
        sum += rule.weights[i] * std::pow(t, static_cast<double>(power)) * v;
    }
    return sum;
}

}  // namespace

double kernel_moment(const KernelSpec& k, unsigned ell) {
    static std::once_flag once;
    static std::array<double, 7> cache;
    std::call_once(once, [] {
        KernelSpec tri;
        for (unsigned l = 0; l <= 6; ++l) cache[l] = quad_integral(tri, l, false);
    });
    return cache.at(ell);
}

double kernel_sq_moment(const KernelSpec& k, unsigned korder) {
    static std::once_flag once;
    static std::array<double, 3> cache;
    std::call_once(once, [] {
        KernelSpec tri;
        for (unsigned l = 0; l <= 2; ++l) cache[l] = quad_integral(tri, l, true);
    });
    return cache.at(korder);
}

}  // namespace car
