#pragma once

#include <cstddef>
#include <vector>

namespace car {

// Gauss-Legendre rule on [-1,1]. Nodes/weights computed once per order by
// Newton iteration on the Legendre recurrence; exact for polynomials of
// degree <= 2*order-1.
struct QuadratureRule {
    std::vector<double> nodes;
    std::vector<double> weights;
};

const QuadratureRule& gauss_legendre(std::size_t order);

enum class KernelId { Triweight };

// Symmetric C^2 density kernel on [-1,1].
struct KernelSpec {
    KernelId id = KernelId::Triweight;
    double support_radius = 1.0;
};

// K(t); 0 outside [-1,1]. Triweight is (35/32)(1-t^2)^3.
double eval_kernel(const KernelSpec& k, double t);

// mu_{K,ell} = int t^ell K(t) dt, ell <= 6. 64-node quadrature, cached.
double kernel_moment(const KernelSpec& k, unsigned ell);

// nu_{K,korder} = int t^korder K(t)^2 dt, korder <= 2. Same quadrature.
double kernel_sq_moment(const KernelSpec& k, unsigned korder);

}  // namespace car
