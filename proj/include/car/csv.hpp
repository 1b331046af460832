#pragma once

#include <string>
#include <vector>

#include "car/additive.hpp"
#include "car/local_poly.hpp"
#include "car/sample.hpp"

namespace car {

// Strict numeric CSV: header row, ',' separator, '.' decimal. Bad cells
// are reported with their 1-based line number via ParseError.

// Columns u,x_tilde,y_tilde (any order, extras ignored).
DistortedSample read_distorted_csv(const std::string& path);

// Columns u,x1..xd,y_tilde.
AdditiveSample read_additive_csv(const std::string& path, std::size_t d1);

// Rescales u to [0,1] in place when any value falls outside; returns
// whether a rescale happened.
bool rescale_u(std::vector<double>& u);

// 17 significant digits: round-trip exact for doubles.
std::string format_double(double v);

// Columns grid,m_hat,valid.
std::string fit_csv(const Curve& curve);

}  // namespace car
