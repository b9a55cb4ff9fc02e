// SPDX-License-Identifier: Apache-2.0

#ifndef ABEM_KERNEL_HPP
#define ABEM_KERNEL_HPP

#include <numbers>

#include "abem/geometry.hpp"

namespace abem
{

// G(z) = kLaplaceFactor * ln|z|
inline constexpr double kLaplaceFactor = -0.5 / std::numbers::pi;

// int_s ln|x - y| ds(y), closed form; finite everywhere.
double log_integral(Point2 x, const SegmentGeometry &s);

// Gradient in x of log_integral. Singular at the endpoints of s.
Point2 log_integral_gradient(Point2 x, const SegmentGeometry &s);

// int_s int_t ln|x - y| ds(y) ds(x). Exact for nearby collinear pairs, analytic
// inner integral with graded Gauss outer integration otherwise.
double log_pair_integral(const SegmentGeometry &s, const SegmentGeometry &t);

// int_a^b int_c^d ln|u - v| dv du for intervals on one line.
double log_interval_integral(double a, double b, double c, double d);

}  // namespace abem

#endif  // ABEM_KERNEL_HPP
