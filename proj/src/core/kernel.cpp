// SPDX-License-Identifier: Apache-2.0

#include "abem/kernel.hpp"

#include <algorithm>
#include <cmath>

#include "abem/quadrature.hpp"

namespace abem
{

namespace
{

// x ln y with the 0 ln 0 = 0 convention; here x -> 0 whenever y -> 0.
double xlogy(double x, double y) { return x == 0.0 || y == 0.0 ? 0.0 : x * std::log(y); }

// u^2/2 ln|u| - 3u^2/4, second antiderivative of ln|u|.
double log_antiderivative2(double u)
{
  if (u == 0.0)
    return 0.0;
  const double u2 = u * u;
  return 0.5 * u2 * std::log(std::abs(u)) - 0.75 * u2;
}

constexpr int kMaxOuterDepth = 48;

double outer_integral(const SegmentGeometry &outer, const SegmentGeometry &inner, double u0,
                      double u1, int depth)
{
  const SegmentGeometry piece{outer.at(u0), outer.at(u1), (u1 - u0) * outer.length};
  const double r = segment_distance(piece, inner) / piece.length;
  if (r < 1.0 && depth < kMaxOuterDepth)
  {
    const double um = 0.5 * (u0 + u1);
    return outer_integral(outer, inner, u0, um, depth + 1) +
           outer_integral(outer, inner, um, u1, depth + 1);
  }
  const int n = r >= 16.0 ? 4 : r >= 4.0 ? 6 : r >= 1.0 ? 8 : 16;
  const QuadratureRule &g = gauss_legendre(n);
  double sum = 0.0;
  for (std::size_t q = 0; q < g.size(); ++q)
    sum += g.weights[q] * log_integral(piece.at(g.nodes[q]), inner);
  return sum * piece.length;
}

}  // namespace

double log_integral(Point2 x, const SegmentGeometry &s)
{
  const double h = s.length;
  const Point2 tau = s.tangent();
  const Point2 xp = x - s.a;
  const double a = distance(x, s.a);
  const double b = distance(x, s.b);
  const double s0 = dot(xp, tau);
  const double d = cross(tau, xp);
  const Point2 pa = s.a - x, pb = s.b - x;
  const double theta = std::atan2(cross(pa, pb), dot(pa, pb));
  if (std::min(a, b) >= h)
  {
    // ln b - ln a written through log1p to avoid cancellation far away.
    const double lr = 0.5 * std::log1p(h * (h - 2.0 * s0) / (a * a));
    return h * std::log(b) - s0 * lr - h + d * theta;
  }
  return xlogy(s0, a) + xlogy(h - s0, b) - h + d * theta;
}

Point2 log_integral_gradient(Point2 x, const SegmentGeometry &s)
{
  const Point2 pa = s.a - x, pb = s.b - x;
  const double a = norm(pa);
  const double b = norm(pb);
  const double theta = std::atan2(cross(pa, pb), dot(pa, pb));
  return std::log(a / b) * s.tangent() + theta * s.normal();
}

double log_interval_integral(double a, double b, double c, double d)
{
  return log_antiderivative2(b - c) - log_antiderivative2(a - c) - log_antiderivative2(b - d) +
         log_antiderivative2(a - d);
}

double log_pair_integral(const SegmentGeometry &s, const SegmentGeometry &t)
{
  const double hmax = std::max(s.length, t.length);
  const double hmin = std::min(s.length, t.length);
  if (collinear(s, t) && hmax <= 64.0 * hmin && segment_distance(s, t) <= 4.0 * hmax)
  {
    const Point2 tau = s.tangent();
    const double ta = dot(t.a - s.a, tau);
    const bool same_direction = dot(t.b - t.a, tau) > 0.0;
    const double c = same_direction ? ta : ta - t.length;
    const double d = same_direction ? ta + t.length : ta;
    return log_interval_integral(0.0, s.length, c, d);
  }
  if (s.length <= t.length)
    return outer_integral(s, t, 0.0, 1.0, 0);
  return outer_integral(t, s, 0.0, 1.0, 0);
}

}  // namespace abem
