// SPDX-License-Identifier: Apache-2.0

#include "abem/geometry.hpp"

#include <algorithm>
#include <limits>
#include <string>

#include "abem/errors.hpp"

namespace abem
{

double point_segment_distance(Point2 p, const SegmentGeometry &s)
{
  const Point2 d = s.b - s.a;
  const double len2 = dot(d, d);
  double t = len2 > 0.0 ? dot(p - s.a, d) / len2 : 0.0;
  t = std::clamp(t, 0.0, 1.0);
  return distance(p, s.a + t * d);
}

double segment_distance(const SegmentGeometry &s, const SegmentGeometry &t)
{
  return std::min({point_segment_distance(s.a, t), point_segment_distance(s.b, t),
                   point_segment_distance(t.a, s), point_segment_distance(t.b, s)});
}

bool collinear(const SegmentGeometry &s, const SegmentGeometry &t)
{
  const Point2 ts = s.tangent();
  const double scale = std::max(s.length, t.length);
  // Both endpoints of t must sit on the carrier line of s.
  const double da = std::abs(cross(ts, t.a - s.a));
  const double db = std::abs(cross(ts, t.b - s.a));
  const double tol = 1e-13 * std::max(scale, distance(s.a, t.a));
  return da <= tol && db <= tol;
}

SegmentGeometry BoundaryCurve::edge(std::size_t e) const
{
  const Point2 a = vertices[e];
  const Point2 b = vertices[(e + 1) % vertices.size()];
  return {a, b, distance(a, b)};
}

double BoundaryCurve::length() const
{
  double total = 0.0;
  for (std::size_t e = 0; e < edge_count(); ++e)
    total += edge(e).length;
  return total;
}

double BoundaryCurve::diameter() const
{
  double d = 0.0;
  for (std::size_t i = 0; i < vertices.size(); ++i)
    for (std::size_t j = i + 1; j < vertices.size(); ++j)
      d = std::max(d, distance(vertices[i], vertices[j]));
  return d;
}

Point2 BoundaryCurve::centroid() const
{
  Point2 c;
  for (const auto &v : vertices)
    c += v;
  return (1.0 / static_cast<double>(vertices.size())) * c;
}

BoundaryCurve make_curve(std::vector<Point2> vertices, bool closed)
{
  if (vertices.size() < 2)
    throw InvalidArgument("boundary curve needs at least 2 vertices");
  if (closed && vertices.size() < 3)
    throw InvalidArgument("closed boundary curve needs at least 3 vertices");
  if (closed && vertices.front() == vertices.back())
    throw InvalidArgument("closed curve must not repeat its first vertex");

  BoundaryCurve curve;
  curve.vertices = std::move(vertices);
  curve.closed = closed;
  const std::size_t n = curve.vertices.size();
  for (std::size_t e = 0; e < curve.edge_count(); ++e)
  {
    if (curve.edge(e).length == 0.0)
      throw InvalidArgument("consecutive vertices " + std::to_string(e) + " and " +
                            std::to_string((e + 1) % n) + " coincide");
  }
  for (std::size_t i = 0; i < n; ++i)
  {
    if (!closed && (i == 0 || i + 1 == n))
    {
      curve.corner_indices.push_back(i);
      continue;
    }
    const SegmentGeometry in = curve.edge((i + n - 1) % n);
    const SegmentGeometry out = curve.edge(i);
    if (std::abs(cross(in.tangent(), out.tangent())) > 1e-12 ||
        dot(in.tangent(), out.tangent()) < 0.0)
      curve.corner_indices.push_back(i);
  }
  return curve;
}

NormalizedCurve normalize_curve(const BoundaryCurve &curve)
{
  if (curve.vertices.size() < 2)
    throw InvalidArgument("boundary curve needs at least 2 vertices");
  const double diam = curve.diameter();
  if (!(diam > 0.0) || !std::isfinite(diam))
    throw InvalidArgument("degenerate curve: zero diameter");

  const double scale = kNormalizedDiameter / diam;
  const Point2 c = curve.centroid();
  NormalizedCurve out{curve, scale};
  if (scale == 1.0)
    return out;
  for (auto &v : out.curve.vertices)
    v = c + scale * (v - c);
  return out;
}

}  // namespace abem
