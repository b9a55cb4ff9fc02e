// SPDX-License-Identifier: Apache-2.0

#ifndef ABEM_GEOMETRY_HPP
#define ABEM_GEOMETRY_HPP

#include <cmath>
#include <cstddef>
#include <vector>

namespace abem
{

struct Point2
{
  double x = 0.0;
  double y = 0.0;

  Point2 &operator+=(Point2 o)
  {
    x += o.x;
    y += o.y;
    return *this;
  }
  Point2 &operator-=(Point2 o)
  {
    x -= o.x;
    y -= o.y;
    return *this;
  }
  friend Point2 operator+(Point2 a, Point2 b) { return a += b; }
  friend Point2 operator-(Point2 a, Point2 b) { return a -= b; }
  friend Point2 operator*(double s, Point2 a) { return {s * a.x, s * a.y}; }
  friend Point2 operator*(Point2 a, double s) { return {s * a.x, s * a.y}; }
  friend bool operator==(Point2 a, Point2 b) = default;
};

inline double dot(Point2 a, Point2 b) { return a.x * b.x + a.y * b.y; }
inline double cross(Point2 a, Point2 b) { return a.x * b.y - a.y * b.x; }
inline double norm(Point2 a) { return std::hypot(a.x, a.y); }
inline double distance(Point2 a, Point2 b) { return norm(a - b); }
inline Point2 midpoint(Point2 a, Point2 b) { return {0.5 * (a.x + b.x), 0.5 * (a.y + b.y)}; }
// Counter-clockwise rotation by 90 degrees.
inline Point2 rot90(Point2 a) { return {-a.y, a.x}; }

// Oriented straight segment. `length` is carried explicitly so that bisection
// halves it exactly instead of recomputing it from rounded endpoints.
struct SegmentGeometry
{
  Point2 a;
  Point2 b;
  double length = 0.0;

  Point2 tangent() const { return (1.0 / length) * (b - a); }
  Point2 normal() const { return rot90(tangent()); }
  Point2 at(double t) const { return a + t * (b - a); }  // t in [0, 1]
};

double point_segment_distance(Point2 p, const SegmentGeometry &s);
// Euclidean distance between two non-crossing segments.
double segment_distance(const SegmentGeometry &s, const SegmentGeometry &t);
// True when both segments lie on one line (to relative tolerance).
bool collinear(const SegmentGeometry &s, const SegmentGeometry &t);

// Polygonal curve in the plane: an open arc or a closed polygon. Closed
// curves do not repeat the first vertex.
struct BoundaryCurve
{
  std::vector<Point2> vertices;
  bool closed = false;
  std::vector<std::size_t> corner_indices;

  std::size_t edge_count() const { return closed ? vertices.size() : vertices.size() - 1; }
  SegmentGeometry edge(std::size_t e) const;
  double length() const;
  double diameter() const;
  Point2 centroid() const;
};

// Validates the vertex list and fills in corner_indices (every vertex with a
// nonzero turning angle, plus the two endpoints of an open arc).
BoundaryCurve make_curve(std::vector<Point2> vertices, bool closed);

struct NormalizedCurve
{
  BoundaryCurve curve;
  double scale_factor = 1.0;  // normalized = centroid + scale_factor * (x - centroid)
};

inline constexpr double kNormalizedDiameter = 0.5;

// Scales the curve about its vertex centroid so that its diameter is 1/2.
NormalizedCurve normalize_curve(const BoundaryCurve &curve);

}  // namespace abem

#endif  // ABEM_GEOMETRY_HPP
