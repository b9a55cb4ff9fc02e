// SPDX-License-Identifier: Apache-2.0

#ifndef ABEM_MESH_HPP
#define ABEM_MESH_HPP

#include <cstddef>
#include <iosfwd>
#include <memory>
#include <optional>
#include <span>
#include <vector>

#include "abem/geometry.hpp"

namespace abem
{

struct Segment
{
  SegmentGeometry geom;
  std::optional<std::size_t> parent;  // index into the previous level
  int generation = 0;                 // number of bisections since the initial mesh
  std::size_t edge = 0;               // curve edge carrying this element
  double arc_start = 0.0;             // arc-length position of geom.a along the curve

  double length() const { return geom.length; }
  double arc_end() const { return arc_start + geom.length; }
};

// 1D partition of a polygonal curve into straight segments, stored in curve
// order. Node i is the start point of element i; an open arc has one extra
// node at the end of the last element. Immutable once built.
class BoundaryMesh
{
public:
  BoundaryMesh(std::shared_ptr<const BoundaryCurve> curve, std::vector<Segment> elements,
               int level, double gamma);

  // Splits every curve edge into equal pieces so that the mesh has roughly
  // `min_elements` elements, then applies the mesh-ratio closure.
  static BoundaryMesh initial(std::shared_ptr<const BoundaryCurve> curve,
                              std::size_t min_elements, double gamma = 2.0);

  const BoundaryCurve &curve() const { return *curve_; }
  const std::shared_ptr<const BoundaryCurve> &curve_ptr() const { return curve_; }
  bool closed() const { return curve_->closed; }

  std::size_t size() const { return elements_.size(); }
  const Segment &element(std::size_t e) const { return elements_[e]; }
  std::span<const Segment> elements() const { return elements_; }
  int level() const { return level_; }
  double gamma() const { return gamma_; }

  std::size_t node_count() const { return closed() ? size() : size() + 1; }
  Point2 node(std::size_t n) const;
  bool is_boundary_node(std::size_t n) const { return !closed() && (n == 0 || n == size()); }
  std::size_t start_node(std::size_t e) const { return e; }
  std::size_t end_node(std::size_t e) const { return closed() ? (e + 1) % size() : e + 1; }
  // Elements containing node n: one at an open-arc endpoint, two otherwise.
  std::vector<std::size_t> node_elements(std::size_t n) const;
  std::optional<std::size_t> previous(std::size_t e) const;
  std::optional<std::size_t> next(std::size_t e) const;
  bool touching(std::size_t e, std::size_t f) const;

  double total_length() const;
  // max diam(T)/diam(T') over touching pairs
  double max_local_ratio() const;

private:
  std::shared_ptr<const BoundaryCurve> curve_;
  std::vector<Segment> elements_;
  int level_ = 0;
  double gamma_ = 2.0;
};

BoundaryMesh uniform_refine(const BoundaryMesh &mesh);

// Bisects every marked element, then keeps bisecting the larger element of
// any touching pair whose diameter ratio exceeds gamma.
BoundaryMesh refine_marked(const BoundaryMesh &mesh, std::span<const std::size_t> marked);

struct NodePatch
{
  Point2 node;
  std::vector<std::size_t> elements;
  double diameter = 0.0;
};

NodePatch node_patch(const BoundaryMesh &mesh, std::size_t node);
// Looks the node up by position; throws if `p` is not a mesh node.
NodePatch node_patch(const BoundaryMesh &mesh, Point2 p);

// omega^k(seed): seed plus k layers of touching elements. Sorted, unique.
std::vector<std::size_t> k_patch(const BoundaryMesh &mesh, std::span<const std::size_t> seed,
                                 int k);

// For every element of `fine`, the index of the element of `coarse` that
// contains it. Throws InvalidArgument if the meshes are not nested.
std::vector<std::size_t> locate_parents(const BoundaryMesh &coarse, const BoundaryMesh &fine);

// Elements of `coarse` that do not survive unchanged into `fine`.
std::vector<std::size_t> refined_elements(const BoundaryMesh &coarse, const BoundaryMesh &fine);

// Plain and modified mesh-width functions of one level. The modified width is
// equivalent to diam(T), pointwise non-increasing under refinement, and
// contracts by q on the k-patch of refined elements.
struct MeshWidth
{
  std::vector<double> plain;
  std::vector<double> modified;
  int k = 1;
  double q = 0.5;
  double c_meshsize = 1.0;  // max over the sequence so far of diam(T) / modified(T)
};

double mesh_width_contraction(int k);

MeshWidth initial_mesh_width(const BoundaryMesh &mesh, int k);
MeshWidth advance_mesh_width(const MeshWidth &previous, const BoundaryMesh &coarse,
                             const BoundaryMesh &fine);
std::vector<MeshWidth> modified_mesh_width(std::span<const BoundaryMesh> sequence, int k);

// `level element_id parent_id x0 y0 x1 y1` per line; parent -1 on level 0.
void write_mesh_snapshot(std::ostream &os, const BoundaryMesh &mesh);

}  // namespace abem

#endif  // ABEM_MESH_HPP
