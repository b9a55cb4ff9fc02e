// SPDX-License-Identifier: Apache-2.0

#include "abem/mesh.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>

#include "abem/errors.hpp"

namespace abem
{

namespace
{

constexpr double kRatioSlack = 1e-12;

struct Work
{
  Segment seg;
  std::size_t origin;
};

std::pair<Segment, Segment> bisect(const Segment &s)
{
  const Point2 m = midpoint(s.geom.a, s.geom.b);
  const double h = 0.5 * s.geom.length;
  Segment left = s, right = s;
  left.geom = {s.geom.a, m, h};
  right.geom = {m, s.geom.b, h};
  left.generation = right.generation = s.generation + 1;
  right.arc_start = s.arc_start + h;
  return {left, right};
}

void bisect_flagged(std::vector<Work> &work, const std::vector<char> &flag)
{
  std::vector<Work> out;
  out.reserve(work.size() + std::count(flag.begin(), flag.end(), 1));
  for (std::size_t i = 0; i < work.size(); ++i)
  {
    if (flag[i])
    {
      auto [l, r] = bisect(work[i].seg);
      out.push_back({l, work[i].origin});
      out.push_back({r, work[i].origin});
    }
    else
    {
      out.push_back(work[i]);
    }
  }
  work = std::move(out);
}

void close_ratio(std::vector<Work> &work, bool closed, double gamma)
{
  while (true)
  {
    const std::size_t n = work.size();
    std::vector<char> flag(n, 0);
    bool any = false;
    const std::size_t pairs = closed ? n : n - 1;
    for (std::size_t i = 0; i < pairs && n > 1; ++i)
    {
      const std::size_t j = (i + 1) % n;
      const double hi = work[i].seg.length(), hj = work[j].seg.length();
      if (hi > gamma * hj * (1.0 + kRatioSlack))
      {
        flag[i] = 1;
        any = true;
      }
      else if (hj > gamma * hi * (1.0 + kRatioSlack))
      {
        flag[j] = 1;
        any = true;
      }
    }
    if (!any)
    {
      return;
    }
    bisect_flagged(work, flag);
  }
}

BoundaryMesh finish(const BoundaryMesh &mesh, std::vector<Work> work)
{
  close_ratio(work, mesh.closed(), mesh.gamma());
  std::vector<Segment> elements;
  elements.reserve(work.size());
  for (auto &w : work)
  {
    w.seg.parent = w.origin;
    elements.push_back(w.seg);
  }
  return BoundaryMesh(mesh.curve_ptr(), std::move(elements), mesh.level() + 1, mesh.gamma());
}

std::vector<Work> start_work(const BoundaryMesh &mesh)
{
  std::vector<Work> work;
  work.reserve(mesh.size());
  for (std::size_t e = 0; e < mesh.size(); ++e)
  {
    work.push_back({mesh.element(e), e});
  }
  return work;
}

}  // namespace

BoundaryMesh::BoundaryMesh(std::shared_ptr<const BoundaryCurve> curve,
                           std::vector<Segment> elements, int level, double gamma)
  : curve_(std::move(curve)), elements_(std::move(elements)), level_(level), gamma_(gamma)
{
  if (!curve_)
  {
    throw InvalidArgument("BoundaryMesh: null curve");
  }
  if (elements_.empty())
  {
    throw InvalidArgument("BoundaryMesh: no elements");
  }
  if (!(gamma_ >= 1.0))
  {
    throw InvalidArgument("BoundaryMesh: gamma must be at least 1");
  }
}

BoundaryMesh BoundaryMesh::initial(std::shared_ptr<const BoundaryCurve> curve,
                                   std::size_t min_elements, double gamma)
{
  if (!curve)
  {
    throw InvalidArgument("BoundaryMesh::initial: null curve");
  }
  const double total = curve->length();
  std::vector<Work> work;
  double arc = 0.0;
  for (std::size_t e = 0; e < curve->edge_count(); ++e)
  {
    const SegmentGeometry edge = curve->edge(e);
    const auto pieces = std::max<long>(
        1, std::lround(edge.length / total * static_cast<double>(min_elements)));
    const double h = edge.length / static_cast<double>(pieces);
    for (long k = 0; k < pieces; ++k)
    {
      Segment s;
      const Point2 a = edge.at(static_cast<double>(k) / static_cast<double>(pieces));
      const Point2 b =
          k + 1 == pieces ? edge.b : edge.at(static_cast<double>(k + 1) / static_cast<double>(pieces));
      s.geom = {a, b, h};
      s.edge = e;
      s.arc_start = arc + static_cast<double>(k) * h;
      work.push_back({s, work.size()});
    }
    arc += edge.length;
  }
  if (gamma < 1.0)
  {
    throw InvalidArgument("BoundaryMesh::initial: gamma must be at least 1");
  }
  close_ratio(work, curve->closed, gamma);
  std::vector<Segment> elements;
  for (auto &w : work)
  {
    elements.push_back(w.seg);
  }
  return BoundaryMesh(std::move(curve), std::move(elements), 0, gamma);
}

Point2 BoundaryMesh::node(std::size_t n) const
{
  if (n >= node_count())
  {
    throw InvalidArgument("BoundaryMesh::node: index out of range");
  }
  return n < size() ? elements_[n].geom.a : elements_.back().geom.b;
}

std::vector<std::size_t> BoundaryMesh::node_elements(std::size_t n) const
{
  if (n >= node_count())
  {
    throw InvalidArgument("BoundaryMesh::node_elements: index out of range");
  }
  if (closed())
  {
    if (size() == 1)
    {
      return {0};
    }
    return {(n + size() - 1) % size(), n};
  }
  if (n == 0)
  {
    return {0};
  }
  if (n == size())
  {
    return {size() - 1};
  }
  return {n - 1, n};
}

std::optional<std::size_t> BoundaryMesh::previous(std::size_t e) const
{
  if (e > 0)
  {
    return e - 1;
  }
  if (closed() && size() > 1)
  {
    return size() - 1;
  }
  return std::nullopt;
}

std::optional<std::size_t> BoundaryMesh::next(std::size_t e) const
{
  if (e + 1 < size())
  {
    return e + 1;
  }
  if (closed() && size() > 1)
  {
    return 0;
  }
  return std::nullopt;
}

bool BoundaryMesh::touching(std::size_t e, std::size_t f) const
{
  if (e == f)
  {
    return false;
  }
  return previous(e) == f || next(e) == f;
}

double BoundaryMesh::total_length() const
{
  double s = 0.0;
  for (const auto &el : elements_)
  {
    s += el.length();
  }
  return s;
}

double BoundaryMesh::max_local_ratio() const
{
  double r = 1.0;
  for (std::size_t e = 0; e < size(); ++e)
  {
    if (auto f = next(e))
    {
      const double a = elements_[e].length(), b = elements_[*f].length();
      r = std::max(r, std::max(a / b, b / a));
    }
  }
  return r;
}

BoundaryMesh uniform_refine(const BoundaryMesh &mesh)
{
  auto work = start_work(mesh);
  bisect_flagged(work, std::vector<char>(work.size(), 1));
  return finish(mesh, std::move(work));
}

BoundaryMesh refine_marked(const BoundaryMesh &mesh, std::span<const std::size_t> marked)
{
  auto work = start_work(mesh);
  std::vector<char> flag(work.size(), 0);
  for (std::size_t e : marked)
  {
    if (e >= mesh.size())
    {
      throw InvalidArgument("refine_marked: element index out of range");
    }
    flag[e] = 1;
  }
  bisect_flagged(work, flag);
  return finish(mesh, std::move(work));
}

NodePatch node_patch(const BoundaryMesh &mesh, std::size_t node)
{
  NodePatch p;
  p.node = mesh.node(node);
  p.elements = mesh.node_elements(node);
  std::vector<Point2> pts;
  for (std::size_t e : p.elements)
  {
    pts.push_back(mesh.element(e).geom.a);
    pts.push_back(mesh.element(e).geom.b);
  }
  for (std::size_t i = 0; i < pts.size(); ++i)
  {
    for (std::size_t j = i + 1; j < pts.size(); ++j)
    {
      p.diameter = std::max(p.diameter, distance(pts[i], pts[j]));
    }
  }
  return p;
}

NodePatch node_patch(const BoundaryMesh &mesh, Point2 p)
{
  for (std::size_t n = 0; n < mesh.node_count(); ++n)
  {
    if (mesh.node(n) == p)
    {
      return node_patch(mesh, n);
    }
  }
  throw InvalidArgument("node_patch: point is not a mesh node");
}

std::vector<std::size_t> k_patch(const BoundaryMesh &mesh, std::span<const std::size_t> seed,
                                 int k)
{
  if (k < 0)
  {
    throw InvalidArgument("k_patch: k must be non-negative");
  }
  std::vector<char> in(mesh.size(), 0);
  std::vector<std::size_t> front;
  for (std::size_t e : seed)
  {
    if (e >= mesh.size())
    {
      throw InvalidArgument("k_patch: element index out of range");
    }
    if (!in[e])
    {
      in[e] = 1;
      front.push_back(e);
    }
  }
  for (int layer = 0; layer < k && !front.empty(); ++layer)
  {
    std::vector<std::size_t> grown;
    for (std::size_t e : front)
    {
      for (auto f : {mesh.previous(e), mesh.next(e)})
      {
        if (f && !in[*f])
        {
          in[*f] = 1;
          grown.push_back(*f);
        }
      }
    }
    front = std::move(grown);
  }
  std::vector<std::size_t> out;
  for (std::size_t e = 0; e < mesh.size(); ++e)
  {
    if (in[e])
    {
      out.push_back(e);
    }
  }
  return out;
}

std::vector<std::size_t> locate_parents(const BoundaryMesh &coarse, const BoundaryMesh &fine)
{
  const double scale = std::max(coarse.total_length(), fine.total_length());
  const double tol_curve = 1e-10 * scale;
  if (std::abs(coarse.total_length() - fine.total_length()) > tol_curve ||
      coarse.closed() != fine.closed())
  {
    throw InvalidArgument("locate_parents: meshes cover different curves");
  }
  std::vector<std::size_t> parent(fine.size());
  std::size_t j = 0;
  for (std::size_t i = 0; i < fine.size(); ++i)
  {
    const Segment &t = fine.element(i);
    const double tol = std::min(tol_curve, 1e-3 * t.length());
    while (j < coarse.size() && coarse.element(j).arc_end() <= t.arc_start + tol)
    {
      ++j;
    }
    if (j == coarse.size())
    {
      throw InvalidArgument("locate_parents: meshes are not nested");
    }
    const Segment &c = coarse.element(j);
    const bool inside_arc = c.arc_start <= t.arc_start + tol && t.arc_end() <= c.arc_end() + tol;
    const bool inside_geom = point_segment_distance(t.geom.a, c.geom) <= tol &&
                             point_segment_distance(t.geom.b, c.geom) <= tol;
    if (!inside_arc || !inside_geom)
    {
      throw InvalidArgument("locate_parents: meshes are not nested");
    }
    parent[i] = j;
  }
  return parent;
}

std::vector<std::size_t> refined_elements(const BoundaryMesh &coarse, const BoundaryMesh &fine)
{
  const auto parent = locate_parents(coarse, fine);
  std::vector<std::size_t> count(coarse.size(), 0);
  for (std::size_t p : parent)
  {
    ++count[p];
  }
  std::vector<std::size_t> out;
  for (std::size_t e = 0; e < coarse.size(); ++e)
  {
    if (count[e] != 1)
    {
      out.push_back(e);
    }
  }
  return out;
}

double mesh_width_contraction(int k) { return std::pow(0.5, 1.0 / static_cast<double>(k + 1)); }

MeshWidth initial_mesh_width(const BoundaryMesh &mesh, int k)
{
  if (k < 0)
  {
    throw InvalidArgument("initial_mesh_width: k must be non-negative");
  }
  MeshWidth w;
  w.k = k;
  w.q = mesh_width_contraction(k);
  for (const auto &s : mesh.elements())
  {
    w.plain.push_back(s.length());
  }
  w.modified = w.plain;
  w.c_meshsize = 1.0;
  return w;
}

MeshWidth advance_mesh_width(const MeshWidth &previous, const BoundaryMesh &coarse,
                             const BoundaryMesh &fine)
{
  if (previous.modified.size() != coarse.size())
  {
    throw InvalidArgument("advance_mesh_width: width does not match the coarse mesh");
  }
  const auto parent = locate_parents(coarse, fine);
  const auto refined = refined_elements(coarse, fine);
  const auto patch = k_patch(coarse, refined, previous.k);
  std::vector<char> contract(coarse.size(), 0);
  for (std::size_t e : patch)
  {
    contract[e] = 1;
  }
  MeshWidth w;
  w.k = previous.k;
  w.q = previous.q;
  w.c_meshsize = previous.c_meshsize;
  for (std::size_t i = 0; i < fine.size(); ++i)
  {
    const double h = fine.element(i).length();
    const double f = contract[parent[i]] ? w.q : 1.0;
    const double m = std::min(h, f * previous.modified[parent[i]]);
    w.plain.push_back(h);
    w.modified.push_back(m);
    w.c_meshsize = std::max(w.c_meshsize, h / m);
  }
  return w;
}

std::vector<MeshWidth> modified_mesh_width(std::span<const BoundaryMesh> sequence, int k)
{
  std::vector<MeshWidth> out;
  if (sequence.empty())
  {
    return out;
  }
  out.push_back(initial_mesh_width(sequence[0], k));
  for (std::size_t l = 1; l < sequence.size(); ++l)
  {
    out.push_back(advance_mesh_width(out.back(), sequence[l - 1], sequence[l]));
  }
  return out;
}

void write_mesh_snapshot(std::ostream &os, const BoundaryMesh &mesh)
{
  const auto old = os.precision(17);
  for (std::size_t e = 0; e < mesh.size(); ++e)
  {
    const Segment &s = mesh.element(e);
    const long parent = s.parent && mesh.level() > 0 ? static_cast<long>(*s.parent) : -1;
    os << mesh.level() << ' ' << e << ' ' << parent << ' ' << s.geom.a.x << ' ' << s.geom.a.y
       << ' ' << s.geom.b.x << ' ' << s.geom.b.y << '\n';
  }
  os.precision(old);
}

}  // namespace abem
