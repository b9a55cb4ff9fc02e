// SPDX-License-Identifier: Apache-2.0

#include <algorithm>
#include <random>
#include <sstream>

#include "abem/errors.hpp"
#include "doctest.h"
#include "test_helpers.hpp"

using namespace abem;
using abem::test::chain;

TEST_CASE("normalize_curve scales to diameter one half")
{
  SUBCASE("slit")
  {
    const auto n = normalize_curve(make_curve({{-1, 0}, {1, 0}}, false));
    CHECK(n.scale_factor == doctest::Approx(0.25));
    CHECK(n.curve.vertices[0].x == doctest::Approx(-0.25));
    CHECK(n.curve.vertices[1].x == doctest::Approx(0.25));
    CHECK(n.curve.diameter() == doctest::Approx(0.5));
  }
  SUBCASE("already normalized")
  {
    const auto n = normalize_curve(make_curve({{0, 0}, {0.5, 0}}, false));
    CHECK(n.scale_factor == doctest::Approx(1.0));
    CHECK(n.curve.vertices[1].x == doctest::Approx(0.5));
  }
  SUBCASE("unit square")
  {
    const auto n = normalize_curve(make_curve({{0, 0}, {1, 0}, {1, 1}, {0, 1}}, true));
    CHECK(n.scale_factor == doctest::Approx(1.0 / (2.0 * std::sqrt(2.0))));
    CHECK(n.curve.edge(0).length == doctest::Approx(1.0 / (2.0 * std::sqrt(2.0))));
  }
  CHECK_THROWS_AS(make_curve({{1, 1}, {1, 1}}, false), InvalidArgument);
  CHECK_THROWS_AS(make_curve({{1, 1}}, false), InvalidArgument);
}

TEST_CASE("make_curve finds corners")
{
  const auto c = make_curve({{0, 0}, {1, 0}, {2, 0}, {2, 1}}, false);
  CHECK(c.corner_indices == std::vector<std::size_t>{0, 2, 3});
  const auto sq = make_curve({{0, 0}, {1, 0}, {1, 1}, {0, 1}}, true);
  CHECK(sq.corner_indices.size() == 4);
}

TEST_CASE("uniform_refine bisects every element")
{
  const auto m = chain({{0, 0}, {1, 0}}, 1);
  const BoundaryMesh r1 = uniform_refine(*m);
  REQUIRE(r1.size() == 2);
  CHECK(r1.element(0).geom.b.x == 0.5);
  CHECK(r1.element(0).parent == 0u);
  CHECK(r1.element(1).parent == 0u);
  const BoundaryMesh r2 = uniform_refine(r1);
  REQUIRE(r2.size() == 4);
  for (const auto &s : r2.elements())
    CHECK(s.length() == 0.25);
  CHECK(r2.level() == 2);
}

TEST_CASE("refine_marked with closure")
{
  SUBCASE("no propagation")
  {
    const auto m = chain({{0, 0}, {2, 0}}, 2);
    const std::size_t marked[] = {0};
    const BoundaryMesh r = refine_marked(*m, marked);
    REQUIRE(r.size() == 3);
    CHECK(r.element(0).length() == 0.5);
    CHECK(r.element(1).length() == 0.5);
    CHECK(r.element(2).length() == 1.0);
  }
  SUBCASE("ratio 8 forces the neighbour")
  {
    auto curve = std::make_shared<const BoundaryCurve>(make_curve({{0, 0}, {1, 0}}, false));
    std::vector<Segment> segs(2);
    segs[0].geom = {{0, 0}, {0.25, 0}, 0.25};
    segs[1].geom = {{0.25, 0}, {1, 0}, 0.75};
    segs[1].arc_start = 0.25;
    const BoundaryMesh m(curve, segs, 0, 2.0);
    const std::size_t marked[] = {0};
    const BoundaryMesh r = refine_marked(m, marked);
    CHECK(r.size() > 3);
    CHECK(r.max_local_ratio() <= 2.0 + 1e-12);
    const auto parents = locate_parents(m, r);
    CHECK(std::count(parents.begin(), parents.end(), 1u) >= 2);
  }
  SUBCASE("empty marking")
  {
    const auto m = chain({{0, 0}, {2, 0}}, 2);
    const BoundaryMesh r = refine_marked(*m, {});
    REQUIRE(r.size() == 2);
    CHECK(r.element(1).geom.a == m->element(1).geom.a);
  }
}

TEST_CASE("node patches")
{
  const auto m = chain({{0, 0}, {2, 0}}, 2);
  const NodePatch inner = node_patch(*m, 1);
  CHECK(inner.elements == std::vector<std::size_t>{0, 1});
  CHECK(inner.diameter == doctest::Approx(2.0));
  const NodePatch end = node_patch(*m, Point2{0, 0});
  CHECK(end.elements == std::vector<std::size_t>{0});
  CHECK(end.diameter == doctest::Approx(1.0));
  CHECK_THROWS_AS(node_patch(*m, Point2{0.5, 0}), InvalidArgument);

  const auto sq = abem::test::square(8);
  for (std::size_t n = 0; n < sq->node_count(); ++n)
    CHECK(node_patch(*sq, n).elements.size() == 2);
}

TEST_CASE("k_patch on a chain")
{
  const auto m = chain({{0, 0}, {5, 0}}, 5);
  REQUIRE(m->size() == 5);
  const std::size_t seed[] = {2};
  CHECK(k_patch(*m, seed, 0) == std::vector<std::size_t>{2});
  CHECK(k_patch(*m, seed, 1) == std::vector<std::size_t>{1, 2, 3});
  CHECK(k_patch(*m, seed, 2) == std::vector<std::size_t>{0, 1, 2, 3, 4});

  const auto sq = abem::test::square(4);
  const std::size_t first[] = {0};
  CHECK(k_patch(*sq, first, 1) == std::vector<std::size_t>{0, 1, 3});
}

TEST_CASE("mesh width examples")
{
  const auto m = chain({{0, 0}, {1, 0}}, 4);
  SUBCASE("no history")
  {
    const MeshWidth w = initial_mesh_width(*m, 0);
    CHECK(w.modified == w.plain);
  }
  SUBCASE("uniform refinement with k = 0 halves the width")
  {
    const MeshWidth w0 = initial_mesh_width(*m, 0);
    const BoundaryMesh f = uniform_refine(*m);
    const MeshWidth w1 = advance_mesh_width(w0, *m, f);
    CHECK(w1.q == 0.5);
    for (std::size_t e = 0; e < f.size(); ++e)
      CHECK(w1.modified[e] == doctest::Approx(w0.modified[*f.element(e).parent] / 2));
  }
  SUBCASE("one marked element, k = 1")
  {
    const MeshWidth w0 = initial_mesh_width(*m, 1);
    const std::size_t marked[] = {1};
    const BoundaryMesh f = refine_marked(*m, marked);
    const MeshWidth w1 = advance_mesh_width(w0, *m, f);
    const double q = mesh_width_contraction(1);
    CHECK(q == doctest::Approx(std::sqrt(0.5)));
    for (std::size_t e = 0; e < f.size(); ++e)
    {
      const std::size_t p = *f.element(e).parent;
      if (p <= 2)
        CHECK(w1.modified[e] <= q * w0.modified[p] * (1 + 1e-15));
      else
        CHECK(w1.modified[e] == w0.modified[p]);
    }
  }
}

TEST_CASE("mesh invariants along random refinement sequences")
{
  std::mt19937_64 rng(11);
  const std::vector<std::shared_ptr<const BoundaryMesh>> starts = {
      abem::test::slit(2), abem::test::square(4),
      chain({{-0.2, -0.2}, {0, -0.2}, {0, 0}, {0.2, 0}, {0.2, 0.2}, {-0.2, 0.2}}, 6)};
  for (const auto &start : starts)
  {
    for (int k : {0, 1, 2})
    {
      std::vector<BoundaryMesh> seq{*start};
      MeshWidth w = initial_mesh_width(seq.back(), k);
      for (int level = 0; level < 10; ++level)
      {
        const BoundaryMesh &cur = seq.back();
        std::vector<std::size_t> marked;
        std::bernoulli_distribution pick(0.2);
        for (std::size_t e = 0; e < cur.size(); ++e)
          if (pick(rng) || e == 0)
            marked.push_back(e);
        BoundaryMesh next = refine_marked(cur, marked);

        CHECK(abem::test::rel(next.total_length(), start->total_length()) <= 1e-12);
        CHECK(next.max_local_ratio() <= cur.gamma() + 1e-12);
        const auto parents = locate_parents(cur, next);
        for (std::size_t e = 0; e < next.size(); ++e)
        {
          const SegmentGeometry &pg = cur.element(parents[e]).geom;
          CHECK(point_segment_distance(next.element(e).geom.a, pg) <= 1e-12);
          CHECK(point_segment_distance(next.element(e).geom.b, pg) <= 1e-12);
          CHECK(next.element(e).parent == parents[e]);
        }
        for (std::size_t t : marked)
        {
          CHECK(std::count(parents.begin(), parents.end(), t) >= 2);
          for (std::size_t e = 0; e < next.size(); ++e)
            if (parents[e] == t && std::count(parents.begin(), parents.end(), t) == 2)
              CHECK(next.element(e).length() == cur.element(t).length() / 2);
        }

        const MeshWidth wn = advance_mesh_width(w, cur, next);
        const auto refined = refined_elements(cur, next);
        const auto patch = k_patch(cur, refined, k);
        for (std::size_t e = 0; e < next.size(); ++e)
        {
          const double d = next.element(e).length();
          CHECK(wn.modified[e] <= d);
          CHECK(wn.modified[e] * wn.c_meshsize >= d * (1 - 1e-14));
          CHECK(wn.modified[e] <= w.modified[parents[e]]);
          if (std::binary_search(patch.begin(), patch.end(), parents[e]))
            CHECK(wn.modified[e] <= wn.q * w.modified[parents[e]] * (1 + 1e-14));
        }
        w = wn;
        seq.push_back(std::move(next));
      }
      const auto batch = modified_mesh_width(seq, k);
      REQUIRE(batch.size() == seq.size());
      CHECK(batch.back().modified == w.modified);
    }
  }
}

TEST_CASE("locate_parents rejects non-nested meshes")
{
  const auto a = chain({{0, 0}, {1, 0}}, 3);
  const auto b = chain({{0, 0}, {1, 0}}, 2);
  CHECK_THROWS_AS(locate_parents(*a, *b), InvalidArgument);
}

TEST_CASE("mesh snapshot format")
{
  const auto m = chain({{0, 0}, {1, 0}}, 1);
  const BoundaryMesh f = uniform_refine(*m);
  std::ostringstream s0, s1;
  write_mesh_snapshot(s0, *m);
  write_mesh_snapshot(s1, f);
  CHECK(s0.str() == "0 0 -1 0 0 1 0\n");
  CHECK(s1.str() == "1 0 0 0 0 0.5 0\n1 1 0 0.5 0 1 0\n");
}
