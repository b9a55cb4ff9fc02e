// SPDX-License-Identifier: Apache-2.0

#include <numbers>
#include <random>
#include <sstream>

#include "abem/errors.hpp"
#include "abem/estimators.hpp"
#include "abem/kernel.hpp"
#include "abem/oracle.hpp"
#include "abem/quadrature.hpp"
#include "doctest.h"
#include "test_helpers.hpp"

using namespace abem;
using abem::test::chain;
using abem::test::random_density;
using abem::test::rel;

namespace
{

RightHandSide arc_length()
{
  RightHandSide f;
  f.value = [](const TraceSample &s) { return s.arc; };
  f.derivative = [](const TraceSample &) { return 1.0; };
  return f;
}

RightHandSide smooth()
{
  RightHandSide f;
  f.value = [](const TraceSample &s) { return std::exp(s.x.x) * std::cos(3 * s.x.y); };
  f.derivative = [](const TraceSample &s) {
    const double e = std::exp(s.x.x);
    return e * std::cos(3 * s.x.y) * s.tangent.x - 3 * e * std::sin(3 * s.x.y) * s.tangent.y;
  };
  return f;
}

double haar_unit()
{
  const SegmentGeometry a{{0, 0}, {0.5, 0}, 0.5}, b{{0.5, 0}, {1, 0}, 0.5};
  return 2.0 * kLaplaceFactor * (oracle::log_pair_integral(a, a) - oracle::log_pair_integral(a, b));
}

}  // namespace

TEST_CASE("Slobodeckij seminorm of polynomial residuals")
{
  const auto m = chain({{0, 0}, {2, 0}}, 2);
  auto arc = [&](std::size_t e, double t) { return m->element(e).arc_start + t * m->element(e).length(); };
  CHECK(patch_seminorm_sq(*m, 1, [](std::size_t, double) { return 3.5; }) == doctest::Approx(0.0));
  CHECK(rel(patch_seminorm_sq(*m, 1, arc), 4.0) <= 1e-8);
  // |s^2 - t^2|^2 / |s - t|^2 = (s + t)^2, integrated over [0, 2]^2.
  CHECK(rel(patch_seminorm_sq(*m, 1, [&](std::size_t e, double t) { return std::pow(arc(e, t), 2); }),
            56.0 / 3.0) <= 1e-6);
  // The endpoint patch [0, 1]: int_0^1 int_0^1 (s + t)^2 = 7/6.
  CHECK(rel(patch_seminorm_sq(*m, 0, [&](std::size_t e, double t) { return std::pow(arc(e, t), 2); }),
            7.0 / 6.0) <= 1e-6);

  auto curve = std::make_shared<const BoundaryCurve>(make_curve({{0, 0}, {0.7, 0}}, false));
  std::vector<Segment> segs(2);
  segs[0].geom = {{0, 0}, {0.3, 0}, 0.3};
  segs[1].geom = {{0.3, 0}, {0.7, 0}, 0.4};
  segs[1].arc_start = 0.3;
  const BoundaryMesh uneven(curve, segs, 0, 2.0);
  auto arc2 = [&](std::size_t e, double t) { return uneven.element(e).arc_start + t * uneven.element(e).length(); };
  CHECK(rel(patch_seminorm_sq(uneven, 1, arc2), 0.49) <= 1e-8);
  CHECK(rel(patch_seminorm_sq(uneven, 0, arc2), 0.09) <= 1e-8);
}

TEST_CASE("Slobodeckij seminorm across a corner matches brute-force quadrature")
{
  const auto m = chain({{0.1, 0}, {0, 0}, {0, 0.15}}, 2);
  REQUIRE(m->size() == 2);
  auto r = [](Point2 p) { return std::sin(4 * p.x) + p.y * p.y + 2 * p.x * p.y; };
  const double fast = patch_seminorm_sq(*m, 1, [&](std::size_t e, double t) { return r(m->element(e).geom.at(t)); });

  // Different rules in x and y keep the nodes off the diagonal.
  auto points = [&](const QuadratureRule &g, int pieces) {
    std::vector<std::pair<Point2, double>> pts;
    for (std::size_t e = 0; e < 2; ++e)
    {
      const SegmentGeometry &s = m->element(e).geom;
      for (int k = 0; k < pieces; ++k)
        for (std::size_t q = 0; q < g.size(); ++q)
          pts.emplace_back(s.at((k + g.nodes[q]) / pieces), s.length * g.weights[q] / pieces);
    }
    return pts;
  };
  const auto xs = points(gauss_legendre(8), 96), ys = points(gauss_legendre(7), 97);
  double brute = 0.0;
  for (const auto &[x, wx] : xs)
    for (const auto &[y, wy] : ys)
    {
      const double d = distance(x, y);
      brute += wx * wy * std::pow(r(x) - r(y), 2) / (d * d);
    }
  CHECK(rel(fast, brute) <= 1e-5);
}

TEST_CASE("two-level test-function energies")
{
  const double haar = haar_unit();
  CHECK(haar == doctest::Approx(0.11031).epsilon(1e-4));
  const SegmentGeometry a{{0, 0}, {0.5, 0}, 0.5};
  CHECK(kLaplaceFactor * oracle::log_pair_integral(a, a) == doctest::Approx(0.0872626).epsilon(1e-6));

  for (double h : {0.5, 0.125})
  {
    const auto m = chain({{0, 0}, {h, 0}}, 1);
    const Density zero(DiscreteSpace(SpaceKind::P0, m));
    const EstimatorReport r = two_level(arc_length(), zero, EquationTag::WeaklySingular);
    CHECK(rel(r.local[0], h / (4.0 * std::sqrt(haar))) <= 1e-8);
  }
  const auto slit = abem::test::slit(4);
  const Density zero(DiscreteSpace(SpaceKind::S1Tilde, slit));
  const EstimatorReport r = two_level(RightHandSide::constant(1.0), zero, EquationTag::Hypersingular);
  for (std::size_t e = 0; e < slit->size(); ++e)
    CHECK(rel(r.local[e], 0.5 * slit->element(e).length() / std::sqrt(4.0 * haar)) <= 1e-8);

  const ResidualData res = make_residual(EquationTag::Hypersingular, RightHandSide::constant(1.0), zero);
  CHECK(two_level_hat_indicator(res, 0, slit->node(0)) == 0.0);
  CHECK(two_level_hat_indicator(res, 3, slit->node(4)) == 0.0);
  CHECK(two_level_hat_indicator(res, 1, slit->element(1).geom.at(0.5)) > 0.0);
  CHECK_THROWS_AS(two_level_hat_indicator(res, 1, slit->node(1)), InvalidArgument);
}

TEST_CASE("estimators vanish for trial-space data")
{
  const auto m = chain({{-0.2, -0.2}, {0, -0.2}, {0, 0}, {0.2, 0}, {0.2, 0.2}}, 7);
  for (std::uint64_t seed = 1; seed <= 5; ++seed)
  {
    const Density v = random_density(DiscreteSpace(SpaceKind::P0, m), seed);
    const RightHandSide f = RightHandSide::from_density(v);
    const GalerkinSolution u = solve_galerkin(EquationTag::WeaklySingular, f, m);
    CHECK(faermann(f, u.density).total() <= 1e-8);
    CHECK(two_level(f, u.density, EquationTag::WeaklySingular).total() <= 1e-10);
    CHECK(weighted_residual(f, u.density, EquationTag::WeaklySingular).total() <= 1e-8);
    const MeshWidth w = initial_mesh_width(*m, 1);
    CHECK(rho_modified(f, u.density, w, EquationTag::WeaklySingular).total() <= 1e-8);

    const Density vh = random_density(DiscreteSpace(SpaceKind::S1Tilde, m), seed);
    const RightHandSide fh = RightHandSide::from_density(vh);
    const GalerkinSolution uh = solve_galerkin(EquationTag::Hypersingular, fh, m);
    CHECK(two_level(fh, uh.density, EquationTag::Hypersingular).total() <= 1e-10);
    CHECK(weighted_residual(fh, uh.density, EquationTag::Hypersingular).total() <= 1e-8);
  }
}

TEST_CASE("weighted residual of simple data")
{
  const auto m = std::make_shared<const BoundaryMesh>(
      [] {
        const auto base = abem::test::slit(3);
        const std::size_t marked[] = {0};
        return refine_marked(*base, marked);
      }());
  const EstimatorReport w = weighted_residual(arc_length(), Density(DiscreteSpace(SpaceKind::P0, m)),
                                              EquationTag::WeaklySingular);
  for (std::size_t e = 0; e < m->size(); ++e)
    CHECK(rel(w.local[e], m->element(e).length()) <= 1e-12);
  const EstimatorReport h = weighted_residual(RightHandSide::constant(1.0),
                                              Density(DiscreteSpace(SpaceKind::S1Tilde, m)),
                                              EquationTag::Hypersingular);
  for (std::size_t e = 0; e < m->size(); ++e)
    CHECK(rel(h.local[e], m->element(e).length()) <= 1e-12);
}

TEST_CASE("regularity and equation checks")
{
  const auto m = abem::test::slit(4);
  const Density u(DiscreteSpace(SpaceKind::P0, m));
  RightHandSide rough = RightHandSide::constant(1.0);
  rough.regularity = Regularity::L2;
  try
  {
    (void)weighted_residual(rough, u, EquationTag::WeaklySingular);
    FAIL("expected rejection");
  }
  catch (const InvalidArgument &e)
  {
    CHECK(std::string(e.what()).find("H_one") != std::string::npos);
  }
  CHECK_THROWS_AS(faermann(rough, u), InvalidArgument);
  const Density uh(DiscreteSpace(SpaceKind::S1Tilde, m));
  CHECK_THROWS_AS(faermann(RightHandSide::constant(1.0), uh), InvalidArgument);
}

TEST_CASE("modified estimator sandwich and report totals")
{
  const RightHandSide f = smooth();
  auto mesh = abem::test::slit(3);
  MeshWidth w = initial_mesh_width(*mesh, 1);
  CHECK(rel(rho_modified(f, Density(DiscreteSpace(SpaceKind::P0, mesh)), w, EquationTag::WeaklySingular).total(),
            weighted_residual(f, Density(DiscreteSpace(SpaceKind::P0, mesh)), EquationTag::WeaklySingular).total()) <= 1e-14);
  for (int level = 0; level < 8; ++level)
  {
    const GalerkinSolution u = solve_galerkin(EquationTag::WeaklySingular, f, mesh);
    const EstimatorReport eta = weighted_residual(f, u.density, EquationTag::WeaklySingular);
    const EstimatorReport rho = rho_modified(f, u.density, w, EquationTag::WeaklySingular);
    double sum = 0.0;
    for (std::size_t e = 0; e < mesh->size(); ++e)
    {
      CHECK(rho.local[e] <= eta.local[e] * (1 + 1e-14));
      CHECK(rho.local[e] >= eta.local[e] / std::sqrt(w.c_meshsize) * (1 - 1e-14));
      CHECK(eta.local[e] >= 0.0);
      sum += eta.local[e] * eta.local[e];
    }
    CHECK(rel(eta.total() * eta.total(), sum) <= 1e-12);
    std::vector<std::size_t> marked{0, mesh->size() - 1};
    auto next = std::make_shared<const BoundaryMesh>(refine_marked(*mesh, marked));
    w = advance_mesh_width(w, *mesh, *next);
    mesh = next;
  }
}

TEST_CASE("inverse estimate ratios stay bounded under refinement")
{
  const RightHandSide one = RightHandSide::constant(1.0);
  for (EquationTag eq : {EquationTag::WeaklySingular, EquationTag::Hypersingular})
  {
    auto mesh = abem::test::slit(2);
    double first = 0.0, worst = 0.0;
    for (int level = 0; level < 8; ++level)
    {
      const DiscreteSpace space(space_kind(eq), mesh);
      const GalerkinMatrix a = assemble_operator(eq, space);
      double level_max = 0.0;
      for (std::size_t i = 0; i < space.dof_count(); ++i)
      {
        Eigen::VectorXd c = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(space.dof_count()));
        c[static_cast<Eigen::Index>(i)] = 1.0;
        level_max = std::max(level_max, inverse_estimate_ratio(eq, Density(space, c), a));
      }
      for (std::uint64_t seed = 0; seed < 5; ++seed)
        level_max = std::max(level_max, inverse_estimate_ratio(eq, random_density(space, seed), a));
      if (level == 0)
        first = level_max;
      worst = std::max(worst, level_max);
      const std::size_t marked[] = {0};
      mesh = std::make_shared<const BoundaryMesh>(refine_marked(*mesh, marked));
    }
    CHECK(worst <= 2.0 * first);
  }
}

TEST_CASE("estimator report format")
{
  EstimatorReport r;
  r.kind = EstimatorKind::TwoLevel;
  r.level = 3;
  r.local = {0.5, 0.25};
  std::ostringstream os;
  write_estimator_report(os, r);
  CHECK(os.str() == "3 two_level 0 0.5\n3 two_level 1 0.25\n");
  CHECK(r.total() == doctest::Approx(std::sqrt(0.3125)));
}
