// SPDX-License-Identifier: Apache-2.0

#include <numbers>
#include <random>
#include <sstream>

#include <Eigen/Cholesky>

#include "abem/errors.hpp"
#include "abem/kernel.hpp"
#include "abem/operators.hpp"
#include "abem/oracle.hpp"
#include "abem/quadrature.hpp"
#include "doctest.h"
#include "test_helpers.hpp"

using namespace abem;
using abem::test::chain;
using abem::test::rel;

namespace
{

constexpr double pi = std::numbers::pi;
const AssemblyOptions kUnit{.allow_unnormalized = true};

std::shared_ptr<const BoundaryMesh> unit_pair() { return chain({{0, 0}, {2, 0}}, 2); }

}  // namespace

TEST_CASE("closed-form kernel integrals agree with the oracle")
{
  const auto pairs = oracle::random_segment_pairs(100, 2024);
  REQUIRE(pairs.size() == 100);
  double worst = 0.0;
  for (const auto &p : pairs)
  {
    const double exact = oracle::log_pair_integral(p.s, p.t);
    const double fast = log_pair_integral(p.s, p.t);
    worst = std::max(worst, rel(fast, exact));
    CHECK_MESSAGE(rel(fast, exact) <= 1e-8, p.family);
  }
  MESSAGE("worst relative error " << worst);

  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(-0.25, 0.25);
  for (int i = 0; i < 50; ++i)
  {
    const SegmentGeometry s{{u(rng), u(rng)}, {u(rng), u(rng)}, 0};
    SegmentGeometry seg = s;
    seg.length = distance(s.a, s.b);
    const Point2 x{u(rng), u(rng)};
    CHECK(rel(log_integral(x, seg), oracle::log_integral(x, seg)) <= 1e-8);
  }
}

TEST_CASE("oracle self-test passes")
{
  std::ostringstream log;
  const auto r = oracle::selftest(log, 100, 7);
  CHECK(r.failures == 0);
  CHECK(r.checks >= 100);
  CHECK(r.worst_relative_error <= 1e-8);
}

TEST_CASE("simple-layer entries on unit elements")
{
  const auto m = unit_pair();
  const DiscreteSpace p0(SpaceKind::P0, m);
  const GalerkinMatrix v = assemble_simple_layer(p0, kUnit);
  CHECK(rel(v.entries(0, 0), 3.0 / (4.0 * pi)) <= 1e-8);
  CHECK(rel(v.entries(1, 1), 3.0 / (4.0 * pi)) <= 1e-8);
  CHECK(rel(v.entries(0, 1), (1.5 - 2.0 * std::log(2.0)) / (2.0 * pi)) <= 1e-8);
  CHECK(v.entries(0, 1) == v.entries(1, 0));

  const SegmentGeometry unit{{0, 0}, {1, 0}, 1.0};
  CHECK(rel(kLaplaceFactor * log_pair_integral(unit, unit),
            kLaplaceFactor * oracle::log_pair_integral(unit, unit)) <= 1e-8);

  for (double h : {0.5, 0.25})
  {
    const SegmentGeometry s{{0, 0}, {h, 0}, h};
    const double expected = h * h / (2 * pi) * (1.5 - std::log(h));
    CHECK(rel(kLaplaceFactor * log_pair_integral(s, s), expected) <= 1e-12);
    CHECK(rel(kLaplaceFactor * oracle::log_pair_integral(s, s), expected) <= 1e-8);
  }
  CHECK_THROWS_AS(assemble_simple_layer(p0), InvalidArgument);
}

TEST_CASE("hypersingular entries")
{
  const auto m = unit_pair();
  const DiscreteSpace s1(SpaceKind::S1Tilde, m);
  REQUIRE(s1.dof_count() == 1);
  const GalerkinMatrix w = assemble_hypersingular(s1, kUnit);
  const double v00 = 3.0 / (4.0 * pi);
  const double v01 = (1.5 - 2.0 * std::log(2.0)) / (2.0 * pi);
  CHECK(rel(w.entries(0, 0), 2.0 * (v00 - v01)) <= 1e-10);
  CHECK(w.entries(0, 0) == doctest::Approx(0.44127).epsilon(1e-4));

  const auto sq = abem::test::square(8);
  const DiscreteSpace full(SpaceKind::S1, sq);
  const GalerkinMatrix ws = assemble_hypersingular(full);
  const double scale = ws.entries.cwiseAbs().maxCoeff();
  for (Eigen::Index i = 0; i < ws.entries.rows(); ++i)
    CHECK(std::abs(ws.entries.row(i).sum()) <= 1e-10 * scale);

  const GalerkinMatrix st = stabilize(ws, full);
  CHECK(st.tag == OperatorTag::HypersingularStabilized);
  CHECK(Eigen::LLT<Eigen::MatrixXd>(st.entries).info() == Eigen::Success);
  const Eigen::VectorXd mvec = basis_integrals(full);
  for (Eigen::Index i = 0; i < mvec.size(); ++i)
    CHECK(rel(mvec[i], sq->element(0).length()) <= 1e-14);

  CHECK_THROWS_AS(DiscreteSpace(SpaceKind::S1Tilde, sq), InvalidArgument);
  CHECK_THROWS_AS(assemble_hypersingular(DiscreteSpace(SpaceKind::S1, abem::test::slit(4))),
                  InvalidArgument);
  CHECK_THROWS_AS(stabilize(assemble_hypersingular(DiscreteSpace(SpaceKind::S1Tilde, abem::test::slit(4))),
                            DiscreteSpace(SpaceKind::S1Tilde, abem::test::slit(4))),
                  InvalidArgument);
}

TEST_CASE("assembled matrices are symmetric and positive definite")
{
  const std::vector<std::shared_ptr<const BoundaryMesh>> meshes = {
      abem::test::slit(7), abem::test::square(9),
      chain({{-0.2, -0.2}, {0, -0.2}, {0, 0}, {0.2, 0}, {0.2, 0.2}, {-0.2, 0.2}}, 11)};
  for (const auto &m : meshes)
  {
    std::vector<GalerkinMatrix> mats;
    mats.push_back(assemble_simple_layer(DiscreteSpace(SpaceKind::P0, m)));
    if (m->closed())
    {
      const DiscreteSpace s(SpaceKind::S1, m);
      mats.push_back(stabilize(assemble_hypersingular(s), s));
    }
    else
    {
      mats.push_back(assemble_hypersingular(DiscreteSpace(SpaceKind::S1Tilde, m)));
    }
    for (const auto &a : mats)
    {
      const double scale = a.entries.cwiseAbs().maxCoeff();
      CHECK((a.entries - a.entries.transpose()).cwiseAbs().maxCoeff() <= 1e-12 * scale);
      CHECK(Eigen::LLT<Eigen::MatrixXd>(a.entries).info() == Eigen::Success);
    }
  }
}

TEST_CASE("Galerkin forms are consistent across refinement")
{
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(-1, 1);
  const auto coarse = chain({{-0.2, -0.2}, {0, -0.2}, {0, 0}, {0.2, 0}}, 5);
  const std::size_t marked[] = {0, 3};
  const auto fine = std::make_shared<const BoundaryMesh>(refine_marked(*coarse, marked));
  for (SpaceKind kind : {SpaceKind::P0, SpaceKind::S1Tilde})
  {
    const DiscreteSpace cs(kind, coarse), fs(kind, fine);
    const GalerkinMatrix ac = kind == SpaceKind::P0 ? assemble_simple_layer(cs) : assemble_hypersingular(cs);
    const GalerkinMatrix af = kind == SpaceKind::P0 ? assemble_simple_layer(fs) : assemble_hypersingular(fs);
    Eigen::VectorXd v(cs.dof_count()), w(cs.dof_count());
    for (Eigen::Index i = 0; i < v.size(); ++i)
    {
      v[i] = u(rng);
      w[i] = u(rng);
    }
    const Eigen::VectorXd vf = prolong(Density(cs, v), fine).coefficients;
    const Eigen::VectorXd wf = prolong(Density(cs, w), fine).coefficients;
    CHECK(rel(wf.dot(af.entries * vf), w.dot(ac.entries * v)) <= 1e-10);
  }
}

TEST_CASE("single-layer evaluation")
{
  const auto unit = chain({{0, 0}, {1, 0}}, 1);
  const DiscreteSpace p0(SpaceKind::P0, unit);
  const Density one(p0, Eigen::VectorXd::Ones(1));
  const double expected = (1.0 + std::log(2.0)) / (2.0 * pi);
  CHECK(rel(eval_single_layer(one, {0.5, 0}), expected) <= 1e-12);
  CHECK(expected == doctest::Approx(0.269474).epsilon(1e-6));
  CHECK(eval_single_layer(Density(p0), {0.3, 0}) == 0.0);
  CHECK(eval_tangential_derivative_V(Density(p0), {0.3, 0}) == 0.0);

  const auto m = chain({{-0.25, 0}, {0.25, 0}}, 6);
  const DiscreteSpace ps(SpaceKind::P0, m);
  Eigen::VectorXd c(6);
  c << 0.3, -1.2, 0.7, 2.0, -0.4, 1.1;
  const Density d(ps, c);
  const Density d3(ps, 3.0 * c);
  for (double x : {-0.21, -0.03, 0.11, 0.24})
    CHECK(std::abs(eval_single_layer(d3, {x, 0}) - 3.0 * eval_single_layer(d, {x, 0})) <=
          1e-13 * std::max(1.0, std::abs(eval_single_layer(d3, {x, 0}))));

  const double h = 1e-6;
  const Point2 q{0.25, 0};
  const double fd = (eval_single_layer(one, {0.25 + h, 0}) - eval_single_layer(one, {0.25 - h, 0})) / (2 * h);
  CHECK(std::abs(eval_tangential_derivative_V(one, q) - fd) <= 1e-6);

  const auto sym = chain({{-0.25, 0}, {0.25, 0}}, 3);
  Eigen::VectorXd s(3);
  s << 1.0, 0.5, 1.0;
  CHECK(std::abs(eval_tangential_derivative_V(Density(DiscreteSpace(SpaceKind::P0, sym), s), {0, 0})) <= 1e-14);

  CHECK_THROWS_AS(eval_single_layer(d, {0.25, 0}), InvalidArgument);
  CHECK_THROWS_AS(eval_single_layer(d, {0.0, 0.1}), InvalidArgument);
  CHECK_THROWS_AS(eval_tangential_derivative_V(d, m->node(2)), InvalidArgument);
}

TEST_CASE("hypersingular residual part")
{
  const auto sq = abem::test::square(8);
  const DiscreteSpace s1(SpaceKind::S1, sq);
  const Density constant(s1, Eigen::VectorXd::Ones(static_cast<Eigen::Index>(s1.dof_count())));
  for (std::size_t e = 0; e < sq->size(); ++e)
    CHECK(std::abs(eval_W_residual_part(constant, sq->element(e).geom.at(0.37))) <= 1e-10);
  CHECK(eval_W_residual_part(Density(s1), sq->element(0).geom.at(0.5)) == 0.0);

  const auto m = unit_pair();
  const DiscreteSpace st(SpaceKind::S1Tilde, m);
  const Density hat(st, Eigen::VectorXd::Ones(1));
  const QuadratureRule rule = graded_rule(30, 8);
  double sum = 0.0;
  for (std::size_t e = 0; e < 2; ++e)
    for (std::size_t q = 0; q < rule.size(); ++q)
    {
      const double t = rule.nodes[q];
      const Point2 x = m->element(e).geom.at(t);
      sum += rule.weights[q] * density_value(hat, e, t) * eval_W_residual_part(hat, x);
    }
  CHECK(rel(sum, assemble_hypersingular(st, kUnit).entries(0, 0)) <= 1e-6);
}

TEST_CASE("matrix dump format")
{
  GalerkinMatrix a;
  a.entries = Eigen::MatrixXd{{2.0, 0.5}, {0.5, 1.0}};
  std::ostringstream os;
  write_matrix_dump(os, a);
  CHECK(os.str() == "0 0 2\n0 1 0.5\n1 0 0.5\n1 1 1\n");
}
