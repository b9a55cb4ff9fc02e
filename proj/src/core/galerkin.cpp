// SPDX-License-Identifier: Apache-2.0

#include "abem/galerkin.hpp"

#include <cmath>

#include "abem/errors.hpp"
#include "abem/quadrature.hpp"

namespace abem
{

const char *to_string(EquationTag tag)
{
  switch (tag)
  {
    case EquationTag::WeaklySingular:
      return "weakly_singular";
    case EquationTag::Hypersingular:
      return "hypersingular";
    case EquationTag::HypersingularStabilized:
      return "hypersingular_stabilized";
  }
  return "?";
}

std::optional<EquationTag> parse_equation(std::string_view name)
{
  for (auto tag : {EquationTag::WeaklySingular, EquationTag::Hypersingular,
                   EquationTag::HypersingularStabilized})
    if (name == to_string(tag))
      return tag;
  return std::nullopt;
}

SpaceKind space_kind(EquationTag tag)
{
  switch (tag)
  {
    case EquationTag::WeaklySingular:
      return SpaceKind::P0;
    case EquationTag::Hypersingular:
      return SpaceKind::S1Tilde;
    case EquationTag::HypersingularStabilized:
      return SpaceKind::S1;
  }
  return SpaceKind::P0;
}

OperatorTag operator_tag(EquationTag tag)
{
  switch (tag)
  {
    case EquationTag::WeaklySingular:
      return OperatorTag::SimpleLayer;
    case EquationTag::Hypersingular:
      return OperatorTag::Hypersingular;
    case EquationTag::HypersingularStabilized:
      return OperatorTag::HypersingularStabilized;
  }
  return OperatorTag::SimpleLayer;
}

const char *to_string(Regularity r)
{
  switch (r)
  {
    case Regularity::L2:
      return "L2";
    case Regularity::HHalf:
      return "H_half";
    case Regularity::HOne:
      return "H_one";
  }
  return "?";
}

RightHandSide RightHandSide::constant(double c)
{
  RightHandSide f;
  f.value = [c](const TraceSample &) { return c; };
  f.derivative = [](const TraceSample &) { return 0.0; };
  f.regularity = Regularity::HOne;
  f.name = "constant";
  return f;
}

RightHandSide RightHandSide::from_density(Density d)
{
  RightHandSide f;
  f.synthetic = std::move(d);
  // V maps P0 into H^1; W maps S1 into L2 (not H^1: the image is only
  // H^{1/2-eps} across nodes).
  f.regularity = f.synthetic->space.kind() == SpaceKind::P0 ? Regularity::HOne : Regularity::L2;
  f.name = "synthetic";
  return f;
}

TraceSample trace_sample(const Segment &element, double t)
{
  return {element.geom.at(t), element.arc_start + t * element.length(), element.geom.tangent()};
}

double analytic_integral(const RightHandSide &f, const BoundaryMesh &mesh)
{
  if (!f.has_analytic())
    return 0.0;
  const QuadratureRule &g = gauss_legendre(16);
  double sum = 0.0;
  for (const Segment &s : mesh.elements())
    for (std::size_t q = 0; q < g.size(); ++q)
      sum += g.weights[q] * s.length() * f.value(trace_sample(s, g.nodes[q]));
  return sum;
}

GalerkinMatrix assemble_operator(EquationTag equation, const DiscreteSpace &space,
                                 const AssemblyOptions &opts)
{
  if (space.kind() != space_kind(equation))
    throw InvalidArgument(std::string("space kind ") + to_string(space.kind()) +
                          " does not match equation " + to_string(equation));
  switch (equation)
  {
    case EquationTag::WeaklySingular:
      return assemble_simple_layer(space, opts);
    case EquationTag::Hypersingular:
      return assemble_hypersingular(space, opts);
    case EquationTag::HypersingularStabilized:
      return stabilize(assemble_hypersingular(space, opts), space);
  }
  throw InvalidArgument("unknown equation");
}

Eigen::VectorXd assemble_rhs(const RightHandSide &f, const DiscreteSpace &space,
                             const GalerkinMatrix *matrix, const AssemblyOptions &opts)
{
  const BoundaryMesh &mesh = space.mesh();
  Eigen::VectorXd b = Eigen::VectorXd::Zero(space.dof_count());
  if (f.has_analytic())
  {
    const QuadratureRule &g = gauss_legendre(16);
    for (std::size_t e = 0; e < mesh.size(); ++e)
    {
      const Segment &s = mesh.element(e);
      double b0 = 0.0, b1 = 0.0;
      for (std::size_t q = 0; q < g.size(); ++q)
      {
        const double t = g.nodes[q];
        const double w = g.weights[q] * s.length() * f.value(trace_sample(s, t));
        b0 += w * (1.0 - t);
        b1 += w * t;
      }
      if (space.kind() == SpaceKind::P0)
      {
        b[e] += b0 + b1;
        continue;
      }
      if (auto i = space.node_dof(mesh.start_node(e)))
        b[*i] += b0;
      if (auto j = space.node_dof(mesh.end_node(e)))
        b[*j] += b1;
    }
  }
  if (f.synthetic)
  {
    if (f.synthetic->space.kind() != space.kind())
      throw InvalidArgument("synthetic right-hand side lives in a different kind of space");
    const Density p = prolong(*f.synthetic, space.mesh_ptr());
    std::optional<GalerkinMatrix> own;
    if (!matrix)
    {
      own = space.kind() == SpaceKind::P0 ? assemble_simple_layer(space, opts)
                                          : assemble_hypersingular(space, opts);
      matrix = &*own;
    }
    if (matrix->dimension() != space.dof_count())
      throw InvalidArgument("assemble_rhs: matrix does not match the space");
    b += matrix->entries * p.coefficients;
    if (matrix->tag == OperatorTag::HypersingularStabilized)
    {
      const Eigen::VectorXd m = basis_integrals(space);
      b -= m * m.dot(p.coefficients);
    }
  }
  return b;
}

Eigen::VectorXd solve_spd(const Eigen::MatrixXd &a, const Eigen::VectorXd &b)
{
  if (a.rows() != a.cols() || a.rows() != b.size())
    throw InvalidArgument("solve_spd: dimension mismatch");
  const double bnorm = b.lpNorm<Eigen::Infinity>();
  if (bnorm == 0.0)
    return Eigen::VectorXd::Zero(b.size());
  const Eigen::VectorXd d = a.diagonal();
  if ((d.array() <= 0.0).any())
    throw NumericalError("Cholesky factorization failed: non-positive diagonal");
  const Eigen::VectorXd s = d.cwiseSqrt().cwiseInverse();
  const Eigen::MatrixXd scaled = s.asDiagonal() * a * s.asDiagonal();
  const Eigen::LLT<Eigen::MatrixXd> llt(scaled);
  if (llt.info() != Eigen::Success)
    throw NumericalError("Cholesky factorization failed: matrix is not positive definite");
  auto apply = [&](const Eigen::VectorXd &rhs) -> Eigen::VectorXd {
    return s.cwiseProduct(llt.solve(s.cwiseProduct(rhs)));
  };
  Eigen::VectorXd x = apply(b);
  Eigen::VectorXd r = b - a * x;
  for (int step = 0; step < 3 && r.lpNorm<Eigen::Infinity>() > 1e-15 * bnorm; ++step)
  {
    x += apply(r);
    r = b - a * x;
  }
  if (!(r.lpNorm<Eigen::Infinity>() <= 1e-10 * bnorm))
    throw NumericalError("linear solve did not reach the residual tolerance");
  return x;
}

Density solve(const GalerkinMatrix &matrix, const Eigen::VectorXd &rhs, const DiscreteSpace &space)
{
  if (matrix.dimension() != space.dof_count())
    throw InvalidArgument("solve: matrix does not match the space");
  return Density(space, solve_spd(matrix.entries, rhs));
}

double energy_norm_sq(const GalerkinMatrix &matrix, const Eigen::VectorXd &v)
{
  return v.dot(matrix.entries * v);
}

GalerkinSolution solve_galerkin(EquationTag equation, const RightHandSide &f,
                                std::shared_ptr<const BoundaryMesh> mesh,
                                GalerkinMatrix *matrix_out, const AssemblyOptions &opts)
{
  DiscreteSpace space(space_kind(equation), std::move(mesh));
  GalerkinMatrix a = assemble_operator(equation, space, opts);
  Eigen::VectorXd b = assemble_rhs(f, space, &a, opts);
  Density u = solve(a, b, space);
  // 2 b.u - a(u, u) equals a(u, u) for the exact solve and is insensitive to
  // first-order solver error.
  const double energy = 2.0 * b.dot(u.coefficients) - energy_norm_sq(a, u.coefficients);
  if (matrix_out)
    *matrix_out = std::move(a);
  return {std::move(u), std::move(b), energy};
}

EnergyReport energy_error_vs_reference(double energy_sq, double reference_energy_sq,
                                       std::string reference_level)
{
  double err = reference_energy_sq - energy_sq;
  if (err < 0.0)
  {
    if (err < -1e-10 * std::abs(reference_energy_sq))
      throw NumericalError("reference energy is below the discrete energy; spaces not nested?");
    err = 0.0;
  }
  return {energy_sq, err, std::move(reference_level)};
}

EnergyReport energy_error_vs_reference(const GalerkinSolution &u, const GalerkinSolution &ref)
{
  if (u.density.space.kind() != ref.density.space.kind())
    throw InvalidArgument("energy_error_vs_reference: different space kinds");
  locate_parents(u.density.space.mesh(), ref.density.space.mesh());
  const BoundaryMesh &rm = ref.density.space.mesh();
  return energy_error_vs_reference(u.energy_sq, ref.energy_sq,
                                   "level " + std::to_string(rm.level()) + ", " +
                                       std::to_string(ref.density.space.dof_count()) + " dofs");
}

double measure_saturation(const GalerkinSolution &u, const GalerkinSolution &u_hat,
                          const GalerkinSolution &ref)
{
  const double den = energy_error_vs_reference(u, ref).error_vs_reference_sq;
  const double num = energy_error_vs_reference(u_hat, ref).error_vs_reference_sq;
  if (den <= 0.0)
    throw NumericalError("measure_saturation: the coarse solution already matches the reference");
  return std::sqrt(num / den);
}

}  // namespace abem
