// SPDX-License-Identifier: Apache-2.0

#include "abem/operators.hpp"

#include <array>
#include <ostream>
#include <utility>

#include "abem/errors.hpp"
#include "abem/kernel.hpp"

namespace abem
{

const char *to_string(OperatorTag tag)
{
  switch (tag)
  {
    case OperatorTag::SimpleLayer:
      return "simple_layer";
    case OperatorTag::Hypersingular:
      return "hypersingular";
    case OperatorTag::HypersingularStabilized:
      return "hypersingular_stabilized";
  }
  return "?";
}

namespace
{

void check_normalized(const BoundaryMesh &mesh, const AssemblyOptions &opts)
{
  if (!opts.allow_unnormalized && mesh.curve().diameter() >= 1.0)
    throw InvalidArgument("assembly needs a curve of diameter < 1; normalize it first");
}

// (element, derivative value) pairs of the hat function of dof j.
std::array<std::pair<std::size_t, double>, 2> hat_derivative(const DiscreteSpace &space,
                                                             std::size_t j)
{
  const BoundaryMesh &mesh = space.mesh();
  const std::size_t node = space.dof_node(j);
  const std::size_t right = node;
  const std::size_t left = node == 0 ? mesh.size() - 1 : node - 1;
  return {{{left, 1.0 / mesh.element(left).length()},
           {right, -1.0 / mesh.element(right).length()}}};
}

}  // namespace

Eigen::MatrixXd simple_layer_entries(const BoundaryMesh &mesh, const AssemblyOptions &opts)
{
  check_normalized(mesh, opts);
  const auto n = static_cast<Eigen::Index>(mesh.size());
  Eigen::MatrixXd v(n, n);
  for (Eigen::Index i = 0; i < n; ++i)
  {
    const SegmentGeometry &si = mesh.element(i).geom;
    for (Eigen::Index j = i; j < n; ++j)
    {
      const double value = kLaplaceFactor * log_pair_integral(si, mesh.element(j).geom);
      v(i, j) = value;
      v(j, i) = value;
    }
  }
  return v;
}

GalerkinMatrix assemble_simple_layer(const DiscreteSpace &space, const AssemblyOptions &opts)
{
  if (space.kind() != SpaceKind::P0)
    throw InvalidArgument("assemble_simple_layer: needs a P0 space");
  return {simple_layer_entries(space.mesh(), opts), OperatorTag::SimpleLayer,
          space.mesh().level()};
}

Eigen::MatrixXd hypersingular_from_simple_layer(const DiscreteSpace &space,
                                                const Eigen::MatrixXd &v)
{
  if (space.kind() == SpaceKind::P0)
    throw InvalidArgument("hypersingular assembly needs an S1-kind space");
  const auto m = static_cast<Eigen::Index>(space.dof_count());
  const auto n = v.rows();
  Eigen::MatrixXd vd(n, m);
  for (Eigen::Index j = 0; j < m; ++j)
  {
    const auto hd = hat_derivative(space, static_cast<std::size_t>(j));
    vd.col(j) = hd[0].second * v.col(static_cast<Eigen::Index>(hd[0].first)) +
                hd[1].second * v.col(static_cast<Eigen::Index>(hd[1].first));
  }
  Eigen::MatrixXd w(m, m);
  for (Eigen::Index i = 0; i < m; ++i)
  {
    const auto hd = hat_derivative(space, static_cast<std::size_t>(i));
    w.row(i) = hd[0].second * vd.row(static_cast<Eigen::Index>(hd[0].first)) +
               hd[1].second * vd.row(static_cast<Eigen::Index>(hd[1].first));
  }
  // Restore exact symmetry lost to the order of the two products.
  w = 0.5 * (w + w.transpose()).eval();
  return w;
}

GalerkinMatrix assemble_hypersingular(const DiscreteSpace &space, const AssemblyOptions &opts)
{
  if (space.kind() == SpaceKind::P0)
    throw InvalidArgument("assemble_hypersingular: needs an S1-kind space");
  if (space.kind() == SpaceKind::S1 && !space.mesh().closed())
    throw InvalidArgument("assemble_hypersingular: S1 on an open arc violates the trial-space "
                          "condition; use S1_tilde");
  const Eigen::MatrixXd v = simple_layer_entries(space.mesh(), opts);
  return {hypersingular_from_simple_layer(space, v), OperatorTag::Hypersingular,
          space.mesh().level()};
}

GalerkinMatrix stabilize(const GalerkinMatrix &matrix, const DiscreteSpace &space)
{
  if (!space.mesh().closed())
    throw InvalidArgument("stabilize: needs a closed curve");
  if (space.kind() != SpaceKind::S1 || matrix.tag != OperatorTag::Hypersingular)
    throw InvalidArgument("stabilize: needs the hypersingular matrix on S1");
  if (matrix.dimension() != space.dof_count())
    throw InvalidArgument("stabilize: matrix does not match the space");
  const Eigen::VectorXd m = basis_integrals(space);
  GalerkinMatrix out = matrix;
  out.entries += m * m.transpose();
  out.tag = OperatorTag::HypersingularStabilized;
  return out;
}

TracePoint locate_on_mesh(const BoundaryMesh &mesh, Point2 x)
{
  const double tol = 1e-12 * mesh.total_length();
  for (std::size_t e = 0; e < mesh.size(); ++e)
  {
    const SegmentGeometry &s = mesh.element(e).geom;
    if (point_segment_distance(x, s) > tol)
      continue;
    if (distance(x, s.a) <= tol || distance(x, s.b) <= tol)
      throw InvalidArgument("evaluation point coincides with a mesh node");
    return {x, e};
  }
  throw InvalidArgument("evaluation point is not on the boundary");
}

double single_layer_at(const BoundaryMesh &mesh, std::span<const double> psi, Point2 x)
{
  double sum = 0.0;
  for (std::size_t e = 0; e < mesh.size(); ++e)
    if (psi[e] != 0.0)
      sum += psi[e] * log_integral(x, mesh.element(e).geom);
  return kLaplaceFactor * sum;
}

double single_layer_derivative_at(const BoundaryMesh &mesh, std::span<const double> psi,
                                  Point2 x, Point2 tangent)
{
  double sum = 0.0;
  for (std::size_t e = 0; e < mesh.size(); ++e)
    if (psi[e] != 0.0)
      sum += psi[e] * dot(log_integral_gradient(x, mesh.element(e).geom), tangent);
  return kLaplaceFactor * sum;
}

double eval_single_layer(const Density &density, Point2 x)
{
  if (density.space.kind() != SpaceKind::P0)
    throw InvalidArgument("eval_single_layer: needs a P0 density");
  const BoundaryMesh &mesh = density.space.mesh();
  locate_on_mesh(mesh, x);
  return single_layer_at(mesh, {density.coefficients.data(), mesh.size()}, x);
}

double eval_tangential_derivative_V(const Density &density, Point2 x)
{
  if (density.space.kind() != SpaceKind::P0)
    throw InvalidArgument("eval_tangential_derivative_V: needs a P0 density");
  const BoundaryMesh &mesh = density.space.mesh();
  const TracePoint p = locate_on_mesh(mesh, x);
  return single_layer_derivative_at(mesh, {density.coefficients.data(), mesh.size()}, x,
                                    mesh.element(p.element).geom.tangent());
}

double eval_W_residual_part(const Density &density, Point2 x)
{
  const BoundaryMesh &mesh = density.space.mesh();
  const TracePoint p = locate_on_mesh(mesh, x);
  const Eigen::VectorXd d = arc_derivative(density.space, density.coefficients);
  return -single_layer_derivative_at(mesh, {d.data(), mesh.size()}, x,
                                     mesh.element(p.element).geom.tangent());
}

void write_matrix_dump(std::ostream &os, const GalerkinMatrix &matrix)
{
  const auto old = os.precision(17);
  for (Eigen::Index i = 0; i < matrix.entries.rows(); ++i)
    for (Eigen::Index j = 0; j < matrix.entries.cols(); ++j)
      os << i << ' ' << j << ' ' << matrix.entries(i, j) << '\n';
  os.precision(old);
}

}  // namespace abem
