// SPDX-License-Identifier: Apache-2.0

#include "abem/space.hpp"

#include "abem/errors.hpp"

namespace abem
{

const char *to_string(SpaceKind kind)
{
  switch (kind)
  {
    case SpaceKind::P0:
      return "P0";
    case SpaceKind::S1Tilde:
      return "S1_tilde";
    case SpaceKind::S1:
      return "S1";
  }
  return "?";
}

DiscreteSpace::DiscreteSpace(SpaceKind kind, std::shared_ptr<const BoundaryMesh> mesh)
  : kind_(kind), mesh_(std::move(mesh))
{
  if (!mesh_)
    throw InvalidArgument("DiscreteSpace: null mesh");
  if (kind_ == SpaceKind::S1Tilde && mesh_->closed())
    throw InvalidArgument("DiscreteSpace: S1_tilde needs an open arc");
  if (kind_ == SpaceKind::S1Tilde && mesh_->size() < 2)
    throw InvalidArgument("DiscreteSpace: S1_tilde needs at least one interior node");
}

std::size_t DiscreteSpace::dof_count() const
{
  switch (kind_)
  {
    case SpaceKind::P0:
      return mesh_->size();
    case SpaceKind::S1Tilde:
      return mesh_->node_count() - 2;
    case SpaceKind::S1:
      return mesh_->node_count();
  }
  return 0;
}

std::size_t DiscreteSpace::dof_node(std::size_t i) const
{
  if (kind_ == SpaceKind::P0)
    throw InvalidArgument("dof_node: P0 dofs are elements");
  if (i >= dof_count())
    throw InvalidArgument("dof_node: index out of range");
  return kind_ == SpaceKind::S1Tilde ? i + 1 : i;
}

std::optional<std::size_t> DiscreteSpace::node_dof(std::size_t node) const
{
  if (kind_ == SpaceKind::P0)
    throw InvalidArgument("node_dof: P0 dofs are elements");
  if (node >= mesh_->node_count())
    throw InvalidArgument("node_dof: node out of range");
  if (kind_ == SpaceKind::S1)
    return node;
  if (mesh_->is_boundary_node(node))
    return std::nullopt;
  return node - 1;
}

Density::Density(DiscreteSpace s, Eigen::VectorXd c) : space(std::move(s)), coefficients(std::move(c))
{
  if (static_cast<std::size_t>(coefficients.size()) != space.dof_count())
    throw InvalidArgument("Density: coefficient count does not match the space");
}

Density::Density(DiscreteSpace s)
  : space(std::move(s)), coefficients(Eigen::VectorXd::Zero(space.dof_count()))
{
}

namespace
{

// Coefficient of the hat at `node`, zero at open-arc ends.
double nodal(const DiscreteSpace &space, const Eigen::VectorXd &c, std::size_t node)
{
  const auto dof = space.node_dof(node);
  return dof ? c[*dof] : 0.0;
}

}  // namespace

Eigen::VectorXd arc_derivative(const DiscreteSpace &space, const Eigen::VectorXd &coeffs)
{
  if (space.kind() == SpaceKind::P0)
    throw InvalidArgument("arc_derivative: needs an S1-kind space");
  const BoundaryMesh &mesh = space.mesh();
  Eigen::VectorXd d(mesh.size());
  for (std::size_t e = 0; e < mesh.size(); ++e)
  {
    const double u0 = nodal(space, coeffs, mesh.start_node(e));
    const double u1 = nodal(space, coeffs, mesh.end_node(e));
    d[e] = (u1 - u0) / mesh.element(e).length();
  }
  return d;
}

Eigen::VectorXd arc_derivative_transpose(const DiscreteSpace &space,
                                         const Eigen::VectorXd &element_values)
{
  if (space.kind() == SpaceKind::P0)
    throw InvalidArgument("arc_derivative_transpose: needs an S1-kind space");
  const BoundaryMesh &mesh = space.mesh();
  Eigen::VectorXd out = Eigen::VectorXd::Zero(space.dof_count());
  for (std::size_t e = 0; e < mesh.size(); ++e)
  {
    const double v = element_values[e] / mesh.element(e).length();
    if (auto i = space.node_dof(mesh.start_node(e)))
      out[*i] -= v;
    if (auto j = space.node_dof(mesh.end_node(e)))
      out[*j] += v;
  }
  return out;
}

Eigen::VectorXd basis_integrals(const DiscreteSpace &space)
{
  const BoundaryMesh &mesh = space.mesh();
  Eigen::VectorXd m = Eigen::VectorXd::Zero(space.dof_count());
  for (std::size_t e = 0; e < mesh.size(); ++e)
  {
    const double h = mesh.element(e).length();
    if (space.kind() == SpaceKind::P0)
    {
      m[e] = h;
      continue;
    }
    if (auto i = space.node_dof(mesh.start_node(e)))
      m[*i] += 0.5 * h;
    if (auto j = space.node_dof(mesh.end_node(e)))
      m[*j] += 0.5 * h;
  }
  return m;
}

double density_value(const Density &density, std::size_t e, double t)
{
  const DiscreteSpace &space = density.space;
  if (space.kind() == SpaceKind::P0)
    return density.coefficients[e];
  const BoundaryMesh &mesh = space.mesh();
  const double u0 = nodal(space, density.coefficients, mesh.start_node(e));
  const double u1 = nodal(space, density.coefficients, mesh.end_node(e));
  return (1.0 - t) * u0 + t * u1;
}

Density prolong(const Density &density, std::shared_ptr<const BoundaryMesh> fine)
{
  const BoundaryMesh &coarse = density.space.mesh();
  const auto parent = locate_parents(coarse, *fine);
  DiscreteSpace fine_space(density.space.kind(), fine);
  Density out(fine_space);
  if (fine_space.kind() == SpaceKind::P0)
  {
    for (std::size_t e = 0; e < fine->size(); ++e)
      out.coefficients[e] = density.coefficients[parent[e]];
    return out;
  }
  for (std::size_t i = 0; i < fine_space.dof_count(); ++i)
  {
    const std::size_t node = fine_space.dof_node(i);
    // Every node is the start of some element, except the end of an open arc
    // which carries no dof.
    const std::size_t e = node;
    const Segment &c = coarse.element(parent[e]);
    const double t = (fine->element(e).arc_start - c.arc_start) / c.length();
    out.coefficients[i] = density_value(density, parent[e], t);
  }
  return out;
}

}  // namespace abem
