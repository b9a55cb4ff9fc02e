// SPDX-License-Identifier: Apache-2.0

#ifndef ABEM_SPACE_HPP
#define ABEM_SPACE_HPP

#include <memory>
#include <optional>

#include <Eigen/Dense>

#include "abem/mesh.hpp"

namespace abem
{

enum class SpaceKind
{
  P0,       // piecewise constants
  S1Tilde,  // continuous piecewise linears vanishing at the ends of an open arc
  S1        // continuous piecewise linears on a closed curve
};

const char *to_string(SpaceKind kind);

class DiscreteSpace
{
public:
  DiscreteSpace(SpaceKind kind, std::shared_ptr<const BoundaryMesh> mesh);

  SpaceKind kind() const { return kind_; }
  const BoundaryMesh &mesh() const { return *mesh_; }
  const std::shared_ptr<const BoundaryMesh> &mesh_ptr() const { return mesh_; }
  std::size_t dof_count() const;

  // S1 kinds: mesh node carrying the hat function of dof i.
  std::size_t dof_node(std::size_t i) const;
  std::optional<std::size_t> node_dof(std::size_t node) const;

private:
  SpaceKind kind_;
  std::shared_ptr<const BoundaryMesh> mesh_;
};

struct Density
{
  DiscreteSpace space;
  Eigen::VectorXd coefficients;

  Density(DiscreteSpace s, Eigen::VectorXd c);
  explicit Density(DiscreteSpace s);  // zero density
};

// Piecewise-constant arc-length derivative of an S1-kind coefficient vector,
// one value per element.
Eigen::VectorXd arc_derivative(const DiscreteSpace &space, const Eigen::VectorXd &coeffs);
// Transpose of arc_derivative: maps element values to dofs.
Eigen::VectorXd arc_derivative_transpose(const DiscreteSpace &space,
                                         const Eigen::VectorXd &element_values);

// m_i = int_Gamma phi_i.
Eigen::VectorXd basis_integrals(const DiscreteSpace &space);

// Exact representation of `density` in the same kind of space on a finer
// nested mesh.
Density prolong(const Density &density, std::shared_ptr<const BoundaryMesh> fine);

// Value of the density at arc position t in [0, 1] of element e.
double density_value(const Density &density, std::size_t e, double t);

}  // namespace abem

#endif  // ABEM_SPACE_HPP
