// SPDX-License-Identifier: Apache-2.0

#ifndef ABEM_OPERATORS_HPP
#define ABEM_OPERATORS_HPP

#include <iosfwd>
#include <span>

#include <Eigen/Dense>

#include "abem/space.hpp"

namespace abem
{

enum class OperatorTag
{
  SimpleLayer,
  Hypersingular,
  HypersingularStabilized
};

const char *to_string(OperatorTag tag);

struct GalerkinMatrix
{
  Eigen::MatrixXd entries;
  OperatorTag tag = OperatorTag::SimpleLayer;
  int mesh_level = 0;

  std::size_t dimension() const { return static_cast<std::size_t>(entries.rows()); }
};

struct AssemblyOptions
{
  // Assembly normally refuses curves of diameter >= 1, where the simple-layer
  // form may fail to be elliptic. Tests on unit-length elements lift this.
  bool allow_unnormalized = false;
};

// P0 simple-layer matrix of a mesh, V_ij = int_Ti int_Tj G(x - y).
Eigen::MatrixXd simple_layer_entries(const BoundaryMesh &mesh, const AssemblyOptions &opts = {});

GalerkinMatrix assemble_simple_layer(const DiscreteSpace &space, const AssemblyOptions &opts = {});
// <W u, v> = <V u', v'>. S1 on an open arc is rejected.
GalerkinMatrix assemble_hypersingular(const DiscreteSpace &space,
                                      const AssemblyOptions &opts = {});
// Maps the P0 matrix of the same mesh to the S1-kind hypersingular matrix.
Eigen::MatrixXd hypersingular_from_simple_layer(const DiscreteSpace &space,
                                                const Eigen::MatrixXd &v);
// Adds m m^T with m_i = int phi_i. Closed curves and S1 only.
GalerkinMatrix stabilize(const GalerkinMatrix &matrix, const DiscreteSpace &space);

// Point on the mesh together with the element carrying it.
struct TracePoint
{
  Point2 x;
  std::size_t element = 0;
};

// Finds the element containing x. Throws if x is off the curve or a node.
TracePoint locate_on_mesh(const BoundaryMesh &mesh, Point2 x);

double eval_single_layer(const Density &density, Point2 x);
// d/ds (V U)(x) along the tangent of the element containing x.
double eval_tangential_derivative_V(const Density &density, Point2 x);
// (W U)(x) = -d/ds V(U')(x).
double eval_W_residual_part(const Density &density, Point2 x);

// Unchecked kernels behind the evaluators: `psi` holds one P0 value per
// element. The derivative is singular at mesh nodes.
double single_layer_at(const BoundaryMesh &mesh, std::span<const double> psi, Point2 x);
double single_layer_derivative_at(const BoundaryMesh &mesh, std::span<const double> psi,
                                  Point2 x, Point2 tangent);

// `i j value` per line, zero-based indices.
void write_matrix_dump(std::ostream &os, const GalerkinMatrix &matrix);

}  // namespace abem

#endif  // ABEM_OPERATORS_HPP
