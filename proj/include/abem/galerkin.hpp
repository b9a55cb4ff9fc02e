// SPDX-License-Identifier: Apache-2.0

#ifndef ABEM_GALERKIN_HPP
#define ABEM_GALERKIN_HPP

#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <string_view>

#include <Eigen/Dense>

#include "abem/operators.hpp"

namespace abem
{

enum class EquationTag
{
  WeaklySingular,          // V on P0
  Hypersingular,           // W on S1_tilde, open arcs
  HypersingularStabilized  // W + <.,1><.,1> on S1, closed curves
};

const char *to_string(EquationTag tag);
std::optional<EquationTag> parse_equation(std::string_view name);
SpaceKind space_kind(EquationTag tag);
OperatorTag operator_tag(EquationTag tag);

// Which estimators a right-hand side admits; ordered by strength.
enum class Regularity
{
  L2,
  HHalf,
  HOne
};

const char *to_string(Regularity r);

struct TraceSample
{
  Point2 x;
  double arc = 0.0;  // arc-length position along the curve
  Point2 tangent;
};

// F = analytic trace function + A(synthetic density). Either part may be
// absent.
struct RightHandSide
{
  std::function<double(const TraceSample &)> value;
  std::function<double(const TraceSample &)> derivative;  // tangential derivative of value
  std::optional<Density> synthetic;
  Regularity regularity = Regularity::HOne;
  std::string name;

  bool has_analytic() const { return static_cast<bool>(value); }

  static RightHandSide constant(double c);
  static RightHandSide from_density(Density d);
};

TraceSample trace_sample(const Segment &element, double t);

// int_Gamma F for the analytic part (the synthetic part A P integrates to
// zero against constants only for the hypersingular operator).
double analytic_integral(const RightHandSide &f, const BoundaryMesh &mesh);

GalerkinMatrix assemble_operator(EquationTag equation, const DiscreteSpace &space,
                                 const AssemblyOptions &opts = {});

// <F, phi_i>. The synthetic part is applied exactly through the (unstabilized)
// operator matrix; `matrix` is reused when given, assembled otherwise.
Eigen::VectorXd assemble_rhs(const RightHandSide &f, const DiscreteSpace &space,
                             const GalerkinMatrix *matrix = nullptr,
                             const AssemblyOptions &opts = {});

// Diagonally scaled Cholesky with iterative refinement. Throws NumericalError
// if the matrix is not SPD or the residual stays above 1e-10 |b|_inf.
Eigen::VectorXd solve_spd(const Eigen::MatrixXd &a, const Eigen::VectorXd &b);
Density solve(const GalerkinMatrix &matrix, const Eigen::VectorXd &rhs, const DiscreteSpace &space);

struct GalerkinSolution
{
  Density density;
  Eigen::VectorXd rhs;
  double energy_sq = 0.0;  // <A U, U>
};

GalerkinSolution solve_galerkin(EquationTag equation, const RightHandSide &f,
                                std::shared_ptr<const BoundaryMesh> mesh,
                                GalerkinMatrix *matrix_out = nullptr,
                                const AssemblyOptions &opts = {});

double energy_norm_sq(const GalerkinMatrix &matrix, const Eigen::VectorXd &v);

struct EnergyReport
{
  double energy_sq = 0.0;
  double error_vs_reference_sq = 0.0;
  std::string reference_level;
};

// Galerkin orthogonality: |u_ref - u|^2 = E(u_ref) - E(u) for nested spaces.
EnergyReport energy_error_vs_reference(const GalerkinSolution &u, const GalerkinSolution &ref);
EnergyReport energy_error_vs_reference(double energy_sq, double reference_energy_sq,
                                       std::string reference_level);

// |u_ref - u_hat|_A / |u_ref - u|_A.
double measure_saturation(const GalerkinSolution &u, const GalerkinSolution &u_hat,
                          const GalerkinSolution &ref);

}  // namespace abem

#endif  // ABEM_GALERKIN_HPP
