// SPDX-License-Identifier: Apache-2.0

#ifndef ABEM_ESTIMATORS_HPP
#define ABEM_ESTIMATORS_HPP

#include <functional>
#include <iosfwd>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "abem/galerkin.hpp"

namespace abem
{

enum class EstimatorKind
{
  Faermann,
  TwoLevel,
  WeightedResidual,
  RhoModified
};

const char *to_string(EstimatorKind kind);
std::optional<EstimatorKind> parse_estimator(std::string_view name);

struct EstimatorReport
{
  EstimatorKind kind = EstimatorKind::WeightedResidual;
  EquationTag equation = EquationTag::WeaklySingular;
  int level = 0;
  std::vector<double> local;  // one non-negative indicator per element

  double total() const;
  double total_sq() const;
  double subset_sq(std::span<const std::size_t> elements) const;
};

struct SlobodeckijQuadrature
{
  int interpolation_degree = 6;
  int gauss_order = 8;
  int diagonal_subdivisions = 3;
};

struct EstimatorOptions
{
  SlobodeckijQuadrature slobodeckij;
  // Residual L2 norms: Gauss order on each piece of the endpoint-graded rule.
  int gauss_order = 8;
  int graded_levels = 12;
  // Sources closer than near_factor * diam(T) are summed at every quadrature
  // point of T; the rest is sampled at far_degree + 1 Chebyshev points and
  // interpolated.
  double near_factor = 1.0;
  int far_degree = 11;
};

// F - A U written as F_analytic - A D with D = U - (synthetic density of F),
// reduced to a P0 potential `psi`: D itself for V, the arc derivative D' for W.
struct ResidualData
{
  EquationTag equation = EquationTag::WeaklySingular;
  RightHandSide f;
  std::shared_ptr<const BoundaryMesh> mesh;
  Eigen::VectorXd defect;  // D in the space of U
  Eigen::VectorXd psi;
  double mean = 0.0;  // <U, 1>, enters the stabilized form only
};

ResidualData make_residual(EquationTag equation, const RightHandSide &f, const Density &u);

// Pointwise residual F - A U at an interior point of `element`.
double residual_value(const ResidualData &r, std::size_t element, double t);

// |F - A U|^2_{H^1/2(omega)} for the patch of `node`, with the residual given
// per element as a function of the local parameter t in [0, 1].
double patch_seminorm_sq(const BoundaryMesh &mesh, std::size_t node,
                         const std::function<double(std::size_t, double)> &r,
                         const SlobodeckijQuadrature &quad = {});

EstimatorReport faermann(const RightHandSide &f, const Density &u, const EstimatorOptions &opts = {});

EstimatorReport two_level(const RightHandSide &f, const Density &u, EquationTag equation,
                          const EstimatorOptions &opts = {});

// Two-level indicator for one hypersingular test function: the fine hat at
// `node`, which must be the midpoint of `element` or an end of the arc. Hats
// at arc ends are not in the test space and give 0.
double two_level_hat_indicator(const ResidualData &r, std::size_t element, Point2 node);

// Per-element |g|^2_{L2(T)} with g = d/ds(F - A U) for the weakly-singular
// and g = F - A U for the hypersingular equation. Checks the regularity tag.
std::vector<double> residual_l2_sq(const ResidualData &r, const EstimatorOptions &opts = {});

// sqrt(width(T) * l2_sq(T)) per element.
EstimatorReport weighted_from_l2(std::span<const double> l2_sq, std::span<const double> width,
                                 EstimatorKind kind, EquationTag equation, int level);

EstimatorReport weighted_residual(const RightHandSide &f, const Density &u, EquationTag equation,
                                  const EstimatorOptions &opts = {});
EstimatorReport rho_modified(const RightHandSide &f, const Density &u, const MeshWidth &width,
                             EquationTag equation, const EstimatorOptions &opts = {});

// |h^1/2 g|_{L2} / |v|_A with g = d/ds(V v) (P0) or W v (S1 kinds).
double inverse_estimate_ratio(EquationTag equation, const Density &v, const GalerkinMatrix &matrix,
                              const EstimatorOptions &opts = {});

// `level kind element_id indicator` per line.
void write_estimator_report(std::ostream &os, const EstimatorReport &report);

}  // namespace abem

#endif  // ABEM_ESTIMATORS_HPP
