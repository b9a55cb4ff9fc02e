// SPDX-License-Identifier: Apache-2.0

#ifndef ABEM_ADAPTIVE_HPP
#define ABEM_ADAPTIVE_HPP

#include <cstddef>
#include <iosfwd>
#include <limits>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "abem/estimators.hpp"

namespace abem
{

inline constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

// Greedy Doerfler marking: largest squared indicators first, ties by lower
// element id, until theta * total^2 is reached. Sorted ids; empty if the
// estimator vanishes.
std::vector<std::size_t> mark_doerfler(const EstimatorReport &report, double theta);

// R = M when the estimator is locally bounded by eta on the marked elements
// themselves (weakly-singular two-level, weighted residual), R = omega(M)
// otherwise (Faermann, hypersingular two-level).
bool uses_patch_superset(EstimatorKind kind, EquationTag equation);
// Default k of the modified mesh width: 1 when R = omega(M), else 0.
int default_k_patch(EstimatorKind kind, EquationTag equation);

struct AdaptiveConfig
{
  double theta = 0.5;
  EstimatorKind estimator = EstimatorKind::WeightedResidual;
  EquationTag equation = EquationTag::WeaklySingular;
  std::size_t max_dofs = 2000;
  int max_levels = 60;
  double stop_estimator = 0.0;
  int k_patch = -1;  // < 0 selects default_k_patch
  EstimatorOptions estimator_options;
};

struct LevelRecord
{
  int level = 0;
  std::size_t dofs = 0;
  std::size_t elements = 0;
  double mu = kNaN;
  double eta = kNaN;
  double rho = kNaN;
  double error = kNaN;      // energy error against the reference
  double increment = kNaN;  // |U_{l+1} - U_l|_A
  double a1_ratio = kNaN;   // mu(M) / rho(R)
  double a2_c = kNaN;       // smallest admissible contraction constant for l -> l+1
  double effectivity = kNaN;
  double energy_sq = kNaN;
  // In-memory extras, not part of the CSV schema.
  double a1_local_max = kNaN;  // max over T of mu(T) / eta(R(T))
  double a3_ratio = kNaN;
  double c_meshsize = kNaN;
  double orthogonality_defect = kNaN;  // max_i |(b - A U)_i| / int phi_i
  double density_mean = kNaN;          // <U, 1>
  double rho_sandwich_violation = 0.0;  // max of eta/sqrt(c)-rho and rho-eta, elementwise
  std::vector<std::size_t> marked;
  std::vector<std::size_t> refined_superset;
};

struct AdaptiveTrace
{
  std::vector<LevelRecord> levels;
};

// Optional check of stability in F: F' = F + epsilon G with an analytic G.
struct PerturbationCheck
{
  RightHandSide g;
  double epsilon = 1e-3;
};

struct AdaptiveResult
{
  AdaptiveTrace trace;
  std::vector<std::shared_ptr<const BoundaryMesh>> meshes;
  std::vector<EstimatorReport> reports;  // the driving estimator per level
  std::vector<GalerkinSolution> solutions;
  std::string reference;
};

// Reference energy for error measurement: exact when known, otherwise an
// overkill solve on uniform refinements of the finest mesh. With no exact
// energy and zero extra refinements the error column stays NaN.
struct ReferenceOptions
{
  std::optional<double> exact_energy;
  int overkill_extra_refinements = 3;
  std::size_t overkill_max_dofs = 4096;
};

struct OverkillReference
{
  double energy_sq = 0.0;
  std::string descriptor;
};

OverkillReference overkill_reference(EquationTag equation, const RightHandSide &f,
                                     const BoundaryMesh &finest, const ReferenceOptions &opts);

// Algorithm: solve, estimate, mark, refine, until max_dofs, max_levels or
// mu <= stop_estimator.
AdaptiveResult run_adaptive(const RightHandSide &f, const AdaptiveConfig &config,
                            std::shared_ptr<const BoundaryMesh> initial,
                            const ReferenceOptions &reference = {},
                            const std::optional<PerturbationCheck> &a3 = std::nullopt);

// Uniform refinement with the same bookkeeping (marked = all elements).
AdaptiveResult run_uniform(const RightHandSide &f, const AdaptiveConfig &config,
                           std::shared_ptr<const BoundaryMesh> initial,
                           const ReferenceOptions &reference = {});

// Smallest c > 0 with a/c <= b + c e.
double a2_min_constant(double a, double b, double e);

struct VerifyTolerances
{
  double growth_factor = 2.0;
  int burn_in = 3;
};

struct SeriesCheck
{
  std::string name;
  bool available = false;
  bool bounded = true;
  double reference_value = kNaN;  // level-0 value
  double max_after_burn_in = kNaN;
};

struct VerificationReport
{
  SeriesCheck a1;
  SeriesCheck a2;
  SeriesCheck a3;
  bool ok() const { return a1.bounded && a2.bounded && a3.bounded; }
};

// Flags growth of the A1/A2 (and A3 when recorded) series beyond
// growth_factor times their first value after the burn-in. Throws if the trace
// has no rho records.
VerificationReport verify_assumptions(const AdaptiveTrace &trace, const VerifyTolerances &tol = {});

void write_trace_csv(std::ostream &os, const AdaptiveTrace &trace);
// Throws InvalidArgument on a malformed file.
AdaptiveTrace read_trace_csv(std::istream &is);

}  // namespace abem

#endif  // ABEM_ADAPTIVE_HPP
