// SPDX-License-Identifier: Apache-2.0

#ifndef ABEM_EXPERIMENT_HPP
#define ABEM_EXPERIMENT_HPP

#include <cstdint>
#include <filesystem>
#include <functional>
#include <iosfwd>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "abem/adaptive.hpp"

namespace abem
{

enum class ProblemKind
{
  Slit,
  LShapeBoundary,
  SquareClosed,
  Custom
};

enum class RhsKind
{
  Constant,
  ArcLength,
  MeanZero,  // x^2 - y^2 minus its boundary mean
  X,
  Synthetic
};

struct ExperimentConfig
{
  ProblemKind problem = ProblemKind::Slit;
  std::vector<Point2> vertices;  // custom problems only
  bool closed = false;           // custom problems only
  EquationTag equation = EquationTag::WeaklySingular;
  EstimatorKind estimator = EstimatorKind::TwoLevel;
  double theta = 0.5;
  std::size_t max_dofs = 2000;
  int max_levels = 60;
  double stop_estimator = 0.0;
  int k_patch = -1;
  RhsKind rhs = RhsKind::Constant;
  double rhs_value = 1.0;  // for rhs = constant
  std::uint64_t rhs_seed = 1;
  std::size_t seed_mesh_elements = 2;
  std::filesystem::path outputs = "abemlab_out";
  bool compare_uniform = false;
  bool write_meshes = true;
  int overkill_extra_refinements = 3;
  std::size_t overkill_max_dofs = 4096;
};

// Flat `key = value` lines; `#` starts a comment. Throws ConfigError naming
// the offending key.
ExperimentConfig parse_config(std::istream &is);
ExperimentConfig load_config(const std::filesystem::path &path);

// Curve, initial mesh and data of one configured experiment. Compatibility
// checks throw ConfigError.
struct Problem
{
  NormalizedCurve curve;
  std::shared_ptr<const BoundaryMesh> initial;
  RightHandSide f;
  ReferenceOptions reference;
};

Problem make_problem(const ExperimentConfig &config);
AdaptiveConfig adaptive_config(const ExperimentConfig &config);

// Least-squares slope of log mu against log dofs over the last ceil(L/2)
// levels. Throws InvalidArgument for fewer than 4 levels.
double rate_fit(const AdaptiveTrace &trace);

struct ExperimentResult
{
  AdaptiveResult adaptive;
  std::optional<AdaptiveResult> uniform;
  std::optional<double> adaptive_rate;
  std::optional<double> uniform_rate;
};

using ProgressSink = std::function<void(const std::string &)>;

// Runs the adaptive study (and the uniform one when requested) and writes
// trace.csv, trace_uniform.csv, mesh_L.txt, estimators.txt, rates.txt and
// convergence.svg into config.outputs.
ExperimentResult run_experiment(const ExperimentConfig &config, const ProgressSink &progress = {});

// Log-log plot of mu, eta and error against dofs.
void write_convergence_svg(std::ostream &os, const AdaptiveTrace &trace,
                           const AdaptiveTrace *uniform = nullptr);

}  // namespace abem

#endif  // ABEM_EXPERIMENT_HPP
