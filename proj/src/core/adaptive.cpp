// SPDX-License-Identifier: Apache-2.0

#include "abem/adaptive.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <istream>
#include <limits>
#include <numeric>
#include <ostream>
#include <sstream>

#include "abem/errors.hpp"

namespace abem
{

std::vector<std::size_t> mark_doerfler(const EstimatorReport &report, double theta)
{
  if (!(theta > 0.0 && theta <= 1.0))
    throw InvalidArgument("mark_doerfler: theta must lie in (0, 1]");
  const std::size_t n = report.local.size();
  std::vector<double> sq(n);
  double total = 0.0;
  for (std::size_t e = 0; e < n; ++e)
  {
    sq[e] = report.local[e] * report.local[e];
    total += sq[e];
  }
  if (!std::isfinite(total))
    throw InvalidArgument("mark_doerfler: estimator is not finite");
  if (total == 0.0)
    return {};
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return sq[a] > sq[b]; });
  const double goal = theta * total;
  std::vector<std::size_t> marked;
  double sum = 0.0;
  for (std::size_t e : order)
  {
    if (sum >= goal || sq[e] == 0.0)
      break;
    marked.push_back(e);
    sum += sq[e];
  }
  // Rounding in the running sum can leave theta = 1 a hair short; every
  // nonzero indicator is marked by then anyway.
  std::sort(marked.begin(), marked.end());
  return marked;
}

bool uses_patch_superset(EstimatorKind kind, EquationTag equation)
{
  if (kind == EstimatorKind::Faermann)
    return true;
  if (kind == EstimatorKind::TwoLevel)
    return equation != EquationTag::WeaklySingular;
  return false;
}

int default_k_patch(EstimatorKind kind, EquationTag equation)
{
  return uses_patch_superset(kind, equation) ? 1 : 0;
}

double a2_min_constant(double a, double b, double e)
{
  if (a <= 0.0)
    return 0.0;
  if (e > 0.0)
    return (-b + std::sqrt(b * b + 4.0 * e * a)) / (2.0 * e);
  if (b > 0.0)
    return a / b;
  return std::numeric_limits<double>::infinity();
}

OverkillReference overkill_reference(EquationTag equation, const RightHandSide &f,
                                     const BoundaryMesh &finest, const ReferenceOptions &opts)
{
  if (opts.exact_energy)
    return {*opts.exact_energy, "exact"};
  auto mesh = std::make_shared<const BoundaryMesh>(uniform_refine(finest));
  for (int k = 1; k < opts.overkill_extra_refinements; ++k)
  {
    if (2 * mesh->size() > opts.overkill_max_dofs)
      break;
    mesh = std::make_shared<const BoundaryMesh>(uniform_refine(*mesh));
  }
  const GalerkinSolution ref = solve_galerkin(equation, f, mesh);
  return {ref.energy_sq, "overkill level " + std::to_string(mesh->level()) + ", " +
                             std::to_string(ref.density.space.dof_count()) + " dofs"};
}

namespace
{

RightHandSide perturbed(const RightHandSide &f, const RightHandSide &g, double eps)
{
  RightHandSide out = f;
  auto fv = f.value, fd = f.derivative, gv = g.value, gd = g.derivative;
  out.value = [=](const TraceSample &s) { return (fv ? fv(s) : 0.0) + eps * gv(s); };
  if ((fd || !fv) && gd)
    out.derivative = [=](const TraceSample &s) { return (fd ? fd(s) : 0.0) + eps * gd(s); };
  else
    out.derivative = nullptr;
  out.regularity = std::min(f.regularity, g.regularity);
  out.name = f.name + "+perturbation";
  return out;
}

EstimatorReport estimate(EstimatorKind kind, const RightHandSide &f, const Density &u,
                         EquationTag equation, const EstimatorReport &eta,
                         const EstimatorReport &rho, const EstimatorOptions &opts)
{
  switch (kind)
  {
    case EstimatorKind::Faermann:
      return faermann(f, u, opts);
    case EstimatorKind::TwoLevel:
      return two_level(f, u, equation, opts);
    case EstimatorKind::WeightedResidual:
      return eta;
    case EstimatorKind::RhoModified:
      return rho;
  }
  throw InvalidArgument("unknown estimator");
}

AdaptiveResult run_loop(const RightHandSide &f, const AdaptiveConfig &config,
                        std::shared_ptr<const BoundaryMesh> mesh, const ReferenceOptions &reference,
                        const std::optional<PerturbationCheck> &a3, bool uniform)
{
  if (!(config.theta > 0.0 && config.theta <= 1.0))
    throw ConfigError("theta", "must lie in (0, 1]");
  if (config.estimator == EstimatorKind::Faermann && config.equation != EquationTag::WeaklySingular)
    throw InvalidArgument("faermann: defined for the weakly-singular equation only");
  const bool patch = uses_patch_superset(config.estimator, config.equation);
  const int k = config.k_patch >= 0 ? config.k_patch : default_k_patch(config.estimator, config.equation);

  AdaptiveResult result;
  MeshWidth width = initial_mesh_width(*mesh, k);
  std::vector<double> rho_on_r, a3_diff;
  std::optional<RightHandSide> f_perturbed;
  if (a3)
    f_perturbed = perturbed(f, a3->g, a3->epsilon);
  std::vector<Eigen::VectorXd> a3_g_solutions;

  for (int level = 0;; ++level)
  {
    const DiscreteSpace space(space_kind(config.equation), mesh);
    const GalerkinMatrix a = assemble_operator(config.equation, space);
    const Eigen::VectorXd b = assemble_rhs(f, space, &a);
    Density u = solve(a, b, space);
    const double energy = 2.0 * b.dot(u.coefficients) - energy_norm_sq(a, u.coefficients);

    if (level > 0)
    {
      const Density prev = prolong(result.solutions.back().density, mesh);
      const Eigen::VectorXd du = u.coefficients - prev.coefficients;
      const double inc_sq = std::max(0.0, energy_norm_sq(a, du));
      LevelRecord &p = result.trace.levels.back();
      p.increment = std::sqrt(inc_sq);
    }

    const ResidualData res = make_residual(config.equation, f, u);
    const auto l2 = residual_l2_sq(res, config.estimator_options);
    const EstimatorReport eta = weighted_from_l2(l2, width.plain, EstimatorKind::WeightedResidual,
                                                 config.equation, level);
    const EstimatorReport rho = weighted_from_l2(l2, width.modified, EstimatorKind::RhoModified,
                                                 config.equation, level);
    EstimatorReport mu =
        estimate(config.estimator, f, u, config.equation, eta, rho, config.estimator_options);
    mu.level = level;

    LevelRecord rec;
    rec.level = level;
    rec.dofs = space.dof_count();
    rec.elements = mesh->size();
    rec.mu = mu.total();
    rec.eta = eta.total();
    rec.rho = rho.total();
    rec.energy_sq = energy;
    rec.c_meshsize = width.c_meshsize;
    {
      const Eigen::VectorXd m = basis_integrals(space);
      const Eigen::VectorXd r = b - a.entries * u.coefficients;
      rec.orthogonality_defect = (r.array().abs() / m.array()).maxCoeff();
      rec.density_mean = m.dot(u.coefficients);
    }

    double a1_local = 0.0;
    double sandwich = 0.0;
    for (std::size_t e = 0; e < mesh->size(); ++e)
    {
      double den_sq = eta.local[e] * eta.local[e];
      if (patch)
      {
        const std::size_t seed[] = {e};
        den_sq = eta.subset_sq(k_patch(*mesh, seed, 1));
      }
      if (den_sq > 0.0)
        a1_local = std::max(a1_local, mu.local[e] / std::sqrt(den_sq));
      const double lo = eta.local[e] / std::sqrt(width.c_meshsize);
      sandwich = std::max({sandwich, rho.local[e] - eta.local[e], lo - rho.local[e]});
    }
    rec.a1_local_max = a1_local;
    rec.rho_sandwich_violation = sandwich;

    if (level > 0)
    {
      LevelRecord &p = result.trace.levels.back();
      const double b2 = p.rho * p.rho - 0.5 * rec.rho * rec.rho;
      p.a2_c = a2_min_constant(rho_on_r.back(), b2, 2.0 * p.increment * p.increment);
    }

    const bool converged = rec.mu <= config.stop_estimator ||
                           rec.mu <= 1e-10 * std::sqrt(std::max(energy, 0.0));
    const bool stop = converged || rec.dofs >= config.max_dofs || level + 1 >= config.max_levels;

    std::vector<std::size_t> marked;
    if (uniform)
    {
      marked.resize(mesh->size());
      std::iota(marked.begin(), marked.end(), std::size_t{0});
    }
    else if (!converged)
    {
      marked = mark_doerfler(mu, config.theta);
    }
    const std::vector<std::size_t> r_set = patch ? k_patch(*mesh, marked, 1) : marked;
    const double mu_m = mu.subset_sq(marked);
    const double rho_r = rho.subset_sq(r_set);
    rec.a1_ratio = rho_r > 0.0 ? std::sqrt(mu_m / rho_r) : kNaN;
    rho_on_r.push_back(rho_r);
    rec.marked = marked;
    rec.refined_superset = r_set;

    if (f_perturbed)
    {
      const Eigen::VectorXd bg = assemble_rhs(a3->g, space, &a);
      const Eigen::VectorXd ug = solve_spd(a.entries, bg);
      const Density up(space, u.coefficients + a3->epsilon * ug);
      const EstimatorReport eta_p = weighted_residual(*f_perturbed, up, config.equation,
                                                      config.estimator_options);
      std::vector<double> wp(width.modified);
      const EstimatorReport rho_p = weighted_from_l2(
          residual_l2_sq(make_residual(config.equation, *f_perturbed, up), config.estimator_options),
          wp, EstimatorKind::RhoModified, config.equation, level);
      const EstimatorReport mu_p = estimate(config.estimator, *f_perturbed, up, config.equation,
                                            eta_p, rho_p, config.estimator_options);
      a3_diff.push_back(std::abs(std::sqrt(mu_m) - std::sqrt(mu_p.subset_sq(marked))));
    }

    result.trace.levels.push_back(rec);
    result.meshes.push_back(mesh);
    result.reports.push_back(std::move(mu));
    result.solutions.push_back({std::move(u), b, energy});

    if (stop || marked.empty())
      break;
    auto next = std::make_shared<const BoundaryMesh>(uniform ? uniform_refine(*mesh)
                                                             : refine_marked(*mesh, marked));
    width = advance_mesh_width(width, *mesh, *next);
    mesh = std::move(next);
  }

  if (!reference.exact_energy && reference.overkill_extra_refinements <= 0)
  {
    result.reference = "none";
  }
  else
  {
    const OverkillReference ref = overkill_reference(config.equation, f, *mesh, reference);
    result.reference = ref.descriptor;
    for (LevelRecord &rec : result.trace.levels)
    {
    const EnergyReport er = energy_error_vs_reference(rec.energy_sq, ref.energy_sq, ref.descriptor);
    rec.error = std::sqrt(er.error_vs_reference_sq);
      rec.effectivity = rec.error > 0.0 ? rec.mu / rec.error : kNaN;
    }
  }
  if (a3)
  {
    // Dual norm of eps G restricted to the finest discrete space.
    const GalerkinSolution g = solve_galerkin(config.equation, a3->g, mesh);
    const double dual = a3->epsilon * std::sqrt(std::max(g.energy_sq, 0.0));
    for (std::size_t l = 0; l < a3_diff.size(); ++l)
      result.trace.levels[l].a3_ratio = dual > 0.0 ? a3_diff[l] / dual : kNaN;
  }
  return result;
}

}  // namespace

AdaptiveResult run_adaptive(const RightHandSide &f, const AdaptiveConfig &config,
                            std::shared_ptr<const BoundaryMesh> initial,
                            const ReferenceOptions &reference,
                            const std::optional<PerturbationCheck> &a3)
{
  return run_loop(f, config, std::move(initial), reference, a3, false);
}

AdaptiveResult run_uniform(const RightHandSide &f, const AdaptiveConfig &config,
                           std::shared_ptr<const BoundaryMesh> initial,
                           const ReferenceOptions &reference)
{
  return run_loop(f, config, std::move(initial), reference, std::nullopt, true);
}

namespace
{

SeriesCheck check_series(std::string name, const std::vector<double> &v, const VerifyTolerances &tol)
{
  SeriesCheck c;
  c.name = std::move(name);
  std::size_t first = 0;
  while (first < v.size() && !std::isfinite(v[first]))
    ++first;
  if (first == v.size())
    return c;
  c.available = true;
  c.reference_value = v[first];
  double mx = -std::numeric_limits<double>::infinity();
  for (std::size_t l = 0; l < v.size(); ++l)
  {
    if (static_cast<int>(l) <= tol.burn_in || std::isnan(v[l]))
      continue;
    mx = std::max(mx, v[l]);
  }
  if (mx > -std::numeric_limits<double>::infinity())
  {
    c.max_after_burn_in = mx;
    c.bounded = !(mx > tol.growth_factor * c.reference_value);
  }
  return c;
}

}  // namespace

VerificationReport verify_assumptions(const AdaptiveTrace &trace, const VerifyTolerances &tol)
{
  const bool has_rho = std::any_of(trace.levels.begin(), trace.levels.end(),
                                   [](const LevelRecord &r) { return std::isfinite(r.rho); });
  if (!has_rho)
    throw InvalidArgument("verify_assumptions: trace has no rho records");
  std::vector<double> a1, a2, a3;
  for (const LevelRecord &r : trace.levels)
  {
    a1.push_back(r.a1_ratio);
    a2.push_back(r.a2_c);
    a3.push_back(r.a3_ratio);
  }
  VerificationReport rep;
  rep.a1 = check_series("A1", a1, tol);
  rep.a2 = check_series("A2", a2, tol);
  rep.a3 = check_series("A3", a3, tol);
  return rep;
}

namespace
{

constexpr const char *kTraceHeader = "level,dofs,mu,eta,rho,error,increment,a1_ratio,a2_c,effectivity";

std::string fmt(double v)
{
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace

void write_trace_csv(std::ostream &os, const AdaptiveTrace &trace)
{
  os << kTraceHeader << '\n';
  for (const LevelRecord &r : trace.levels)
    os << r.level << ',' << r.dofs << ',' << fmt(r.mu) << ',' << fmt(r.eta) << ',' << fmt(r.rho)
       << ',' << fmt(r.error) << ',' << fmt(r.increment) << ',' << fmt(r.a1_ratio) << ','
       << fmt(r.a2_c) << ',' << fmt(r.effectivity) << '\n';
}

AdaptiveTrace read_trace_csv(std::istream &is)
{
  std::string line;
  if (!std::getline(is, line))
    throw InvalidArgument("trace CSV is empty");
  if (!line.empty() && line.back() == '\r')
    line.pop_back();
  if (line != kTraceHeader)
    throw InvalidArgument("trace CSV header mismatch: expected '" + std::string(kTraceHeader) + "'");
  AdaptiveTrace trace;
  std::size_t lineno = 1;
  while (std::getline(is, line))
  {
    ++lineno;
    if (!line.empty() && line.back() == '\r')
      line.pop_back();
    if (line.empty())
      continue;
    std::vector<std::string> cells;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ','))
      cells.push_back(cell);
    if (cells.size() != 10)
      throw InvalidArgument("trace CSV line " + std::to_string(lineno) + ": expected 10 fields");
    auto num = [&](std::size_t i) {
      char *end = nullptr;
      const double v = std::strtod(cells[i].c_str(), &end);
      if (end == cells[i].c_str() || *end != '\0')
        throw InvalidArgument("trace CSV line " + std::to_string(lineno) + ": bad number '" +
                              cells[i] + "'");
      return v;
    };
    LevelRecord r;
    r.level = static_cast<int>(num(0));
    r.dofs = static_cast<std::size_t>(num(1));
    r.mu = num(2);
    r.eta = num(3);
    r.rho = num(4);
    r.error = num(5);
    r.increment = num(6);
    r.a1_ratio = num(7);
    r.a2_c = num(8);
    r.effectivity = num(9);
    if (!trace.levels.empty() && r.level <= trace.levels.back().level)
      throw InvalidArgument("trace CSV line " + std::to_string(lineno) + ": levels must increase");
    trace.levels.push_back(r);
  }
  return trace;
}

}  // namespace abem
