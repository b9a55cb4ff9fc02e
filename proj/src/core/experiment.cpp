// SPDX-License-Identifier: Apache-2.0

#include "abem/experiment.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <numbers>
#include <random>
#include <sstream>

#include "abem/errors.hpp"
#include "abem/quadrature.hpp"

namespace abem
{

namespace
{

std::string trim(std::string_view s)
{
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos)
    return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

double parse_real(const std::string &key, const std::string &v)
{
  double out = 0.0;
  const auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc() || p != v.data() + v.size() || !std::isfinite(out))
    throw ConfigError(key, "expected a finite number, got '" + v + "'");
  return out;
}

long long parse_integer(const std::string &key, const std::string &v, long long lo)
{
  long long out = 0;
  const auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc() || p != v.data() + v.size())
    throw ConfigError(key, "expected an integer, got '" + v + "'");
  if (out < lo)
    throw ConfigError(key, "must be at least " + std::to_string(lo));
  return out;
}

bool parse_bool(const std::string &key, const std::string &v)
{
  if (v == "true" || v == "yes" || v == "1")
    return true;
  if (v == "false" || v == "no" || v == "0")
    return false;
  throw ConfigError(key, "expected true or false, got '" + v + "'");
}

std::vector<Point2> parse_vertices(const std::string &v)
{
  std::vector<Point2> out;
  std::stringstream all(v);
  std::string item;
  while (std::getline(all, item, ';'))
  {
    std::stringstream ss(trim(item));
    std::string xs, ys, extra;
    if (!(ss >> xs >> ys) || (ss >> extra))
      throw ConfigError("vertices", "expected 'x y' pairs separated by ';', got '" + item + "'");
    out.push_back({parse_real("vertices", xs), parse_real("vertices", ys)});
  }
  return out;
}

const std::map<std::string, ProblemKind> kProblems = {{"slit", ProblemKind::Slit},
                                                      {"lshape_boundary", ProblemKind::LShapeBoundary},
                                                      {"square_closed", ProblemKind::SquareClosed},
                                                      {"custom", ProblemKind::Custom}};

const std::map<std::string, RhsKind> kRhs = {{"constant", RhsKind::Constant},
                                             {"arc_length", RhsKind::ArcLength},
                                             {"mean_zero", RhsKind::MeanZero},
                                             {"x", RhsKind::X},
                                             {"synthetic", RhsKind::Synthetic}};

template <class Map>
auto lookup(const Map &m, const std::string &key, const std::string &v)
{
  const auto it = m.find(v);
  if (it == m.end())
  {
    std::string names;
    for (const auto &[name, _] : m)
      names += (names.empty() ? "" : ", ") + name;
    throw ConfigError(key, "unknown value '" + v + "' (expected one of: " + names + ")");
  }
  return it->second;
}

}  // namespace

ExperimentConfig parse_config(std::istream &is)
{
  ExperimentConfig c;
  std::map<std::string, std::string> seen;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(is, line))
  {
    ++lineno;
    if (const auto hash = line.find('#'); hash != std::string::npos)
      line.erase(hash);
    const std::string text = trim(line);
    if (text.empty())
      continue;
    const auto eq = text.find('=');
    if (eq == std::string::npos)
      throw ConfigError("line " + std::to_string(lineno), "expected 'key = value'");
    const std::string key = trim(std::string_view(text).substr(0, eq));
    const std::string value = trim(std::string_view(text).substr(eq + 1));
    if (key.empty())
      throw ConfigError("line " + std::to_string(lineno), "missing key");
    if (value.empty())
      throw ConfigError(key, "missing value");
    if (!seen.emplace(key, value).second)
      throw ConfigError(key, "given more than once");
  }

  for (const auto &[key, v] : seen)
  {
    if (key == "problem")
      c.problem = lookup(kProblems, key, v);
    else if (key == "vertices")
      c.vertices = parse_vertices(v);
    else if (key == "closed")
      c.closed = parse_bool(key, v);
    else if (key == "equation")
    {
      const auto e = parse_equation(v);
      if (!e)
        throw ConfigError(key, "unknown equation '" + v +
                                   "' (expected weakly_singular, hypersingular or "
                                   "hypersingular_stabilized)");
      c.equation = *e;
    }
    else if (key == "estimator")
    {
      const auto e = parse_estimator(v);
      if (!e)
        throw ConfigError(key, "unknown estimator '" + v +
                                   "' (expected faermann, two_level, weighted_residual or "
                                   "rho_modified)");
      c.estimator = *e;
    }
    else if (key == "theta")
    {
      c.theta = parse_real(key, v);
      if (!(c.theta > 0.0 && c.theta <= 1.0))
        throw ConfigError(key, "must lie in (0, 1], got " + v);
    }
    else if (key == "max_dofs")
      c.max_dofs = static_cast<std::size_t>(parse_integer(key, v, 1));
    else if (key == "max_levels")
      c.max_levels = static_cast<int>(parse_integer(key, v, 1));
    else if (key == "stop_estimator")
    {
      c.stop_estimator = parse_real(key, v);
      if (c.stop_estimator < 0.0)
        throw ConfigError(key, "must be non-negative");
    }
    else if (key == "k_patch")
      c.k_patch = static_cast<int>(parse_integer(key, v, 0));
    else if (key == "rhs")
      c.rhs = lookup(kRhs, key, v);
    else if (key == "rhs_value")
      c.rhs_value = parse_real(key, v);
    else if (key == "rhs_seed")
      c.rhs_seed = static_cast<std::uint64_t>(parse_integer(key, v, 0));
    else if (key == "seed_mesh_elements")
      c.seed_mesh_elements = static_cast<std::size_t>(parse_integer(key, v, 2));
    else if (key == "outputs")
      c.outputs = v;
    else if (key == "compare_uniform")
      c.compare_uniform = parse_bool(key, v);
    else if (key == "write_meshes")
      c.write_meshes = parse_bool(key, v);
    else if (key == "overkill_extra_refinements")
      c.overkill_extra_refinements = static_cast<int>(parse_integer(key, v, 0));
    else if (key == "overkill_max_dofs")
      c.overkill_max_dofs = static_cast<std::size_t>(parse_integer(key, v, 1));
    else
      throw ConfigError(key, "unknown key");
  }
  if (!seen.contains("problem"))
    throw ConfigError("problem", "required key is missing");
  if (c.problem == ProblemKind::Custom && c.vertices.empty())
    throw ConfigError("vertices", "required for problem = custom");
  if (c.problem != ProblemKind::Custom && (seen.contains("vertices") || seen.contains("closed")))
    throw ConfigError(seen.contains("vertices") ? "vertices" : "closed",
                      "only valid for problem = custom");
  return c;
}

ExperimentConfig load_config(const std::filesystem::path &path)
{
  std::ifstream in(path);
  if (!in)
    throw IoError("cannot read config file " + path.string());
  return parse_config(in);
}

namespace
{

BoundaryCurve catalogue_curve(const ExperimentConfig &c)
{
  switch (c.problem)
  {
    case ProblemKind::Slit:
      return make_curve({{-1, 0}, {1, 0}}, false);
    case ProblemKind::LShapeBoundary:
      return make_curve({{-1, -1}, {0, -1}, {0, 0}, {1, 0}, {1, 1}, {-1, 1}}, false);
    case ProblemKind::SquareClosed:
      return make_curve({{0, 0}, {1, 0}, {1, 1}, {0, 1}}, true);
    case ProblemKind::Custom:
      try
      {
        return make_curve(c.vertices, c.closed);
      }
      catch (const InvalidArgument &e)
      {
        throw ConfigError("vertices", e.what());
      }
  }
  throw ConfigError("problem", "unknown problem");
}

// int_Gamma g for a quadratic g, exact with two Gauss points per edge.
double curve_integral(const BoundaryCurve &curve, const std::function<double(Point2)> &g)
{
  const QuadratureRule rule = gauss_legendre(2);
  double s = 0.0;
  for (std::size_t e = 0; e < curve.edge_count(); ++e)
  {
    const SegmentGeometry seg = curve.edge(e);
    for (std::size_t q = 0; q < rule.size(); ++q)
      s += seg.length * rule.weights[q] * g(seg.at(rule.nodes[q]));
  }
  return s;
}

RightHandSide catalogue_rhs(const ExperimentConfig &c, const BoundaryCurve &curve,
                            const std::shared_ptr<const BoundaryMesh> &initial)
{
  switch (c.rhs)
  {
    case RhsKind::Constant:
      return RightHandSide::constant(c.rhs_value);
    case RhsKind::ArcLength:
    {
      if (curve.closed)
        throw ConfigError("rhs", "arc_length is discontinuous on a closed curve");
      RightHandSide f;
      f.value = [](const TraceSample &s) { return s.arc; };
      f.derivative = [](const TraceSample &) { return 1.0; };
      f.name = "arc_length";
      return f;
    }
    case RhsKind::MeanZero:
    {
      const double mean =
          curve_integral(curve, [](Point2 p) { return p.x * p.x - p.y * p.y; }) / curve.length();
      RightHandSide f;
      f.value = [mean](const TraceSample &s) { return s.x.x * s.x.x - s.x.y * s.x.y - mean; };
      f.derivative = [](const TraceSample &s) {
        return 2.0 * s.x.x * s.tangent.x - 2.0 * s.x.y * s.tangent.y;
      };
      f.name = "mean_zero";
      return f;
    }
    case RhsKind::X:
    {
      RightHandSide f;
      f.value = [](const TraceSample &s) { return s.x.x; };
      f.derivative = [](const TraceSample &s) { return s.tangent.x; };
      f.name = "x";
      return f;
    }
    case RhsKind::Synthetic:
    {
      const DiscreteSpace space(space_kind(c.equation), initial);
      std::mt19937_64 rng(c.rhs_seed);
      std::uniform_real_distribution<double> dist(-1.0, 1.0);
      Eigen::VectorXd coeffs(static_cast<Eigen::Index>(space.dof_count()));
      for (Eigen::Index i = 0; i < coeffs.size(); ++i)
        coeffs[i] = dist(rng);
      return RightHandSide::from_density(Density(space, coeffs));
    }
  }
  throw ConfigError("rhs", "unknown right-hand side");
}

}  // namespace

Problem make_problem(const ExperimentConfig &config)
{
  if (config.estimator == EstimatorKind::Faermann && config.equation != EquationTag::WeaklySingular)
    throw ConfigError("estimator", "faermann is defined for the weakly_singular equation only");

  Problem p;
  const BoundaryCurve raw = catalogue_curve(config);
  if (raw.closed && config.equation == EquationTag::Hypersingular)
    throw ConfigError("equation", "hypersingular uses S1 functions vanishing at the arc ends and "
                                  "needs an open arc; use hypersingular_stabilized on closed curves");
  if (!raw.closed && config.equation == EquationTag::HypersingularStabilized)
    throw ConfigError("equation", "hypersingular_stabilized needs a closed curve");
  p.curve = normalize_curve(raw);
  auto curve = std::make_shared<const BoundaryCurve>(p.curve.curve);
  p.initial = std::make_shared<const BoundaryMesh>(
      BoundaryMesh::initial(curve, config.seed_mesh_elements));
  if (config.equation != EquationTag::WeaklySingular && p.initial->size() < 2)
    throw ConfigError("seed_mesh_elements", "the hypersingular space needs at least 2 elements");
  p.f = catalogue_rhs(config, p.curve.curve, p.initial);

  if (config.equation == EquationTag::HypersingularStabilized && p.f.has_analytic())
  {
    RightHandSide abs_f;
    abs_f.value = [g = p.f.value](const TraceSample &s) { return std::abs(g(s)); };
    const double scale = analytic_integral(abs_f, *p.initial);
    const double mean = analytic_integral(p.f, *p.initial);
    if (std::abs(mean) > 1e-10 * std::max(scale, 1e-300))
      throw ConfigError("rhs", "hypersingular_stabilized needs <F, 1> = 0 on the closed curve, got " +
                                   std::to_string(mean));
  }

  p.reference.overkill_extra_refinements = config.overkill_extra_refinements;
  p.reference.overkill_max_dofs = config.overkill_max_dofs;
  if (config.problem == ProblemKind::Slit && config.rhs == RhsKind::Constant)
  {
    // Closed-form energies of F = c on the normalized slit of half-length 1/4.
    const double c2 = config.rhs_value * config.rhs_value;
    if (config.equation == EquationTag::WeaklySingular)
      p.reference.exact_energy = c2 * 2.0 * std::numbers::pi / std::log(8.0);
    else
      p.reference.exact_energy = c2 * std::numbers::pi / 16.0;
  }
  return p;
}

AdaptiveConfig adaptive_config(const ExperimentConfig &config)
{
  AdaptiveConfig a;
  a.theta = config.theta;
  a.estimator = config.estimator;
  a.equation = config.equation;
  a.max_dofs = config.max_dofs;
  a.max_levels = config.max_levels;
  a.stop_estimator = config.stop_estimator;
  a.k_patch = config.k_patch;
  return a;
}

double rate_fit(const AdaptiveTrace &trace)
{
  const std::size_t n = trace.levels.size();
  if (n < 4)
    throw InvalidArgument("rate_fit: needs at least 4 levels, got " + std::to_string(n));
  const std::size_t m = (n + 1) / 2;
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t i = n - m; i < n; ++i)
  {
    const LevelRecord &r = trace.levels[i];
    if (!(r.mu > 0.0) || r.dofs == 0)
      throw InvalidArgument("rate_fit: mu and dofs must be positive");
    const double x = std::log(static_cast<double>(r.dofs));
    const double y = std::log(r.mu);
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
  }
  const double k = static_cast<double>(m);
  const double den = k * sxx - sx * sx;
  if (!(den > 0.0))
    throw InvalidArgument("rate_fit: dofs do not vary over the fitted levels");
  return (k * sxy - sx * sy) / den;
}

namespace
{

std::ofstream open_output(const std::filesystem::path &path)
{
  std::ofstream out(path);
  if (!out)
    throw IoError("cannot write " + path.string());
  return out;
}

void finish(std::ofstream &out, const std::filesystem::path &path)
{
  out.flush();
  if (!out)
    throw IoError("write failed for " + path.string());
}

void write_rate(std::ostream &os, const char *name, const std::optional<double> &rate)
{
  if (rate)
  {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.6f", *rate);
    os << name << " = " << buf << '\n';
  }
  else
  {
    os << name << " = unavailable (fewer than 4 levels)\n";
  }
}

std::optional<double> try_rate(const AdaptiveTrace &trace)
{
  try
  {
    return rate_fit(trace);
  }
  catch (const InvalidArgument &)
  {
    return std::nullopt;
  }
}

}  // namespace

ExperimentResult run_experiment(const ExperimentConfig &config, const ProgressSink &progress)
{
  const Problem p = make_problem(config);
  const AdaptiveConfig acfg = adaptive_config(config);
  auto say = [&](const std::string &s) {
    if (progress)
      progress(s);
  };

  std::error_code ec;
  std::filesystem::create_directories(config.outputs, ec);
  if (ec)
    throw IoError("cannot create output directory " + config.outputs.string() + ": " + ec.message());

  ExperimentResult result;
  say("adaptive run: " + std::string(to_string(config.estimator)) + ", " +
      to_string(config.equation) + ", " + std::to_string(p.initial->size()) + " initial elements");
  result.adaptive = run_adaptive(p.f, acfg, p.initial, p.reference);
  const AdaptiveTrace &trace = result.adaptive.trace;
  say("  " + std::to_string(trace.levels.size()) + " levels, final dofs " +
      std::to_string(trace.levels.back().dofs) + ", reference " + result.adaptive.reference);

  const auto &dir = config.outputs;
  {
    const auto path = dir / "trace.csv";
    auto out = open_output(path);
    write_trace_csv(out, trace);
    finish(out, path);
  }
  if (config.write_meshes)
  {
    for (const auto &mesh : result.adaptive.meshes)
    {
      const auto path = dir / ("mesh_" + std::to_string(mesh->level()) + ".txt");
      auto out = open_output(path);
      write_mesh_snapshot(out, *mesh);
      finish(out, path);
    }
  }
  {
    const auto path = dir / "estimators.txt";
    auto out = open_output(path);
    for (const auto &report : result.adaptive.reports)
      write_estimator_report(out, report);
    finish(out, path);
  }

  if (config.compare_uniform)
  {
    say("uniform run");
    result.uniform = run_uniform(p.f, acfg, p.initial, p.reference);
    const auto path = dir / "trace_uniform.csv";
    auto out = open_output(path);
    write_trace_csv(out, result.uniform->trace);
    finish(out, path);
    result.uniform_rate = try_rate(result.uniform->trace);
  }
  result.adaptive_rate = try_rate(trace);
  {
    const auto path = dir / "rates.txt";
    auto out = open_output(path);
    write_rate(out, "adaptive_mu_slope", result.adaptive_rate);
    if (config.compare_uniform)
      write_rate(out, "uniform_mu_slope", result.uniform_rate);
    finish(out, path);
  }
  {
    const auto path = dir / "convergence.svg";
    auto out = open_output(path);
    write_convergence_svg(out, trace, result.uniform ? &result.uniform->trace : nullptr);
    finish(out, path);
  }
  return result;
}

namespace
{

struct Series
{
  std::string label;
  std::string color;
  bool dashed = false;
  std::vector<std::pair<double, double>> points;  // log10 dofs, log10 value
};

Series series(const AdaptiveTrace &t, double LevelRecord::*field, std::string label,
              std::string color, bool dashed)
{
  Series s{std::move(label), std::move(color), dashed, {}};
  for (const LevelRecord &r : t.levels)
  {
    const double v = r.*field;
    if (std::isfinite(v) && v > 0.0 && r.dofs > 0)
      s.points.emplace_back(std::log10(static_cast<double>(r.dofs)), std::log10(v));
  }
  return s;
}

std::string num(double v)
{
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", v);
  return buf;
}

}  // namespace

void write_convergence_svg(std::ostream &os, const AdaptiveTrace &trace, const AdaptiveTrace *uniform)
{
  std::vector<Series> all;
  all.push_back(series(trace, &LevelRecord::mu, "mu", "#1f77b4", false));
  all.push_back(series(trace, &LevelRecord::eta, "eta", "#2ca02c", false));
  all.push_back(series(trace, &LevelRecord::error, "error", "#d62728", false));
  if (uniform)
  {
    all.push_back(series(*uniform, &LevelRecord::mu, "mu (uniform)", "#1f77b4", true));
    all.push_back(series(*uniform, &LevelRecord::error, "error (uniform)", "#d62728", true));
  }

  double x0 = 0, x1 = 1, y0 = -1, y1 = 0;
  bool any = false;
  for (const Series &s : all)
    for (auto [x, y] : s.points)
    {
      if (!any)
      {
        x0 = x1 = x;
        y0 = y1 = y;
        any = true;
      }
      x0 = std::min(x0, x);
      x1 = std::max(x1, x);
      y0 = std::min(y0, y);
      y1 = std::max(y1, y);
    }
  x0 = std::floor(x0);
  x1 = std::max(std::ceil(x1), x0 + 1);
  y0 = std::floor(y0);
  y1 = std::max(std::ceil(y1), y0 + 1);

  const double w = 640, h = 480, ml = 70, mr = 150, mt = 20, mb = 50;
  auto px = [&](double x) { return ml + (x - x0) / (x1 - x0) * (w - ml - mr); };
  auto py = [&](double y) { return mt + (y1 - y) / (y1 - y0) * (h - mt - mb); };

  os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << w << "\" height=\"" << h
     << "\" font-family=\"sans-serif\" font-size=\"12\">\n";
  os << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  for (double d = x0; d <= x1 + 0.5; d += 1)
  {
    os << "<line x1=\"" << num(px(d)) << "\" y1=\"" << num(py(y0)) << "\" x2=\"" << num(px(d))
       << "\" y2=\"" << num(py(y1)) << "\" stroke=\"#ddd\"/>\n";
    os << "<text x=\"" << num(px(d)) << "\" y=\"" << num(py(y0) + 18)
       << "\" text-anchor=\"middle\">1e" << static_cast<int>(d) << "</text>\n";
  }
  for (double d = y0; d <= y1 + 0.5; d += 1)
  {
    os << "<line x1=\"" << num(px(x0)) << "\" y1=\"" << num(py(d)) << "\" x2=\"" << num(px(x1))
       << "\" y2=\"" << num(py(d)) << "\" stroke=\"#ddd\"/>\n";
    os << "<text x=\"" << num(px(x0) - 6) << "\" y=\"" << num(py(d) + 4)
       << "\" text-anchor=\"end\">1e" << static_cast<int>(d) << "</text>\n";
  }
  os << "<rect x=\"" << num(ml) << "\" y=\"" << num(mt) << "\" width=\"" << num(w - ml - mr)
     << "\" height=\"" << num(h - mt - mb) << "\" fill=\"none\" stroke=\"black\"/>\n";
  os << "<text x=\"" << num(ml + (w - ml - mr) / 2) << "\" y=\"" << num(h - 10)
     << "\" text-anchor=\"middle\">dofs</text>\n";

  double ly = mt + 10;
  for (const Series &s : all)
  {
    if (s.points.empty())
      continue;
    os << "<polyline fill=\"none\" stroke=\"" << s.color << "\" stroke-width=\"1.5\""
       << (s.dashed ? " stroke-dasharray=\"5,3\"" : "") << " points=\"";
    for (std::size_t i = 0; i < s.points.size(); ++i)
      os << (i ? " " : "") << num(px(s.points[i].first)) << ',' << num(py(s.points[i].second));
    os << "\"/>\n";
    os << "<line x1=\"" << num(w - mr + 10) << "\" y1=\"" << num(ly) << "\" x2=\"" << num(w - mr + 35)
       << "\" y2=\"" << num(ly) << "\" stroke=\"" << s.color << "\" stroke-width=\"1.5\""
       << (s.dashed ? " stroke-dasharray=\"5,3\"" : "") << "/>\n";
    os << "<text x=\"" << num(w - mr + 40) << "\" y=\"" << num(ly + 4) << "\">" << s.label
       << "</text>\n";
    ly += 18;
  }
  os << "</svg>\n";
}

}  // namespace abem
