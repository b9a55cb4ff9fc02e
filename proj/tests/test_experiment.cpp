// SPDX-License-Identifier: Apache-2.0

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "abem/errors.hpp"
#include "abem/experiment.hpp"
#include "doctest.h"

using namespace abem;
namespace fs = std::filesystem;

namespace
{

ExperimentConfig parse(const std::string &text)
{
  std::istringstream is(text);
  return parse_config(is);
}

std::string config_error_field(const std::string &text)
{
  try
  {
    make_problem(parse(text));
  }
  catch (const ConfigError &e)
  {
    return e.field();
  }
  return "";
}

std::string slurp(const fs::path &p)
{
  std::ifstream is(p, std::ios::binary);
  std::ostringstream ss;
  ss << is.rdbuf();
  return ss.str();
}

fs::path scratch_dir(const std::string &name)
{
  const fs::path d = fs::temp_directory_path() / ("abem_test_experiment_" + name);
  fs::remove_all(d);
  return d;
}

AdaptiveTrace synthetic_trace(const std::vector<std::pair<double, double>> &dofs_mu)
{
  AdaptiveTrace t;
  int l = 0;
  for (auto [n, mu] : dofs_mu)
  {
    LevelRecord r;
    r.level = l++;
    r.dofs = static_cast<std::size_t>(n);
    r.mu = mu;
    t.levels.push_back(r);
  }
  return t;
}

}  // namespace

TEST_CASE("config parsing")
{
  const ExperimentConfig c = parse("# slit study\n"
                                   "problem = slit\n"
                                   "equation = hypersingular   # S1 on the arc\n"
                                   "estimator = faermann\n"
                                   "theta = 0.25\n"
                                   "max_dofs = 300\n"
                                   "\n"
                                   "compare_uniform = yes\n");
  CHECK(c.problem == ProblemKind::Slit);
  CHECK(c.equation == EquationTag::Hypersingular);
  CHECK(c.estimator == EstimatorKind::Faermann);
  CHECK(c.theta == 0.25);
  CHECK(c.max_dofs == 300);
  CHECK(c.compare_uniform);
  CHECK(c.rhs == RhsKind::Constant);

  const ExperimentConfig custom = parse("problem = custom\nvertices = 0 0; 0.3 0; 0.3 0.3\nclosed = true\n");
  REQUIRE(custom.vertices.size() == 3);
  CHECK(custom.vertices[1].x == 0.3);
  CHECK(custom.closed);
}

TEST_CASE("config errors name the field")
{
  auto field = [](const std::string &text) {
    try
    {
      parse(text);
    }
    catch (const ConfigError &e)
    {
      return e.field();
    }
    return std::string();
  };
  CHECK(field("problem = slit\ntheta = 1.5\n") == "theta");
  CHECK(field("problem = slit\ntheta = 0\n") == "theta");
  CHECK(field("problem = slit\ntheta = abc\n") == "theta");
  CHECK(field("theta = 0.5\n") == "problem");
  CHECK(field("problem = disk\n") == "problem");
  CHECK(field("problem = slit\nestimator = magic\n") == "estimator");
  CHECK(field("problem = slit\nmax_dofs = -3\n") == "max_dofs");
  CHECK(field("problem = slit\ncolour = red\n") == "colour");
  CHECK(field("problem = slit\nproblem = slit\n") == "problem");
  CHECK(field("problem = slit\nvertices = 0 0; 1 1\n") == "vertices");
  CHECK(field("problem = custom\n") == "vertices");
  CHECK(field("problem = custom\nvertices = 0 0; 1\n") == "vertices");
  CHECK(field("problem = slit\nmax_dofs\n") == "line 2");

  const std::string msg = [] {
    try
    {
      parse("problem = slit\ntheta = 1.5\n");
    }
    catch (const ConfigError &e)
    {
      return std::string(e.what());
    }
    return std::string();
  }();
  CHECK(msg.find("theta") != std::string::npos);
}

TEST_CASE("problem compatibility")
{
  CHECK(config_error_field("problem = slit\nequation = hypersingular\nestimator = faermann\n") == "estimator");
  CHECK(config_error_field("problem = square_closed\nequation = hypersingular\n") == "equation");
  CHECK(config_error_field("problem = slit\nequation = hypersingular_stabilized\n") == "equation");
  CHECK(config_error_field("problem = square_closed\nequation = hypersingular_stabilized\n") == "rhs");
  CHECK(config_error_field("problem = square_closed\nrhs = arc_length\n") == "rhs");
  CHECK(config_error_field("problem = square_closed\nequation = hypersingular_stabilized\nrhs = mean_zero\n")
            .empty());
  CHECK(config_error_field("problem = custom\nvertices = 0 0; 0 0\n") == "vertices");

  const Problem slit = make_problem(parse("problem = slit\n"));
  REQUIRE(slit.reference.exact_energy);
  CHECK(*slit.reference.exact_energy == doctest::Approx(2 * std::acos(-1.0) / std::log(8.0)).epsilon(1e-14));
  CHECK(slit.initial->size() == 2);
  CHECK(slit.curve.scale_factor == doctest::Approx(0.25));

  const Problem l = make_problem(parse("problem = lshape_boundary\n"));
  CHECK_FALSE(l.reference.exact_energy);
}

TEST_CASE("rate fit")
{
  std::vector<std::pair<double, double>> pts;
  for (int l = 0; l < 8; ++l)
  {
    const double n = 4.0 * std::pow(1.7, l);
    pts.push_back({std::round(n), 3.0 * std::pow(std::round(n), -1.5)});
  }
  CHECK(rate_fit(synthetic_trace(pts)) == doctest::Approx(-1.5).epsilon(1e-12));

  CHECK(rate_fit(synthetic_trace({{2, 1}, {4, 1}, {8, 1}, {16, 1}, {32, 1}})) == doctest::Approx(0.0));
  // Only the last half enters: a bad start does not matter.
  CHECK(rate_fit(synthetic_trace({{2, 100}, {4, 1e-3}, {8, 1.0 / 8}, {16, 1.0 / 16}, {32, 1.0 / 32}}))
        == doctest::Approx(-1.0));
  CHECK_THROWS_AS(rate_fit(synthetic_trace({{2, 1}, {4, 0.5}, {8, 0.25}})), InvalidArgument);
  CHECK_THROWS_AS(rate_fit(synthetic_trace({{2, 1}, {4, 0.5}, {8, 0.0}, {16, 0.1}})), InvalidArgument);
}

TEST_CASE("run writes deterministic artifacts")
{
  const std::string text = "problem = slit\n"
                           "estimator = two_level\n"
                           "max_dofs = 60\n"
                           "compare_uniform = true\n";
  ExperimentConfig c = parse(text);
  c.outputs = scratch_dir("a");
  std::vector<std::string> progress;
  const ExperimentResult r = run_experiment(c, [&](const std::string &s) { progress.push_back(s); });
  CHECK_FALSE(progress.empty());
  REQUIRE(r.adaptive_rate);
  REQUIRE(r.uniform);
  CHECK(*r.adaptive_rate < -1.0);

  for (const char *name : {"trace.csv", "trace_uniform.csv", "estimators.txt", "rates.txt", "convergence.svg",
                           "mesh_0.txt"})
    CHECK_MESSAGE(fs::exists(c.outputs / name), name);
  const std::size_t L = r.adaptive.trace.levels.size();
  CHECK(fs::exists(c.outputs / ("mesh_" + std::to_string(L - 1) + ".txt")));

  const std::string rates = slurp(c.outputs / "rates.txt");
  CHECK(rates.find("adaptive_mu_slope = ") != std::string::npos);
  CHECK(rates.find("uniform_mu_slope = ") != std::string::npos);

  const std::string svg = slurp(c.outputs / "convergence.svg");
  CHECK(svg.rfind("<svg", 0) == 0);
  CHECK(svg.find("</svg>") != std::string::npos);
  CHECK(svg.find("<polyline") != std::string::npos);

  std::ifstream trace_in(c.outputs / "trace.csv");
  const AdaptiveTrace back = read_trace_csv(trace_in);
  CHECK(back.levels.size() == L);

  ExperimentConfig again = parse(text);
  again.outputs = scratch_dir("b");
  run_experiment(again);
  CHECK(slurp(c.outputs / "trace.csv") == slurp(again.outputs / "trace.csv"));
  CHECK(slurp(c.outputs / "mesh_3.txt") == slurp(again.outputs / "mesh_3.txt"));

  fs::remove_all(c.outputs);
  fs::remove_all(again.outputs);
}

TEST_CASE("missing config file")
{
  CHECK_THROWS_AS(load_config("/nonexistent/abem.cfg"), IoError);
}
