// SPDX-License-Identifier: Apache-2.0

#include <cinttypes>
#include <cstdio>
#include <string>

#include "CLI11.hpp"
#include "abemlab/abemlab.h"

namespace
{

enum Exit
{
  kOk = 0,
  kConfig = 1,
  kNumerical = 2,
  kViolation = 3
};

int report_failure(abem_status s)
{
  if (s == ABEM_ERR_CONFIG)
    std::fprintf(stderr, "abemlab: config error: %s\n", abem_last_error());
  else
    std::fprintf(stderr, "abemlab: %s\n", abem_last_error());
  switch (s)
  {
    case ABEM_ERR_NUMERICAL:
    case ABEM_ERR_INTERNAL:
      return kNumerical;
    case ABEM_ERR_VERIFY:
      return kViolation;
    default:
      return kConfig;
  }
}

void print_line(const char *text, void *) { std::printf("%s\n", text); }
void print_err(const char *text, void *) { std::fprintf(stderr, "%s\n", text); }

void print_check(const char *name, const abem_series_check &c)
{
  if (!c.available)
  {
    std::printf("%s: no data\n", name);
    return;
  }
  std::printf("%s: %s (reference %.6g, max after burn-in %.6g)\n", name,
              c.bounded ? "bounded" : "UNBOUNDED", c.reference_value, c.max_after_burn_in);
}

int cmd_run(const std::string &config, const std::string &outputs)
{
  abem_experiment *exp = nullptr;
  abem_status s = abem_experiment_load(config.c_str(), &exp);
  if (s != ABEM_OK)
    return report_failure(s);
  if (!outputs.empty() && (s = abem_experiment_set_outputs(exp, outputs.c_str())) != ABEM_OK)
  {
    abem_experiment_free(exp);
    return report_failure(s);
  }
  abem_trace *trace = nullptr;
  s = abem_experiment_run(exp, print_err, nullptr, &trace);
  abem_experiment_free(exp);
  if (s != ABEM_OK)
    return report_failure(s);

  std::printf("%5s %8s %14s %14s %14s %10s\n", "level", "dofs", "mu", "eta", "error", "eff");
  const size_t n = abem_trace_level_count(trace);
  for (size_t i = 0; i < n; ++i)
  {
    abem_level l;
    abem_trace_level(trace, i, &l);
    std::printf("%5d %8zu %14.6e %14.6e %14.6e %10.4f\n", l.level, l.dofs, l.mu, l.eta, l.error,
                l.effectivity);
  }
  double slope = 0.0;
  if (abem_trace_rate(trace, &slope) == ABEM_OK)
    std::printf("mu slope over the last half of the levels: %.4f\n", slope);
  abem_trace_free(trace);
  return kOk;
}

int cmd_verify(const std::string &path)
{
  abem_trace *trace = nullptr;
  abem_status s = abem_trace_read(path.c_str(), &trace);
  if (s != ABEM_OK)
    return report_failure(s);
  abem_verification v{};
  s = abem_trace_verify(trace, &v);
  abem_trace_free(trace);
  if (s != ABEM_OK && s != ABEM_ERR_VERIFY)
    return report_failure(s);
  print_check("A1", v.a1);
  print_check("A2", v.a2);
  if (s == ABEM_ERR_VERIFY)
    return report_failure(s);
  return kOk;
}

int cmd_oracle(std::size_t pairs, std::uint64_t seed)
{
  abem_selftest r{};
  const abem_status s = abem_oracle_selftest(pairs, seed, print_line, nullptr, &r);
  if (s != ABEM_OK)
    return report_failure(s);
  return kOk;
}

}  // namespace

int main(int argc, char **argv)
{
  CLI::App app{"Adaptive boundary element experiments for the 2D Laplace equation", "abemlab"};
  app.set_version_flag("--version", std::string(abem_version()));
  app.require_subcommand(1);

  std::string config, outputs;
  auto *run = app.add_subcommand("run", "Run the experiment described by a config file");
  run->add_option("config", config, "flat key = value experiment file")->required();
  run->add_option("-o,--outputs", outputs, "override the output directory");

  std::string trace;
  auto *verify = app.add_subcommand("verify", "Re-check the A1/A2 columns of a trace.csv");
  verify->add_option("trace", trace, "trace CSV written by 'run'")->required();

  std::size_t pairs = 100;
  std::uint64_t seed = 7;
  auto *oracle = app.add_subcommand("oracle", "Compare kernel integrals with adaptive quadrature");
  oracle->add_option("--pairs", pairs, "number of random segment pairs")->capture_default_str();
  oracle->add_option("--seed", seed, "random seed")->capture_default_str();

  try
  {
    app.parse(argc, argv);
  }
  catch (const CLI::ParseError &e)
  {
    const int code = app.exit(e);
    return code == 0 ? kOk : kConfig;
  }

  if (*run)
    return cmd_run(config, outputs);
  if (*verify)
    return cmd_verify(trace);
  return cmd_oracle(pairs, seed);
}
