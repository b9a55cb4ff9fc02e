// SPDX-License-Identifier: Apache-2.0

#include "abemlab/abemlab.h"

#include <exception>
#include <fstream>
#include <new>
#include <sstream>
#include <string>

#include "abem/errors.hpp"
#include "abem/experiment.hpp"
#include "abem/oracle.hpp"

struct abem_experiment
{
  abem::ExperimentConfig config;
};

struct abem_trace
{
  abem::AdaptiveTrace trace;
};

namespace
{

thread_local std::string g_error;
thread_local std::string g_field;

abem_status fail(abem_status s, const std::string &msg, const std::string &field = {})
{
  g_error = msg;
  g_field = field;
  return s;
}

template <class F>
abem_status guarded(F &&body)
{
  try
  {
    return body();
  }
  catch (const abem::ConfigError &e)
  {
    return fail(ABEM_ERR_CONFIG, e.what(), e.field());
  }
  catch (const abem::NumericalError &e)
  {
    return fail(ABEM_ERR_NUMERICAL, e.what());
  }
  catch (const abem::IoError &e)
  {
    return fail(ABEM_ERR_IO, e.what());
  }
  catch (const abem::InvalidArgument &e)
  {
    return fail(ABEM_ERR_INVALID_ARGUMENT, e.what());
  }
  catch (const std::bad_alloc &)
  {
    return fail(ABEM_ERR_NUMERICAL, "out of memory");
  }
  catch (const std::exception &e)
  {
    return fail(ABEM_ERR_INTERNAL, e.what());
  }
  catch (...)
  {
    return fail(ABEM_ERR_INTERNAL, "unknown exception");
  }
}

// Splits text on newlines and forwards each line.
class LineSink : public std::stringbuf
{
public:
  LineSink(abem_write_fn fn, void *user) : fn_(fn), user_(user) {}
  ~LineSink() override { flush_lines(true); }

protected:
  int sync() override
  {
    flush_lines(false);
    return 0;
  }

private:
  void flush_lines(bool all)
  {
    std::string s = str();
    std::size_t start = 0;
    for (std::size_t nl; (nl = s.find('\n', start)) != std::string::npos; start = nl + 1)
      emit(s.substr(start, nl - start));
    s.erase(0, start);
    if (all && !s.empty())
    {
      emit(s);
      s.clear();
    }
    str(s);
    seekoff(0, std::ios_base::end, std::ios_base::out);
  }
  void emit(const std::string &line)
  {
    if (fn_)
      fn_(line.c_str(), user_);
  }
  abem_write_fn fn_;
  void *user_;
};

abem_series_check to_c(const abem::SeriesCheck &c)
{
  return {c.available ? 1 : 0, c.bounded ? 1 : 0, c.reference_value, c.max_after_burn_in};
}

}  // namespace

extern "C" {

const char *abem_version(void) { return "0.1.0"; }

const char *abem_last_error(void) { return g_error.c_str(); }

const char *abem_last_error_field(void) { return g_field.c_str(); }

abem_status abem_experiment_load(const char *path, abem_experiment **out)
{
  if (!path || !out)
    return fail(ABEM_ERR_INVALID_ARGUMENT, "abem_experiment_load: null argument");
  *out = nullptr;
  return guarded([&] {
    auto exp = std::make_unique<abem_experiment>();
    exp->config = abem::load_config(path);
    *out = exp.release();
    return ABEM_OK;
  });
}

abem_status abem_experiment_parse(const char *text, abem_experiment **out)
{
  if (!text || !out)
    return fail(ABEM_ERR_INVALID_ARGUMENT, "abem_experiment_parse: null argument");
  *out = nullptr;
  return guarded([&] {
    std::istringstream in(text);
    auto exp = std::make_unique<abem_experiment>();
    exp->config = abem::parse_config(in);
    *out = exp.release();
    return ABEM_OK;
  });
}

abem_status abem_experiment_set_outputs(abem_experiment *exp, const char *dir)
{
  if (!exp || !dir)
    return fail(ABEM_ERR_INVALID_ARGUMENT, "abem_experiment_set_outputs: null argument");
  return guarded([&] {
    exp->config.outputs = dir;
    return ABEM_OK;
  });
}

abem_status abem_experiment_run(abem_experiment *exp, abem_write_fn progress, void *user,
                                abem_trace **trace)
{
  if (!exp)
    return fail(ABEM_ERR_INVALID_ARGUMENT, "abem_experiment_run: null experiment");
  if (trace)
    *trace = nullptr;
  return guarded([&] {
    abem::ProgressSink sink;
    if (progress)
      sink = [&](const std::string &s) { progress(s.c_str(), user); };
    abem::ExperimentResult r = abem::run_experiment(exp->config, sink);
    if (trace)
      *trace = new abem_trace{std::move(r.adaptive.trace)};
    return ABEM_OK;
  });
}

void abem_experiment_free(abem_experiment *exp) { delete exp; }

abem_status abem_trace_read(const char *path, abem_trace **out)
{
  if (!path || !out)
    return fail(ABEM_ERR_INVALID_ARGUMENT, "abem_trace_read: null argument");
  *out = nullptr;
  return guarded([&] {
    std::ifstream in(path);
    if (!in)
      throw abem::IoError(std::string("cannot read ") + path);
    auto t = std::make_unique<abem_trace>();
    t->trace = abem::read_trace_csv(in);
    *out = t.release();
    return ABEM_OK;
  });
}

size_t abem_trace_level_count(const abem_trace *trace) { return trace ? trace->trace.levels.size() : 0; }

abem_status abem_trace_level(const abem_trace *trace, size_t index, abem_level *out)
{
  if (!trace || !out)
    return fail(ABEM_ERR_INVALID_ARGUMENT, "abem_trace_level: null argument");
  if (index >= trace->trace.levels.size())
    return fail(ABEM_ERR_INVALID_ARGUMENT, "abem_trace_level: index out of range");
  const abem::LevelRecord &r = trace->trace.levels[index];
  *out = {r.level, r.dofs, r.mu, r.eta, r.rho, r.error, r.increment, r.a1_ratio, r.a2_c, r.effectivity};
  return ABEM_OK;
}

abem_status abem_trace_rate(const abem_trace *trace, double *slope)
{
  if (!trace || !slope)
    return fail(ABEM_ERR_INVALID_ARGUMENT, "abem_trace_rate: null argument");
  return guarded([&] {
    *slope = abem::rate_fit(trace->trace);
    return ABEM_OK;
  });
}

abem_status abem_trace_verify(const abem_trace *trace, abem_verification *out)
{
  if (!trace || !out)
    return fail(ABEM_ERR_INVALID_ARGUMENT, "abem_trace_verify: null argument");
  return guarded([&] {
    const abem::VerificationReport rep = abem::verify_assumptions(trace->trace, {});
    out->a1 = to_c(rep.a1);
    out->a2 = to_c(rep.a2);
    if ((rep.a1.available && !rep.a1.bounded) || (rep.a2.available && !rep.a2.bounded))
      return fail(ABEM_ERR_VERIFY, "assumption ratios grow beyond the allowed factor");
    return ABEM_OK;
  });
}

void abem_trace_free(abem_trace *trace) { delete trace; }

abem_status abem_oracle_selftest(size_t pairs, uint64_t seed, abem_write_fn report, void *user,
                                 abem_selftest *out)
{
  return guarded([&] {
    LineSink buf(report, user);
    std::ostream log(&buf);
    const abem::oracle::SelfTestResult r = abem::oracle::selftest(log, pairs, seed);
    log.flush();
    if (out)
      *out = {r.checks, r.failures, r.worst_relative_error};
    if (r.failures > 0)
      return fail(ABEM_ERR_NUMERICAL, std::to_string(r.failures) + " oracle checks failed");
    return ABEM_OK;
  });
}

}  // extern "C"
