#ifndef STARCOV_EXPERIMENT_HPP
#define STARCOV_EXPERIMENT_HPP

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "starcov/config.hpp"
#include "starcov/detection.hpp"
#include "starcov/gcmma.hpp"
#include "starcov/oracle.hpp"
#include "starcov/problem.hpp"

namespace starcov {

/// Runs fn(i) for i in [0, count) on up to `jobs` threads. The first exception
/// thrown by any call is rethrown after all workers finish.
void parallel_for(std::size_t count, int jobs, const std::function<void(std::size_t)>& fn);

/// Best of several GCMMA runs from random starts on one instance.
struct MultiStartResult {
  bool feasible = false;
  double rate = 0;  // R_bb of the best feasible start, 0 if none
  int best_start = -1;
  int failed_starts = 0;  // starts that raised a solver error
  OptimizeResult<double> best;
};

MultiStartResult solve_multistart(const ProblemInstanced& inst, const SolverConfig& cfg,
                                  const Rng& start_streams);

/// Derived seeds: channels of seed index r, and the start stream of seed index r.
std::uint64_t channel_seed(std::uint64_t master, int seed_index);
Rng start_stream(std::uint64_t master, int seed_index);

struct SweepRow {
  std::string sweep_var;
  double sweep_value = 0;
  std::string scheme;
  int seed_count = 0;
  double mean_rate = 0;
  double std_rate = 0;
  int feasible_count = 0;
  double wall_ms = 0;
};

struct RunOptions {
  std::string out_dir;  // empty: write nothing
  int jobs = 1;
  bool trace = false;
  bool timing = false;  // fill wall_ms; off keeps the CSV byte-reproducible
  std::uint64_t seed = 1;
};

/// Curve label used in the scheme column, e.g. "star" or "baseline|P_max_dBW=3".
std::string scheme_label(const std::string& scheme, const std::map<std::string, double>& series);

std::vector<SweepRow> run_sweep(const Config& cfg, const RunOptions& opts);

void write_sweep_csv(std::ostream& out, const std::vector<SweepRow>& rows, const Config& cfg,
                     std::uint64_t seed);

/// Line-delimited JSON: one meta line, then one record per outer iteration.
void write_trace(std::ostream& out, const std::vector<TraceRecord<double>>& trace,
                 const std::string& meta_json);

/// Single instance at the base system of cfg with seed index 0.
MultiStartResult run_solve(const Config& cfg, const RunOptions& opts, std::ostream& trace_out);

struct CheckResult {
  std::string name;
  bool pass = false;
  double measured = 0;   // worst error seen
  double tolerance = 0;
  std::string detail;
};

/// Replaceable closed forms, so a deliberately broken implementation can be fed
/// through the oracle suite.
struct ValidationHooks {
  std::function<double(double, const DepParamsd&)> dep = [](double tau, const DepParamsd& p) {
    return starcov::dep(tau, p);
  };
};

/// Shared knobs of the individual checks.
struct CheckSettings {
  ValidateConfig counts;
  std::uint64_t seed = 1;
  int jobs = 1;
  ValidationHooks hooks;
};

/// Random STAR-RIS design for validation: collinear beams w_b = a w_c (so the H1
/// statistic stays exponential) with total power log-uniform over 10^-2..10^2 P_max.
std::pair<Beamformersd, StarRisProfiled> validation_design(const SystemParamsd& params, Rng& rng);

/// Two-sided normal quantile for a family of `comparisons` tests at level 0.05 (Bonferroni).
double family_z(std::size_t comparisons);

CheckResult check_willie_power(const SystemParamsd& base, const CheckSettings& s);
/// Closed-form DEP against the radiometer simulation and the conditional estimator.
/// abs_tol bounds |mc - dep| on top of the CI test.
CheckResult check_dep(const SystemParamsd& base, const CheckSettings& s, double abs_tol = 0.01);
CheckResult check_outage(const SystemParamsd& base, oracle::Link link, const CheckSettings& s,
                         double abs_tol = 0.005);
/// Threshold and minimum against the grid search; counts.configs random DepParams.
CheckResult check_threshold_grid(const SystemParamsd& base, const CheckSettings& s);
CheckResult check_fd_gradient(const SystemParamsd& base, const CheckSettings& s,
                              double rel_tol = 1e-5);
/// dep_lower_bound < quadrature <= 1 and quadrature against the Monte Carlo average.
CheckResult check_bound_chain(const SystemParamsd& base, const CheckSettings& s,
                              double abs_tol = 0.005);

/// Every check above at the system and counts of cfg.
std::vector<CheckResult> run_validation(const Config& cfg, const RunOptions& opts,
                                        const ValidationHooks& hooks = {});

void write_validation_report(std::ostream& out, const std::vector<CheckResult>& checks);

}  // namespace starcov

#endif  // STARCOV_EXPERIMENT_HPP
