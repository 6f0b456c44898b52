// Experiment runner: parameter sweeps, the oracle suite, and single solves.
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "starcov/config.hpp"
#include "starcov/experiment.hpp"

namespace {

enum Exit { kOk = 0, kCheckFailed = 1, kConfigError = 2, kRuntimeError = 3 };

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"STAR-RIS covert beamforming experiments"};
  app.require_subcommand(1);

  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::string out_dir = ".";
  int jobs = 1;
  bool trace = false;
  bool timing = false;

  auto add_common = [&](CLI::App* sub) {
    sub->add_option("config", config_path, "JSON config file")->required()->check(CLI::ExistingFile);
    sub->add_option("--seed", seed, "master seed (overrides the config)");
    sub->add_option("--out-dir", out_dir, "directory for result files");
    sub->add_option("--jobs", jobs, "worker threads")->check(CLI::PositiveNumber);
    sub->add_flag("--trace", trace, "write per-run solver traces");
  };
  CLI::App* sweep = app.add_subcommand("sweep", "run the configured parameter sweep");
  add_common(sweep);
  sweep->add_flag("--timing", timing, "fill the wall_ms column (output is then not reproducible)");
  CLI::App* validate = app.add_subcommand("validate", "run the Monte Carlo / grid / FD oracle suite");
  add_common(validate);
  CLI::App* solve = app.add_subcommand("solve", "solve one instance and print its trace");
  add_common(solve);

  CLI11_PARSE(app, argc, argv);

  try {
    const starcov::Config cfg = starcov::load_config(config_path);
    starcov::RunOptions opts;
    opts.out_dir = out_dir;
    opts.jobs = jobs;
    opts.trace = trace;
    opts.timing = timing;
    opts.seed = seed.value_or(cfg.seed);

    if (*sweep) {
      const auto rows = starcov::run_sweep(cfg, opts);
      starcov::write_sweep_csv(std::cout, rows, cfg, opts.seed);
      return kOk;
    }
    if (*validate) {
      const auto checks = starcov::run_validation(cfg, opts);
      starcov::write_validation_report(std::cout, checks);
      std::filesystem::create_directories(out_dir);
      std::ofstream f(std::filesystem::path(out_dir) / "validate.txt", std::ios::binary);
      f << "# config_hash=" << starcov::hex64(cfg.hash) << " seed=" << opts.seed << '\n';
      starcov::write_validation_report(f, checks);
      for (const auto& c : checks)
        if (!c.pass) return kCheckFailed;
      return kOk;
    }
    if (*solve) {
      if (!trace) opts.out_dir.clear();
      const auto ms = starcov::run_solve(cfg, opts, std::cout);
      std::fprintf(stderr, "feasible=%d rate=%.6f outer=%d start=%d\n", ms.feasible ? 1 : 0,
                   ms.rate, ms.best.outer_iterations, ms.best_start);
      return ms.feasible ? kOk : kCheckFailed;
    }
  } catch (const starcov::ConfigError& e) {
    std::fprintf(stderr, "%s\n", e.what());
    return kConfigError;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kRuntimeError;
  }
  return kOk;
}
