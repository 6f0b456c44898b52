#ifndef STARCOV_CONFIG_HPP
#define STARCOV_CONFIG_HPP

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "starcov/gcmma.hpp"
#include "starcov/model.hpp"

namespace starcov {

/// dB helpers used only at the config boundary.
double db_to_linear(double db);
double dbm_to_watts(double dbm);
double dbw_to_watts(double dbw);

struct SolverConfig {
  GcmmaOptions gcmma;
  int multistart = 5;
};

/// Which quantity a sweep varies. Physical values are in config units (dBW for powers).
enum class SweepVar { Epsilon, N, M, P_max_dBW, P_j_max_dBW, R_star };

struct SweepConfig {
  SweepVar var = SweepVar::Epsilon;
  std::vector<double> values;
  /// Extra overrides, one curve per entry; empty means a single curve with no overrides.
  std::vector<std::map<std::string, double>> series;
  int seeds = 20;
  std::vector<std::string> schemes{"star"};
  double baseline_reflect_fraction = 0.5;
};

struct ValidateConfig {
  std::uint64_t samples = 1'000'000;
  int configs = 5;
  int taus = 10;
  int grid = 100'000;
  int fd_points = 5;
  double fd_h_rel = 1e-6;
};

struct Config {
  std::uint64_t seed = 1;
  /// Physical parameters in config units, before conversion (kept for series overrides).
  std::map<std::string, double> system;
  SolverConfig solver;
  SweepConfig sweep;
  ValidateConfig validate;
  std::string canonical;  // canonical JSON text the hash is taken over
  std::uint64_t hash = 0;

  /// System parameters with `overrides` applied (keys as in the "system" section).
  [[nodiscard]] SystemParamsd params(const std::map<std::string, double>& overrides = {}) const;
};

/// Parses a JSON config. Unknown or ill-typed keys throw ConfigError naming every
/// offending key.
Config parse_config(const std::string& json_text);
Config load_config(const std::string& path);

std::string sweep_var_name(SweepVar v);

/// 64-bit FNV-1a.
std::uint64_t fnv1a64(const std::string& bytes);
std::string hex64(std::uint64_t v);

}  // namespace starcov

#endif  // STARCOV_CONFIG_HPP
