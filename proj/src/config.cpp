#include "starcov/config.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "json.hpp"

namespace starcov {

using nlohmann::json;

double db_to_linear(double db) { return std::pow(10.0, db / 10.0); }
double dbm_to_watts(double dbm) { return std::pow(10.0, (dbm - 30.0) / 10.0); }
double dbw_to_watts(double dbw) { return std::pow(10.0, dbw / 10.0); }

std::uint64_t fnv1a64(const std::string& bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::string hex64(std::uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

namespace {

// Keys of the "system" section with their defaults, in config units.
const std::map<std::string, double>& system_defaults() {
  static const std::map<std::string, double> d = {
      {"M", 3},
      {"N", 30},
      {"rho_0_dB", -20},
      {"alpha", 2.6},
      {"d_AR", 50},
      {"d_rb", 20},
      {"d_rc", 25},
      {"d_rw", 15},
      {"sigma2_b_dBm", -100},
      {"sigma2_c_dBm", -100},
      {"sigma2_w_dBm", -100},
      {"phi_sic_dB", -110},
      {"P_max_dBW", 0},
      {"P_j_max_dBW", 0},
      {"epsilon", 0.1},
      {"iota", 0.1},
      {"kappa", 0.1},
      {"R_star", 4},
  };
  return d;
}

const std::map<std::string, SweepVar>& sweep_vars() {
  static const std::map<std::string, SweepVar> v = {
      {"epsilon", SweepVar::Epsilon},   {"N", SweepVar::N},
      {"M", SweepVar::M},               {"P_max_dBW", SweepVar::P_max_dBW},
      {"P_j_max_dBW", SweepVar::P_j_max_dBW}, {"R_star", SweepVar::R_star},
  };
  return v;
}

bool is_integer_key(const std::string& k) { return k == "M" || k == "N"; }

class Checker {
 public:
  void fail(const std::string& key, const std::string& what) { errors_.push_back(key + ": " + what); }

  // Reports keys of obj that are not in allowed.
  void only(const json& obj, const std::string& where, const std::vector<std::string>& allowed) {
    for (const auto& [k, _] : obj.items()) {
      if (std::find(allowed.begin(), allowed.end(), k) == allowed.end())
        fail(where + k, "unknown key");
    }
  }

  bool number(const json& obj, const std::string& where, const std::string& key, double& out) {
    if (!obj.contains(key)) return false;
    if (!obj[key].is_number()) {
      fail(where + key, "expected a number");
      return false;
    }
    out = obj[key].get<double>();
    if (!std::isfinite(out)) {
      fail(where + key, "must be finite");
      return false;
    }
    return true;
  }

  template <typename Int>
  void integer(const json& obj, const std::string& where, const std::string& key, Int& out,
               long long min_value) {
    if (!obj.contains(key)) return;
    if (!obj[key].is_number_integer()) {
      fail(where + key, "expected an integer");
      return;
    }
    const long long v = obj[key].get<long long>();
    if (v < min_value) {
      fail(where + key, "must be >= " + std::to_string(min_value));
      return;
    }
    out = static_cast<Int>(v);
  }

  void finish() const {
    if (errors_.empty()) return;
    std::string msg = "invalid config (" + std::to_string(errors_.size()) + " problem" +
                      (errors_.size() == 1 ? "" : "s") + "):";
    for (const auto& e : errors_) msg += "\n  " + e;
    throw ConfigError(msg);
  }

 private:
  std::vector<std::string> errors_;
};

void check_system_value(Checker& ck, const std::string& key, double v, const std::string& where) {
  if (is_integer_key(key) && (v != std::floor(v) || v < 1))
    ck.fail(where + key, "must be an integer >= 1");
}

}  // namespace

std::string sweep_var_name(SweepVar v) {
  for (const auto& [k, val] : sweep_vars())
    if (val == v) return k;
  return "?";
}

SystemParamsd Config::params(const std::map<std::string, double>& overrides) const {
  std::map<std::string, double> s = system;
  for (const auto& [k, v] : overrides) s[k] = v;
  SystemParamsd p;
  p.M = static_cast<int>(s.at("M"));
  p.N = static_cast<int>(s.at("N"));
  p.rho_0 = db_to_linear(s.at("rho_0_dB"));
  p.alpha = s.at("alpha");
  p.d_AR = s.at("d_AR");
  p.d_rb = s.at("d_rb");
  p.d_rc = s.at("d_rc");
  p.d_rw = s.at("d_rw");
  p.sigma2_b = dbm_to_watts(s.at("sigma2_b_dBm"));
  p.sigma2_c = dbm_to_watts(s.at("sigma2_c_dBm"));
  p.sigma2_w = dbm_to_watts(s.at("sigma2_w_dBm"));
  p.phi_sic = db_to_linear(s.at("phi_sic_dB"));
  p.P_max = dbw_to_watts(s.at("P_max_dBW"));
  p.P_j_max = dbw_to_watts(s.at("P_j_max_dBW"));
  p.epsilon = s.at("epsilon");
  p.iota = s.at("iota");
  p.kappa = s.at("kappa");
  p.R_star = s.at("R_star");
  return p;
}

Config parse_config(const std::string& json_text) {
  json root;
  try {
    root = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("config is not valid JSON: ") + e.what());
  }
  if (!root.is_object()) throw ConfigError("config root must be an object");

  Checker ck;
  Config cfg;
  cfg.system = system_defaults();
  ck.only(root, "", {"seed", "system", "solver", "sweep", "validate"});
  ck.integer(root, "", "seed", cfg.seed, 0);

  if (root.contains("system")) {
    const json& s = root["system"];
    if (!s.is_object()) {
      ck.fail("system", "expected an object");
    } else {
      for (const auto& [k, v] : s.items()) {
        if (!system_defaults().count(k)) {
          ck.fail("system." + k, "unknown key");
          continue;
        }
        double x;
        if (ck.number(s, "system.", k, x)) {
          check_system_value(ck, k, x, "system.");
          cfg.system[k] = x;
        }
      }
    }
  }

  if (root.contains("solver")) {
    const json& s = root["solver"];
    if (!s.is_object()) {
      ck.fail("solver", "expected an object");
    } else {
      ck.only(s, "solver.", {"epsilon_tol", "gap", "max_outer", "max_inner", "multistart"});
      double tol;
      if (ck.number(s, "solver.", "epsilon_tol", tol)) {
        if (tol > 0)
          cfg.solver.gcmma.epsilon_tol = tol;
        else
          ck.fail("solver.epsilon_tol", "must be positive");
      }
      if (s.contains("gap")) {
        const auto g = s["gap"].is_string() ? s["gap"].get<std::string>() : "";
        if (g == "absolute")
          cfg.solver.gcmma.gap = GapMode::Absolute;
        else if (g == "relative")
          cfg.solver.gcmma.gap = GapMode::Relative;
        else
          ck.fail("solver.gap", "expected \"absolute\" or \"relative\"");
      }
      ck.integer(s, "solver.", "max_outer", cfg.solver.gcmma.max_outer, 1);
      ck.integer(s, "solver.", "max_inner", cfg.solver.gcmma.max_inner, 1);
      ck.integer(s, "solver.", "multistart", cfg.solver.multistart, 1);
    }
  }

  if (root.contains("sweep")) {
    const json& s = root["sweep"];
    if (!s.is_object()) {
      ck.fail("sweep", "expected an object");
    } else {
      ck.only(s, "sweep.", {"var", "values", "series", "seeds", "schemes", "baseline_reflect_fraction"});
      if (s.contains("var")) {
        const auto v = s["var"].is_string() ? s["var"].get<std::string>() : "";
        if (sweep_vars().count(v))
          cfg.sweep.var = sweep_vars().at(v);
        else
          ck.fail("sweep.var", "expected one of epsilon, N, M, P_max_dBW, P_j_max_dBW, R_star");
      }
      if (s.contains("values")) {
        if (!s["values"].is_array() || s["values"].empty()) {
          ck.fail("sweep.values", "expected a non-empty array of numbers");
        } else {
          for (const auto& v : s["values"]) {
            if (!v.is_number()) {
              ck.fail("sweep.values", "expected a non-empty array of numbers");
              break;
            }
            cfg.sweep.values.push_back(v.get<double>());
          }
          for (double v : cfg.sweep.values)
            check_system_value(ck, sweep_var_name(cfg.sweep.var), v, "sweep.values: ");
        }
      }
      if (s.contains("series")) {
        if (!s["series"].is_array()) {
          ck.fail("sweep.series", "expected an array of objects");
        } else {
          for (std::size_t i = 0; i < s["series"].size(); ++i) {
            const json& e = s["series"][i];
            const std::string where = "sweep.series[" + std::to_string(i) + "].";
            if (!e.is_object()) {
              ck.fail(where, "expected an object");
              continue;
            }
            std::map<std::string, double> ov;
            for (const auto& [k, v] : e.items()) {
              if (!system_defaults().count(k)) {
                ck.fail(where + k, "unknown system key");
                continue;
              }
              double x;
              if (ck.number(e, where, k, x)) {
                check_system_value(ck, k, x, where);
                ov[k] = x;
              }
            }
            cfg.sweep.series.push_back(std::move(ov));
          }
        }
      }
      ck.integer(s, "sweep.", "seeds", cfg.sweep.seeds, 1);
      if (s.contains("schemes")) {
        cfg.sweep.schemes.clear();
        bool ok = s["schemes"].is_array() && !s["schemes"].empty();
        if (ok) {
          for (const auto& v : s["schemes"]) {
            const auto name = v.is_string() ? v.get<std::string>() : "";
            if (name != "star" && name != "baseline") ok = false;
            cfg.sweep.schemes.push_back(name);
          }
        }
        if (!ok) ck.fail("sweep.schemes", "expected a non-empty array of \"star\"/\"baseline\"");
      }
      double frac;
      if (ck.number(s, "sweep.", "baseline_reflect_fraction", frac)) {
        if (frac >= 0 && frac <= 1)
          cfg.sweep.baseline_reflect_fraction = frac;
        else
          ck.fail("sweep.baseline_reflect_fraction", "must lie in [0,1]");
      }
    }
  }
  if (cfg.sweep.values.empty()) cfg.sweep.values.push_back(cfg.system.at(sweep_var_name(cfg.sweep.var)));

  if (root.contains("validate")) {
    const json& s = root["validate"];
    if (!s.is_object()) {
      ck.fail("validate", "expected an object");
    } else {
      ck.only(s, "validate.", {"samples", "configs", "taus", "grid", "fd_points", "fd_h_rel"});
      ck.integer(s, "validate.", "samples", cfg.validate.samples, 10000);
      ck.integer(s, "validate.", "configs", cfg.validate.configs, 1);
      ck.integer(s, "validate.", "taus", cfg.validate.taus, 1);
      ck.integer(s, "validate.", "grid", cfg.validate.grid, 10000);
      ck.integer(s, "validate.", "fd_points", cfg.validate.fd_points, 1);
      double h;
      if (ck.number(s, "validate.", "fd_h_rel", h)) {
        if (h > 0 && h < 1)
          cfg.validate.fd_h_rel = h;
        else
          ck.fail("validate.fd_h_rel", "must lie in (0,1)");
      }
    }
  }
  ck.finish();

  // Physical invariants of the base system and of every series.
  try {
    cfg.params().validate();
    for (const auto& ov : cfg.sweep.series) cfg.params(ov).validate();
  } catch (const ConfigError& e) {
    throw ConfigError(std::string("invalid config: ") + e.what());
  }

  cfg.canonical = root.dump();
  cfg.hash = fnv1a64(cfg.canonical);
  return cfg;
}

Config load_config(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot open config file '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

}  // namespace starcov
