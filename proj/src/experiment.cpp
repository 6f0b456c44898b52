#include "starcov/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <cctype>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <exception>
#include <filesystem>
#include <fstream>
#include <mutex>
#include <ostream>
#include <thread>

#include "json.hpp"

namespace starcov {

namespace {

using nlohmann::json;

// Substream ids under the master seed.
enum Stream : std::uint64_t {
  kChannels = 0,
  kStarts = 1,
  kWillie = 10,
  kDep = 11,
  kOutageBob = 12,
  kOutageCarol = 13,
  kThreshold = 14,
  kGradient = 15,
  kBound = 16,
};

std::string fmt(double v, const char* spec = "%.12g") {
  char buf[64];
  std::snprintf(buf, sizeof buf, spec, v);
  return buf;
}

std::string sanitize(const std::string& s) {
  std::string out;
  for (char c : s) out += std::isalnum(static_cast<unsigned char>(c)) || c == '.' || c == '-' ? c : '_';
  return out;
}

double max_violation(const VecXd& f) { return f.size() > 1 ? f.tail(f.size() - 1).maxCoeff() : 0.0; }

}  // namespace

void parallel_for(std::size_t count, int jobs, const std::function<void(std::size_t)>& fn) {
  const std::size_t workers = std::min<std::size_t>(std::max(1, jobs), count);
  if (workers <= 1) {
    for (std::size_t i = 0; i < count; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr err;
  std::mutex mu;
  std::vector<std::thread> pool;
  for (std::size_t t = 0; t < workers; ++t) {
    pool.emplace_back([&] {
      for (std::size_t i; (i = next.fetch_add(1)) < count;) {
        try {
          fn(i);
        } catch (...) {
          std::lock_guard lk(mu);
          if (!err) err = std::current_exception();
        }
      }
    });
  }
  for (auto& th : pool) th.join();
  if (err) std::rethrow_exception(err);
}

std::uint64_t channel_seed(std::uint64_t master, int seed_index) {
  return Rng(master).split(kChannels).split(static_cast<std::uint64_t>(seed_index)).key();
}

Rng start_stream(std::uint64_t master, int seed_index) {
  return Rng(master).split(kStarts).split(static_cast<std::uint64_t>(seed_index));
}

MultiStartResult solve_multistart(const ProblemInstanced& inst, const SolverConfig& cfg,
                                  const Rng& start_streams) {
  const SmoothProblem<double> pb = to_smooth_problem(inst);
  MultiStartResult out;
  bool have_any = false;
  for (int s = 0; s < cfg.multistart; ++s) {
    Rng rng = start_streams.split(static_cast<std::uint64_t>(s));
    const VecXd x0 = random_start(inst, rng);
    OptimizeResult<double> r;
    try {
      r = optimize(pb, x0, cfg.gcmma);
    } catch (const SolverError&) {
      ++out.failed_starts;
      continue;
    }
    bool better;
    if (!have_any)
      better = true;
    else if (r.feasible != out.best.feasible)
      better = r.feasible;
    else if (r.feasible)
      better = r.f(0) < out.best.f(0);
    else
      better = max_violation(r.f) < max_violation(out.best.f);
    if (better) {
      out.best = std::move(r);
      out.best_start = s;
      have_any = true;
    }
  }
  out.feasible = have_any && out.best.feasible;
  out.rate = out.feasible ? -out.best.f(0) : 0.0;
  return out;
}

std::string scheme_label(const std::string& scheme, const std::map<std::string, double>& series) {
  std::string s = scheme;
  for (const auto& [k, v] : series) s += "|" + k + "=" + fmt(v, "%g");
  return s;
}

void write_trace(std::ostream& out, const std::vector<TraceRecord<double>>& trace,
                 const std::string& meta_json) {
  out << meta_json << '\n';
  for (const auto& r : trace) {
    json j;
    j["k"] = r.k;
    for (Eigen::Index i = 0; i < r.f.size(); ++i) j["f_" + std::to_string(i)] = r.f(i);
    j["z"] = r.z;
    j["y"] = std::vector<double>(r.y.data(), r.y.data() + r.y.size());
    for (Eigen::Index i = 0; i < r.rho.size(); ++i) j["rho_" + std::to_string(i)] = r.rho(i);
    j["inner_count"] = r.inner_count;
    j["v"] = r.v;
    j["objective"] = r.objective;
    out << j.dump() << '\n';
  }
}

std::vector<SweepRow> run_sweep(const Config& cfg, const RunOptions& opts) {
  const auto& sw = cfg.sweep;
  const std::string var = sweep_var_name(sw.var);
  std::vector<std::map<std::string, double>> series = sw.series;
  if (series.empty()) series.emplace_back();

  struct Point {
    std::size_t series, value, scheme;
    SystemParamsd params;
  };
  std::vector<Point> points;
  for (std::size_t si = 0; si < series.size(); ++si) {
    for (std::size_t vi = 0; vi < sw.values.size(); ++vi) {
      auto ov = series[si];
      ov[var] = sw.values[vi];
      const SystemParamsd p = cfg.params(ov);
      p.validate();
      for (std::size_t ki = 0; ki < sw.schemes.size(); ++ki) {
        if (sw.schemes[ki] == "baseline" && sw.baseline_reflect_fraction == 0.5 && p.N % 2 != 0)
          throw ConfigError("invalid config: baseline scheme with an even split needs even N, got N=" +
                            std::to_string(p.N) + " at " + var + "=" + fmt(sw.values[vi], "%g"));
        points.push_back({si, vi, ki, p});
      }
    }
  }

  const std::size_t R = static_cast<std::size_t>(sw.seeds);
  struct JobResult {
    MultiStartResult ms;
    double wall_ms = 0;
  };
  std::vector<JobResult> results(points.size() * R);

  namespace fs = std::filesystem;
  const bool tracing = opts.trace && !opts.out_dir.empty();
  if (tracing) fs::create_directories(fs::path(opts.out_dir) / "traces");

  parallel_for(results.size(), opts.jobs, [&](std::size_t j) {
    const Point& pt = points[j / R];
    const int r = static_cast<int>(j % R);
    const auto t0 = std::chrono::steady_clock::now();
    const ChannelRealizationd ch = sample_channels(pt.params, channel_seed(opts.seed, r));
    ProblemInstanced inst = make_instance(pt.params, ch);
    if (sw.schemes[pt.scheme] == "baseline")
      inst = baseline_ris_instance(inst, sw.baseline_reflect_fraction);
    MultiStartResult ms = solve_multistart(inst, cfg.solver, start_stream(opts.seed, r));
    results[j].wall_ms =
        std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
    if (tracing) {
      const std::string label = scheme_label(sw.schemes[pt.scheme], series[pt.series]);
      json meta = {{"meta",
                    {{"config_hash", hex64(cfg.hash)},
                     {"seed", opts.seed},
                     {"scheme", label},
                     {"sweep_var", var},
                     {"sweep_value", sw.values[pt.value]},
                     {"seed_index", r},
                     {"best_start", ms.best_start},
                     {"feasible", ms.feasible}}}};
      const std::string name = sanitize(label) + "_" + var + "_" + fmt(sw.values[pt.value], "%g") +
                               "_seed" + std::to_string(r) + ".jsonl";
      std::ofstream f(fs::path(opts.out_dir) / "traces" / name, std::ios::binary);
      write_trace(f, ms.best.trace, meta.dump());
    }
    ms.best.trace.clear();
    results[j].ms = std::move(ms);
  });

  std::vector<SweepRow> rows;
  for (std::size_t pi = 0; pi < points.size(); ++pi) {
    const Point& pt = points[pi];
    SweepRow row;
    row.sweep_var = var;
    row.sweep_value = sw.values[pt.value];
    row.scheme = scheme_label(sw.schemes[pt.scheme], series[pt.series]);
    row.seed_count = sw.seeds;
    double sum = 0, wall = 0;
    for (std::size_t r = 0; r < R; ++r) {
      const auto& jr = results[pi * R + r];
      sum += jr.ms.rate;
      wall += jr.wall_ms;
      row.feasible_count += jr.ms.feasible ? 1 : 0;
    }
    row.mean_rate = sum / static_cast<double>(R);
    double ss = 0;
    for (std::size_t r = 0; r < R; ++r) {
      const double d = results[pi * R + r].ms.rate - row.mean_rate;
      ss += d * d;
    }
    row.std_rate = R > 1 ? std::sqrt(ss / static_cast<double>(R - 1)) : 0.0;
    row.wall_ms = opts.timing ? wall : 0.0;
    rows.push_back(std::move(row));
  }

  if (!opts.out_dir.empty()) {
    fs::create_directories(opts.out_dir);
    std::ofstream f(fs::path(opts.out_dir) / "sweep.csv", std::ios::binary);
    write_sweep_csv(f, rows, cfg, opts.seed);
    if (!f) throw std::runtime_error("failed to write sweep.csv in '" + opts.out_dir + "'");
  }
  return rows;
}

void write_sweep_csv(std::ostream& out, const std::vector<SweepRow>& rows, const Config& cfg,
                     std::uint64_t seed) {
  out << "# config_hash=" << hex64(cfg.hash) << " seed=" << seed << '\n';
  out << "sweep_var,sweep_value,scheme,seed_count,mean_rate,std_rate,feasible_count,wall_ms\n";
  for (const auto& r : rows) {
    out << r.sweep_var << ',' << fmt(r.sweep_value) << ',' << r.scheme << ',' << r.seed_count
        << ',' << fmt(r.mean_rate) << ',' << fmt(r.std_rate) << ',' << r.feasible_count << ','
        << fmt(r.wall_ms, "%.3f") << '\n';
  }
}

MultiStartResult run_solve(const Config& cfg, const RunOptions& opts, std::ostream& trace_out) {
  const SystemParamsd p = cfg.params();
  const ChannelRealizationd ch = sample_channels(p, channel_seed(opts.seed, 0));
  ProblemInstanced inst = make_instance(p, ch);
  const bool baseline = cfg.sweep.schemes.size() == 1 && cfg.sweep.schemes[0] == "baseline";
  if (baseline) inst = baseline_ris_instance(inst, cfg.sweep.baseline_reflect_fraction);
  MultiStartResult ms = solve_multistart(inst, cfg.solver, start_stream(opts.seed, 0));
  const json meta = {{"meta",
                      {{"config_hash", hex64(cfg.hash)},
                       {"seed", opts.seed},
                       {"scheme", baseline ? "baseline" : "star"},
                       {"best_start", ms.best_start},
                       {"feasible", ms.feasible},
                       {"converged", ms.best.converged},
                       {"rate", ms.rate}}}};
  write_trace(trace_out, ms.best.trace, meta.dump());
  if (!opts.out_dir.empty()) {
    std::filesystem::create_directories(opts.out_dir);
    std::ofstream f(std::filesystem::path(opts.out_dir) / "solve_trace.jsonl", std::ios::binary);
    write_trace(f, ms.best.trace, meta.dump());
  }
  return ms;
}

// ---------------------------------------------------------------------------
// Validation

std::pair<Beamformersd, StarRisProfiled> validation_design(const SystemParamsd& params, Rng& rng) {
  const int M = params.M, N = params.N;
  const double P = params.P_max * std::pow(10.0, rng.uniform(-2.0, 2.0));
  const double fb = rng.uniform(0.1, 0.9);
  const double shift = rng.uniform(0.0, kTwoPi<double>);
  CVecXd u(M);
  for (int m = 0; m < M; ++m) u(m) = rng.complex_normal<double>();
  u.normalize();
  Beamformersd bf{VecXd(M), VecXd(M), VecXd(M), VecXd(M)};
  for (int m = 0; m < M; ++m) {
    bf.omega_b(m) = std::sqrt(fb * P) * std::abs(u(m));
    bf.omega_c(m) = std::sqrt((1 - fb) * P) * std::abs(u(m));
    bf.phase_b(m) = detail::wrap_phase(std::arg(u(m)));
    bf.phase_c(m) = detail::wrap_phase(std::arg(u(m)) + shift);
  }
  StarRisProfiled prof{VecXd(N), VecXd(N), VecXd(N)};
  for (int n = 0; n < N; ++n) {
    prof.beta_r(n) = rng.uniform(0.05, 0.95);
    prof.phi_r(n) = rng.uniform(0.0, kTwoPi<double>);
    prof.phi_t(n) = rng.uniform(0.0, kTwoPi<double>);
  }
  return {std::move(bf), std::move(prof)};
}

double family_z(std::size_t comparisons) {
  const double alpha = 0.05 / static_cast<double>(std::max<std::size_t>(1, comparisons));
  // solve erfc(z / sqrt 2) = alpha by bisection
  double lo = 0, hi = 40;
  for (int i = 0; i < 200; ++i) {
    const double mid = 0.5 * (lo + hi);
    (std::erfc(mid / std::sqrt(2.0)) > alpha ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

namespace {

struct ValidationCase {
  ChannelRealizationd ch;
  Beamformersd bf;
  StarRisProfiled prof;
  std::uint64_t mc_seed;
};

ValidationCase make_case(const SystemParamsd& base, std::uint64_t master, Stream stream, int c) {
  const Rng cr = Rng(master).split(stream).split(static_cast<std::uint64_t>(c));
  Rng dr = cr.split(1);
  auto [bf, prof] = validation_design(base, dr);
  return {sample_channels(base, cr.key()), std::move(bf), std::move(prof), cr.split(2).key()};
}

oracle::McOptions mc_opts(const CheckSettings& s, std::uint64_t seed) {
  oracle::McOptions o;
  o.samples = s.counts.samples;
  o.seed = seed;
  o.jobs = s.jobs;
  return o;
}

// Widens a 95% estimate to the family quantile z.
bool covers_at(const oracle::Estimate& e, double x, double z) {
  const double half = e.half_width() * z / 1.959963984540054;
  const double mid = 0.5 * (e.ci_low + e.ci_high);
  return std::abs(x - mid) <= half;
}

bool binomial_covers(const oracle::Estimate& e, double x, double z) {
  const auto hits = static_cast<std::uint64_t>(std::llround(e.value * static_cast<double>(e.samples)));
  return oracle::binomial_estimate(hits, e.samples, z).covers(x);
}

}  // namespace

CheckResult check_willie_power(const SystemParamsd& base, const CheckSettings& s) {
  CheckResult res{"willie_power", true, 0, 0, ""};
  const int C = s.counts.configs;
  const double z = family_z(2 * static_cast<std::size_t>(C));
  int misses = 0;
  for (int c = 0; c < C; ++c) {
    const ValidationCase vc = make_case(base, s.seed, kWillie, c);
    Rng pr = Rng(vc.mc_seed).split(7);
    const double P_j = pr.uniform(0.0, base.P_j_max);
    for (Hypothesis h : {Hypothesis::H0, Hypothesis::H1}) {
      const double exact = willie_avg_power(base, vc.ch, vc.prof, vc.bf, P_j, h);
      const auto e = oracle::mc_willie_power(base, vc.ch, vc.prof, vc.bf, P_j, h,
                                             mc_opts(s, vc.mc_seed + (h == Hypothesis::H1)));
      res.measured = std::max(res.measured, std::abs(e.value - exact) / exact);
      if (!covers_at(e, exact, z)) ++misses;
    }
  }
  res.pass = misses == 0;
  res.tolerance = 0;
  res.detail = "relative error; CI misses " + std::to_string(misses) + "/" + std::to_string(2 * C) +
               " at z=" + fmt(z, "%.3f");
  return res;
}

CheckResult check_dep(const SystemParamsd& base, const CheckSettings& s, double abs_tol) {
  CheckResult res{"dep_mc", true, 0, abs_tol, ""};
  const int C = s.counts.configs, T = s.counts.taus;
  const double z = family_z(2 * static_cast<std::size_t>(C) * static_cast<std::size_t>(T));
  int misses = 0;
  double lam_lo = INFINITY, lam_hi = 0;
  for (int c = 0; c < C; ++c) {
    const ValidationCase vc = make_case(base, s.seed, kDep, c);
    const DepParamsd p = dep_params(base, vc.ch, vc.prof, vc.bf);
    lam_lo = std::min(lam_lo, p.lambda);
    lam_hi = std::max(lam_hi, p.lambda);
    std::vector<double> taus(T);
    const double span = p.jamming_span() + 4 * p.lambda_tilde;
    for (int k = 0; k < T; ++k) taus[k] = p.sigma2_w + span * (k + 1) / (T + 1);
    if (T == 1) taus[0] = optimal_threshold(p).value_or(p.sigma2_w + span / 2);
    const auto sim = oracle::mc_dep(base, vc.ch, vc.prof, vc.bf, taus, mc_opts(s, vc.mc_seed));
    const auto cond = oracle::mc_dep_conditional(p, taus, mc_opts(s, vc.mc_seed + 1));
    for (int k = 0; k < T; ++k) {
      const double d = s.hooks.dep(taus[k], p);
      res.measured = std::max({res.measured, std::abs(sim[k].value - d), std::abs(cond[k].value - d)});
      if (!binomial_covers(sim[k], d, z)) ++misses;
      if (!covers_at(cond[k], d, z)) ++misses;
    }
  }
  res.pass = misses == 0 && res.measured <= abs_tol;
  res.detail = "max |mc - dep|; CI misses " + std::to_string(misses) + "/" +
               std::to_string(2 * C * T) + " at z=" + fmt(z, "%.3f") + "; lambda in [" +
               fmt(lam_lo, "%.3g") + ", " + fmt(lam_hi, "%.3g") + "]";
  return res;
}

CheckResult check_outage(const SystemParamsd& base, oracle::Link link, const CheckSettings& s,
                         double abs_tol) {
  const bool bob = link == oracle::Link::Bob;
  CheckResult res{bob ? "outage_bob" : "outage_carol", true, 0, abs_tol, ""};
  const int C = s.counts.configs;
  const double z = family_z(static_cast<std::size_t>(C));
  int misses = 0;
  double iota_err = 0;
  for (int c = 0; c < C; ++c) {
    const ValidationCase vc = make_case(base, s.seed, bob ? kOutageBob : kOutageCarol, c);
    const LinkGainsd g = link_gains(vc.ch, vc.prof, vc.bf);
    Rng pr = Rng(vc.mc_seed).split(7);
    double R, exact;
    if (bob) {
      const double P_u = pr.uniform(0.05, 0.95) * base.P_j_max;
      R = std::log2(1 + g.g_bb / (g.g_bc + g.g_bj * P_u + base.sigma2_b));
      exact = outage_bob(g, R, base);
      iota_err = std::max(iota_err, std::abs(outage_bob(g, rate_bb(g, base), base) - base.iota));
    } else {
      const double zc = pr.uniform(0.1, 3.0);
      const double q = g.g_cc_sig / (g.g_cb + base.sigma2_c + zc * base.phi_sic * base.P_j_max);
      R = std::log2(1 + q);
      exact = outage_carol(g, R, base);
    }
    const auto e = oracle::mc_outage(base, vc.ch, vc.prof, vc.bf, R, link, mc_opts(s, vc.mc_seed));
    res.measured = std::max(res.measured, std::abs(e.value - exact));
    if (!binomial_covers(e, exact, z)) ++misses;
  }
  res.pass = misses == 0 && res.measured <= abs_tol && iota_err <= 1e-9;
  res.detail = "max |mc - closed form|; CI misses " + std::to_string(misses) + "/" +
               std::to_string(C) + " at z=" + fmt(z, "%.3f");
  if (bob) res.detail += "; |outage(rate_bb) - iota| = " + fmt(iota_err, "%.2e");
  return res;
}

CheckResult check_threshold_grid(const SystemParamsd& base, const CheckSettings& s) {
  CheckResult res{"threshold_grid", true, 0, 2, ""};
  const int C = s.counts.configs;
  int bad = 0;
  double worst_dep_gap = 0;
  for (int c = 0; c < C; ++c) {
    Rng r = Rng(s.seed).split(kThreshold).split(static_cast<std::uint64_t>(c));
    DepParamsd p;
    p.sigma2_w = base.sigma2_w;
    const double unit = base.sigma2_w;
    p.lambda = unit * std::pow(10.0, r.uniform(-1.0, 3.0));
    p.lambda_tilde = p.lambda * (1 + std::pow(10.0, r.uniform(-2.0, 1.0)));
    p.P_j_max = base.P_j_max;
    p.gamma = unit * std::pow(10.0, r.uniform(-1.0, 3.0)) / p.P_j_max;
    const double tau_star = *optimal_threshold(p);
    const oracle::GridMin gm = oracle::grid_min_threshold(p, s.counts.grid);
    const double steps = gm.steps_to(tau_star);
    const double md = min_dep(p);
    res.measured = std::max(res.measured, steps);
    worst_dep_gap = std::min(worst_dep_gap, gm.dep_best - md);
    const bool branch3 = gm.tie_high >= p.sigma2_w + p.jamming_span() - 2 * gm.tie_step;
    if (steps > 2 || gm.dep_best < md - 1e-4 || !branch3 || std::abs(dep(tau_star, p) - md) > 1e-9)
      ++bad;
  }
  res.pass = bad == 0;
  res.detail = "grid steps from tau* to the grid minimizer set; min(dep_grid - min_dep) = " +
               fmt(worst_dep_gap, "%.2e") + "; failures " + std::to_string(bad) + "/" +
               std::to_string(C);
  return res;
}

CheckResult check_fd_gradient(const SystemParamsd& base, const CheckSettings& s, double rel_tol) {
  CheckResult res{"fd_gradient", true, 0, rel_tol, ""};
  const ChannelRealizationd ch =
      sample_channels(base, Rng(s.seed).split(kGradient).key());
  const ProblemInstanced inst = make_instance(base, ch);
  const int F = s.counts.fd_points;
  std::vector<double> worst(4, 0.0);
  for (int k = 0; k < F; ++k) {
    Rng r = Rng(s.seed).split(kGradient).split(static_cast<std::uint64_t>(k) + 1);
    VecXd x(inst.layout.size());
    for (Eigen::Index j = 0; j < x.size(); ++j) {
      const double lo = inst.x_min(j), hi = inst.x_max(j);
      x(j) = lo + (hi - lo) * r.uniform(0.05, 0.95);
    }
    const MatXd A = grad_f(inst, x);
    const MatXd D = oracle::fd_gradient(inst, x, s.counts.fd_h_rel);
    for (int i = 0; i < 4; ++i) {
      const double scale = std::max(D.row(i).cwiseAbs().maxCoeff(), 1e-300);
      worst[i] = std::max(worst[i], (A.row(i) - D.row(i)).cwiseAbs().maxCoeff() / scale);
    }
  }
  res.measured = *std::max_element(worst.begin(), worst.end());
  res.pass = res.measured < rel_tol;
  res.detail = "relative inf-norm per f_i: " + fmt(worst[0], "%.2e") + " " + fmt(worst[1], "%.2e") +
               " " + fmt(worst[2], "%.2e") + " " + fmt(worst[3], "%.2e") + " over " +
               std::to_string(F) + " points";
  return res;
}

CheckResult check_bound_chain(const SystemParamsd& base, const CheckSettings& s, double abs_tol) {
  CheckResult res{"bound_chain", true, 0, abs_tol, ""};
  const int C = s.counts.configs;
  int order_bad = 0;
  for (int c = 0; c < C; ++c) {
    const ValidationCase vc = make_case(base, s.seed, kBound, c);
    const AsymptoticDepd a = asymptotic_dep(base, vc.ch, vc.prof, vc.bf);
    const double quad = avg_min_dep_numeric(a);
    const double lb = dep_lower_bound(a);
    const auto e = oracle::mc_avg_min_dep(a, mc_opts(s, vc.mc_seed));
    res.measured = std::max(res.measured, std::abs(e.value - quad));
    if (!(lb < quad && quad <= 1)) ++order_bad;
  }
  res.pass = order_bad == 0 && res.measured <= abs_tol;
  res.detail = "max |mc - quadrature|; bound-order violations " + std::to_string(order_bad) + "/" +
               std::to_string(C);
  return res;
}

std::vector<CheckResult> run_validation(const Config& cfg, const RunOptions& opts,
                                        const ValidationHooks& hooks) {
  const SystemParamsd base = cfg.params();
  CheckSettings s{cfg.validate, opts.seed, opts.jobs, hooks};
  std::vector<CheckResult> out;
  out.push_back(check_willie_power(base, s));
  out.push_back(check_dep(base, s));
  out.push_back(check_outage(base, oracle::Link::Bob, s));
  out.push_back(check_outage(base, oracle::Link::Carol, s));
  out.push_back(check_threshold_grid(base, s));
  out.push_back(check_fd_gradient(base, s));
  out.push_back(check_bound_chain(base, s));
  return out;
}

void write_validation_report(std::ostream& out, const std::vector<CheckResult>& checks) {
  for (const auto& c : checks) {
    out << (c.pass ? "PASS " : "FAIL ") << c.name << " measured=" << fmt(c.measured, "%.3e")
        << " tol=" << fmt(c.tolerance, "%.3e") << "  " << c.detail << '\n';
  }
}

}  // namespace starcov
