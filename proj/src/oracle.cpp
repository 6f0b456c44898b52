#include "starcov/oracle.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <mutex>
#include <numeric>
#include <thread>

namespace starcov::oracle {

Estimate binomial_estimate(std::uint64_t hits, std::uint64_t n, double z) {
  if (n == 0) throw DomainError("binomial_estimate: zero samples");
  const double nn = static_cast<double>(n);
  const double p = static_cast<double>(hits) / nn;
  Estimate e;
  e.value = p;
  e.samples = n;
  if (hits < 10 || n - hits < 10) {
    const double z2 = z * z;
    const double centre = (p + z2 / (2 * nn)) / (1 + z2 / nn);
    const double half = z / (1 + z2 / nn) * std::sqrt(p * (1 - p) / nn + z2 / (4 * nn * nn));
    // the bounds at 0 and n hits are exactly 0 and 1; keep rounding from moving them
    e.ci_low = hits == 0 ? 0.0 : std::max(0.0, centre - half);
    e.ci_high = hits == n ? 1.0 : std::min(1.0, centre + half);
  } else {
    const double half = z * std::sqrt(p * (1 - p) / nn);
    e.ci_low = p - half;
    e.ci_high = p + half;
  }
  return e;
}

Estimate mean_estimate(double sum, double sum_sq, std::uint64_t n, double z) {
  if (n < 2) throw DomainError("mean_estimate: need at least two samples");
  const double nn = static_cast<double>(n);
  const double mean = sum / nn;
  const double var = std::max(0.0, (sum_sq - nn * mean * mean) / (nn - 1));
  const double half = z * std::sqrt(var / nn);
  return {mean, mean - half, mean + half, n};
}

void for_each_batch(const McOptions& opts,
                    const std::function<void(std::uint64_t, std::uint64_t)>& fn) {
  if (opts.samples == 0) throw DomainError("Monte Carlo sample count must be positive");
  if (opts.batch == 0) throw DomainError("Monte Carlo batch size must be positive");
  const std::uint64_t n_batches = (opts.samples + opts.batch - 1) / opts.batch;
  auto count_of = [&](std::uint64_t b) {
    return std::min(opts.batch, opts.samples - b * opts.batch);
  };
  const int workers =
      static_cast<int>(std::min<std::uint64_t>(std::max(1, opts.jobs), n_batches));
  if (workers == 1) {
    for (std::uint64_t b = 0; b < n_batches; ++b) fn(b, count_of(b));
    return;
  }
  std::atomic<std::uint64_t> next{0};
  std::exception_ptr err;
  std::mutex err_mu;
  std::vector<std::thread> pool;
  for (int t = 0; t < workers; ++t) {
    pool.emplace_back([&] {
      for (std::uint64_t b; (b = next.fetch_add(1)) < n_batches;) {
        try {
          fn(b, count_of(b));
        } catch (...) {
          std::lock_guard lk(err_mu);
          if (!err) err = std::current_exception();
        }
      }
    });
  }
  for (auto& th : pool) th.join();
  if (err) std::rethrow_exception(err);
}

namespace {

// Per-batch integer tallies summed in batch order.
std::vector<std::uint64_t> sum_rows(const std::vector<std::vector<std::uint64_t>>& rows,
                                    std::size_t width) {
  std::vector<std::uint64_t> out(width, 0);
  for (const auto& r : rows)
    for (std::size_t i = 0; i < width; ++i) out[i] += r[i];
  return out;
}

std::uint64_t n_batches(const McOptions& o) { return (o.samples + o.batch - 1) / o.batch; }

// For sorted taus, increments diff so that tally[i] counts the draws with lo < tau_i <= hi.
void add_interval(const std::vector<double>& sorted, double lo, double hi,
                  std::vector<std::int64_t>& diff) {
  const auto first = std::upper_bound(sorted.begin(), sorted.end(), lo) - sorted.begin();
  const auto last = std::upper_bound(sorted.begin(), sorted.end(), hi) - sorted.begin();
  if (first < last) {
    ++diff[first];
    --diff[last];
  }
}

std::vector<Estimate> finish_dep(const std::vector<double>& taus,
                                 const std::vector<std::size_t>& order,
                                 const std::vector<std::uint64_t>& detected, std::uint64_t n) {
  std::vector<Estimate> out(taus.size());
  for (std::size_t k = 0; k < order.size(); ++k)
    out[order[k]] = binomial_estimate(n - detected[k], n);
  return out;
}

}  // namespace

std::vector<Estimate> mc_dep(const SystemParamsd& params, const ChannelRealizationd& channels,
                             const StarRisProfiled& profile, const Beamformersd& bf,
                             const std::vector<double>& taus, const McOptions& opts) {
  const int N = channels.N(), M = channels.M();
  std::vector<std::size_t> order(taus.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](auto a, auto b) { return taus[a] < taus[b]; });
  std::vector<double> sorted(taus.size());
  for (std::size_t k = 0; k < order.size(); ++k) sorted[k] = taus[order[k]];

  const CVecXd v = channels.h_rw.conjugate().cwiseProduct(profile.theta_r());
  const CVecXd wb = bf.w_b(), wc = bf.w_c();
  const double gamma = jamming_gain_willie(channels, profile);
  const double s = std::sqrt(channels.l_AR);
  // entries of H_AR^T v are iid CN(0, l_AR |v|^2)
  const double s_row = s * v.norm();
  const std::size_t T = taus.size();

  std::vector<std::vector<std::uint64_t>> tallies(n_batches(opts));
  for_each_batch(opts, [&](std::uint64_t b, std::uint64_t count) {
    Rng rng = Rng(opts.seed).split(b);
    CMatXd H(N, M);
    CVecXd row(M);
    std::vector<std::int64_t> diff(T + 1, 0);
    for (std::uint64_t i = 0; i < count; ++i) {
      if (opts.full_channel) {
        for (int n = 0; n < N; ++n)
          for (int m = 0; m < M; ++m) H(n, m) = s * rng.complex_normal<double>();
        row.noalias() = H.transpose() * v;
      } else {
        for (int m = 0; m < M; ++m) row(m) = s_row * rng.complex_normal<double>();
      }
      const double P_j = rng.uniform<double>(0.0, params.P_j_max);
      const double pc = std::norm(row.cwiseProduct(wc).sum());
      const double pb = std::norm(row.cwiseProduct(wb).sum());
      const double p0 = pc + gamma * P_j + params.sigma2_w;
      add_interval(sorted, p0, p0 + pb, diff);
    }
    std::vector<std::uint64_t> tally(T);
    std::int64_t run = 0;
    for (std::size_t k = 0; k < T; ++k) tally[k] = static_cast<std::uint64_t>(run += diff[k]);
    tallies[b] = std::move(tally);
  });
  return finish_dep(taus, order, sum_rows(tallies, T), opts.samples);
}

std::vector<Estimate> mc_dep_conditional(const DepParamsd& p, const std::vector<double>& taus,
                                         const McOptions& opts) {
  const std::size_t T = taus.size();
  struct Sums {
    std::vector<double> s, s2;
  };
  std::vector<Sums> parts(n_batches(opts));
  for_each_batch(opts, [&](std::uint64_t b, std::uint64_t count) {
    Rng rng = Rng(opts.seed).split(b);
    Sums acc{std::vector<double>(T, 0.0), std::vector<double>(T, 0.0)};
    for (std::uint64_t i = 0; i < count; ++i) {
      const double P_j = rng.uniform<double>(0.0, p.P_j_max);
      for (std::size_t k = 0; k < T; ++k) {
        const double t = taus[k] - p.sigma2_w - p.gamma * P_j;
        double v;
        if (t <= 0) {
          v = 1.0;  // FA = 1, MD = 0
        } else {
          const double fa = p.lambda > 0 ? std::exp(-t / p.lambda) : 0.0;
          const double md = p.lambda_tilde > 0 ? -std::expm1(-t / p.lambda_tilde) : 1.0;
          v = fa + md;
        }
        acc.s[k] += v;
        acc.s2[k] += v * v;
      }
    }
    parts[b] = std::move(acc);
  });
  std::vector<Estimate> out(T);
  for (std::size_t k = 0; k < T; ++k) {
    double s = 0, s2 = 0;
    for (const auto& pt : parts) {
      s += pt.s[k];
      s2 += pt.s2[k];
    }
    out[k] = mean_estimate(s, s2, opts.samples);
  }
  return out;
}

Estimate mc_outage(const SystemParamsd& params, const ChannelRealizationd& channels,
                   const StarRisProfiled& profile, const Beamformersd& bf, double R_target,
                   Link link, const McOptions& opts) {
  if (!(R_target >= 0)) throw DomainError("mc_outage: target rate must be nonnegative");
  const LinkGainsd g = link_gains(channels, profile, bf);
  std::vector<std::vector<std::uint64_t>> tallies(n_batches(opts));
  const double sd_cc = std::sqrt(params.phi_sic);
  for_each_batch(opts, [&](std::uint64_t b, std::uint64_t count) {
    Rng rng = Rng(opts.seed).split(b);
    std::uint64_t hits = 0;
    for (std::uint64_t i = 0; i < count; ++i) {
      const double P_j = rng.uniform<double>(0.0, params.P_j_max);
      double rate;
      if (link == Link::Bob) {
        rate = std::log2(1 + g.g_bb / (g.g_bc + g.g_bj * P_j + params.sigma2_b));
      } else {
        const double h2 = std::norm(sd_cc * rng.complex_normal<double>());
        rate = std::log2(1 + g.g_cc_sig / (g.g_cb + h2 * P_j + params.sigma2_c));
      }
      if (rate < R_target) ++hits;
    }
    tallies[b] = {hits};
  });
  return binomial_estimate(sum_rows(tallies, 1)[0], opts.samples);
}

Estimate mc_avg_min_dep(const AsymptoticDepd& a, const McOptions& opts) {
  if (!(a.lambda_rw > 0)) throw DomainError("mc_avg_min_dep: lambda_rw must be positive");
  std::vector<std::pair<double, double>> parts(n_batches(opts));
  for_each_batch(opts, [&](std::uint64_t b, std::uint64_t count) {
    Rng rng = Rng(opts.seed).split(b);
    double s = 0, s2 = 0;
    for (std::uint64_t i = 0; i < count; ++i) {
      const double v = asymptotic_min_dep(a, rng.exponential<double>(a.lambda_rw));
      s += v;
      s2 += v * v;
    }
    parts[b] = {s, s2};
  });
  double s = 0, s2 = 0;
  for (const auto& [x, y] : parts) {
    s += x;
    s2 += y;
  }
  return mean_estimate(s, s2, opts.samples);
}

Estimate mc_willie_power(const SystemParamsd& params, const ChannelRealizationd& channels,
                         const StarRisProfiled& profile, const Beamformersd& bf, double P_j,
                         Hypothesis hyp, const McOptions& opts) {
  if (!(P_j >= 0)) throw DomainError("mc_willie_power: jamming power must be nonnegative");
  const CVecXd row = willie_row(channels, profile);
  const std::complex<double> gc = row.cwiseProduct(bf.w_c()).sum();
  const std::complex<double> gb = row.cwiseProduct(bf.w_b()).sum();
  const std::complex<double> gj =
      (channels.h_rw.conjugate().cwiseProduct(profile.theta_t()).cwiseProduct(channels.h_rc.conjugate()))
          .sum();
  const double sj = std::sqrt(P_j), sn = std::sqrt(params.sigma2_w);
  const bool h1 = hyp == Hypothesis::H1;
  std::vector<std::pair<double, double>> parts(n_batches(opts));
  for_each_batch(opts, [&](std::uint64_t b, std::uint64_t count) {
    Rng rng = Rng(opts.seed).split(b);
    double s = 0, s2 = 0;
    for (std::uint64_t i = 0; i < count; ++i) {
      std::complex<double> y = gc * rng.complex_normal<double>();
      if (h1) y += gb * rng.complex_normal<double>();
      y += gj * sj * rng.complex_normal<double>();
      y += sn * rng.complex_normal<double>();
      const double pw = std::norm(y);
      s += pw;
      s2 += pw * pw;
    }
    parts[b] = {s, s2};
  });
  double s = 0, s2 = 0;
  for (const auto& [x, y] : parts) {
    s += x;
    s2 += y;
  }
  return mean_estimate(s, s2, opts.samples);
}

GridMin grid_min_threshold(const DepParamsd& p, int grid) {
  if (grid < 2) throw DomainError("grid_min_threshold: grid needs at least two points");
  const auto tau_star = optimal_threshold(p);
  if (!tau_star) throw DomainError("grid_min_threshold: no informative threshold");
  const double llo = std::log(p.sigma2_w * (1 - 1e-3));
  const double lhi = std::log(10 * *tau_star);
  auto at = [&](int i) { return std::exp(llo + (lhi - llo) * i / (grid - 1)); };
  // spacing to the next grid point (the previous one for the last point)
  auto step = [&](int i) { return i + 1 < grid ? at(i + 1) - at(i) : at(i) - at(i - 1); };
  std::vector<double> d(static_cast<std::size_t>(grid));
  GridMin best;
  best.dep_best = 2;
  for (int i = 0; i < grid; ++i) {
    d[static_cast<std::size_t>(i)] = dep(at(i), p);
    if (d[static_cast<std::size_t>(i)] < best.dep_best) {
      best.dep_best = d[static_cast<std::size_t>(i)];
      best.index = i;
    }
  }
  best.tau_best = at(best.index);
  best.step = step(best.index);
  int lo = grid, hi = -1;
  for (int i = 0; i < grid; ++i) {
    if (d[static_cast<std::size_t>(i)] <= best.dep_best + GridMin::tie_tol) {
      lo = std::min(lo, i);
      hi = std::max(hi, i);
    }
  }
  best.tie_low = at(lo);
  best.tie_high = at(hi);
  best.tie_step = step(hi);
  return best;
}

double GridMin::steps_to(double tau) const {
  if (tau >= tie_low && tau <= tie_high) return 0;
  return (tau < tie_low ? tie_low - tau : tau - tie_high) / tie_step;
}

MatXd fd_gradient(const std::function<VecXd(const VecXd&)>& f, const VecXd& x,
                  const VecXd& x_min, const VecXd& x_max, double h_rel) {
  const Eigen::Index n = x.size();
  const VecXd f0 = f(x);
  MatXd J(f0.size(), n);
  for (Eigen::Index j = 0; j < n; ++j) {
    const double h = h_rel * (x_max(j) - x_min(j));
    if (!(h > 0)) {
      J.col(j).setZero();
      continue;
    }
    VecXd xp = x, xm = x;
    if (x(j) - h < x_min(j)) {
      xp(j) = x(j) + h;
      J.col(j) = (f(xp) - f0) / h;
    } else if (x(j) + h > x_max(j)) {
      xm(j) = x(j) - h;
      J.col(j) = (f0 - f(xm)) / h;
    } else {
      xp(j) = x(j) + h;
      xm(j) = x(j) - h;
      J.col(j) = (f(xp) - f(xm)) / (2 * h);
    }
  }
  return J;
}

MatXd fd_gradient(const ProblemInstanced& inst, const VecXd& x, double h_rel) {
  return fd_gradient([&inst](const VecXd& xx) { return eval_f(inst, xx); }, x, inst.x_min,
                     inst.x_max, h_rel);
}

}  // namespace starcov::oracle
