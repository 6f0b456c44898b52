#ifndef STARCOV_ORACLE_HPP
#define STARCOV_ORACLE_HPP

#include <cstdint>
#include <functional>
#include <vector>

#include "starcov/detection.hpp"
#include "starcov/model.hpp"
#include "starcov/problem.hpp"
#include "starcov/qos.hpp"
#include "starcov/types.hpp"

namespace starcov::oracle {

/// Monte Carlo estimate of a probability or mean with a 95% confidence interval.
struct Estimate {
  double value = 0;
  double ci_low = 0;
  double ci_high = 0;
  std::uint64_t samples = 0;

  [[nodiscard]] double half_width() const { return 0.5 * (ci_high - ci_low); }
  [[nodiscard]] bool covers(double x) const { return x >= ci_low && x <= ci_high; }
};

/// Binomial proportion hits/n. Normal interval, switching to Wilson when fewer
/// than 10 successes or 10 failures were seen.
Estimate binomial_estimate(std::uint64_t hits, std::uint64_t n, double z = 1.959963984540054);

/// Sample-mean estimate from running sum and sum of squares.
Estimate mean_estimate(double sum, double sum_sq, std::uint64_t n, double z = 1.959963984540054);

struct McOptions {
  std::uint64_t samples = 1'000'000;
  std::uint64_t seed = 1;
  int jobs = 1;
  std::uint64_t batch = 1u << 16;  // samples per substream; results do not depend on jobs
  /// mc_dep: draw all N x M entries of H_AR per sample instead of the M-vector
  /// H_AR^T v it enters through (same distribution, N times the normals).
  bool full_channel = false;
};

/// Runs fn(batch_index, count) for every batch of opts.samples on opts.jobs threads.
/// Each batch must draw from Rng(opts.seed).split(batch_index).
void for_each_batch(const McOptions& opts,
                    const std::function<void(std::uint64_t, std::uint64_t)>& fn);

/// DEP by simulation of the radiometer at K -> infinity. H_AR small-scale
/// entries (or, by default, the product H_AR^T v) and P_j ~ U(0, P_j_max) are drawn per sample; the remaining channels
/// stay fixed. H0 and H1 share each draw, so one Bernoulli
/// 1 - 1{P_0 < tau <= P_1} per sample is exactly FA + MD.
/// Returns one estimate per entry of taus.
std::vector<Estimate> mc_dep(const SystemParamsd& params, const ChannelRealizationd& channels,
                             const StarRisProfiled& profile, const Beamformersd& bf,
                             const std::vector<double>& taus, const McOptions& opts);

/// Conditional estimator from (lambda, lambda_tilde, gamma): draws only P_j and
/// averages the exponential tail probabilities of both hypotheses.
std::vector<Estimate> mc_dep_conditional(const DepParamsd& p, const std::vector<double>& taus,
                                         const McOptions& opts);

enum class Link { Bob, Carol };

/// Outage by simulation: P_j ~ U(0, P_j_max); Carol also draws h_cc ~ CN(0, phi_sic).
Estimate mc_outage(const SystemParamsd& params, const ChannelRealizationd& channels,
                   const StarRisProfiled& profile, const Beamformersd& bf, double R_target,
                   Link link, const McOptions& opts);

/// E_gamma[asymptotic_min_dep] with gamma ~ Exp(lambda_rw).
Estimate mc_avg_min_dep(const AsymptoticDepd& a, const McOptions& opts);

/// Time average of |y_w[k]|^2 over opts.samples symbols with Gaussian symbols,
/// jamming x_j ~ CN(0, P_j) and noise CN(0, sigma2_w).
Estimate mc_willie_power(const SystemParamsd& params, const ChannelRealizationd& channels,
                         const StarRisProfiled& profile, const Beamformersd& bf, double P_j,
                         Hypothesis hyp, const McOptions& opts);

struct GridMin {
  double tau_best = 0;
  double dep_best = 1;
  double step = 0;  // grid spacing at tau_best
  int index = 0;
  // Grid points with dep within tie_tol of dep_best. dep is flat between the
  // interior stationary point and sigma2_w + gamma P_j_max when the former is
  // smaller, so the minimizer is an interval there.
  double tie_low = 0, tie_high = 0;
  double tie_step = 0;  // grid spacing at tie_high
  static constexpr double tie_tol = 1e-12;

  /// Distance from tau to the tie interval in grid steps.
  [[nodiscard]] double steps_to(double tau) const;
};

/// Exhaustive minimum of dep() on a log grid over [sigma2_w (1 - 1e-3), 10 tau*].
/// Requires an informative threshold.
GridMin grid_min_threshold(const DepParamsd& p, int grid);

/// Central differences with h_j = h_rel (x_max,j - x_min,j); one-sided within h_j of an edge.
/// Returns the (m+1) x n Jacobian of f.
MatXd fd_gradient(const std::function<VecXd(const VecXd&)>& f, const VecXd& x,
                  const VecXd& x_min, const VecXd& x_max, double h_rel = 1e-6);

MatXd fd_gradient(const ProblemInstanced& inst, const VecXd& x, double h_rel = 1e-6);

}  // namespace starcov::oracle

#endif  // STARCOV_ORACLE_HPP
