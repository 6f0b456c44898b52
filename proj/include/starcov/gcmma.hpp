#ifndef STARCOV_GCMMA_HPP
#define STARCOV_GCMMA_HPP

#include <algorithm>
#include <cstdio>
#include <cmath>
#include <functional>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "starcov/types.hpp"

namespace starcov {

/// min f_0(x) + a0 z + c^T y  s.t. f_i(x) - y_i <= 0 (i = 1..m), x_min <= x <= x_max,
/// y >= 0, z >= 0. eval returns [f_0..f_m]; grad returns the (m+1) x n Jacobian.
template <typename Scalar>
struct SmoothProblem {
  int n = 0;
  int m = 0;
  Vec<Scalar> x_min, x_max;
  Scalar a0 = 1;
  Vec<Scalar> c;
  std::function<Vec<Scalar>(const Vec<Scalar>&)> eval;
  std::function<Mat<Scalar>(const Vec<Scalar>&)> grad;
};

/// Exact-penalty objective f_0 + sum c_i max(0, f_i), the value the outer loop
/// never increases.
template <typename Scalar>
Scalar transformed_objective(const Vec<Scalar>& f, const Vec<Scalar>& c) {
  Scalar v = f(0);
  for (Eigen::Index i = 1; i < f.size(); ++i) v += c(i - 1) * std::max(Scalar(0), f(i));
  return v;
}

/// Separable MMA model g_i(x) = p_i^T 1/(U - x) + q_i^T 1/(x - L) + r_i, row i per function.
template <typename Scalar>
struct Approximation {
  Mat<Scalar> p, q;
  Vec<Scalar> r;
  Vec<Scalar> lower, upper;  // asymptotes L, U
  Vec<Scalar> expansion;     // point where g_i = f_i

  [[nodiscard]] Vec<Scalar> eval(const Vec<Scalar>& x) const {
    const Vec<Scalar> ux = (upper - x).cwiseInverse();
    const Vec<Scalar> xl = (x - lower).cwiseInverse();
    return p * ux + q * xl + r;
  }
  [[nodiscard]] Mat<Scalar> gradient(const Vec<Scalar>& x) const {
    const Vec<Scalar> ux2 = (upper - x).array().square().inverse().matrix();
    const Vec<Scalar> xl2 = (x - lower).array().square().inverse().matrix();
    return p * ux2.asDiagonal() - q * xl2.asDiagonal();
  }
};

/// Initial conservative factor: max{0.1/n |df|^T (x_max - x_min), 1e-6}.
template <typename Scalar, typename Derived1, typename Derived2>
Scalar rho_init(const Eigen::MatrixBase<Derived1>& grad, const Eigen::MatrixBase<Derived2>& range) {
  const auto n = grad.size();
  const Scalar s = grad.cwiseAbs().dot(range.template cast<Scalar>());
  return std::max(Scalar(0.1) / Scalar(n) * s, Scalar(1e-6));
}

/// Conservative-factor growth: min{1.1 (rho + nu), 10 rho}, nu = (f - g) / d.
template <typename Scalar>
Scalar rho_update(Scalar rho, Scalar f_at_xt, Scalar g_at_xt, Scalar d_at_xt) {
  if (!(d_at_xt > 0)) return rho;
  const Scalar nu = (f_at_xt - g_at_xt) / d_at_xt;
  return std::min(Scalar(1.1) * (rho + nu), Scalar(10) * rho);
}

/// d(x) = sum_j (U_j - L_j)(x_j - xhat_j)^2 / ((U_j - x_j)(x_j - L_j)(x_max,j - x_min,j)),
/// which is exactly dg_i/drho_i at x.
template <typename Scalar>
Scalar mma_distance(const Vec<Scalar>& x, const Vec<Scalar>& expansion, const Vec<Scalar>& lower,
                    const Vec<Scalar>& upper, const Vec<Scalar>& range) {
  const auto dx = (x - expansion).array();
  return ((upper - lower).array() * dx.square() /
          ((upper - x).array() * (x - lower).array() * range.array()))
      .sum();
}

/// Builds p, q, r from values f and Jacobian df at expansion point x.
template <typename Scalar>
Approximation<Scalar> build_approximation(const Vec<Scalar>& f, const Mat<Scalar>& df,
                                          const Vec<Scalar>& rho, const Vec<Scalar>& x,
                                          const Vec<Scalar>& lower, const Vec<Scalar>& upper,
                                          const Vec<Scalar>& range) {
  if (!((x - lower).minCoeff() > 0 && (upper - x).minCoeff() > 0))
    throw std::logic_error("build_approximation: asymptotes do not straddle the expansion point");
  const Eigen::Index rows = df.rows(), n = df.cols();
  Approximation<Scalar> a;
  a.lower = lower;
  a.upper = upper;
  a.expansion = x;
  a.p.resize(rows, n);
  a.q.resize(rows, n);
  a.r.resize(rows);
  const Vec<Scalar> ux = upper - x, xl = x - lower;
  const Vec<Scalar> inv_range = range.cwiseInverse();
  for (Eigen::Index i = 0; i < rows; ++i) {
    const auto g = df.row(i).transpose().array();
    const auto plus = g.max(Scalar(0));
    const auto minus = (-g).max(Scalar(0));
    a.p.row(i) = (ux.array().square() *
                  (Scalar(1.001) * plus + Scalar(0.001) * minus + rho(i) * inv_range.array()))
                     .transpose();
    a.q.row(i) = (xl.array().square() *
                  (Scalar(0.001) * plus + Scalar(1.001) * minus + rho(i) * inv_range.array()))
                     .transpose();
    a.r(i) = f(i) - (a.p.row(i) * ux.cwiseInverse())(0) - (a.q.row(i) * xl.cwiseInverse())(0);
  }
  return a;
}

/// True for each function where the model underestimates f at x_t (f > g + tol).
template <typename Scalar>
Eigen::Array<bool, Eigen::Dynamic, 1> conservative_check(const Vec<Scalar>& f_t,
                                                         const Vec<Scalar>& g_t,
                                                         Scalar tol = Scalar(0)) {
  return (f_t.array() > g_t.array() + tol);
}

template <typename Scalar>
struct SubproblemResult {
  Vec<Scalar> x, y, lam;
  Scalar z = 0;
  Vec<Scalar> xsi, eta;     // multipliers of x >= alpha and x <= beta
  Scalar kkt_residual = 0;  // max-abs residual of the unperturbed KKT system
  int iterations = 0;
};

struct SubproblemOptions {
  int barrier_levels = 11;        // barrier parameter 1, 0.1, ..., 1e-10
  int max_newton_per_level = 200;
  // A level that stops improving is accepted once its residual is below this; the
  // last levels can sit at the rounding floor of g(x), just above 0.9 * 1e-10.
  double stall_tolerance = 5e-10;
};

namespace detail {

// Minimizer over (alpha, beta) of a/(U - x) + b/(x - L) - eps ln(x - alpha) - eps ln(beta - x),
// a, b >= 0, eps > 0. The derivative is increasing, so safeguarded Newton on it converges
// from any start inside the bracket.
template <typename Scalar>
Scalar barrier_argmin(Scalar a, Scalar b, Scalar L, Scalar U, Scalar alpha, Scalar beta,
                      Scalar eps, Scalar start) {
  // derivative, second derivative, and the size of the terms summed in the derivative
  auto deriv = [&](Scalar x, Scalar& second, Scalar& scale) {
    const Scalar ux = U - x, xl = x - L, xa = x - alpha, bx = beta - x;
    const Scalar t1 = a / (ux * ux), t2 = b / (xl * xl), t3 = eps / xa, t4 = eps / bx;
    second = Scalar(2) * (t1 / ux + t2 / xl) + t3 / xa + t4 / bx;
    scale = t1 + t2 + t3 + t4;
    return t1 - t2 - t3 + t4;
  };
  Scalar lo = alpha, hi = beta;
  Scalar x = start > alpha && start < beta ? start : Scalar(0.5) * (alpha + beta);
  for (int it = 0; it < 100; ++it) {
    Scalar h2, scale;
    const Scalar g = deriv(x, h2, scale);
    if (std::abs(g) <= Scalar(16) * std::numeric_limits<Scalar>::epsilon() * scale) return x;
    if (g > 0)
      hi = x;
    else if (g < 0)
      lo = x;
    else
      return x;
    Scalar xn = x - g / h2;
    // Overshooting the bracket usually means the root hugs a box edge at distance ~eps;
    // step a decade toward that edge rather than bisecting.
    if (!(xn > lo && xn < hi)) xn = g > 0 ? lo + Scalar(0.1) * (x - lo) : hi - Scalar(0.1) * (hi - x);
    if (std::abs(xn - x) <= Scalar(4) * std::numeric_limits<Scalar>::epsilon() *
                                 std::max(std::abs(x), beta - alpha) ||
        !(hi > lo))
      return xn;
    x = xn;
  }
  return x;
}

}  // namespace detail

/// Solves the MMA subproblem
///   min g_0(x) + a0 z + c^T y  s.t. g_i(x) - y_i <= 0, alpha <= x <= beta, y >= 0, z >= 0
/// through its separable dual. The box is handled by a log barrier inside the
/// Lagrangian, so x(lam) is a smooth per-coordinate minimizer and each Newton step on
/// the dual only needs an m x m system. The barrier parameter runs 1, 0.1, ..., 1e-10
/// for both the box and the multiplier bounds 0 < lam < c.
template <typename Scalar>
SubproblemResult<Scalar> solve_subproblem(const Approximation<Scalar>& ap, Scalar a0,
                                          const Vec<Scalar>& c, const Vec<Scalar>& alpha,
                                          const Vec<Scalar>& beta,
                                          const SubproblemOptions& opt = {}) {
  using Arr = Eigen::Array<Scalar, Eigen::Dynamic, 1>;
  const Eigen::Index n = ap.p.cols();
  const Eigen::Index m = ap.p.rows() - 1;
  if (c.size() != m) throw DimensionError("solve_subproblem: c must have one entry per constraint");
  if (!(a0 > 0)) throw DomainError("solve_subproblem: a0 must be positive");
  if (!((beta - alpha).minCoeff() > 0))
    throw DomainError("solve_subproblem: move limits must satisfy alpha < beta");
  const Arr L = ap.lower.array(), U = ap.upper.array();
  const Arr lo = alpha.array(), hi = beta.array();
  const Mat<Scalar> P = ap.p.bottomRows(m), Q = ap.q.bottomRows(m);
  const Arr p0 = ap.p.row(0).transpose().array(), q0 = ap.q.row(0).transpose().array();
  const Arr b = -ap.r.tail(m).array();
  const Arr cc = c.array();

  struct DualPoint {
    Arr x, ux, xl;
    Arr h;  // g(x(lam)) - b, i.e. the constraint values of the model
  };
  // g_i(x) is evaluated as g_i(xhat) plus increments from the expansion point; summing
  // p/(U - x) + q/(x - L) + r directly cancels large terms and leaves a rounding floor
  // that the last barrier levels cannot get under.
  const Arr xhat = ap.expansion.size() == n ? Arr(ap.expansion.array()) : Arr(Scalar(0.5) * (lo + hi));
  const Arr uxh = U - xhat, xlh = xhat - L;
  const Arr g_hat = (P * uxh.inverse().matrix() + Q * xlh.inverse().matrix()).array() - b;
  // x_start warm-starts the per-coordinate solves; any point inside the box will do.
  auto at = [&](const Arr& lam, Scalar eps, const Arr& x_start) {
    DualPoint d;
    const Arr a = p0 + (P.transpose() * lam.matrix()).array();
    const Arr bq = q0 + (Q.transpose() * lam.matrix()).array();
    d.x.resize(n);
    for (Eigen::Index j = 0; j < n; ++j)
      d.x(j) = detail::barrier_argmin(a(j), bq(j), L(j), U(j), lo(j), hi(j), eps, x_start(j));
    d.ux = U - d.x;
    d.xl = d.x - L;
    const Arr dx = d.x - xhat;
    d.h = g_hat + (P * (dx / (d.ux * uxh)).matrix() - Q * (dx / (d.xl * xlh)).matrix()).array();
    return d;
  };
  // Barrier dual phi(lam) = min_x [psi(x, lam) - eps sum ln(box slacks)] - lam^T b
  //   + eps sum(ln lam + ln mu), concave and smooth on (0, c)^m with gradient
  // h - eps/mu + eps/lam. Every positive definite scaling gives an ascent direction;
  // the scaling uses y ~ max(eps/mu, h) and s ~ max(eps/lam, -h), the slack values the
  // barrier solution is heading to, which keeps step sizes sensible when lam has to
  // travel to c for an infeasible subproblem. mu = c - lam is stored, not recomputed,
  // so its small values keep their digits.
  // phi is evaluated up to the constant g_0(xhat), as increments of g_0 plus lam^T h;
  // the plain sum of p/(U - x) + q/(x - L) terms scaled by lam ~ c is too noisy for
  // the line search at the small barrier levels.
  auto dual_value = [&](const Arr& lam, const Arr& mu, const DualPoint& dp, Scalar eps) {
    const Arr dx = dp.x - xhat;
    const Scalar dg0 = (p0 * dx / (dp.ux * uxh) - q0 * dx / (dp.xl * xlh)).sum();
    return dg0 + (lam * dp.h).sum() - eps * ((dp.x - lo).log() + (hi - dp.x).log()).sum() +
           eps * (lam.log().sum() + mu.log().sum());
  };
  // Error that a gradient mismatch leaves in the complementarity of the recovered
  // slacks y = max(h, 0) (paired with mu) or s = max(-h, 0) (paired with lam).
  auto level_error = [&](const Arr& grad, const Arr& lam, const Arr& mu, const DualPoint& dp) {
    Scalar e = 0;
    for (Eigen::Index i = 0; i < m; ++i)
      e = std::max(e, std::abs(grad(i)) * (dp.h(i) > 0 ? mu(i) : lam(i)));
    return e;
  };

  Arr lam = (Scalar(0.5) * cc).min(Scalar(1));
  Arr mu = cc - lam;
  Scalar eps = 1;
  DualPoint d = at(lam, eps, Scalar(0.5) * (lo + hi));

  int total = 0;
  for (int level = 0; level < opt.barrier_levels; ++level, eps *= Scalar(0.1)) {
    if (level > 0) d = at(lam, eps, d.x);
    Arr grad = d.h - eps / mu + eps / lam;
    Scalar err = level_error(grad, lam, mu, d);
    int it = 0, stalled = 0;
    while (err > Scalar(0.9) * eps) {
      if (stalled >= 3 && err <= Scalar(opt.stall_tolerance)) break;
      if (++it > opt.max_newton_per_level) {
        char buf[160];
        std::snprintf(buf, sizeof buf,
                      "solve_subproblem: %d Newton iterations at barrier %.1e without "
                      "convergence, residual %.3e",
                      opt.max_newton_per_level, double(eps), double(err));
        throw SolverError(buf);
      }
      ++total;
      const Arr a = p0 + (P.transpose() * lam.matrix()).array();
      const Arr bq = q0 + (Q.transpose() * lam.matrix()).array();
      const Arr ux2 = d.ux.square(), xl2 = d.xl.square();
      const Arr xa = d.x - lo, bx = hi - d.x;
      const Arr Dinv = (Scalar(2) * (a / (ux2 * d.ux) + bq / (xl2 * d.xl)) + eps / xa.square() +
                        eps / bx.square())
                           .inverse();
      const Mat<Scalar> G =
          P * ux2.inverse().matrix().asDiagonal() - Q * xl2.inverse().matrix().asDiagonal();
      Mat<Scalar> A = G * Dinv.matrix().asDiagonal() * G.transpose();
      const Arr y_est = (eps / mu).max(d.h), s_est = (eps / lam).max(-d.h);
      A.diagonal() += (y_est / mu + s_est / lam).matrix();
      const Arr step = A.ldlt().solve(grad.matrix()).array();

      Scalar t = 1;
      for (Eigen::Index i = 0; i < m; ++i) {
        if (step(i) > 0) t = std::min(t, Scalar(0.99) * mu(i) / step(i));
        if (step(i) < 0) t = std::min(t, Scalar(0.99) * lam(i) / -step(i));
      }
      const Scalar phi0 = dual_value(lam, mu, d, eps);
      const Scalar slope = (grad * step).sum();
      const Scalar gmax = grad.abs().maxCoeff();
      for (int ls = 0;; ++ls) {
        const Arr l1 = lam + t * step, u1 = mu - t * step;
        DualPoint d1 = at(l1, eps, d.x);
        const Scalar phi = dual_value(l1, u1, d1, eps);
        const Arr g1 = d1.h - eps / u1 + eps / l1;
        // Close to the solution phi changes by less than its rounding error; a smaller
        // gradient is then the acceptance test.
        const Scalar noise = Scalar(1e-12) * std::max(Scalar(1), std::abs(phi0));
        const bool flat = std::abs(phi - phi0) <= noise && g1.abs().maxCoeff() < gmax;
        if (phi >= phi0 + Scalar(1e-4) * t * slope || flat || ls >= 60) {
          lam = l1;
          mu = u1;
          d = std::move(d1);
          grad = g1;
          break;
        }
        t /= 2;
      }
      const Scalar err_new = level_error(grad, lam, mu, d);
      stalled = err_new < Scalar(0.999) * err ? 0 : stalled + 1;
      err = err_new;
    }
  }
  const Arr y = d.h.max(Scalar(0));
  const Arr s = (-d.h).max(Scalar(0));

  SubproblemResult<Scalar> out;
  out.iterations = total;
  out.x = d.x.matrix();
  out.lam = lam.matrix();
  out.y = y.matrix();
  out.z = 0;  // no constraint couples z, so z = 0 at a0 > 0
  const Arr a = p0 + (P.transpose() * lam.matrix()).array();
  const Arr bq = q0 + (Q.transpose() * lam.matrix()).array();
  const Arr dpsi = a / d.ux.square() - bq / d.xl.square();
  // Box multipliers from stationarity; eps / (x - alpha) loses its digits when x sits
  // within ~eps of a bound.
  const Arr xsi = dpsi.max(Scalar(0)), eta = (-dpsi).max(Scalar(0));
  out.xsi = xsi.matrix();
  out.eta = eta.matrix();
  Scalar res = 0;
  if (m) {
    res = std::max(res, (d.h - y + s).abs().maxCoeff());
    res = std::max(res, (lam * s).abs().maxCoeff());
    res = std::max(res, (mu * y).abs().maxCoeff());
  }
  res = std::max(res, (xsi * (d.x - lo)).abs().maxCoeff());
  res = std::max(res, (eta * (hi - d.x)).abs().maxCoeff());
  out.kkt_residual = res;
  return out;
}

/// Iteration state of the outer loop.
template <typename Scalar>
struct MmaState {
  int k = 0;
  Vec<Scalar> x, x_prev1, x_prev2;
  Vec<Scalar> lower, upper;  // asymptotes L, U
  Vec<Scalar> alpha, beta;   // move limits
  Vec<Scalar> rho;
  Scalar v = 0;
  Scalar epsilon_tol = Scalar(1e-5);
};

struct AsymptoteRule {
  double init = 0.5;
  double shrink = 0.7;
  double expand = 1.2;
  double min_dist = 1e-2;
  double max_dist = 10.0;
  double albefa = 0.1;
  double move = 0.5;
};

/// Asymptote update for outer iteration state.k (1-based), then move limits.
template <typename Scalar>
void update_asymptotes(MmaState<Scalar>& st, const Vec<Scalar>& x_min, const Vec<Scalar>& x_max,
                       const AsymptoteRule& rule = {}) {
  const Vec<Scalar> range = x_max - x_min;
  const auto xa = st.x.array();
  if (st.k <= 2) {
    st.lower = (xa - Scalar(rule.init) * range.array()).matrix();
    st.upper = (xa + Scalar(rule.init) * range.array()).matrix();
  } else {
    const auto zzz = ((st.x - st.x_prev1).array() * (st.x_prev1 - st.x_prev2).array()).eval();
    Eigen::Array<Scalar, Eigen::Dynamic, 1> fac = Eigen::Array<Scalar, Eigen::Dynamic, 1>::Ones(zzz.size());
    for (Eigen::Index j = 0; j < zzz.size(); ++j) {
      if (zzz(j) < 0)
        fac(j) = Scalar(rule.shrink);
      else if (zzz(j) > 0)
        fac(j) = Scalar(rule.expand);
    }
    Vec<Scalar> L = (xa - fac * (st.x_prev1 - st.lower).array()).matrix();
    Vec<Scalar> U = (xa + fac * (st.upper - st.x_prev1).array()).matrix();
    const auto lo_dist = (Scalar(rule.min_dist) * range.array()).eval();
    const auto hi_dist = (Scalar(rule.max_dist) * range.array()).eval();
    st.lower = L.array().max(xa - hi_dist).min(xa - lo_dist).matrix();
    st.upper = U.array().min(xa + hi_dist).max(xa + lo_dist).matrix();
  }
  const Scalar albefa = Scalar(rule.albefa), move = Scalar(rule.move);
  st.alpha = x_min.array()
                 .max(st.lower.array() + albefa * (xa - st.lower.array()))
                 .max(xa - move * range.array())
                 .matrix();
  st.beta = x_max.array()
                .min(st.upper.array() - albefa * (st.upper.array() - xa))
                .min(xa + move * range.array())
                .matrix();
}

enum class GapMode { Absolute, Relative };

struct GcmmaOptions {
  double epsilon_tol = 1e-5;
  GapMode gap = GapMode::Absolute;
  int max_outer = 500;
  int max_inner = 100;
  double conservative_tol = 1e-12;
  double feasibility_tol = 1e-6;
  AsymptoteRule asymptotes{};
  SubproblemOptions subproblem{};
};

/// One line of the optimizer trace.
template <typename Scalar>
struct TraceRecord {
  int k = 0;
  Vec<Scalar> f;    // f_0..f_m at the accepted iterate
  Scalar z = 0;
  Vec<Scalar> y;
  Vec<Scalar> rho;  // conservative factors at inner-loop exit
  int inner_count = 0;
  Scalar v = 0;
  Scalar objective = 0;             // transformed objective
  Scalar conservative_slack = 0;    // max_i f_i(x_t) - g_i(x_t) at inner exit
  Scalar tangency_error = 0;        // max_i |g_i(x_k) - f_i(x_k)|
  Scalar kkt_residual = 0;          // of the last subproblem
  bool accepted = true;
};

template <typename Scalar>
struct OptimizeResult {
  Vec<Scalar> x;
  Vec<Scalar> f;
  Scalar objective = 0;
  bool converged = false;
  bool feasible = false;
  int outer_iterations = 0;
  std::vector<TraceRecord<Scalar>> trace;
};

namespace detail {

template <typename Scalar>
OptimizeResult<Scalar> optimize_free(const SmoothProblem<Scalar>& pb, const Vec<Scalar>& x0,
                                     const GcmmaOptions& opt) {
  const int m = pb.m;
  const Vec<Scalar> range = pb.x_max - pb.x_min;

  MmaState<Scalar> st;
  st.x = x0;
  st.x_prev1 = x0;
  st.x_prev2 = x0;
  st.epsilon_tol = Scalar(opt.epsilon_tol);
  st.rho = Vec<Scalar>::Constant(m + 1, Scalar(1e-6));

  Vec<Scalar> f = pb.eval(st.x);
  Mat<Scalar> df = pb.grad(st.x);
  Scalar F = transformed_objective<Scalar>(f, pb.c);

  OptimizeResult<Scalar> res;
  while (st.v > st.epsilon_tol || st.k == 0) {
    if (st.k >= opt.max_outer) break;
    ++st.k;
    update_asymptotes(st, pb.x_min, pb.x_max, opt.asymptotes);
    for (int i = 0; i <= m; ++i) st.rho(i) = rho_init<Scalar>(df.row(i), range);

    TraceRecord<Scalar> rec;
    Approximation<Scalar> ap =
        build_approximation(f, df, st.rho, st.x, st.lower, st.upper, range);
    rec.tangency_error = (ap.eval(st.x) - f).cwiseAbs().maxCoeff();
    SubproblemResult<Scalar> sub =
        solve_subproblem(ap, pb.a0, pb.c, st.alpha, st.beta, opt.subproblem);
    Vec<Scalar> f_t = pb.eval(sub.x);
    Vec<Scalar> g_t = ap.eval(sub.x);
    auto bad = conservative_check<Scalar>(f_t, g_t, Scalar(opt.conservative_tol));
    int inner = 0;
    while (bad.any() && inner < opt.max_inner) {
      const Scalar dist = mma_distance(sub.x, st.x, st.lower, st.upper, range);
      if (!(dist > 0)) break;
      for (int i = 0; i <= m; ++i)
        if (bad(i)) st.rho(i) = rho_update(st.rho(i), f_t(i), g_t(i), dist);
      ap = build_approximation(f, df, st.rho, st.x, st.lower, st.upper, range);
      sub = solve_subproblem(ap, pb.a0, pb.c, st.alpha, st.beta, opt.subproblem);
      f_t = pb.eval(sub.x);
      g_t = ap.eval(sub.x);
      bad = conservative_check<Scalar>(f_t, g_t, Scalar(opt.conservative_tol));
      ++inner;
    }

    const Scalar F_t = transformed_objective<Scalar>(f_t, pb.c);
    rec.accepted = !bad.any() && F_t <= F;
    st.x_prev2 = st.x_prev1;
    st.x_prev1 = st.x;
    const Scalar F_old = F;
    if (rec.accepted) {
      st.x = sub.x;
      f = f_t;
      df = pb.grad(st.x);
      F = F_t;
    }
    st.v = std::abs(F - F_old);
    if (opt.gap == GapMode::Relative) st.v /= std::max(Scalar(1), std::abs(F_old));

    rec.k = st.k;
    rec.f = f;
    rec.z = sub.z;
    rec.y = sub.y;
    rec.rho = st.rho;
    rec.inner_count = inner;
    rec.v = st.v;
    rec.objective = F;
    rec.conservative_slack = (f_t - g_t).maxCoeff();
    rec.kkt_residual = sub.kkt_residual;
    res.trace.push_back(std::move(rec));
  }
  res.converged = !(st.v > st.epsilon_tol);
  res.outer_iterations = st.k;
  res.x = st.x;
  res.f = f;
  res.objective = F;
  res.feasible = m == 0 || f.tail(m).maxCoeff() <= Scalar(opt.feasibility_tol);
  return res;
}

}  // namespace detail

/// Globally convergent MMA. Coordinates with x_min == x_max are held fixed.
template <typename Scalar>
OptimizeResult<Scalar> optimize(const SmoothProblem<Scalar>& pb, const Vec<Scalar>& x0,
                                const GcmmaOptions& opt = {}) {
  if (x0.size() != pb.n) throw DimensionError("optimize: x0 has wrong length");
  for (int j = 0; j < pb.n; ++j)
    if (!(x0(j) >= pb.x_min(j) && x0(j) <= pb.x_max(j)))
      throw BoundsError("optimize: x0 coordinate " + std::to_string(j) + " outside the box");
  if (pb.c.size() != pb.m) throw DimensionError("optimize: penalty vector c must have length m");

  std::vector<int> free_idx;
  for (int j = 0; j < pb.n; ++j)
    if (pb.x_max(j) > pb.x_min(j)) free_idx.push_back(j);
  if (static_cast<int>(free_idx.size()) == pb.n) return detail::optimize_free(pb, x0, opt);

  const int nf = static_cast<int>(free_idx.size());
  auto expand = [x0, free_idx](const Vec<Scalar>& xf) {
    Vec<Scalar> x = x0;
    for (std::size_t i = 0; i < free_idx.size(); ++i) x(free_idx[i]) = xf(i);
    return x;
  };
  SmoothProblem<Scalar> red;
  red.n = nf;
  red.m = pb.m;
  red.a0 = pb.a0;
  red.c = pb.c;
  red.x_min.resize(nf);
  red.x_max.resize(nf);
  Vec<Scalar> xf0(nf);
  for (int i = 0; i < nf; ++i) {
    red.x_min(i) = pb.x_min(free_idx[i]);
    red.x_max(i) = pb.x_max(free_idx[i]);
    xf0(i) = x0(free_idx[i]);
  }
  red.eval = [&pb, expand](const Vec<Scalar>& xf) { return pb.eval(expand(xf)); };
  red.grad = [&pb, expand, free_idx](const Vec<Scalar>& xf) {
    const Mat<Scalar> full = pb.grad(expand(xf));
    Mat<Scalar> g(full.rows(), static_cast<Eigen::Index>(free_idx.size()));
    for (std::size_t i = 0; i < free_idx.size(); ++i) g.col(i) = full.col(free_idx[i]);
    return g;
  };
  OptimizeResult<Scalar> r = detail::optimize_free(red, xf0, opt);
  r.x = expand(r.x);
  return r;
}

}  // namespace starcov

#endif  // STARCOV_GCMMA_HPP
