#ifndef STARCOV_DETECTION_HPP
#define STARCOV_DETECTION_HPP

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>

#include "starcov/model.hpp"
#include "starcov/quadrature.hpp"
#include "starcov/types.hpp"

namespace starcov {

enum class Hypothesis { H0, H1 };

/// Inputs of Willie's detection error probability.
///
/// lambda / lambda_tilde are the mean powers of Alice's signal at Willie under
/// H0 / H1, averaged over H_AR (exponentially distributed). gamma is the
/// jamming gain |h_rw^H Theta_t h_rc^*|^2; the jamming power is uniform on
/// [0, P_j_max].
template <typename Scalar>
struct DepParams {
  Scalar lambda = 0;
  Scalar lambda_tilde = 0;
  Scalar gamma = 0;
  Scalar P_j_max = 1;
  Scalar sigma2_w = 1;

  /// lambda_tilde - lambda below this fraction of lambda_tilde is treated as
  /// the undetectable limit.
  static constexpr Scalar kDegenerateRel = Scalar(1e-12);

  [[nodiscard]] bool undetectable() const {
    return !(lambda_tilde - lambda > kDegenerateRel * lambda_tilde);
  }
  [[nodiscard]] Scalar jamming_span() const { return gamma * P_j_max; }
};

/// Statistics Alice can evaluate with statistical CSI of h_rw only.
/// l_AR is the large-scale gain of H_AR; set it to 1 for unit-variance H_AR.
template <typename Scalar>
struct AsymptoticDep {
  Scalar varpi_b = 0;
  Scalar varpi_c = 0;
  Scalar theta_r = 0;
  Scalar l_rw = 1;
  Scalar lambda_rw = 0;
  Scalar l_AR = 1;
  Scalar P_j_max = 1;
  Scalar sigma2_w = 1;

  [[nodiscard]] Scalar lambda_a() const { return l_AR * l_rw * varpi_c * theta_r; }
  [[nodiscard]] Scalar lambda_tilde_a() const {
    return l_AR * l_rw * theta_r * (varpi_b + varpi_c);
  }
  [[nodiscard]] DepParams<Scalar> at_gamma(Scalar gamma) const {
    return {lambda_a(), lambda_tilde_a(), gamma, P_j_max, sigma2_w};
  }
};

// ---------------------------------------------------------------------------
// Channel-level quantities

/// h_rw^H Theta_r H_AR, the 1 x M row that carries Alice's beams to Willie.
template <typename Scalar>
CVec<Scalar> willie_row(const ChannelRealization<Scalar>& ch, const StarRisProfile<Scalar>& prof) {
  const CVec<Scalar> v = ch.h_rw.conjugate().cwiseProduct(prof.theta_r());
  return ch.H_AR.transpose() * v;
}

/// gamma = |h_rw^H Theta_t h_rc^*|^2
template <typename Scalar>
Scalar jamming_gain_willie(const ChannelRealization<Scalar>& ch,
                           const StarRisProfile<Scalar>& prof) {
  const std::complex<Scalar> a =
      (ch.h_rw.conjugate().cwiseProduct(prof.theta_t()).cwiseProduct(ch.h_rc.conjugate())).sum();
  return std::norm(a);
}

/// Radiometer output for K -> infinity under the given hypothesis.
template <typename Scalar>
Scalar willie_avg_power(const SystemParams<Scalar>& params, const ChannelRealization<Scalar>& ch,
                        const StarRisProfile<Scalar>& prof, const Beamformers<Scalar>& bf,
                        Scalar P_j, Hypothesis hyp) {
  if (!(P_j >= 0)) throw DomainError("willie_avg_power: jamming power must be nonnegative");
  const CVec<Scalar> row = willie_row(ch, prof);
  Scalar p = std::norm(row.cwiseProduct(bf.w_c()).sum());
  if (hyp == Hypothesis::H1) p += std::norm(row.cwiseProduct(bf.w_b()).sum());
  return p + jamming_gain_willie(ch, prof) * P_j + params.sigma2_w;
}

/// Exact DEP inputs for a fixed realization (lambda averages over H_AR only).
template <typename Scalar>
DepParams<Scalar> dep_params(const SystemParams<Scalar>& params,
                             const ChannelRealization<Scalar>& ch,
                             const StarRisProfile<Scalar>& prof, const Beamformers<Scalar>& bf) {
  const Scalar row_gain =
      ch.l_AR * ch.h_rw.conjugate().cwiseProduct(prof.theta_r()).squaredNorm();
  const Scalar lam = row_gain * bf.power_c();
  return {lam, lam + row_gain * bf.power_b(), jamming_gain_willie(ch, prof), params.P_j_max,
          params.sigma2_w};
}

template <typename Scalar>
AsymptoticDep<Scalar> asymptotic_dep(const SystemParams<Scalar>& params,
                                     const ChannelRealization<Scalar>& ch,
                                     const StarRisProfile<Scalar>& prof,
                                     const Beamformers<Scalar>& bf) {
  const Vec<Scalar> beta_t = Vec<Scalar>::Ones(prof.N()) - prof.beta_r;
  const Scalar lambda_rw = ch.l_rw * beta_t.dot(ch.h_rc.cwiseAbs2());
  return {bf.power_b(), bf.power_c(), prof.beta_r.sum(), ch.l_rw, lambda_rw, ch.l_AR,
          params.P_j_max, params.sigma2_w};
}

// ---------------------------------------------------------------------------
// Closed forms

namespace detail {

// ln((e^{c/lam} - 1) / c), finite for c -> 0 (gives -ln lam) and for huge c/lam.
template <typename Scalar>
Scalar log_expm1_ratio(Scalar c, Scalar lam) {
  const Scalar x = c / lam;
  Scalar g;  // ln((e^x - 1) / x)
  if (x == 0)
    g = 0;
  else if (x > 1)
    g = x + std::log1p(-std::exp(-x)) - std::log(x);
  else
    g = std::log(std::expm1(x) / x);
  return g - std::log(lam);
}

// lam * (1 - e^{-t/lam}) with lam = 0 allowed
template <typename Scalar>
Scalar cdf_mass(Scalar lam, Scalar t) {
  return lam > 0 ? -lam * std::expm1(-t / lam) : Scalar(0);
}

// (lam / c) e^{-t/lam} (e^{c/lam} - 1) for t >= c, i.e. P(X + U >= t) with
// X ~ Exp(lam), U ~ Uniform(0, c). Written so no exponential overflows.
template <typename Scalar>
Scalar tail_mass(Scalar lam, Scalar t, Scalar c) {
  if (!(lam > 0)) return Scalar(0);
  if (c == 0) return std::exp(-t / lam);
  return lam * std::exp(-(t - c) / lam) * (-std::expm1(-c / lam)) / c;
}

}  // namespace detail

/// Detection error probability P(D1|H0) + P(D0|H1) at threshold tau.
template <typename Scalar>
Scalar dep(Scalar tau, const DepParams<Scalar>& p) {
  const Scalar t = tau - p.sigma2_w;
  if (t < 0) return Scalar(1);
  if (p.undetectable()) return Scalar(1);
  const Scalar c = p.jamming_span();
  Scalar v;
  if (t < c) {
    v = Scalar(1) -
        (detail::cdf_mass(p.lambda_tilde, t) - detail::cdf_mass(p.lambda, t)) / c;
  } else if (c > 0) {
    v = Scalar(1) + detail::tail_mass(p.lambda, t, c) - detail::tail_mass(p.lambda_tilde, t, c);
  } else {
    // no jamming: FA + MD = e^{-t/lam} + 1 - e^{-t/lam~}, with X0 = 0 when lam = 0
    const Scalar fa = p.lambda > 0 ? std::exp(-t / p.lambda) : Scalar(t <= 0 ? 1 : 0);
    v = fa - std::expm1(-t / p.lambda_tilde);
  }
  return std::clamp(v, Scalar(0), Scalar(1));
}

/// Willie's DEP-minimizing threshold, or nullopt when H0 and H1 coincide
/// (no informative threshold; DEP is 1 everywhere).
template <typename Scalar>
std::optional<Scalar> optimal_threshold(const DepParams<Scalar>& p) {
  if (p.undetectable()) return std::nullopt;
  const Scalar c = p.jamming_span();
  Scalar t;
  if (p.lambda == 0) {
    t = c;
  } else {
    const Scalar log_delta = detail::log_expm1_ratio(c, p.lambda) -
                             detail::log_expm1_ratio(c, p.lambda_tilde);
    t = p.lambda * p.lambda_tilde / (p.lambda_tilde - p.lambda) * log_delta;
  }
  return std::max(t, c) + p.sigma2_w;
}

/// DEP at the optimal threshold, 1 - (lam~ - lam) (e^{b} - 1)/c * Delta^{-lam/(lam~ - lam)}
/// with b = c / lam~, evaluated in the log domain.
template <typename Scalar>
Scalar min_dep(const DepParams<Scalar>& p) {
  if (p.undetectable()) return Scalar(1);
  const Scalar c = p.jamming_span();
  const Scalar gap = p.lambda_tilde - p.lambda;
  const Scalar lb = detail::log_expm1_ratio(c, p.lambda_tilde);
  Scalar weighted_log_delta;
  if (p.lambda == 0) {
    // lam/(lam~ - lam) * ln Delta -> c/lam~ as lam -> 0
    weighted_log_delta = c / p.lambda_tilde;
  } else {
    weighted_log_delta =
        p.lambda / gap * (detail::log_expm1_ratio(c, p.lambda) - lb);
  }
  const Scalar v = Scalar(1) - gap * std::exp(lb - weighted_log_delta);
  return std::clamp(v, Scalar(0), Scalar(1));
}

/// Minimum DEP with lambda, lambda_tilde replaced by their large-N limits,
/// conditioned on the jamming gain gamma.
template <typename Scalar>
Scalar asymptotic_min_dep(const AsymptoticDep<Scalar>& a, Scalar gamma) {
  if (!(gamma >= 0)) throw DomainError("asymptotic_min_dep: gamma must be nonnegative");
  return min_dep(a.at_gamma(gamma));
}

/// E_gamma[asymptotic_min_dep] for gamma ~ Exp(mean lambda_rw), by adaptive
/// quadrature in u = gamma / lambda_rw on (0, 40].
template <typename Scalar>
QuadratureResult<Scalar> avg_min_dep_quadrature(const AsymptoticDep<Scalar>& a,
                                                Scalar abs_tol = Scalar(1e-10)) {
  if (!(a.lambda_rw > 0)) throw DomainError("avg_min_dep_numeric: lambda_rw must be positive");
  auto integrand = [&](Scalar u) { return asymptotic_min_dep(a, a.lambda_rw * u) * std::exp(-u); };
  return integrate_adaptive<Scalar>(integrand, Scalar(0), Scalar(40), abs_tol);
}

template <typename Scalar>
Scalar avg_min_dep_numeric(const AsymptoticDep<Scalar>& a, Scalar abs_tol = Scalar(1e-10)) {
  return avg_min_dep_quadrature(a, abs_tol).value;
}

/// ln(1 + u) / u, equal to 1 at u = 0.
template <typename Scalar>
Scalar log1p_ratio(Scalar u) {
  if (std::abs(u) < Scalar(1e-4)) return Scalar(1) - u / 2 + u * u / 3 - u * u * u / 4;
  return std::log1p(u) / u;
}

/// Closed-form lower bound on the averaged minimum DEP:
/// 1 - varpi_b / (varpi_b + varpi_c) * ln(1 + u) / u,  u = P_j_max lambda_rw / lambda~_a.
template <typename Scalar>
Scalar dep_lower_bound(const AsymptoticDep<Scalar>& a) {
  const Scalar total = a.varpi_b + a.varpi_c;
  if (!(a.varpi_b > 0) || !(total > 0)) return Scalar(1);
  const Scalar lt = a.lambda_tilde_a();
  if (!(lt > 0)) return Scalar(1);
  const Scalar u = a.P_j_max * a.lambda_rw / lt;
  return Scalar(1) - (a.varpi_b / total) * log1p_ratio(u);
}

using DepParamsd = DepParams<double>;
using AsymptoticDepd = AsymptoticDep<double>;

}  // namespace starcov

#endif  // STARCOV_DETECTION_HPP
