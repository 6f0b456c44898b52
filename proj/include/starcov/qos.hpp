#ifndef STARCOV_QOS_HPP
#define STARCOV_QOS_HPP

#include <cmath>
#include <limits>
#include <numbers>

#include "starcov/model.hpp"
#include "starcov/types.hpp"

namespace starcov {

/// Exponential integral Ei(x) = -int_{-x}^inf e^{-t}/t dt for x < 0.
/// Power series for |x| <= 6, Lentz continued fraction for E1 beyond.
template <typename Scalar>
Scalar expint_ei(Scalar x) {
  if (!(x < 0)) throw DomainError("expint_ei: only negative arguments are supported");
  const Scalar z = -x;
  const Scalar eps = std::numeric_limits<Scalar>::epsilon();
  if (z <= Scalar(6)) {
    // Ei(x) = gamma_E + ln|x| + sum_k x^k / (k k!)
    Scalar term = Scalar(1);
    Scalar sum = 0;
    for (int k = 1; k < 200; ++k) {
      term *= x / Scalar(k);
      const Scalar add = term / Scalar(k);
      sum += add;
      if (std::abs(add) < eps * std::abs(sum)) break;
    }
    return std::numbers::egamma_v<Scalar> + std::log(z) + sum;
  }
  // E1(z) = e^{-z} / (z + 1 - 1^2/(z + 3 - 2^2/(z + 5 - ...)))
  const Scalar tiny = std::numeric_limits<Scalar>::min() / eps;
  Scalar b = z + 1;
  Scalar c = Scalar(1) / tiny;
  Scalar d = Scalar(1) / b;
  Scalar h = d;
  for (int i = 1; i < 500; ++i) {
    const Scalar an = -Scalar(i) * Scalar(i);
    b += 2;
    d = Scalar(1) / (an * d + b);
    c = b + an / c;
    const Scalar del = c * d;
    h *= del;
    if (std::abs(del - 1) <= eps) break;
  }
  return -h * std::exp(-z);
}

/// Carol's outage as a function of z = Gamma / (phi P_j_max) >= 0:
/// e^{-z} + z Ei(-z). Equals 1 at z = 0 and decreases strictly to 0.
template <typename Scalar>
Scalar carol_outage_curve(Scalar z) {
  if (z <= 0) return Scalar(1);
  return std::exp(-z) + z * expint_ei(-z);
}

/// Instantaneous power gains of every link, for fixed channels and design.
template <typename Scalar>
struct LinkGains {
  Scalar g_bb = 0;      // |h_rb^H Theta_r H_AR w_b|^2
  Scalar g_bc = 0;      // |h_rb^H Theta_r H_AR w_c|^2
  Scalar g_bj = 0;      // |h_rb^H Theta_t h_rc^*|^2
  Scalar g_cc_sig = 0;  // |h_rc^H Theta_t H_AR w_c|^2
  Scalar g_cb = 0;      // |h_rc^H Theta_t H_AR w_b|^2
};

template <typename Scalar>
LinkGains<Scalar> link_gains(const ChannelRealization<Scalar>& ch,
                             const StarRisProfile<Scalar>& prof, const Beamformers<Scalar>& bf) {
  const CVec<Scalar> tr = prof.theta_r();
  const CVec<Scalar> tt = prof.theta_t();
  const CVec<Scalar> wb = bf.w_b();
  const CVec<Scalar> wc = bf.w_c();
  const CVec<Scalar> bob_row = ch.H_AR.transpose() * ch.h_rb.conjugate().cwiseProduct(tr);
  const CVec<Scalar> carol_row = ch.H_AR.transpose() * ch.h_rc.conjugate().cwiseProduct(tt);
  LinkGains<Scalar> g;
  g.g_bb = std::norm(bob_row.cwiseProduct(wb).sum());
  g.g_bc = std::norm(bob_row.cwiseProduct(wc).sum());
  g.g_bj = std::norm(ch.h_rb.conjugate().cwiseProduct(tt).cwiseProduct(ch.h_rc.conjugate()).sum());
  g.g_cc_sig = std::norm(carol_row.cwiseProduct(wc).sum());
  g.g_cb = std::norm(carol_row.cwiseProduct(wb).sum());
  return g;
}

namespace detail {
// 2^R - 1
template <typename Scalar>
Scalar rate_snr(Scalar R) {
  return std::expm1(R * std::numbers::ln2_v<Scalar>);
}
}  // namespace detail

/// Bob's outage probability over P_j ~ Uniform(0, P_j_max) at target rate R_b.
template <typename Scalar>
Scalar outage_bob(const LinkGains<Scalar>& g, Scalar R_b, const SystemParams<Scalar>& params) {
  if (!(R_b >= 0)) throw DomainError("outage_bob: target rate must be nonnegative");
  if (R_b == 0) return Scalar(0);
  const Scalar q = detail::rate_snr(R_b);
  const Scalar num = g.g_bb - q * (g.g_bc + params.sigma2_b);
  if (!(g.g_bj > 0) || !(params.P_j_max > 0)) return num < 0 ? Scalar(1) : Scalar(0);
  const Scalar upsilon = num / (q * g.g_bj);
  if (upsilon > params.P_j_max) return Scalar(0);
  if (upsilon < 0) return Scalar(1);
  return Scalar(1) - upsilon / params.P_j_max;
}

/// Carol's outage probability over P_j ~ Uniform(0, P_j_max) and
/// |h_cc|^2 ~ Exp(phi_sic) at target rate R_c.
template <typename Scalar>
Scalar outage_carol(const LinkGains<Scalar>& g, Scalar R_c, const SystemParams<Scalar>& params) {
  if (!(R_c >= 0)) throw DomainError("outage_carol: target rate must be nonnegative");
  if (R_c == 0) return Scalar(0);
  const Scalar q = detail::rate_snr(R_c);
  const Scalar Gamma = (g.g_cc_sig - q * (g.g_cb + params.sigma2_c)) / q;
  if (Gamma < 0) return Scalar(1);
  const Scalar scale = params.phi_sic * params.P_j_max;
  if (!(scale > 0)) return Scalar(0);
  return carol_outage_curve(Gamma / scale);
}

/// Interference level sigma* with carol outage exactly kappa: solves
/// e^{-s/(phi P)} + s/(phi P) Ei(-s/(phi P)) = kappa by bisection on a bracket
/// [0, B] with B starting at phi P and doubling until the sign changes.
template <typename Scalar>
Scalar sigma_star(Scalar kappa, const SystemParams<Scalar>& params) {
  if (!(kappa > 0 && kappa < 1)) throw DomainError("sigma_star: kappa must lie in (0,1)");
  const Scalar scale = params.phi_sic * params.P_j_max;
  if (!(scale > 0)) return Scalar(0);
  // work in z = s / scale so the bracket is dimensionless
  Scalar lo = 0, hi = 1;
  int doublings = 0;
  while (carol_outage_curve(hi) > kappa) {
    lo = hi;
    hi *= 2;
    if (++doublings > 60) throw SolverError("sigma_star: bracket growth exceeded 60 doublings");
  }
  for (int it = 0; it < 400; ++it) {
    const Scalar mid = Scalar(0.5) * (lo + hi);
    if (mid <= lo || mid >= hi) break;
    const Scalar r = carol_outage_curve(mid) - kappa;
    if (r == 0) {
      lo = hi = mid;
      break;
    }
    (r > 0 ? lo : hi) = mid;
  }
  return Scalar(0.5) * (lo + hi) * scale;
}

/// Covert-rate upper bound: log2(1 + g_bb / (g_bc + g_bj P_j_max (1 - iota) + sigma_b^2)).
template <typename Scalar>
Scalar rate_bb(const LinkGains<Scalar>& g, const SystemParams<Scalar>& params) {
  const Scalar jam = g.g_bj * params.P_j_max * (Scalar(1) - params.iota);
  return std::log1p(g.g_bb / (g.g_bc + jam + params.sigma2_b)) / std::numbers::ln2_v<Scalar>;
}

/// Public-rate upper bound: log2(1 + g_cc / (g_cb + sigma* + sigma_c^2)).
template <typename Scalar>
Scalar rate_cc(const LinkGains<Scalar>& g, const SystemParams<Scalar>& params,
               Scalar sigma_star_val) {
  return std::log1p(g.g_cc_sig / (g.g_cb + sigma_star_val + params.sigma2_c)) /
         std::numbers::ln2_v<Scalar>;
}

using LinkGainsd = LinkGains<double>;

}  // namespace starcov

#endif  // STARCOV_QOS_HPP
