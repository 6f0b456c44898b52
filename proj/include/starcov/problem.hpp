#ifndef STARCOV_PROBLEM_HPP
#define STARCOV_PROBLEM_HPP

#include <cmath>
#include <complex>
#include <numbers>

#include "starcov/detection.hpp"
#include "starcov/gcmma.hpp"
#include "starcov/model.hpp"
#include "starcov/qos.hpp"
#include "starcov/types.hpp"

namespace starcov {

/// Joint beamforming problem for one channel realization:
/// minimize f_0 = -R_bb subject to f_1 (power), f_2 (covertness), f_3 (QoS) <= 0.
template <typename Scalar>
struct ProblemInstance {
  SystemParams<Scalar> params;
  ChannelRealization<Scalar> channels;
  Scalar sigma_star_val = 0;
  DesignLayout layout;
  Vec<Scalar> x_min, x_max;
  Scalar a_0 = 1;
  Vec<Scalar> c;

  static constexpr int kNumConstraints = 3;
  static constexpr Scalar kBetaMargin = Scalar(1e-6);
  static constexpr Scalar kPenalty = Scalar(1e4);
};

template <typename Scalar>
ProblemInstance<Scalar> make_instance(const SystemParams<Scalar>& params,
                                      const ChannelRealization<Scalar>& channels) {
  params.validate();
  if (channels.N() != params.N || channels.M() != params.M)
    throw DimensionError("make_instance: channel dimensions do not match M, N");
  ProblemInstance<Scalar> inst;
  inst.params = params;
  inst.channels = channels;
  inst.sigma_star_val = sigma_star(params.kappa, params);
  inst.layout = DesignLayout{params.M, params.N};
  const Scalar m = ProblemInstance<Scalar>::kBetaMargin;
  const Bounds<Scalar> b = default_bounds<Scalar>(inst.layout, params.P_max, m, Scalar(1) - m);
  inst.x_min = b.lower;
  inst.x_max = b.upper;
  inst.c = Vec<Scalar>::Constant(3, ProblemInstance<Scalar>::kPenalty);
  return inst;
}

/// Conventional-RIS baseline: the first round(reflect_fraction * N) elements are
/// reflect-only (beta_r = 1) and the rest transmit-only (beta_r = 0). Phases stay free.
template <typename Scalar>
ProblemInstance<Scalar> baseline_ris_instance(const ProblemInstance<Scalar>& inst,
                                              double reflect_fraction = 0.5) {
  const int N = inst.layout.N;
  if (!(reflect_fraction >= 0 && reflect_fraction <= 1))
    throw ConfigError("baseline_ris_instance: reflect fraction must lie in [0,1]");
  if (reflect_fraction == 0.5 && N % 2 != 0)
    throw ConfigError("baseline_ris_instance: an even split needs an even element count, got N=" +
                      std::to_string(N));
  const int n_reflect = static_cast<int>(std::lround(reflect_fraction * N));
  ProblemInstance<Scalar> out = inst;
  const int off = inst.layout.beta_r();
  for (int n = 0; n < N; ++n) {
    const Scalar v = n < n_reflect ? Scalar(1) : Scalar(0);
    out.x_min(off + n) = v;
    out.x_max(off + n) = v;
  }
  return out;
}

/// Uniform draw in the box of the instance (pinned coordinates keep their value).
template <typename Scalar>
Vec<Scalar> random_start(const ProblemInstance<Scalar>& inst, Rng& rng) {
  Vec<Scalar> x(inst.x_min.size());
  for (Eigen::Index j = 0; j < x.size(); ++j)
    x(j) = inst.x_min(j) == inst.x_max(j) ? inst.x_min(j)
                                          : rng.uniform<Scalar>(inst.x_min(j), inst.x_max(j));
  return x;
}

namespace detail {

template <typename Scalar>
struct DecodedDesign {
  Beamformers<Scalar> bf;
  StarRisProfile<Scalar> prof;
};

template <typename Scalar>
DecodedDesign<Scalar> decode(const ProblemInstance<Scalar>& inst, const Vec<Scalar>& x) {
  auto [bf, prof] = unpack(inst.layout, x, inst.x_min, inst.x_max);
  return {std::move(bf), std::move(prof)};
}

// d/du of ln(1 + u) / u
template <typename Scalar>
Scalar log1p_ratio_deriv(Scalar u) {
  if (std::abs(u) < Scalar(1e-4)) return Scalar(-0.5) + Scalar(2) * u / 3 - Scalar(0.75) * u * u;
  return (u / (Scalar(1) + u) - std::log1p(u)) / (u * u);
}

}  // namespace detail

/// [f_0, f_1, f_2, f_3] = [-R_bb, |w|^2 - P_max, 1 - lower-bound DEP - epsilon, R* - R_cc].
template <typename Scalar>
Vec<Scalar> eval_f(const ProblemInstance<Scalar>& inst, const Vec<Scalar>& x) {
  const auto d = detail::decode(inst, x);
  const auto& p = inst.params;
  const LinkGains<Scalar> g = link_gains(inst.channels, d.prof, d.bf);
  Vec<Scalar> f(4);
  f(0) = -rate_bb(g, p);
  f(1) = d.bf.power_b() + d.bf.power_c() - p.P_max;
  f(2) = Scalar(1) - dep_lower_bound(asymptotic_dep(p, inst.channels, d.prof, d.bf)) - p.epsilon;
  f(3) = p.R_star - rate_cc(g, p, inst.sigma_star_val);
  return f;
}

namespace detail {

// |a(x)|^2 with a = sum_n conj(h1_n) theta_n (H w)_n, plus da/dx for every design coordinate.
template <typename Scalar>
struct ComplexForm {
  std::complex<Scalar> a;
  CVec<Scalar> da;

  [[nodiscard]] Scalar value() const { return std::norm(a); }
  [[nodiscard]] Vec<Scalar> grad() const {
    return Scalar(2) * (std::conj(a) * da.array()).real().matrix();
  }
};

template <typename Scalar>
CVec<Scalar> theta_deriv_beta(const StarRisProfile<Scalar>& prof, bool reflect) {
  CVec<Scalar> v(prof.N());
  for (int n = 0; n < prof.N(); ++n) {
    const Scalar b = prof.beta_r(n);
    // pinned baseline elements sit at 0 or 1 where the derivative is unbounded; they are
    // never optimized over, so report 0 instead of inf.
    if (!(b > 0 && b < 1)) {
      v(n) = 0;
      continue;
    }
    v(n) = reflect ? std::polar(Scalar(0.5) / std::sqrt(b), prof.phi_r(n))
                   : std::polar(Scalar(-0.5) / std::sqrt(Scalar(1) - b), prof.phi_t(n));
  }
  return v;
}

// Signal through side `reflect` toward user channel h, carried by beam `beam_b`.
template <typename Scalar>
ComplexForm<Scalar> signal_form(const ProblemInstance<Scalar>& inst, const DecodedDesign<Scalar>& d,
                                const CVec<Scalar>& h, bool reflect, bool beam_b) {
  const DesignLayout& lay = inst.layout;
  const CMat<Scalar>& H = inst.channels.H_AR;
  const CVec<Scalar> theta = reflect ? d.prof.theta_r() : d.prof.theta_t();
  const CVec<Scalar> w = beam_b ? d.bf.w_b() : d.bf.w_c();
  const CVec<Scalar> hw = H * w;
  const CVec<Scalar> coef = h.conjugate().cwiseProduct(hw);  // a = sum coef_n theta_n
  const CVec<Scalar> row = H.transpose() * h.conjugate().cwiseProduct(theta);

  ComplexForm<Scalar> out;
  out.a = coef.cwiseProduct(theta).sum();
  out.da = CVec<Scalar>::Zero(lay.size());
  const std::complex<Scalar> j(0, 1);
  const int om = beam_b ? lay.omega_b() : lay.omega_c();
  const int ph = beam_b ? lay.phase_b() : lay.phase_c();
  const Vec<Scalar>& phase = beam_b ? d.bf.phase_b : d.bf.phase_c;
  for (int m = 0; m < lay.M; ++m) {
    out.da(om + m) = row(m) * std::polar(Scalar(1), phase(m));
    out.da(ph + m) = j * row(m) * w(m);
  }
  const CVec<Scalar> dth = theta_deriv_beta(d.prof, reflect);
  const int phs = reflect ? lay.phi_r() : lay.phi_t();
  for (int n = 0; n < lay.N; ++n) {
    out.da(lay.beta_r() + n) = coef(n) * dth(n);
    out.da(phs + n) = j * coef(n) * theta(n);
  }
  return out;
}

// Jamming term sum_n conj(h_rb,n) theta_t,n conj(h_rc,n).
template <typename Scalar>
ComplexForm<Scalar> jamming_form(const ProblemInstance<Scalar>& inst,
                                 const DecodedDesign<Scalar>& d) {
  const DesignLayout& lay = inst.layout;
  const CVec<Scalar> coef =
      inst.channels.h_rb.conjugate().cwiseProduct(inst.channels.h_rc.conjugate());
  const CVec<Scalar> theta = d.prof.theta_t();
  const CVec<Scalar> dth = theta_deriv_beta(d.prof, false);
  ComplexForm<Scalar> out;
  out.a = coef.cwiseProduct(theta).sum();
  out.da = CVec<Scalar>::Zero(lay.size());
  const std::complex<Scalar> j(0, 1);
  for (int n = 0; n < lay.N; ++n) {
    out.da(lay.beta_r() + n) = coef(n) * dth(n);
    out.da(lay.phi_t() + n) = j * coef(n) * theta(n);
  }
  return out;
}

// d/dx of -log2(1 + S/I) given values and gradients of S and I.
template <typename Scalar>
Vec<Scalar> neg_rate_grad(Scalar S, const Vec<Scalar>& dS, Scalar I, const Vec<Scalar>& dI) {
  const Scalar k = Scalar(1) / (std::numbers::ln2_v<Scalar> * I * (I + S));
  return -k * (dS * I - S * dI);
}

}  // namespace detail

/// Analytic Jacobian of eval_f, 4 x (4M+3N). Requires beta strictly inside (0,1).
template <typename Scalar>
Mat<Scalar> grad_f(const ProblemInstance<Scalar>& inst, const Vec<Scalar>& x) {
  const auto d = detail::decode(inst, x);
  const auto& p = inst.params;
  const auto& ch = inst.channels;
  const DesignLayout& lay = inst.layout;
  const int n = lay.size();
  Mat<Scalar> J = Mat<Scalar>::Zero(4, n);

  // f_0
  {
    const auto bb = detail::signal_form(inst, d, ch.h_rb, true, true);
    const auto bc = detail::signal_form(inst, d, ch.h_rb, true, false);
    const auto bj = detail::jamming_form(inst, d);
    const Scalar jam = p.P_j_max * (Scalar(1) - p.iota);
    const Scalar I = bc.value() + jam * bj.value() + p.sigma2_b;
    const Vec<Scalar> dI = bc.grad() + jam * bj.grad();
    J.row(0) = detail::neg_rate_grad(bb.value(), bb.grad(), I, dI).transpose();
  }
  // f_1
  J.row(1).segment(lay.omega_b(), lay.M) = Scalar(2) * d.bf.omega_b.transpose();
  J.row(1).segment(lay.omega_c(), lay.M) = Scalar(2) * d.bf.omega_c.transpose();
  // f_2 = r L(u) - epsilon
  {
    const AsymptoticDep<Scalar> a = asymptotic_dep(p, ch, d.prof, d.bf);
    const Scalar S_w = a.varpi_b + a.varpi_c;
    const Scalar lt = a.lambda_tilde_a();
    if (a.varpi_b > 0 && S_w > 0 && lt > 0) {
      const Scalar r = a.varpi_b / S_w;
      const Scalar u = a.P_j_max * a.lambda_rw / lt;
      const Scalar L = log1p_ratio(u);
      const Scalar dL = detail::log1p_ratio_deriv(u);
      for (int m = 0; m < lay.M; ++m) {
        const Scalar wb = d.bf.omega_b(m), wc = d.bf.omega_c(m);
        const Scalar du_b = -u * Scalar(2) * wb / S_w;
        const Scalar du_c = -u * Scalar(2) * wc / S_w;
        const Scalar dr_b = Scalar(2) * wb * a.varpi_c / (S_w * S_w);
        const Scalar dr_c = -Scalar(2) * wc * a.varpi_b / (S_w * S_w);
        J(2, lay.omega_b() + m) = dr_b * L + r * dL * du_b;
        J(2, lay.omega_c() + m) = dr_c * L + r * dL * du_c;
      }
      for (int k = 0; k < lay.N; ++k) {
        const Scalar dlam = -ch.l_rw * std::norm(ch.h_rc(k));
        const Scalar du = a.P_j_max * dlam / lt - u / a.theta_r;
        J(2, lay.beta_r() + k) = r * dL * du;
      }
    }
  }
  // f_3
  {
    const auto cc = detail::signal_form(inst, d, ch.h_rc, false, false);
    const auto cb = detail::signal_form(inst, d, ch.h_rc, false, true);
    const Scalar I = cb.value() + inst.sigma_star_val + p.sigma2_c;
    const Vec<Scalar> g = detail::neg_rate_grad(cc.value(), cc.grad(), I, cb.grad());
    J.row(3) = g.transpose();
  }
  return J;
}

/// Solver view of the instance.
template <typename Scalar>
SmoothProblem<Scalar> to_smooth_problem(const ProblemInstance<Scalar>& inst) {
  SmoothProblem<Scalar> sp;
  sp.n = inst.layout.size();
  sp.m = ProblemInstance<Scalar>::kNumConstraints;
  sp.x_min = inst.x_min;
  sp.x_max = inst.x_max;
  sp.a0 = inst.a_0;
  sp.c = inst.c;
  sp.eval = [&inst](const Vec<Scalar>& x) { return eval_f(inst, x); };
  sp.grad = [&inst](const Vec<Scalar>& x) { return grad_f(inst, x); };
  return sp;
}

using ProblemInstanced = ProblemInstance<double>;

}  // namespace starcov

#endif  // STARCOV_PROBLEM_HPP
