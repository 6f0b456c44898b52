#ifndef STARCOV_MODEL_HPP
#define STARCOV_MODEL_HPP

#include <cmath>
#include <cstdint>
#include <string>
#include <utility>

#include "starcov/rng.hpp"
#include "starcov/types.hpp"

namespace starcov {

/// Physical constants of one deployment. Everything is linear (W, m, bits/s/Hz).
template <typename Scalar>
struct SystemParams {
  int M = 3;   // Alice antennas
  int N = 30;  // STAR-RIS elements
  Scalar rho_0 = Scalar(0.01);
  Scalar alpha = Scalar(2.6);
  Scalar d_AR = Scalar(50), d_rb = Scalar(20), d_rc = Scalar(25), d_rw = Scalar(15);
  Scalar sigma2_b = Scalar(1e-13), sigma2_c = Scalar(1e-13), sigma2_w = Scalar(1e-13);
  Scalar phi_sic = Scalar(1e-11);
  Scalar P_max = Scalar(1);
  Scalar P_j_max = Scalar(1);
  Scalar epsilon = Scalar(0.1);
  Scalar iota = Scalar(0.1), kappa = Scalar(0.1);
  Scalar R_star = Scalar(4);

  /// Throws ConfigError naming the first violated invariant.
  void validate() const {
    auto fail = [](const std::string& what) { throw ConfigError("invalid SystemParams: " + what); };
    if (M < 1) fail("M must be >= 1");
    if (N < 1) fail("N must be >= 1");
    if (!(rho_0 > 0)) fail("rho_0 must be positive");
    if (!std::isfinite(alpha)) fail("alpha must be finite");
    if (!(d_AR > 0 && d_rb > 0 && d_rc > 0 && d_rw > 0)) fail("distances must be positive");
    if (!(sigma2_b > 0 && sigma2_c > 0 && sigma2_w > 0)) fail("noise powers must be positive");
    if (!(P_max > 0)) fail("P_max must be positive");
    if (!(P_j_max > 0)) fail("P_j_max must be positive");
    if (!(phi_sic >= 0 && phi_sic <= 1)) fail("phi_sic must lie in [0,1]");
    if (!(epsilon > 0 && epsilon < 1)) fail("epsilon must lie in (0,1)");
    if (!(iota > 0 && iota < 1)) fail("iota must lie in (0,1)");
    if (!(kappa > 0 && kappa < 1)) fail("kappa must lie in (0,1)");
    if (!(R_star >= 0)) fail("R_star must be nonnegative");
  }
};

/// Large-scale path gain rho_0 / d^alpha.
template <typename Scalar>
Scalar path_loss(Scalar d, Scalar alpha, Scalar rho_0) {
  if (!(d > 0)) throw DomainError("path_loss: distance must be positive");
  return rho_0 / std::pow(d, alpha);
}

/// One draw of every channel in the system, already scaled by its path gain.
template <typename Scalar>
struct ChannelRealization {
  CMat<Scalar> H_AR;  // N x M
  CVec<Scalar> h_rb, h_rc, h_rw;
  std::complex<Scalar> h_cc{0, 0};
  Scalar l_AR = 0, l_rb = 0, l_rc = 0, l_rw = 0;

  [[nodiscard]] int N() const { return static_cast<int>(H_AR.rows()); }
  [[nodiscard]] int M() const { return static_cast<int>(H_AR.cols()); }
};

/// Rayleigh draw of all channels. Each channel block uses its own substream of
/// `seed`, and H_AR is drawn element (row) first, so the realization for N
/// elements is a prefix of the one for any larger N with the same seed.
template <typename Scalar>
ChannelRealization<Scalar> sample_channels(const SystemParams<Scalar>& params, std::uint64_t seed) {
  params.validate();
  const Rng root(seed);
  ChannelRealization<Scalar> ch;
  ch.l_AR = path_loss(params.d_AR, params.alpha, params.rho_0);
  ch.l_rb = path_loss(params.d_rb, params.alpha, params.rho_0);
  ch.l_rc = path_loss(params.d_rc, params.alpha, params.rho_0);
  ch.l_rw = path_loss(params.d_rw, params.alpha, params.rho_0);

  const int N = params.N, M = params.M;
  {
    Rng rng = root.split(0);
    const Scalar s = std::sqrt(ch.l_AR);
    ch.H_AR.resize(N, M);
    for (int n = 0; n < N; ++n)
      for (int m = 0; m < M; ++m) ch.H_AR(n, m) = s * rng.template complex_normal<Scalar>();
  }
  auto draw_vec = [&](std::uint64_t stream, Scalar gain) {
    Rng rng = root.split(stream);
    const Scalar s = std::sqrt(gain);
    CVec<Scalar> v(N);
    for (int n = 0; n < N; ++n) v(n) = s * rng.template complex_normal<Scalar>();
    return v;
  };
  ch.h_rb = draw_vec(1, ch.l_rb);
  ch.h_rc = draw_vec(2, ch.l_rc);
  ch.h_rw = draw_vec(3, ch.l_rw);
  {
    Rng rng = root.split(4);
    ch.h_cc = std::sqrt(params.phi_sic) * rng.template complex_normal<Scalar>();
  }
  return ch;
}

/// Per-element STAR-RIS configuration. Transmission fraction is 1 - beta_r.
template <typename Scalar>
struct StarRisProfile {
  Vec<Scalar> beta_r, phi_r, phi_t;

  [[nodiscard]] int N() const { return static_cast<int>(beta_r.size()); }

  /// diag(Theta_r) = sqrt(beta_r) o exp(j phi_r)
  [[nodiscard]] CVec<Scalar> theta_r() const {
    CVec<Scalar> v(N());
    for (int n = 0; n < N(); ++n) v(n) = std::polar(std::sqrt(beta_r(n)), phi_r(n));
    return v;
  }
  /// diag(Theta_t) = sqrt(1 - beta_r) o exp(j phi_t)
  [[nodiscard]] CVec<Scalar> theta_t() const {
    CVec<Scalar> v(N());
    for (int n = 0; n < N(); ++n) v(n) = std::polar(std::sqrt(Scalar(1) - beta_r(n)), phi_t(n));
    return v;
  }
};

/// Active beamformers in polar form, w = omega o exp(j phase).
template <typename Scalar>
struct Beamformers {
  Vec<Scalar> omega_b, omega_c, phase_b, phase_c;

  [[nodiscard]] int M() const { return static_cast<int>(omega_b.size()); }

  [[nodiscard]] CVec<Scalar> w_b() const { return polar_vec(omega_b, phase_b); }
  [[nodiscard]] CVec<Scalar> w_c() const { return polar_vec(omega_c, phase_c); }
  [[nodiscard]] Scalar power_b() const { return omega_b.squaredNorm(); }
  [[nodiscard]] Scalar power_c() const { return omega_c.squaredNorm(); }

 private:
  static CVec<Scalar> polar_vec(const Vec<Scalar>& amp, const Vec<Scalar>& ph) {
    CVec<Scalar> w(amp.size());
    for (Eigen::Index i = 0; i < amp.size(); ++i) w(i) = std::polar(amp(i), ph(i));
    return w;
  }
};

/// Offsets of each block inside the real design vector
/// [omega_b, omega_c, phase_b, phase_c, beta_r, phi_r, phi_t].
struct DesignLayout {
  int M = 0;
  int N = 0;

  [[nodiscard]] constexpr int size() const { return 4 * M + 3 * N; }
  [[nodiscard]] constexpr int omega_b() const { return 0; }
  [[nodiscard]] constexpr int omega_c() const { return M; }
  [[nodiscard]] constexpr int phase_b() const { return 2 * M; }
  [[nodiscard]] constexpr int phase_c() const { return 3 * M; }
  [[nodiscard]] constexpr int beta_r() const { return 4 * M; }
  [[nodiscard]] constexpr int phi_r() const { return 4 * M + N; }
  [[nodiscard]] constexpr int phi_t() const { return 4 * M + 2 * N; }
};

template <typename Scalar>
struct Bounds {
  Vec<Scalar> lower, upper;
};

/// Natural box: amplitudes [0, sqrt(P_max)], beta_r [beta_lo, beta_hi], phases [0, 2pi].
template <typename Scalar>
Bounds<Scalar> default_bounds(const DesignLayout& lay, Scalar P_max, Scalar beta_lo = Scalar(0),
                              Scalar beta_hi = Scalar(1)) {
  Bounds<Scalar> b{Vec<Scalar>::Zero(lay.size()), Vec<Scalar>::Zero(lay.size())};
  const Scalar amp = std::sqrt(P_max);
  b.upper.segment(lay.omega_b(), 2 * lay.M).setConstant(amp);
  b.upper.segment(lay.phase_b(), 2 * lay.M).setConstant(kTwoPi<Scalar>);
  b.lower.segment(lay.beta_r(), lay.N).setConstant(beta_lo);
  b.upper.segment(lay.beta_r(), lay.N).setConstant(beta_hi);
  b.upper.segment(lay.phi_r(), 2 * lay.N).setConstant(kTwoPi<Scalar>);
  return b;
}

/// Real design vector with its box.
template <typename Scalar>
struct DesignVector {
  DesignLayout layout;
  Vec<Scalar> x, x_min, x_max;
};

namespace detail {
template <typename Scalar>
Scalar wrap_phase(Scalar p) {
  Scalar r = std::fmod(p, kTwoPi<Scalar>);
  if (r < 0) r += kTwoPi<Scalar>;
  if (r >= kTwoPi<Scalar>) r = 0;
  return r;
}
}  // namespace detail

template <typename Scalar>
DesignVector<Scalar> pack(const Beamformers<Scalar>& bf, const StarRisProfile<Scalar>& profile,
                          const Bounds<Scalar>& box) {
  const DesignLayout lay{bf.M(), profile.N()};
  if (bf.omega_c.size() != lay.M || bf.phase_b.size() != lay.M || bf.phase_c.size() != lay.M)
    throw DimensionError("pack: beamformer blocks must all have length M");
  if (profile.phi_r.size() != lay.N || profile.phi_t.size() != lay.N)
    throw DimensionError("pack: STAR-RIS blocks must all have length N");
  if (box.lower.size() != lay.size() || box.upper.size() != lay.size())
    throw DimensionError("pack: bounds length must be 4M+3N");

  DesignVector<Scalar> d{lay, Vec<Scalar>(lay.size()), box.lower, box.upper};
  d.x.segment(lay.omega_b(), lay.M) = bf.omega_b;
  d.x.segment(lay.omega_c(), lay.M) = bf.omega_c;
  d.x.segment(lay.phase_b(), lay.M) = bf.phase_b.unaryExpr(&detail::wrap_phase<Scalar>);
  d.x.segment(lay.phase_c(), lay.M) = bf.phase_c.unaryExpr(&detail::wrap_phase<Scalar>);
  d.x.segment(lay.beta_r(), lay.N) = profile.beta_r;
  d.x.segment(lay.phi_r(), lay.N) = profile.phi_r.unaryExpr(&detail::wrap_phase<Scalar>);
  d.x.segment(lay.phi_t(), lay.N) = profile.phi_t.unaryExpr(&detail::wrap_phase<Scalar>);
  return d;
}

template <typename Scalar>
DesignVector<Scalar> pack(const Beamformers<Scalar>& bf, const StarRisProfile<Scalar>& profile,
                          Scalar P_max) {
  return pack(bf, profile, default_bounds<Scalar>(DesignLayout{bf.M(), profile.N()}, P_max));
}

/// Inverse of pack. Never clamps: any entry outside [x_min, x_max] is an error.
template <typename Scalar>
std::pair<Beamformers<Scalar>, StarRisProfile<Scalar>> unpack(const DesignLayout& lay,
                                                              const Vec<Scalar>& x,
                                                              const Vec<Scalar>& x_min,
                                                              const Vec<Scalar>& x_max) {
  if (x.size() != lay.size() || x_min.size() != lay.size() || x_max.size() != lay.size())
    throw DimensionError("unpack: design vector length " + std::to_string(x.size()) +
                         " != 4M+3N = " + std::to_string(lay.size()));
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    if (!(x(i) >= x_min(i) && x(i) <= x_max(i)))
      throw BoundsError("unpack: coordinate " + std::to_string(i) + " outside its box");
  }
  Beamformers<Scalar> bf{x.segment(lay.omega_b(), lay.M), x.segment(lay.omega_c(), lay.M),
                         x.segment(lay.phase_b(), lay.M), x.segment(lay.phase_c(), lay.M)};
  StarRisProfile<Scalar> prof{x.segment(lay.beta_r(), lay.N), x.segment(lay.phi_r(), lay.N),
                              x.segment(lay.phi_t(), lay.N)};
  return {std::move(bf), std::move(prof)};
}

template <typename Scalar>
std::pair<Beamformers<Scalar>, StarRisProfile<Scalar>> unpack(const DesignVector<Scalar>& d) {
  return unpack(d.layout, d.x, d.x_min, d.x_max);
}

using SystemParamsd = SystemParams<double>;
using ChannelRealizationd = ChannelRealization<double>;
using StarRisProfiled = StarRisProfile<double>;
using Beamformersd = Beamformers<double>;
using DesignVectord = DesignVector<double>;
using Boundsd = Bounds<double>;

}  // namespace starcov

#endif  // STARCOV_MODEL_HPP
