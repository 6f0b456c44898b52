#ifndef STARCOV_QUADRATURE_HPP
#define STARCOV_QUADRATURE_HPP

#include <array>
#include <cmath>
#include <queue>
#include <string>
#include <vector>

#include "starcov/types.hpp"

namespace starcov {

template <typename Scalar>
struct QuadratureResult {
  Scalar value = 0;
  Scalar error_estimate = 0;
  int intervals = 0;
};

namespace detail {

// Gauss-Kronrod 7/15 nodes on [-1, 1] (positive half, centre last).
inline constexpr std::array<long double, 8> kKronrodNodes = {
    0.991455371120812639206854697526329L, 0.949107912342758524526189684047851L,
    0.864864423359769072789712788640926L, 0.741531185599394439863864773280788L,
    0.586087235467691130294144845693013L, 0.405845151377397166906606412076961L,
    0.207784955007898467600689403773245L, 0.000000000000000000000000000000000L};
inline constexpr std::array<long double, 8> kKronrodWeights = {
    0.022935322010529224963732008058970L, 0.063092092629978553290700663189204L,
    0.104790010322250183839876322541518L, 0.140653259715525918745189590510238L,
    0.169004726639267902826583426598550L, 0.190350578064785409913256402421014L,
    0.204432940075298892414161999234649L, 0.209482141084727828012999174891714L};
inline constexpr std::array<long double, 4> kGaussWeights = {
    0.129484966168869693270611432679082L, 0.279705391489276667901467771423780L,
    0.381830050505118944950369775488975L, 0.417959183673469387755102040816327L};

template <typename Scalar, typename F>
std::pair<Scalar, Scalar> gk15(F&& f, Scalar a, Scalar b) {
  const Scalar c = Scalar(0.5) * (a + b);
  const Scalar h = Scalar(0.5) * (b - a);
  const Scalar fc = f(c);
  Scalar kronrod = Scalar(kKronrodWeights[7]) * fc;
  Scalar gauss = Scalar(kGaussWeights[3]) * fc;
  for (int i = 0; i < 7; ++i) {
    const Scalar dx = h * Scalar(kKronrodNodes[i]);
    const Scalar fsum = f(c - dx) + f(c + dx);
    kronrod += Scalar(kKronrodWeights[i]) * fsum;
    if (i % 2 == 1) gauss += Scalar(kGaussWeights[i / 2]) * fsum;
  }
  return {kronrod * h, std::abs((kronrod - gauss) * h)};
}

}  // namespace detail

/// Globally adaptive Gauss-Kronrod (7/15) on a finite interval. Bisects the
/// interval with the largest error estimate until the summed estimate drops
/// below abs_tol. Throws SolverError if max_intervals is exhausted.
template <typename Scalar, typename F>
QuadratureResult<Scalar> integrate_adaptive(F&& f, Scalar a, Scalar b, Scalar abs_tol,
                                            int max_intervals = 2000) {
  struct Piece {
    Scalar a, b, value, error;
    bool operator<(const Piece& o) const { return error < o.error; }
  };
  std::priority_queue<Piece> heap;
  auto [v0, e0] = detail::gk15<Scalar>(f, a, b);
  heap.push({a, b, v0, e0});
  Scalar total = v0, err = e0;
  while (err > abs_tol) {
    if (static_cast<int>(heap.size()) >= max_intervals)
      throw SolverError("integrate_adaptive: no convergence after " +
                        std::to_string(max_intervals) + " intervals, error estimate " +
                        std::to_string(static_cast<double>(err)));
    Piece p = heap.top();
    heap.pop();
    const Scalar mid = Scalar(0.5) * (p.a + p.b);
    auto [vl, el] = detail::gk15<Scalar>(f, p.a, mid);
    auto [vr, er] = detail::gk15<Scalar>(f, mid, p.b);
    total += vl + vr - p.value;
    err += el + er - p.error;
    heap.push({p.a, mid, vl, el});
    heap.push({mid, p.b, vr, er});
  }
  // Re-sum to shed accumulated cancellation in the running totals.
  QuadratureResult<Scalar> out;
  out.intervals = static_cast<int>(heap.size());
  while (!heap.empty()) {
    out.value += heap.top().value;
    out.error_estimate += heap.top().error;
    heap.pop();
  }
  return out;
}

}  // namespace starcov

#endif  // STARCOV_QUADRATURE_HPP
