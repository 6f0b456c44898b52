#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <numbers>

#include "starcov/oracle.hpp"
#include "starcov/problem.hpp"

using namespace starcov;

namespace {

ProblemInstanced instance(int M = 3, int N = 10, std::uint64_t seed = 1) {
  SystemParamsd p;
  p.M = M;
  p.N = N;
  return make_instance(p, sample_channels(p, seed));
}

VecXd interior_point(const ProblemInstanced& inst, Rng& r) {
  VecXd x(inst.x_min.size());
  for (Eigen::Index j = 0; j < x.size(); ++j)
    x(j) = inst.x_min(j) + (inst.x_max(j) - inst.x_min(j)) * r.uniform(0.05, 0.95);
  return x;
}

// f_0..f_3 written out with dense diagonal matrices and explicit sums.
VecXd straight_line_f(const ProblemInstanced& inst, const VecXd& x) {
  const auto& p = inst.params;
  const auto& ch = inst.channels;
  const DesignLayout& lay = inst.layout;
  const int M = lay.M, N = lay.N;
  const std::complex<double> j(0, 1);
  CVecXd wb(M), wc(M);
  for (int m = 0; m < M; ++m) {
    wb(m) = x(lay.omega_b() + m) * std::exp(j * x(lay.phase_b() + m));
    wc(m) = x(lay.omega_c() + m) * std::exp(j * x(lay.phase_c() + m));
  }
  CMatXd Tr = CMatXd::Zero(N, N), Tt = CMatXd::Zero(N, N);
  double theta = 0, lam_rw = 0;
  for (int n = 0; n < N; ++n) {
    const double br = x(lay.beta_r() + n);
    Tr(n, n) = std::sqrt(br) * std::exp(j * x(lay.phi_r() + n));
    Tt(n, n) = std::sqrt(1 - br) * std::exp(j * x(lay.phi_t() + n));
    theta += br;
    lam_rw += ch.l_rw * (1 - br) * std::norm(ch.h_rc(n));
  }
  const CMatXd bob = ch.h_rb.adjoint() * Tr * ch.H_AR;
  const CMatXd carol = ch.h_rc.adjoint() * Tt * ch.H_AR;
  const double g_bb = std::norm((bob * wb)(0)), g_bc = std::norm((bob * wc)(0));
  const double g_bj = std::norm((ch.h_rb.adjoint() * Tt * ch.h_rc.conjugate())(0));
  const double g_cc = std::norm((carol * wc)(0)), g_cb = std::norm((carol * wb)(0));
  const double Pb = wb.squaredNorm(), Pc = wc.squaredNorm();

  VecXd f(4);
  f(0) = -std::log2(1 + g_bb / (g_bc + g_bj * p.P_j_max * (1 - p.iota) + p.sigma2_b));
  f(1) = Pb + Pc - p.P_max;
  const double lt = ch.l_AR * ch.l_rw * theta * (Pb + Pc);
  const double u = p.P_j_max * lam_rw / lt;
  const double bound = Pb > 0 ? 1 - Pb / (Pb + Pc) * std::log(1 + u) / u : 1.0;
  f(2) = 1 - bound - p.epsilon;
  f(3) = p.R_star - std::log2(1 + g_cc / (g_cb + inst.sigma_star_val + p.sigma2_c));
  return f;
}

}  // namespace

TEST_CASE("instance construction") {
  const auto inst = instance();
  CHECK(inst.layout.size() == 4 * 3 + 3 * 10);
  CHECK(inst.c.size() == 3);
  CHECK(inst.c.minCoeff() == 1e4);
  CHECK(inst.a_0 == 1.0);
  CHECK(inst.x_min(inst.layout.beta_r()) == doctest::Approx(1e-6));
  CHECK(inst.x_max(inst.layout.beta_r()) == doctest::Approx(1 - 1e-6));
  CHECK(inst.sigma_star_val == doctest::Approx(sigma_star(inst.params.kappa, inst.params)));
  SystemParamsd p;
  p.N = 10;
  SystemParamsd q = p;
  q.N = 12;
  CHECK_THROWS_AS(make_instance(q, sample_channels(p, 1)), DimensionError);
}

TEST_CASE("zero-power corner") {
  const auto inst = instance();
  VecXd x = 0.5 * (inst.x_min + inst.x_max);
  x.segment(inst.layout.omega_b(), 2 * inst.layout.M).setZero();
  const VecXd f = eval_f(inst, x);
  CHECK(f(0) == 0.0);
  CHECK(f(1) == doctest::Approx(-inst.params.P_max));
  CHECK(f(2) == doctest::Approx(-inst.params.epsilon));
  CHECK(f(3) == doctest::Approx(inst.params.R_star));
}

TEST_CASE("power constraint is active on the budget sphere") {
  const auto inst = instance();
  Rng r(2);
  VecXd x = interior_point(inst, r);
  auto om = x.segment(inst.layout.omega_b(), 2 * inst.layout.M);
  om *= std::sqrt(inst.params.P_max) / om.norm();
  CHECK(eval_f(inst, x)(1) == doctest::Approx(0.0).epsilon(1e-14));
}

TEST_CASE("eval_f against a straight-line derivation") {
  const auto inst = instance(3, 10, 3);
  Rng r(3);
  for (int k = 0; k < 100; ++k) {
    const VecXd x = interior_point(inst, r);
    const VecXd a = eval_f(inst, x), b = straight_line_f(inst, x);
    for (int i = 0; i < 4; ++i) CHECK(a(i) == doctest::Approx(b(i)).epsilon(1e-10).scale(1e-12));
  }
}

TEST_CASE("gradient structure of the power constraint") {
  const auto inst = instance();
  Rng r(4);
  const VecXd x = interior_point(inst, r);
  const MatXd J = grad_f(inst, x);
  const auto& lay = inst.layout;
  CHECK(J.rows() == 4);
  CHECK(J.cols() == lay.size());
  for (int m = 0; m < lay.M; ++m) {
    CHECK(J(1, lay.omega_b() + m) == 2 * x(lay.omega_b() + m));
    CHECK(J(1, lay.omega_c() + m) == 2 * x(lay.omega_c() + m));
    CHECK(J(1, lay.phase_b() + m) == 0.0);
    CHECK(J(1, lay.phase_c() + m) == 0.0);
  }
  CHECK(J.row(1).segment(lay.beta_r(), 3 * lay.N).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("analytic gradient against central differences") {
  const auto inst = instance(3, 30, 5);
  Rng r(5);
  for (int k = 0; k < 20; ++k) {
    const VecXd x = interior_point(inst, r);
    const MatXd A = grad_f(inst, x);
    const MatXd D = oracle::fd_gradient(inst, x, 1e-6);
    for (int i = 0; i < 4; ++i) {
      const double scale = D.row(i).cwiseAbs().maxCoeff();
      if (scale == 0) {
        CHECK(A.row(i).cwiseAbs().maxCoeff() == 0.0);
        continue;
      }
      CHECK((A.row(i) - D.row(i)).cwiseAbs().maxCoeff() / scale < 1e-5);
    }
  }
}

TEST_CASE("common phase offset leaves every function unchanged") {
  const auto inst = instance(3, 10, 6);
  const auto& lay = inst.layout;
  Rng r(6);
  for (int k = 0; k < 20; ++k) {
    VecXd x = interior_point(inst, r);
    // keep the shifted phases inside [0, 2pi]
    x.segment(lay.phase_b(), 2 * lay.M) *= 0.5;
    VecXd y = x;
    y.segment(lay.phase_b(), 2 * lay.M).array() += r.uniform(0.0, 3.0);
    const VecXd fx = eval_f(inst, x), fy = eval_f(inst, y);
    CHECK((fx - fy).cwiseAbs().maxCoeff() <= 1e-12 * fx.cwiseAbs().maxCoeff());
  }
}

TEST_CASE("baseline RIS instance") {
  const auto inst = instance(3, 10, 7);
  const auto base = baseline_ris_instance(inst);
  const auto& lay = inst.layout;
  for (int n = 0; n < lay.N; ++n) {
    const double v = n < lay.N / 2 ? 1.0 : 0.0;
    CHECK(base.x_min(lay.beta_r() + n) == v);
    CHECK(base.x_max(lay.beta_r() + n) == v);
  }
  CHECK(base.x_max(lay.phi_r()) == inst.x_max(lay.phi_r()));

  SUBCASE("baseline box lies inside the STAR box up to the beta margin") {
    Rng r(7);
    for (int k = 0; k < 100; ++k) {
      VecXd x = random_start(base, r);
      for (Eigen::Index j = 0; j < x.size(); ++j) {
        CHECK(x(j) >= base.x_min(j));
        CHECK(x(j) <= base.x_max(j));
      }
      // the pinned values 0 and 1 are limits of the STAR box [1e-6, 1 - 1e-6]
      x.segment(lay.beta_r(), lay.N) = x.segment(lay.beta_r(), lay.N)
                                           .cwiseMax(inst.x_min(lay.beta_r()))
                                           .cwiseMin(inst.x_max(lay.beta_r()));
      CHECK_NOTHROW(eval_f(inst, x));
    }
  }
  SUBCASE("all-reflective split has no transmission side") {
    const auto refl = baseline_ris_instance(inst, 1.0);
    Rng r(8);
    const VecXd x = random_start(refl, r);
    const VecXd f = eval_f(refl, x);
    CHECK(f(3) == doctest::Approx(refl.params.R_star));
  }
  SUBCASE("errors") {
    const auto odd = instance(3, 9, 7);
    CHECK_THROWS_AS(baseline_ris_instance(odd), ConfigError);
    CHECK_NOTHROW(baseline_ris_instance(odd, 1.0 / 3.0));
    CHECK_THROWS_AS(baseline_ris_instance(inst, 1.5), ConfigError);
  }
}

TEST_CASE("gradient at pinned baseline elements is finite") {
  const auto inst = instance(3, 10, 9);
  const auto base = baseline_ris_instance(inst);
  Rng r(9);
  const VecXd x = random_start(base, r);
  const MatXd J = grad_f(base, x);
  CHECK(J.allFinite());
}

TEST_CASE("smooth problem view") {
  const auto inst = instance();
  const auto sp = to_smooth_problem(inst);
  CHECK(sp.n == inst.layout.size());
  CHECK(sp.m == 3);
  Rng r(10);
  const VecXd x = interior_point(inst, r);
  CHECK(sp.eval(x) == eval_f(inst, x));
  CHECK(sp.grad(x) == grad_f(inst, x));
}
