#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>

#include "starcov/gcmma.hpp"
#include "starcov/problem.hpp"

using namespace starcov;

namespace {

// min x1^2 + x2^2 + x3^2  s.t.  3 - x1 - x2 - x3 <= 0; optimum 3 at (1, 1, 1)
SmoothProblem<double> sphere_problem() {
  SmoothProblem<double> pb;
  pb.n = 3;
  pb.m = 1;
  pb.x_min = VecXd::Constant(3, -5);
  pb.x_max = VecXd::Constant(3, 5);
  pb.c = VecXd::Constant(1, 1e4);
  pb.eval = [](const VecXd& x) { return VecXd((VecXd(2) << x.squaredNorm(), 3 - x.sum()).finished()); };
  pb.grad = [](const VecXd& x) {
    MatXd J(2, 3);
    J.row(0) = 2 * x.transpose();
    J.row(1).setConstant(-1);
    return J;
  };
  return pb;
}

// min (x - 2)^2 + (y - 1)^2  s.t.  x + y - 2 <= 0; optimum 0.5 at (1.5, 0.5)
SmoothProblem<double> projection_problem() {
  SmoothProblem<double> pb;
  pb.n = 2;
  pb.m = 1;
  pb.x_min = VecXd::Constant(2, -3);
  pb.x_max = VecXd::Constant(2, 3);
  pb.c = VecXd::Constant(1, 1e4);
  pb.eval = [](const VecXd& x) {
    VecXd f(2);
    f << (x(0) - 2) * (x(0) - 2) + (x(1) - 1) * (x(1) - 1), x(0) + x(1) - 2;
    return f;
  };
  pb.grad = [](const VecXd& x) {
    MatXd J(2, 2);
    J << 2 * (x(0) - 2), 2 * (x(1) - 1), 1, 1;
    return J;
  };
  return pb;
}

// min -x1 - x2  s.t.  x1^2 + x2^2 - 1 <= 0, x1 - 0.9 <= 0; optimum -sqrt(2)... unless the
// second constraint binds: it does not (x1 = 1/sqrt 2 < 0.9)
SmoothProblem<double> disk_problem() {
  SmoothProblem<double> pb;
  pb.n = 2;
  pb.m = 2;
  pb.x_min = VecXd::Constant(2, -2);
  pb.x_max = VecXd::Constant(2, 2);
  pb.c = VecXd::Constant(2, 1e4);
  pb.eval = [](const VecXd& x) {
    VecXd f(3);
    f << -x(0) - x(1), x.squaredNorm() - 1, x(0) - 0.9;
    return f;
  };
  pb.grad = [](const VecXd& x) {
    MatXd J(3, 2);
    J << -1, -1, 2 * x(0), 2 * x(1), 1, 0;
    return J;
  };
  return pb;
}

Approximation<double> random_approx(Rng& r, int n, int m, Vec<double>& alpha, Vec<double>& beta) {
  Approximation<double> ap;
  ap.lower = VecXd::Constant(n, -1);
  ap.upper = VecXd::Constant(n, 2);
  ap.p.resize(m + 1, n);
  ap.q.resize(m + 1, n);
  for (int i = 0; i <= m; ++i)
    for (int j = 0; j < n; ++j) {
      ap.p(i, j) = r.uniform(0.0, 1.0);
      ap.q(i, j) = r.uniform(0.0, 1.0);
    }
  ap.r = VecXd(m + 1);
  for (int i = 0; i <= m; ++i) ap.r(i) = r.uniform(-2.0, 0.0);
  ap.expansion = VecXd::Constant(n, 0.5);
  alpha = VecXd::Constant(n, -0.5);
  beta = VecXd::Constant(n, 1.5);
  return ap;
}

double sub_objective(const Approximation<double>& ap, const VecXd& c, const VecXd& x) {
  const VecXd g = ap.eval(x);
  double v = g(0);
  for (Eigen::Index i = 1; i < g.size(); ++i) v += c(i - 1) * std::max(0.0, g(i));
  return v;
}

}  // namespace

TEST_CASE("rho_init") {
  const VecXd range = VecXd::Ones(7);
  CHECK(rho_init<double>(VecXd::Zero(7), range) == 1e-6);
  CHECK(rho_init<double>(VecXd::Ones(7), range) == doctest::Approx(0.1));
  CHECK(rho_init<double>(VecXd::Ones(40), VecXd::Ones(40)) == doctest::Approx(0.1));
  Rng r(1);
  for (int k = 0; k < 50; ++k) {
    VecXd g(9), rg(9);
    double s = 0;
    for (int j = 0; j < 9; ++j) {
      g(j) = r.normal();
      rg(j) = r.uniform(0.1, 7.0);
      s += std::abs(g(j)) * rg(j);
    }
    CHECK(rho_init<double>(g, rg) == doctest::Approx(std::max(0.1 * s / 9, 1e-6)).epsilon(1e-14));
  }
}

TEST_CASE("rho_update") {
  CHECK(rho_update(0.3, 1.0, 1.0, 0.5) == doctest::Approx(0.33));
  CHECK(rho_update(0.3, 1e9, 0.0, 1.0) == doctest::Approx(3.0));
  CHECK(rho_update(0.3, 2.0, 1.0, 0.0) == 0.3);
  CHECK(rho_update(0.3, 1.0, 0.9, 2.0) == doctest::Approx(1.1 * (0.3 + 0.05)));
}

TEST_CASE("approximation coefficients") {
  // f(x) = x with unit range
  const VecXd x = VecXd::Constant(1, 0.4), L = VecXd::Constant(1, -0.1), U = VecXd::Constant(1, 0.9);
  const VecXd f = VecXd::Constant(1, 0.4);
  const MatXd df = MatXd::Constant(1, 1, 1.0);
  const VecXd rho = VecXd::Constant(1, 0.0);
  const auto ap = build_approximation<double>(f, df, rho, x, L, U, VecXd::Ones(1));
  CHECK(ap.p(0, 0) == doctest::Approx(0.25 * 1.001));
  CHECK(ap.q(0, 0) == doctest::Approx(0.25 * 0.001));
  CHECK(ap.eval(x)(0) == doctest::Approx(0.4).epsilon(1e-14));
  CHECK_THROWS_AS(build_approximation<double>(f, df, rho, VecXd::Constant(1, 1.0), L, U, VecXd::Ones(1)),
                  std::logic_error);
}

TEST_CASE("approximation is tangent and convex at the expansion point") {
  Rng r(2);
  for (int k = 0; k < 100; ++k) {
    const int n = 6, rows = 4;
    VecXd x(n), L(n), U(n), range(n);
    for (int j = 0; j < n; ++j) {
      range(j) = r.uniform(0.5, 3.0);
      x(j) = r.uniform(-1.0, 1.0);
      L(j) = x(j) - r.uniform(0.05, 2.0);
      U(j) = x(j) + r.uniform(0.05, 2.0);
    }
    VecXd f(rows), rho(rows);
    MatXd df(rows, n);
    for (int i = 0; i < rows; ++i) {
      f(i) = r.normal(0.0, 10.0);
      rho(i) = 0;
      for (int j = 0; j < n; ++j) df(i, j) = r.normal();
    }
    const auto ap = build_approximation(f, df, rho, x, L, U, range);
    CHECK((ap.eval(x) - f).cwiseAbs().maxCoeff() <= 1e-12 * std::max(1.0, f.cwiseAbs().maxCoeff()));
    CHECK((ap.gradient(x) - df).cwiseAbs().maxCoeff() <= 1e-10);
    CHECK(ap.p.minCoeff() > 0);
    CHECK(ap.q.minCoeff() > 0);
    // with rho > 0 the value still matches
    const auto ap2 = build_approximation<double>(f, df, VecXd::Constant(rows, 0.7), x, L, U, range);
    CHECK((ap2.eval(x) - f).cwiseAbs().maxCoeff() <= 1e-12 * std::max(1.0, f.cwiseAbs().maxCoeff()));
    // midpoint convexity along a random segment
    VecXd a(n), b(n);
    for (int j = 0; j < n; ++j) {
      a(j) = r.uniform(L(j) + 0.01 * (U(j) - L(j)), U(j) - 0.01 * (U(j) - L(j)));
      b(j) = r.uniform(L(j) + 0.01 * (U(j) - L(j)), U(j) - 0.01 * (U(j) - L(j)));
    }
    const VecXd mid = ap2.eval(0.5 * (a + b));
    const VecXd avg = 0.5 * (ap2.eval(a) + ap2.eval(b));
    CHECK((mid - avg).maxCoeff() <= 1e-9 * avg.cwiseAbs().maxCoeff());
  }
}

TEST_CASE("conservative check") {
  const VecXd f = (VecXd(3) << 1, 2, 3).finished();
  CHECK_FALSE(conservative_check<double>(f, f).any());
  const VecXd g = (VecXd(3) << 1, 1.5, 4).finished();
  const auto bad = conservative_check<double>(f, g);
  CHECK_FALSE(bad(0));
  CHECK(bad(1));
  CHECK_FALSE(bad(2));
  CHECK_FALSE(conservative_check<double>(f, g, 1.0).any());
}

TEST_CASE("rho updates make the model conservative in finitely many steps") {
  Rng r(3);
  int worst = 0;
  for (int k = 0; k < 100; ++k) {
    const double a = r.uniform(0.5, 3.0), w = r.uniform(1.0, 8.0), s = r.uniform(-1.0, 1.0);
    auto f = [&](double x) { return a * std::sin(w * x) + s * x * x * x; };
    auto df = [&](double x) { return a * w * std::cos(w * x) + 3 * s * x * x; };
    const VecXd xh = VecXd::Constant(1, r.uniform(-0.5, 0.5));
    const VecXd L = xh.array() - 0.5, U = xh.array() + 0.5, range = VecXd::Constant(1, 2.0);
    const VecXd xt = VecXd::Constant(1, xh(0) + r.uniform(-0.4, 0.4));
    VecXd rho = VecXd::Constant(1, 1e-6);
    const VecXd fv = VecXd::Constant(1, f(xh(0)));
    const MatXd dfv = MatXd::Constant(1, 1, df(xh(0)));
    int it = 0;
    for (;; ++it) {
      const auto ap = build_approximation(fv, dfv, rho, xh, L, U, range);
      const double g = ap.eval(xt)(0), ft = f(xt(0));
      if (ft <= g) break;
      rho(0) = rho_update(rho(0), ft, g, mma_distance(xt, xh, L, U, range));
      REQUIRE(it < 200);
    }
    worst = std::max(worst, it);
  }
  MESSAGE("most updates needed: " << worst);
}

TEST_CASE("mma distance is the rho derivative of the model") {
  Rng r(4);
  const int n = 5;
  VecXd x(n), xh(n), L(n), U(n), range(n);
  for (int j = 0; j < n; ++j) {
    xh(j) = r.uniform(0.0, 1.0);
    L(j) = xh(j) - 0.6;
    U(j) = xh(j) + 0.7;
    x(j) = xh(j) + r.uniform(-0.5, 0.5);
    range(j) = r.uniform(0.5, 2.0);
  }
  const VecXd f = VecXd::Constant(1, 0.3);
  const MatXd df = MatXd::Random(1, n);
  const auto a1 = build_approximation<double>(f, df, VecXd::Constant(1, 0.2), xh, L, U, range);
  const auto a2 = build_approximation<double>(f, df, VecXd::Constant(1, 1.2), xh, L, U, range);
  CHECK(a2.eval(x)(0) - a1.eval(x)(0) == doctest::Approx(mma_distance(x, xh, L, U, range)).epsilon(1e-10));
}

TEST_CASE("subproblem with an interior minimizer") {
  Approximation<double> ap;
  const int n = 3;
  ap.lower = VecXd::Constant(n, -1);
  ap.upper = VecXd::Constant(n, 2);
  ap.p = MatXd::Zero(2, n);
  ap.q = MatXd::Zero(2, n);
  ap.p.row(0) << 0.3, 1.0, 0.05;
  ap.q.row(0) << 0.3, 0.2, 0.5;
  ap.r = (VecXd(2) << 0, -1).finished();  // constraint g_1 = -1, never active
  ap.expansion = VecXd::Constant(n, 0.5);
  const VecXd alpha = VecXd::Constant(n, -0.9), beta = VecXd::Constant(n, 1.9);
  const auto s = solve_subproblem<double>(ap, 1.0, VecXd::Constant(1, 1e4), alpha, beta);
  for (int j = 0; j < n; ++j) {
    const double sp = std::sqrt(ap.p(0, j)), sq = std::sqrt(ap.q(0, j));
    const double expect = (sq * ap.upper(j) + sp * ap.lower(j)) / (sp + sq);
    CHECK(s.x(j) == doctest::Approx(expect).epsilon(1e-8));
  }
  CHECK(s.y(0) == 0.0);
  CHECK(s.z == 0.0);
  CHECK(s.kkt_residual < 1e-9);
}

TEST_CASE("subproblem with a binding box") {
  Approximation<double> ap;
  ap.lower = VecXd::Constant(2, -1);
  ap.upper = VecXd::Constant(2, 2);
  ap.p = MatXd::Zero(2, 2);
  ap.q = MatXd::Zero(2, 2);
  ap.p.row(0) << 1e-3, 1.0;  // first coordinate wants to go up, second down
  ap.q.row(0) << 1.0, 1e-3;
  ap.r = (VecXd(2) << 0, -1).finished();
  const VecXd alpha = VecXd::Constant(2, 0.0), beta = VecXd::Constant(2, 1.0);
  const auto s = solve_subproblem<double>(ap, 1.0, VecXd::Constant(1, 1e4), alpha, beta);
  CHECK(s.x(0) == doctest::Approx(1.0).epsilon(1e-8));
  CHECK(s.x(1) == doctest::Approx(0.0).scale(1).epsilon(1e-8));
  CHECK(s.eta(0) > 1e-3);   // upper bound multiplier active
  CHECK(s.xsi(0) < 1e-8);
  CHECK(s.xsi(1) > 1e-3);   // lower bound multiplier active
  CHECK(s.eta(1) < 1e-8);
  CHECK(s.kkt_residual < 1e-9);
}

TEST_CASE("subproblem against grid search") {
  Rng r(5);
  for (int trial = 0; trial < 30; ++trial) {
    VecXd alpha, beta;
    const int m = 1 + trial % 3;
    auto ap = random_approx(r, 2, m, alpha, beta);
    const VecXd c = VecXd::Constant(m, trial % 2 ? 1e4 : 3.0);
    const auto s = solve_subproblem<double>(ap, 1.0, c, alpha, beta);
    CHECK(s.kkt_residual < 1e-9);
    CHECK(s.x(0) >= alpha(0));
    CHECK(s.x(1) <= beta(1));
    CHECK(s.y.minCoeff() >= 0.0);
    const double got = sub_objective(ap, c, s.x);
    const int G = 400;
    double best = INFINITY;
    for (int i = 0; i <= G; ++i)
      for (int j = 0; j <= G; ++j) {
        const VecXd x = (VecXd(2) << alpha(0) + (beta(0) - alpha(0)) * i / G,
                         alpha(1) + (beta(1) - alpha(1)) * j / G)
                            .finished();
        best = std::min(best, sub_objective(ap, c, x));
      }
    CHECK(got <= best + 1e-8 * std::max(1.0, std::abs(best)));
    // grid resolution 5e-3: first-order slack of the objective
    CHECK(best - got <= 0.05 * std::max(1.0, std::abs(best)));
  }
}

TEST_CASE("subproblem argument checks") {
  Rng r(6);
  VecXd alpha, beta;
  auto ap = random_approx(r, 2, 1, alpha, beta);
  CHECK_THROWS_AS(solve_subproblem<double>(ap, 1.0, VecXd::Constant(2, 1.0), alpha, beta),
                  DimensionError);
  CHECK_THROWS_AS(solve_subproblem<double>(ap, 0.0, VecXd::Constant(1, 1.0), alpha, beta),
                  DomainError);
  CHECK_THROWS_AS(solve_subproblem<double>(ap, 1.0, VecXd::Constant(1, 1.0), beta, alpha),
                  DomainError);
}

TEST_CASE("asymptotes and move limits") {
  MmaState<double> st;
  const VecXd lo = VecXd::Zero(3), hi = VecXd::Constant(3, 2.0);
  st.x = (VecXd(3) << 0.0, 1.0, 2.0).finished();
  st.x_prev1 = st.x_prev2 = st.x;
  st.k = 1;
  update_asymptotes(st, lo, hi);
  CHECK(st.lower(1) == doctest::Approx(0.0));
  CHECK(st.upper(1) == doctest::Approx(2.0));
  Rng r(7);
  for (int k = 2; k < 60; ++k) {
    st.k = k;
    st.x_prev2 = st.x_prev1;
    st.x_prev1 = st.x;
    for (int j = 0; j < 3; ++j) st.x(j) = std::clamp(st.x(j) + r.uniform(-0.3, 0.3), st.alpha(j), st.beta(j));
    update_asymptotes(st, lo, hi);
    for (int j = 0; j < 3; ++j) {
      CHECK(st.lower(j) < st.alpha(j));
      CHECK(st.alpha(j) <= st.x(j));
      CHECK(st.x(j) <= st.beta(j));
      CHECK(st.beta(j) < st.upper(j));
      CHECK(st.upper(j) - st.x(j) >= 0.02 - 1e-12);
      CHECK(st.upper(j) - st.x(j) <= 20 + 1e-12);
    }
  }
  SUBCASE("oscillation shrinks, steady progress expands") {
    MmaState<double> a;
    a.k = 3;
    a.x = VecXd::Constant(1, 1.0);
    a.x_prev1 = VecXd::Constant(1, 1.1);
    a.x_prev2 = VecXd::Constant(1, 1.0);
    a.lower = VecXd::Constant(1, 0.5);
    a.upper = VecXd::Constant(1, 1.7);
    MmaState<double> b = a;
    b.x_prev2 = VecXd::Constant(1, 1.2);
    update_asymptotes<double>(a, VecXd::Zero(1), VecXd::Constant(1, 2.0));
    update_asymptotes<double>(b, VecXd::Zero(1), VecXd::Constant(1, 2.0));
    CHECK(a.x(0) - a.lower(0) == doctest::Approx(0.7 * 0.6));
    CHECK(b.x(0) - b.lower(0) == doctest::Approx(1.2 * 0.6));
  }
}

TEST_CASE("optimize reaches analytic optima of convex programs") {
  GcmmaOptions opt;
  opt.epsilon_tol = 1e-10;
  struct Case {
    SmoothProblem<double> pb;
    VecXd x0;
    double fstar;
  };
  std::vector<Case> cases;
  cases.push_back({sphere_problem(), (VecXd(3) << 4, -2, 0.5).finished(), 3.0});
  cases.push_back({projection_problem(), (VecXd(2) << -2, 2.5).finished(), 0.5});
  cases.push_back({disk_problem(), (VecXd(2) << -1.5, 0.2).finished(), -std::sqrt(2.0)});
  for (const auto& c : cases) {
    const auto r = optimize(c.pb, c.x0, opt);
    CHECK(r.converged);
    CHECK(r.feasible);
    CHECK(r.f(0) == doctest::Approx(c.fstar).epsilon(1e-6));
    CHECK(std::abs(r.f(0) - c.fstar) <= 1e-6);
    for (std::size_t k = 1; k < r.trace.size(); ++k)
      CHECK(r.trace[k].objective <= r.trace[k - 1].objective);
    for (const auto& t : r.trace) {
      CHECK(t.tangency_error <= 1e-12 * std::max(1.0, t.f.cwiseAbs().maxCoeff()));
      if (t.inner_count < opt.max_inner) CHECK(t.conservative_slack <= 1e-12);
    }
  }
}

TEST_CASE("already optimal start") {
  const auto pb = projection_problem();
  const auto r = optimize(pb, VecXd((VecXd(2) << 1.5, 0.5).finished()));
  CHECK(r.outer_iterations <= 2);
  CHECK(r.f(0) == doctest::Approx(0.5).epsilon(1e-6));
}

TEST_CASE("fixed coordinates are held") {
  auto pb = sphere_problem();
  pb.x_min(2) = pb.x_max(2) = 2.0;
  GcmmaOptions opt;
  opt.epsilon_tol = 1e-10;
  const auto r = optimize(pb, VecXd((VecXd(3) << 0, 0, 2).finished()), opt);
  CHECK(r.x(2) == 2.0);
  // min x1^2 + x2^2 + 4 s.t. x1 + x2 >= 1
  CHECK(r.f(0) == doctest::Approx(4.5).epsilon(1e-6));
}

TEST_CASE("optimize argument checks") {
  const auto pb = projection_problem();
  CHECK_THROWS_AS(optimize(pb, VecXd(VecXd::Zero(3))), DimensionError);
  CHECK_THROWS_AS(optimize(pb, VecXd(VecXd::Constant(2, 9.0))), BoundsError);
}

TEST_CASE("covert problem at the default deployment") {
  SystemParamsd p;
  const auto inst = make_instance(p, sample_channels(p, 2024));
  const auto sp = to_smooth_problem(inst);
  Rng r(8);

  // best of 50 random feasible samples from the box
  double best_random = 0;
  int feasible_samples = 0;
  for (int k = 0; k < 200000 && feasible_samples < 50; ++k) {
    const VecXd x = random_start(inst, r);
    const VecXd f = eval_f(inst, x);
    if (f.tail(3).maxCoeff() <= 0) {
      ++feasible_samples;
      best_random = std::min(best_random, f(0));
    }
  }
  MESSAGE("random feasible samples: " << feasible_samples << ", best f_0 " << best_random);

  const auto res = optimize(sp, random_start(inst, r));
  CHECK(res.feasible);
  CHECK(res.f.tail(3).maxCoeff() <= 1e-6);
  CHECK(res.f(0) <= best_random);
  int max_inner = 0;
  for (std::size_t k = 0; k < res.trace.size(); ++k) {
    const auto& t = res.trace[k];
    if (k) CHECK(t.objective <= res.trace[k - 1].objective);
    CHECK(t.conservative_slack <= 1e-12);
    max_inner = std::max(max_inner, t.inner_count);
  }
  MESSAGE("outer " << res.outer_iterations << ", rate " << -res.f(0) << ", most inner steps "
                   << max_inner);
}
