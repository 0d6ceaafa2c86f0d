#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "srdev/builtins.hpp"
#include "srdev/develop.hpp"
#include "srdev/errors.hpp"

using namespace srdev;

namespace {

void expect_near(const std::vector<double>& a, const std::vector<double>& b, double tol) {
  ASSERT_EQ(a.size(), b.size());
  for (std::size_t i = 0; i < a.size(); ++i) EXPECT_NEAR(a[i], b[i], tol) << "coordinate " << i;
}

ChristoffelField zero_gamma(const FrameAnalysis& an) {
  return ChristoffelField::constant(an.sf, an.sym, std::vector<double>(an.sym.dim() * an.frame.k1(), 0.0));
}

double orthogonality_error(const std::vector<double>& h, int k) {
  double worst = 0;
  for (int i = 0; i < k; ++i)
    for (int j = 0; j < k; ++j) {
      double s = 0;
      for (int l = 0; l < k; ++l) s += h[i * k + l] * h[j * k + l];
      worst = std::max(worst, std::abs(s - (i == j ? 1.0 : 0.0)));
    }
  return worst;
}

}  // namespace

TEST(Bch, HeisenbergExamples) {
  const auto alg = free_nilpotent(2, 2);
  expect_near(bch(alg, std::vector<double>{1, 0, 0}, std::vector<double>{0, 1, 0}), {1, 1, 0.5}, 1e-15);
  const std::vector<double> x{0.3, -0.7, 1.1};
  expect_near(bch(alg, x, std::vector<double>(3, 0.0)), x, 1e-15);
  expect_near(bch(alg, x, std::vector<double>{-0.3, 0.7, -1.1}), {0, 0, 0}, 1e-15);
}

TEST(Bch, IsAssociativeUpToStepFour) {
  std::mt19937 rng(31);
  std::uniform_real_distribution<double> u(-1, 1);
  for (int s : {2, 3, 4}) {
    const auto alg = free_nilpotent(2, s);
    const int n = alg.dim();
    for (int trial = 0; trial < 100; ++trial) {
      std::vector<double> x(n), y(n), z(n);
      for (int i = 0; i < n; ++i) {
        x[i] = u(rng);
        y[i] = u(rng);
        z[i] = u(rng);
      }
      expect_near(bch(alg, bch(alg, x, y), z), bch(alg, x, bch(alg, y, z)), 1e-12);
    }
  }
  EXPECT_THROW(bch(free_nilpotent(2, 5), std::vector<double>(14, 0.0), std::vector<double>(14, 0.0)),
               StepTooLarge);
}

TEST(LeftInvariantField, HeisenbergFirstField) {
  const auto alg = free_nilpotent(2, 2);
  const std::vector<double> x{0.4, -0.6, 0.2};
  expect_near(left_invariant_field(alg, x, std::vector<double>{1, 0, 0}), {1, 0, 0.3}, 1e-15);
  expect_near(left_invariant_field(alg, x, std::vector<double>{0, 1, 0}), {0, 1, 0.2}, 1e-15);
}

TEST(LeftInvariantField, MatchesDifferencedGroupLaw) {
  const auto alg = free_nilpotent(3, 3);
  const int n = alg.dim();
  std::mt19937 rng(32);
  std::uniform_real_distribution<double> u(-1, 1);
  for (int trial = 0; trial < 10; ++trial) {
    std::vector<double> x(n), e(n);
    for (int i = 0; i < n; ++i) {
      x[i] = u(rng);
      e[i] = u(rng);
    }
    const double h = 1e-6;
    std::vector<double> ep(n), em(n);
    for (int i = 0; i < n; ++i) {
      ep[i] = h * e[i];
      em[i] = -h * e[i];
    }
    const auto yp = bch(alg, x, ep), ym = bch(alg, x, em);
    std::vector<double> fd(n);
    for (int i = 0; i < n; ++i) fd[i] = (yp[i] - ym[i]) / (2 * h);
    expect_near(left_invariant_field(alg, x, e), fd, 1e-7);
  }
}

TEST(Rng, IncrementsAreKeyedAndStandardNormal) {
  double a[4], b[4];
  gaussian_increments(5, 7, 9, a, 4);
  gaussian_increments(5, 7, 9, b, 4);
  for (int i = 0; i < 4; ++i) EXPECT_EQ(a[i], b[i]);
  gaussian_increments(5, 7, 10, b, 4);
  EXPECT_NE(a[0], b[0]);
  double s = 0, s2 = 0;
  const int n = 200000;
  for (int k = 0; k < n; ++k) {
    double z[2];
    gaussian_increments(1, k, 0, z, 2);
    s += z[0] + z[1];
    s2 += z[0] * z[0] + z[1] * z[1];
  }
  EXPECT_NEAR(s / (2 * n), 0.0, 5 / std::sqrt(2.0 * n));
  EXPECT_NEAR(s2 / (2 * n), 1.0, 5 * std::sqrt(2.0 / (2 * n)));
}

TEST(Ensemble, IdenticalForAnyThreadCount) {
  const auto alg = free_nilpotent(2, 3);
  const auto proc = carnot_lift(alg);
  SDEConfig cfg;
  cfg.dt = 0.01;
  cfg.T = 0.5;
  cfg.seed = 99;
  const auto one = simulate_ensemble(*proc, cfg, 301, {0.25, 0.5});
  cfg.threads = 4;
  const auto four = simulate_ensemble(*proc, cfg, 301, {0.25, 0.5});
  EXPECT_EQ(one.values, four.values);
  EXPECT_EQ(one.dim, 5);
  // A path of the ensemble is the same as the single path simulation.
  cfg.threads = 1;
  const Path p = simulate_carnot_lift(alg, cfg, 17);
  for (int c = 0; c < 5; ++c) EXPECT_EQ(four.at(1, 17, c), p.q.back()[c]);
}

TEST(SDEConfig, ValidatesAndCountsSteps) {
  SDEConfig cfg;
  cfg.dt = 0.1;
  cfg.T = 1.0;
  EXPECT_EQ(cfg.steps(), 10);
  cfg.T = 0.05;
  EXPECT_THROW(cfg.validate(), MalformedSpec);
  cfg.dt = -1;
  EXPECT_THROW(cfg.validate(), MalformedSpec);
}

TEST(DevelopCurve, FlatHeisenbergFollowsControl) {
  const auto b = builtin("heisenberg3");
  const auto an = analyze_frame(b.frame);
  const auto gamma = zero_gamma(an);
  const std::vector<std::string> t{"t"};
  const std::vector<Expr> u{Expr(1), Expr(0)};
  const Path p = develop_curve(b.frame, gamma, u, b.q0, {}, 0.01, 1.0);
  ASSERT_EQ(p.q.size(), 101u);
  for (std::size_t k = 0; k < p.q.size(); ++k) expect_near(p.q[k], {p.t[k], 0, 0}, 1e-12);
  const Path r = develop_curve(b.frame, gamma, u, b.q0, {0, 1, -1, 0}, 0.01, 1.0);
  for (std::size_t k = 0; k < r.q.size(); ++k) expect_near(r.q[k], {0, r.t[k], 0}, 1e-12);
  const Path still = develop_curve(b.frame, gamma, {Expr(0), Expr(0)}, b.q0, {}, 0.01, 1.0);
  for (const auto& q : still.q) expect_near(q, b.q0, 0.0);
}

TEST(DevelopCurve, RejectsNonOrthogonalStart) {
  const auto b = builtin("heisenberg3");
  const auto an = analyze_frame(b.frame);
  EXPECT_THROW(develop_curve(b.frame, zero_gamma(an), {Expr(1), Expr(0)}, b.q0, {1, 1, 0, 1}, 0.01, 1.0),
               Error);
}

TEST(DevelopSde, ZeroGammaKeepsRotationFixed) {
  const auto b = builtin("heisenberg3");
  const auto an = analyze_frame(b.frame);
  SDEConfig cfg;
  cfg.dt = 0.01;
  cfg.T = 1.0;
  const double c = std::cos(0.3), s = std::sin(0.3);
  const Path p = develop_sde(b.frame, zero_gamma(an), b.q0, {c, s, -s, c}, cfg, 3);
  EXPECT_EQ(p.t.size(), 101u);
  for (const auto& h : p.h) expect_near(h, {c, s, -s, c}, 1e-12);
}

TEST(DevelopSde, RotationStaysOrthogonal) {
  const auto b = builtin("contact-halfplane");
  const auto an = analyze_frame(b.frame);
  const ChristoffelField gamma(an.sf, an.sym);
  SDEConfig cfg;
  cfg.dt = 1e-3;
  cfg.T = 0.3;
  for (Scheme scheme : {Scheme::Heun, Scheme::Euler}) {
    cfg.scheme = scheme;
    for (std::uint64_t path = 0; path < 5; ++path) {
      const Path p = develop_sde(b.frame, gamma, b.q0, {}, cfg, path);
      EXPECT_EQ(p.q.size(), 301u);
      for (const auto& h : p.h) EXPECT_LE(orthogonality_error(h, 2), 1e-8);
    }
  }
}

TEST(PolarProject, ReturnsNearestRotation) {
  std::vector<double> h{std::cos(0.4) * 1.01, std::sin(0.4), -std::sin(0.4), std::cos(0.4) * 0.99};
  polar_project(h.data(), 2);
  EXPECT_LE(orthogonality_error(h, 2), 1e-12);
  EXPECT_NEAR(h[1], std::sin(0.4), 1e-2);
}

TEST(CarnotLift, LevyAreaVariance) {
  // Var of the area coordinate at t = 1 is 1/4 for the Heisenberg lift.
  const auto proc = carnot_lift(free_nilpotent(2, 2));
  SDEConfig cfg;
  cfg.dt = 0.01;
  cfg.T = 1.0;
  const std::size_t n = 20000;
  const auto e = simulate_ensemble(*proc, cfg, n, {1.0});
  double s = 0, s2 = 0, x2 = 0;
  for (std::size_t p = 0; p < n; ++p) {
    s += e.at(0, p, 2);
    s2 += e.at(0, p, 2) * e.at(0, p, 2);
    x2 += e.at(0, p, 0) * e.at(0, p, 0);
  }
  const double mean = s / n, var = s2 / n - mean * mean;
  EXPECT_NEAR(var, 0.25, 4 * std::sqrt(1.0 / (4 * n)));
  EXPECT_NEAR(x2 / n, 1.0, 4 * std::sqrt(2.0 / n));
}

TEST(PoppSde, FlatPlaneIsBrownianMotion) {
  const auto b = builtin("flat-plane");
  const StructureField sf(b.frame);
  const auto proc = popp_diffusion(b.frame, sf, b.q0);
  SDEConfig cfg;
  cfg.dt = 0.05;
  cfg.T = 0.5;
  const std::size_t n = 20000;
  const auto e = simulate_ensemble(*proc, cfg, n, {0.5});
  double sx = 0, sxx = 0;
  for (std::size_t p = 0; p < n; ++p) {
    sx += e.at(0, p, 0);
    sxx += e.at(0, p, 0) * e.at(0, p, 0);
  }
  EXPECT_NEAR(sx / n, 0.0, 4 * std::sqrt(0.5 / n));
  EXPECT_NEAR(sxx / n, 0.5, 4 * 0.5 * std::sqrt(2.0 / n));
}

namespace {

struct Moments {
  double var = 0, se = 0;
};

Moments area_variance(const Diffusion& proc, double dt, std::size_t n, std::uint64_t seed, int coord) {
  SDEConfig cfg;
  cfg.dt = dt;
  cfg.T = 1.0;
  cfg.seed = seed;
  const auto e = simulate_ensemble(proc, cfg, n, {1.0});
  double s = 0, s2 = 0, s4 = 0;
  for (std::size_t p = 0; p < n; ++p) {
    const double z = e.at(0, p, coord);
    s += z;
    s2 += z * z;
  }
  const double mean = s / n;
  Moments m;
  m.var = s2 / n - mean * mean;
  for (std::size_t p = 0; p < n; ++p) {
    const double d = e.at(0, p, coord) - mean;
    s4 += d * d * d * d;
  }
  m.se = std::sqrt(std::max(s4 / n - m.var * m.var, 0.0) / n);
  return m;
}

}  // namespace

TEST(LeftInvariantField, IdentityAtOrigin) {
  const auto alg = free_nilpotent(2, 3);
  const std::vector<double> e{0.3, -0.2, 0.7, 1.1, -0.4};
  expect_near(left_invariant_field(alg, std::vector<double>(5, 0.0), e), e, 0.0);
}

TEST(DevelopSde, FlatHeisenbergMatchesCarnotLiftArea) {
  const auto b = builtin("heisenberg3");
  const auto an = analyze_frame(b.frame);
  const auto proc = developed_diffusion(b.frame, zero_gamma(an), b.q0, {});
  const Moments m = area_variance(*proc, 0.01, 20000, 5, 2);
  EXPECT_NEAR(m.var, 0.25, 4 * m.se);
}

TEST(CarnotLift, HeunWeakOrderOnAreaVariance) {
  // Bias of Var(z) at dt = 2e-3 is at most twice the bias at dt = 1e-3, up to MC error.
  const auto proc = carnot_lift(free_nilpotent(2, 2));
  const Moments coarse = area_variance(*proc, 2e-3, 20000, 6, 2);
  const Moments fine = area_variance(*proc, 1e-3, 20000, 7, 2);
  const double mc = 3 * std::hypot(coarse.se, 2 * fine.se);
  EXPECT_LE(std::abs(coarse.var - 0.25), 2 * std::abs(fine.var - 0.25) + mc);
}

TEST(PoppSde, GoursatHasDrift) {
  const auto b = builtin("goursat-halfplane");
  const StructureField sf(b.frame);
  const auto d = popp_drift(sf, b.q0);
  double norm = 0;
  for (double v : d) norm += v * v;
  EXPECT_GT(std::sqrt(norm), 1e-3);
  const auto proc = popp_diffusion(b.frame, sf, b.q0);
  SDEConfig cfg;
  cfg.dt = 0.01;
  cfg.T = 0.1;
  const auto est = simulate_ensemble(*proc, cfg, 50, {0.1});
  EXPECT_EQ(est.dim, 4);
}
