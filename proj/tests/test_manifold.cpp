#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "srdev/builtins.hpp"
#include "srdev/develop.hpp"
#include "srdev/errors.hpp"
#include "srdev/manifold.hpp"

using namespace srdev;

namespace {

std::vector<double> field_at(const FrameField& f, int i, const std::vector<double>& q) {
  std::vector<double> v;
  for (const auto& e : f.fields[i]) v.push_back(e.eval(q));
  return v;
}

GradedLieAlgebra engel() {
  AlgebraSpec s;
  s.dim = 4;
  s.growth = {2, 3, 4};
  s.brackets[{0, 1}][2] = 1;
  s.brackets[{0, 2}][3] = 1;
  return build_algebra(s);
}

}  // namespace

TEST(StructureField, HeisenbergConstantsAreConstant) {
  const auto b = builtin("heisenberg3");
  const StructureField sf(b.frame);
  std::mt19937 rng(21);
  std::uniform_real_distribution<double> u(-1, 1);
  for (int trial = 0; trial < 20; ++trial) {
    const std::vector<double> q{u(rng), u(rng), u(rng)};
    const auto c = sf.constants(q);
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j)
        for (int k = 0; k < 3; ++k) {
          const double want = (i == 0 && j == 1 && k == 2) ? 1.0 : (i == 1 && j == 0 && k == 2) ? -1.0 : 0.0;
          EXPECT_NEAR(c[(i * 3 + j) * 3 + k], want, 1e-12);
        }
    EXPECT_LE(sf.residual(q), 1e-12);
  }
}

TEST(CarnotFrame, MatchesDifferencedGroupLaw) {
  for (auto alg : {free_nilpotent(2, 2), free_nilpotent(2, 3), free_nilpotent(2, 4)}) {
    const FrameField f = carnot_frame(alg);
    const int n = alg.dim();
    std::mt19937 rng(22);
    std::uniform_real_distribution<double> u(-1, 1);
    for (int trial = 0; trial < 5; ++trial) {
      std::vector<double> x(n);
      for (auto& v : x) v = u(rng);
      for (int i = 0; i < alg.generators(); ++i) {
        std::vector<double> ep(n, 0.0), em(n, 0.0);
        const double h = 1e-6;
        ep[i] = h;
        em[i] = -h;
        const auto yp = bch(alg, x, ep), ym = bch(alg, x, em);
        const auto v = field_at(f, i, x);
        for (int a = 0; a < n; ++a) EXPECT_NEAR(v[a], (yp[a] - ym[a]) / (2 * h), 1e-7);
      }
    }
  }
}

TEST(CarnotFrame, RecoversTheAlgebra) {
  const auto alg = free_nilpotent(2, 3);
  const FrameField f = carnot_frame(alg);
  const StructureField sf(f);
  const auto rep = adapted_growth(f, sf, sample_grid(f.chart, 2));
  EXPECT_TRUE(rep.equinilpotent);
  EXPECT_EQ(nilpotentization(f, rep).to_spec(), alg.to_spec());
}

TEST(SampleGrid, UsesMidpoints) {
  const Chart c{{"x", "y"}, {false, false}, {{0, 1}, {-2, 2}}};
  const auto g = sample_grid(c, 2);
  ASSERT_EQ(g.size(), 4u);
  for (const auto& q : g) {
    EXPECT_TRUE(q[0] == 0.25 || q[0] == 0.75);
    EXPECT_TRUE(q[1] == -1.0 || q[1] == 1.0);
  }
}

TEST(PoppSublaplacian, HeisenbergCoordinatesAreHarmonic) {
  const auto b = builtin("heisenberg3");
  const StructureField sf(b.frame);
  const std::vector<double> q{0.3, -0.4, 0.2};
  for (const char* f : {"x", "y", "z"})
    EXPECT_NEAR(popp_sublaplacian(b.frame, sf, parse_expr(f, b.frame.chart), q), 0.0, 1e-12) << f;
  EXPECT_NEAR(popp_sublaplacian(b.frame, sf, parse_expr("x^2 + y^2", b.frame.chart), q), 4.0, 1e-12);
}

TEST(PoppSublaplacian, HyperbolicPlaneIsLaplaceBeltrami) {
  // y^2 (f_xx + f_yy) for the half-plane model.
  const auto b = builtin("hyperbolic-plane");
  const StructureField sf(b.frame);
  const Expr f = parse_expr("x^2*y + y^3", b.frame.chart);
  for (const auto& q : sample_grid(b.frame.chart, 3)) {
    const double want = q[1] * q[1] * (2 * q[1] + 6 * q[1]);
    EXPECT_NEAR(popp_sublaplacian(b.frame, sf, f, q), want, 1e-9);
  }
}

TEST(Prolong, GrowthOfOnceAndTwiceProlongedHalfPlane) {
  const FrameField once = prolong(halfplane_frame());
  EXPECT_EQ(once.growth, (std::vector<int>{2, 3}));
  EXPECT_EQ(once.chart.dim(), 3);
  const FrameField twice = prolong(once);
  EXPECT_EQ(twice.growth, (std::vector<int>{2, 3, 4}));
  const auto an = analyze_frame(twice);
  EXPECT_EQ(an.report.growth, (std::vector<int>{2, 3, 4}));
  EXPECT_EQ(an.sym.dim(), 0);
}

TEST(LevyKernel, EngelKernelIsSecondGenerator) {
  const FrameField f = carnot_frame(engel());
  const StructureField sf(f);
  const auto k = levy_kernel(f, sf, std::vector<double>{0.1, -0.2, 0.3, 0.0});
  EXPECT_TRUE(k.in_distribution);
  EXPECT_NEAR(std::abs(k.direction[1]), 1.0, 1e-9);
  EXPECT_NEAR(k.direction[0], 0.0, 1e-9);
  EXPECT_NEAR(k.direction[2], 0.0, 1e-9);
}

TEST(LevyKernel, FreeTwoThreeHasNoKernel) {
  const FrameField f = carnot_frame(free_nilpotent(2, 3));
  const StructureField sf(f);
  EXPECT_THROW(levy_kernel(f, sf, std::vector<double>(5, 0.0)), KernelNotOneDimensional);
}

TEST(DevelopCondition, FeasibleForHeisenbergInfeasibleForGoursat) {
  {
    const auto an = analyze_frame(builtin("heisenberg3").frame);
    const auto dc = develop_condition(an.frame, an.sf, an.alg, an.sym, an.points);
    EXPECT_TRUE(dc.feasible);
    EXPECT_FALSE(dc.witness_direction.has_value());
  }
  {
    const auto an = analyze_frame(builtin("goursat-halfplane").frame);
    const auto dc = develop_condition(an.frame, an.sf, an.alg, an.sym, an.points);
    EXPECT_FALSE(dc.feasible);
    ASSERT_TRUE(dc.witness_direction.has_value());
    EXPECT_GT(std::abs(dc.witness_value), 1e-9);
  }
}

TEST(DevelopCondition, RejectsMismatchedModel) {
  const auto an = analyze_frame(builtin("heisenberg3").frame);
  const auto other = free_nilpotent(2, 3);
  const auto sym = symmetry_algebra(other, extend_metric(other));
  EXPECT_THROW(develop_condition(an.frame, an.sf, other, sym, an.points), ModelMismatch);
}

TEST(Christoffel, ContactSolutionHasZeroDefect) {
  const auto b = builtin("contact-halfplane");
  const auto an = analyze_frame(b.frame);
  const ChristoffelField gamma(an.sf, an.sym);
  for (const auto& q : an.points)
    for (double d : generator_defect(gamma, q)) EXPECT_NEAR(d, 0.0, 1e-9);
  // The developed generator then equals the Popp sublaplacian.
  const Expr f = parse_expr("x^2 + y*sin(t1)", b.frame.chart);
  for (const auto& q : an.points)
    EXPECT_NEAR(developed_generator(b.frame, gamma, f, q), popp_sublaplacian(b.frame, an.sf, f, q), 1e-9);
}

TEST(Christoffel, GoursatIsInconsistent) {
  const auto an = analyze_frame(builtin("goursat-halfplane").frame);
  EXPECT_EQ(an.sym.dim(), 0);
  const ChristoffelField gamma(an.sf, an.sym);
  EXPECT_THROW(gamma.at(builtin("goursat-halfplane").q0), Inconsistent);
}

TEST(LeviCivita, RiemannianSurfacesAgreeWithPoppDrift) {
  for (const char* name : {"flat-plane", "hyperbolic-plane", "sphere-patch"}) {
    const auto b = builtin(name);
    const StructureField sf(b.frame);
    const auto rep = levi_civita_check(b.frame, sf, sample_grid(b.frame.chart, 5));
    EXPECT_LE(rep.max_difference, 1e-9) << name;
    EXPECT_EQ(rep.points, 25);
  }
}

TEST(FrameField, ValidateRejectsBadShapes) {
  FrameField f = builtin("heisenberg3").frame;
  f.growth = {2, 4};
  EXPECT_THROW(f.validate(), MalformedSpec);
  f = builtin("heisenberg3").frame;
  f.fields[0].pop_back();
  EXPECT_THROW(f.validate(), MalformedSpec);
}

TEST(LieBracket, HalfPlaneFields) {
  const FrameField f = halfplane_frame();
  const auto br = lie_bracket(f.fields[0], f.fields[1]);
  const std::vector<double> q{0.2, 1.3};
  EXPECT_DOUBLE_EQ(br[0].eval(q), -1.3);
  EXPECT_DOUBLE_EQ(br[1].eval(q), 0.0);
  for (const auto& e : lie_bracket(f.fields[0], f.fields[0])) EXPECT_TRUE(e.is_zero());
  const StructureField sf(f);
  EXPECT_NEAR(sf.constants(q)[(0 * 2 + 1) * 2 + 0], -1.0, 1e-12);
}

TEST(AdaptedGrowth, NonGeneratingFrameIsRankDrop) {
  FrameField f;
  f.chart = Chart{{"x", "y", "z"}, {false, false, false}, {{-1, 1}, {-1, 1}, {-1, 1}}};
  f.growth = {2, 3};
  f.fields = {{Expr(1), Expr(0), Expr(0)}, {Expr(0), Expr(1), Expr(0)}, {Expr(0), Expr(0), Expr(1)}};
  const StructureField sf(f);
  EXPECT_THROW(adapted_growth(f, sf, sample_grid(f.chart, 2)), RankDrop);
}

TEST(PoppSublaplacian, AnnihilatesConstants) {
  const auto b = builtin("contact-halfplane");
  const StructureField sf(b.frame);
  EXPECT_DOUBLE_EQ(popp_sublaplacian(b.frame, sf, Expr(5), b.q0), 0.0);
}

TEST(Prolong, FlatPlaneGivesHeisenberg) {
  const auto an = analyze_frame(prolong(builtin("flat-plane").frame));
  EXPECT_EQ(an.alg.to_spec(), free_nilpotent(2, 2).to_spec());
}

TEST(Christoffel, ZeroGammaDefectIsMinusDivergence) {
  const auto b = builtin("contact-halfplane");
  const auto an = analyze_frame(b.frame);
  const auto zero = ChristoffelField::constant(an.sf, an.sym, std::vector<double>(an.sym.dim() * 2, 0.0));
  const int n = an.sf.n();
  for (const auto& q : an.points) {
    const auto c = an.sf.constants(q);
    const auto d = generator_defect(zero, q);
    for (int i = 0; i < 2; ++i) {
      double div = 0;
      for (int l = 0; l < n; ++l) div += c[(l * n + i) * n + l];
      EXPECT_NEAR(d[i], -div, 1e-12);
    }
  }
}

TEST(LevyKernel, GoursatKernelAnnihilatesSkewForm) {
  const auto b = builtin("goursat-halfplane");
  const StructureField sf(b.frame);
  const std::vector<double> q{0, 1, 0, 0};
  const auto k = levy_kernel(b.frame, sf, q);
  const auto c = sf.constants(q);
  const int n = 4;
  double norm = 0;
  for (int j = 0; j < 3; ++j) {
    double s = 0;
    for (int i = 0; i < 3; ++i) s += k.direction[i] * c[(i * n + j) * n + 3];
    EXPECT_NEAR(s, 0.0, 1e-9);
    norm += k.direction[j] * k.direction[j];
  }
  EXPECT_NEAR(norm, 1.0, 1e-12);
  EXPECT_TRUE(k.in_distribution);
}
