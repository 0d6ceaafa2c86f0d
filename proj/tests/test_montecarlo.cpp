#include <gtest/gtest.h>

#include <cmath>

#include "srdev/builtins.hpp"
#include "srdev/errors.hpp"
#include "srdev/montecarlo.hpp"

using namespace srdev;

namespace {

SDEConfig config(double dt, double T, std::uint64_t seed = 1) {
  SDEConfig cfg;
  cfg.dt = dt;
  cfg.T = T;
  cfg.seed = seed;
  return cfg;
}

}  // namespace

TEST(Estimate, ConstantFunctionHasZeroError) {
  const auto b = builtin("heisenberg3");
  const StructureField sf(b.frame);
  const auto proc = popp_diffusion(b.frame, sf, b.q0);
  const auto est = estimate_expectation(*proc, Expr(3), 0.1, config(0.01, 0.1), 500);
  EXPECT_DOUBLE_EQ(est.mean, 3.0);
  EXPECT_DOUBLE_EQ(est.std_error, 0.0);
  EXPECT_EQ(est.paths, 500u);
  EXPECT_THROW(estimate_expectation(*proc, Expr(3), 0.1, config(0.01, 0.1), 1), MalformedSpec);
}

TEST(Estimate, FlatHeisenbergSecondMoment) {
  const auto b = builtin("heisenberg3");
  const StructureField sf(b.frame);
  const auto proc = popp_diffusion(b.frame, sf, b.q0);
  const auto est = estimate_expectation(*proc, parse_expr("x^2", b.frame.chart), 1.0, config(0.01, 1.0), 20000);
  EXPECT_NEAR(est.mean, 1.0, 4 * est.std_error);
  EXPECT_NEAR(est.std_error, std::sqrt(2.0 / 20000), 0.2 * std::sqrt(2.0 / 20000));
  const auto vert = estimate_expectation(*proc, parse_expr("z", b.frame.chart), 1.0, config(0.01, 1.0), 20000);
  EXPECT_NEAR(vert.mean, 0.0, 3 * vert.std_error);
}

TEST(Estimate, StandardErrorScalesWithPathCount) {
  const auto b = builtin("heisenberg3");
  const StructureField sf(b.frame);
  const auto proc = popp_diffusion(b.frame, sf, b.q0);
  const Expr f = parse_expr("x", b.frame.chart);
  const auto a = estimate_expectation(*proc, f, 0.5, config(0.05, 0.5), 4000);
  const auto c = estimate_expectation(*proc, f, 0.5, config(0.05, 0.5), 16000);
  EXPECT_NEAR(a.std_error / c.std_error, 2.0, 0.4);
}

TEST(Estimate, ZScoresOfUnbiasedMeansAreCentred) {
  const auto b = builtin("heisenberg3");
  const StructureField sf(b.frame);
  const auto proc = popp_diffusion(b.frame, sf, b.q0);
  const Expr f = parse_expr("y", b.frame.chart);
  double sum = 0;
  const int reps = 40;
  for (int r = 0; r < reps; ++r) {
    const auto est = estimate_expectation(*proc, f, 0.2, config(0.05, 0.2, 1000 + r), 500);
    sum += est.mean / est.std_error;
  }
  EXPECT_NEAR(sum / reps, 0.0, 4 / std::sqrt(double(reps)));
}

TEST(GeneratorTest, HeisenbergSquareHasGeneratorOne) {
  const auto b = builtin("heisenberg3");
  const auto an = analyze_frame(b.frame);
  const ChristoffelField gamma(an.sf, an.sym);
  const auto rep = generator_test(b.frame, gamma, parse_expr("x^2", b.frame.chart), b.q0, 0.05,
                                  config(0.0025, 0.05, 4), 40000, "heisenberg3");
  EXPECT_NEAR(rep.symbolic_value, 1.0, 1e-12);
  EXPECT_NEAR(rep.popp_value, 1.0, 1e-12);
  EXPECT_TRUE(rep.pass) << "mc " << rep.mc_value << " +- " << rep.stderr_value;
  EXPECT_TRUE(rep.matches_popp);
  EXPECT_EQ(rep.structure_id, "heisenberg3");
}

TEST(GeneratorTest, ZeroGammaOnContactDoesNotMatchPopp) {
  const auto b = builtin("contact-halfplane");
  const auto an = analyze_frame(b.frame);
  const auto zero = ChristoffelField::constant(an.sf, an.sym, std::vector<double>(an.sym.dim() * 2, 0.0));
  const ChristoffelField solved(an.sf, an.sym);
  const Expr f = parse_expr("y", b.frame.chart);
  const auto bad = generator_test(b.frame, zero, f, b.q0, 0.01, config(5e-4, 0.01), 20000, "contact");
  const auto good = generator_test(b.frame, solved, f, b.q0, 0.01, config(5e-4, 0.01), 20000, "contact");
  EXPECT_GT(std::abs(bad.symbolic_value - bad.popp_value), 0.2);
  EXPECT_FALSE(bad.matches_popp);
  EXPECT_TRUE(good.matches_popp);
  EXPECT_NEAR(good.symbolic_value, good.popp_value, 1e-9);
}

TEST(GeneratorTests, SharePathsAcrossFunctions) {
  const auto b = builtin("heisenberg3");
  const auto an = analyze_frame(b.frame);
  const ChristoffelField gamma(an.sf, an.sym);
  const auto cfg = config(0.005, 0.1, 8);
  const Expr f = parse_expr("x*y", b.frame.chart);
  const auto many = generator_tests(b.frame, gamma, {parse_expr("x", b.frame.chart), f}, b.q0, 0.1, cfg, 2000);
  const auto one = generator_test(b.frame, gamma, f, b.q0, 0.1, cfg, 2000);
  ASSERT_EQ(many.size(), 2u);
  EXPECT_DOUBLE_EQ(many[1].mc_value, one.mc_value);
}

TEST(Equivalence, HeisenbergDevelopmentMatchesPopp) {
  const auto b = builtin("heisenberg3");
  const auto an = analyze_frame(b.frame);
  const ChristoffelField gamma(an.sf, an.sym);
  const auto rep = equivalence_test(b.frame, an.sf, gamma, b.q0, 0.5, config(0.01, 0.5, 3), 20000, "heisenberg3");
  EXPECT_EQ(rep.moments.size(), 6u);
  EXPECT_TRUE(rep.pass) << "max |z| " << rep.max_abs_z;
  EXPECT_NE(popp_seed(3), 3u);
}

TEST(Json, ReportKeys) {
  GeneratorReport r;
  r.structure_id = "s";
  const auto j = to_json(r);
  for (const char* k : {"test", "structure_id", "t", "dt", "paths", "mc_value", "symbolic_value", "stderr", "z", "pass"})
    EXPECT_TRUE(j.contains(k)) << k;
  EXPECT_TRUE(to_json(EquivalenceReport{}).contains("pass"));
}
