#include <gtest/gtest.h>

#include <random>

#include "srdev/cohomology.hpp"
#include "srdev/errors.hpp"

using namespace srdev;

namespace {

CochainComplex complex_of(const GradedLieAlgebra& alg, int max_arity = 3) {
  const auto metric = extend_metric(alg);
  return CochainComplex(ambient(alg, symmetry_algebra(alg, metric)), metric, max_arity);
}

HomElement random_element(const HomSpace& s, std::mt19937& rng) {
  std::uniform_int_distribution<int> num(-4, 4), den(1, 3);
  RatVector v(s.size());
  for (auto& x : v) x = rational(num(rng), den(rng));
  return s.element(v);
}

}  // namespace

TEST(HomElement, AddSortsIndicesWithSign) {
  HomElement x(2);
  x.add(0, {1, 0}, Rational(1));
  EXPECT_EQ(x.coeff({0, {0, 1}}), Rational(-1));
  x.add(0, {0, 1}, Rational(1));
  EXPECT_TRUE(x.is_zero());
  x.add(1, {2, 2}, Rational(5));
  EXPECT_TRUE(x.is_zero());
}

TEST(Differential, SquaresToZero) {
  for (auto [r, s] : {std::pair{2, 2}, {2, 3}, {3, 2}}) {
    const auto cx = complex_of(free_nilpotent(r, s), free_nilpotent(r, s).dim());
    for (int k = 0; k + 2 <= cx.max_arity(); ++k)
      EXPECT_TRUE((cx.differential_matrix(k + 1) * cx.differential_matrix(k)).is_zero())
          << "free(" << r << "," << s << ") arity " << k;
  }
}

TEST(Differential, PreservesDegree) {
  const auto cx = complex_of(free_nilpotent(2, 3));
  for (int k = 0; k < 2; ++k) {
    const HomSpace& src = cx.space(k);
    const HomSpace& dst = cx.space(k + 1);
    for (int i = 0; i < src.size(); ++i) {
      HomElement x(k);
      x.add(src.monomial(i).a, src.monomial(i).J, Rational(1));
      const HomElement dx = cx.differential(x);
      for (const auto& [m, c] : dx.terms())
        EXPECT_EQ(dst.degree(dst.index(m)), src.degree(i));
    }
  }
}

TEST(Differential, HeisenbergDegreeOneValues) {
  const auto cx = complex_of(free_nilpotent(2, 2));
  const auto& g = cx.algebra();
  HomElement x(1);
  x.add(g.n(), {0}, Rational(1));
  EXPECT_EQ(to_string(g, cx.differential(x)), "e1^{1,2}");
  HomElement y(1);
  y.add(0, {2}, Rational(1));
  EXPECT_EQ(to_string(g, cx.differential(y)), "-e1^{1,2} - e3^{2,3}");
}

TEST(Codifferential, IsAdjointOfDifferential) {
  std::mt19937 rng(7);
  int cases = 0;
  for (auto [r, s] : {std::pair{2, 2}, {2, 3}}) {
    const auto cx = complex_of(free_nilpotent(r, s));
    for (int k = 0; k < 3; ++k)
      for (int trial = 0; trial < 20; ++trial) {
        const HomElement x = random_element(cx.space(k), rng);
        const HomElement y = random_element(cx.space(k + 1), rng);
        EXPECT_EQ(cx.inner(cx.differential(x), y), cx.inner(x, cx.codifferential(y)));
        ++cases;
      }
  }
  EXPECT_GE(cases, 100);
}

TEST(NormalModule, HeisenbergPoppAndMorimotoCoincide) {
  const auto cx = complex_of(free_nilpotent(2, 2));
  EXPECT_EQ(cx.space(2).plus().size(), 11u);
  EXPECT_EQ(image_partial_plus(cx).dim(), 5);
  const auto popp = normal_module_popp(cx);
  const auto mori = normal_module_morimoto(cx);
  EXPECT_TRUE(popp.feasible);
  EXPECT_TRUE(popp.complements_image);
  EXPECT_TRUE(popp.h_invariant);
  EXPECT_EQ(popp.module.dim(), 6);
  EXPECT_EQ(popp.module, mori.module);
}

TEST(NormalModule, TwoThreeFivePoppDiffersFromMorimoto) {
  const auto cx = complex_of(free_nilpotent(2, 3));
  EXPECT_EQ(cx.space(2).plus().size(), 53u);
  EXPECT_EQ(image_partial_plus(cx).dim(), 13);
  const auto popp = normal_module_popp(cx);
  const auto mori = normal_module_morimoto(cx);
  EXPECT_TRUE(popp.complements_image && popp.h_invariant);
  EXPECT_TRUE(mori.complements_image && mori.h_invariant);
  EXPECT_EQ(popp.module.dim(), mori.module.dim());
  EXPECT_FALSE(popp.module == mori.module);
  EXPECT_TRUE(separating_vector(popp.module, mori.module).has_value());
}

TEST(SModule, HasDimensionTwoForTwoGenerators) {
  for (int s : {2, 3}) EXPECT_EQ(s_module(complex_of(free_nilpotent(2, s))).dim(), 2);
}

TEST(Obstruction, NonzeroForHigherStepFreeAlgebras) {
  const auto cx = complex_of(free_nilpotent(2, 4));
  EXPECT_FALSE(morimoto_popp_obstruction(cx, 0).is_zero());
}

TEST(Obstruction, TwoThreeFiveValue) {
  const auto cx = complex_of(free_nilpotent(2, 3));
  HomElement want(3);
  want.add(4, {2, 1, 0}, Rational(-1));
  EXPECT_EQ(morimoto_popp_obstruction(cx, 0), want);
  EXPECT_EQ(to_string(cx.algebra(), want), "e5^{1,2,3}");
}

TEST(Action, ImageOfDifferentialIsInvariant) {
  const auto cx = complex_of(free_nilpotent(2, 3));
  const HomSubspace im = image_partial_plus(cx);
  const RatMatrix act = cx.action_matrix(0, 2);
  for (std::size_t r = 0; r < im.basis.rows(); ++r)
    EXPECT_TRUE(im.contains(act * im.basis.row(r)));
}

TEST(SModule, EngelIsZeroAndPoppComplementsImage) {
  AlgebraSpec s;
  s.dim = 4;
  s.growth = {2, 3, 4};
  s.brackets[{0, 1}][2] = 1;
  s.brackets[{0, 2}][3] = 1;
  const auto cx = complex_of(build_algebra(s));
  EXPECT_EQ(s_module(cx).dim(), 0);
  const auto popp = normal_module_popp(cx);
  EXPECT_TRUE(popp.feasible);
  EXPECT_TRUE(popp.complements_image);
}

TEST(Obstruction, VanishesForHeisenberg) {
  const auto cx = complex_of(free_nilpotent(2, 2));
  EXPECT_TRUE(morimoto_popp_obstruction(cx, 0).is_zero());
  EXPECT_TRUE(morimoto_popp_obstruction(cx, 1).is_zero());
}
