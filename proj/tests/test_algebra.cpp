#include <gtest/gtest.h>

#include <cmath>

#include "srdev/algebra.hpp"
#include "srdev/errors.hpp"

using namespace srdev;

namespace {

// Necklace polynomial: dimension of degree l in the free Lie algebra on r letters.
long necklace(int r, int l) {
  auto mu = [](int n) {
    int m = 1;
    for (int p = 2; p * p <= n; ++p)
      if (n % p == 0) {
        n /= p;
        if (n % p == 0) return 0;
        m = -m;
      }
    return n > 1 ? -m : m;
  };
  long s = 0;
  for (int d = 1; d <= l; ++d)
    if (l % d == 0) s += mu(d) * std::lround(std::pow(r, l / d));
  return s / l;
}

RatVector unit(int n, int i) {
  RatVector v(n);
  v[i] = 1;
  return v;
}

}  // namespace

TEST(FreeNilpotent, LayerDimensionsMatchNecklaceCounts) {
  for (auto [r, s] : {std::pair{2, 2}, {2, 3}, {2, 4}, {2, 5}, {3, 2}, {3, 3}}) {
    const auto alg = free_nilpotent(r, s);
    long total = 0;
    for (int l = 1; l <= s; ++l) {
      total += necklace(r, l);
      EXPECT_EQ(alg.growth()[l - 1], total) << "free(" << r << "," << s << ") layer " << l;
    }
  }
}

TEST(FreeNilpotent, TwoThreeBasisConvention) {
  const auto alg = free_nilpotent(2, 3);
  EXPECT_EQ(alg.bracket_basis(0, 1), unit(5, 2));
  EXPECT_EQ(alg.bracket_basis(0, 2), unit(5, 3));
  EXPECT_EQ(alg.bracket_basis(1, 2), unit(5, 4));
  RatVector minus = unit(5, 2);
  minus[2] = -1;
  EXPECT_EQ(alg.bracket_basis(1, 0), minus);
}

TEST(FreeNilpotent, SpecRoundTripRebuildsSameAlgebra) {
  const auto alg = free_nilpotent(2, 4);
  const auto again = build_algebra(alg.to_spec());
  EXPECT_EQ(again.to_spec(), alg.to_spec());
}

TEST(BuildAlgebra, RejectsJacobiViolation) {
  AlgebraSpec s;
  s.dim = 5;
  s.growth = {3, 4, 5};
  s.brackets[{0, 1}][3] = 1;
  s.brackets[{0, 2}][3] = 1;
  s.brackets[{1, 2}][3] = 1;
  s.brackets[{2, 3}][4] = 1;
  EXPECT_THROW(build_algebra(s), JacobiViolation);
}

TEST(BuildAlgebra, RejectsGradingViolation) {
  AlgebraSpec s;
  s.dim = 3;
  s.growth = {2, 3};
  s.brackets[{0, 1}][0] = 1;
  EXPECT_THROW(build_algebra(s), GradingViolation);
}

TEST(BuildAlgebra, RejectsNonGeneratingBrackets) {
  AlgebraSpec s;
  s.dim = 3;
  s.growth = {2, 3};
  EXPECT_THROW(build_algebra(s), NotBracketGenerating);
}

TEST(BuildAlgebra, RejectsInconsistentGrowth) {
  AlgebraSpec s;
  s.dim = 3;
  s.growth = {2, 4};
  EXPECT_THROW(build_algebra(s), MalformedSpec);
  s.growth = {2, 2, 3};
  EXPECT_THROW(build_algebra(s), MalformedSpec);
}

TEST(ExtendedMetric, HeisenbergCentreHasNormOneHalf) {
  // Preimage of e3 orthogonal to ker pi_2 is (e1 x e2 - e2 x e1) / 2.
  const auto m = extend_metric(free_nilpotent(2, 2));
  EXPECT_EQ(m.gram(0, 0), Rational(1));
  EXPECT_EQ(m.gram(1, 1), Rational(1));
  EXPECT_EQ(m.gram(2, 2), rational(1, 2));
  EXPECT_EQ(m.gram(0, 2), Rational(0));
}

TEST(SymmetryAlgebra, FreeAlgebrasCarryTheFullRotationAlgebra) {
  // Every skew map of the generators extends to a derivation of a free algebra.
  for (auto [r, s] : {std::pair{2, 2}, {2, 3}, {2, 4}, {3, 2}}) {
    const auto alg = free_nilpotent(r, s);
    const auto sym = symmetry_algebra(alg, extend_metric(alg));
    EXPECT_EQ(sym.dim(), r * (r - 1) / 2) << "free(" << r << "," << s << ")";
    EXPECT_EQ(sym.k0, r);
  }
}

TEST(SymmetryAlgebra, EngelHasNoSymmetries) {
  AlgebraSpec s;
  s.dim = 4;
  s.growth = {2, 3, 4};
  s.brackets[{0, 1}][2] = 1;
  s.brackets[{0, 2}][3] = 1;
  const auto alg = build_algebra(s);
  const auto sym = symmetry_algebra(alg, extend_metric(alg));
  EXPECT_EQ(sym.dim(), 0);
  EXPECT_EQ(sym.ker.rows(), 2u);
  EXPECT_EQ(sym.k0, 0);
}

TEST(SymmetryAlgebra, BasisElementsAreGradedSkewDerivations) {
  const auto alg = free_nilpotent(2, 3);
  const auto sym = symmetry_algebra(alg, extend_metric(alg));
  const int n = alg.dim();
  for (const auto& A : sym.basis) {
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) {
        // A[x,y] = [Ax,y] + [x,Ay]
        auto col = [&](int c) {
          RatVector v(n);
          for (int r = 0; r < n; ++r) v[r] = A(r, c);
          return v;
        };
        const RatVector lhs = A * alg.bracket_basis(i, j);
        const RatVector a = alg.bracket(col(i), unit(n, j));
        const RatVector b = alg.bracket(unit(n, i), col(j));
        for (int k = 0; k < n; ++k) EXPECT_EQ(lhs[k], a[k] + b[k]);
        if (alg.layer(i) != alg.layer(j)) EXPECT_EQ(A(i, j), Rational(0));
      }
    for (int i = 0; i < 2; ++i)
      for (int j = 0; j < 2; ++j) EXPECT_EQ(A(i, j), -A(j, i));
  }
}

TEST(AmbientAlgebra, SatisfiesJacobiIdentity) {
  const auto alg = free_nilpotent(2, 3);
  const auto g = ambient(alg, symmetry_algebra(alg, extend_metric(alg)));
  const int d = g.dim();
  for (int a = 0; a < d; ++a)
    for (int b = 0; b < d; ++b)
      for (int c = 0; c < d; ++c) {
        const RatVector x = unit(d, a), y = unit(d, b), z = unit(d, c);
        const RatVector s1 = g.bracket(x, g.bracket(y, z));
        const RatVector s2 = g.bracket(y, g.bracket(z, x));
        const RatVector s3 = g.bracket(z, g.bracket(x, y));
        for (int k = 0; k < d; ++k) EXPECT_EQ(s1[k] + s2[k] + s3[k], Rational(0));
      }
}

TEST(AmbientAlgebra, RotationGeneratorHasUnitNorm) {
  const auto alg = free_nilpotent(2, 2);
  const auto metric = extend_metric(alg);
  const auto g = ambient(alg, symmetry_algebra(alg, metric));
  const RatMatrix gram = g.gram(metric);
  EXPECT_EQ(gram(3, 3), Rational(1));
  EXPECT_EQ(gram(0, 3), Rational(0));
  EXPECT_EQ(g.weight(3), 0);
  EXPECT_EQ(g.weight(2), 2);
}

TEST(BuildAlgebra, GradingAndStepOneCases) {
  AlgebraSpec s;
  s.dim = 3;
  s.growth = {2, 3};
  s.brackets[{0, 1}][2] = 1;
  s.brackets[{0, 2}][2] = 1;
  EXPECT_THROW(build_algebra(s), GradingViolation);
  AlgebraSpec abelian;
  abelian.dim = 2;
  abelian.growth = {2};
  EXPECT_EQ(build_algebra(abelian).step(), 1);
  abelian.growth = {1, 2};
  EXPECT_THROW(build_algebra(abelian), Error);
}

TEST(Bracket, IsAntisymmetric) {
  const auto alg = free_nilpotent(2, 3);
  const RatVector x{1, rational(-2, 3), 5, 0, rational(1, 7)};
  for (const auto& c : alg.bracket(x, x)) EXPECT_EQ(c, Rational(0));
}

TEST(ExtendedMetric, MatchesLeastNormPreimageOracle) {
  // Brute force: the norm of e_k is the minimum norm of a preimage under pi_l,
  // computed from the Moore-Penrose inverse of pi_l.
  const auto alg = free_nilpotent(2, 3);
  const auto m = extend_metric(alg);
  for (int k = 0; k < 2; ++k)
    for (int j = 0; j < 2; ++j) EXPECT_EQ(m.gram(k, j), Rational(k == j ? 1 : 0));
  EXPECT_EQ(m.gram(2, 2), rational(1, 2));
  for (int l = 2; l <= 3; ++l) {
    const RatMatrix& pi = m.pi[l - 2];
    const RatMatrix p = pseudo_inverse(pi);
    for (int a = 0; a < alg.layer_dim(l); ++a)
      for (int b = 0; b < alg.layer_dim(l); ++b) {
        Rational want = 0;
        for (std::size_t r = 0; r < p.rows(); ++r) want += p(r, a) * p(r, b);
        EXPECT_EQ(m.gram(alg.layer_begin(l) + a, alg.layer_begin(l) + b), want);
      }
  }
}
