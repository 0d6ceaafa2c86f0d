#pragma once

#include <map>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "srdev/linalg.hpp"

namespace srdev {

/// Structured description of a graded nilpotent Lie algebra, as read from an
/// algebra spec file. Indices are 0-based here; files and diagnostics use
/// 1-based indices.
struct AlgebraSpec {
  int dim = 0;
  std::vector<int> growth;  ///< cumulative layer dimensions (k_1, ..., k_m)
  /// brackets[{i, j}][k] = c_ij^k for i < j
  std::map<std::pair<int, int>, std::map<int, Rational>> brackets;

  friend bool operator==(const AlgebraSpec&, const AlgebraSpec&) = default;
};

/// A stratified nilpotent Lie algebra n = n_{-1} + ... + n_{-m} with exact
/// structure constants. Instances are validated on construction and
/// immutable afterwards.
class GradedLieAlgebra {
public:
  int dim() const { return dim_; }
  int step() const { return static_cast<int>(growth_.size()); }
  const std::vector<int>& growth() const { return growth_; }
  int generators() const { return growth_.front(); }

  /// Layer index l >= 1 of basis element i (element of n_{-l}).
  int layer(int i) const { return layer_[i]; }
  int layer_begin(int l) const { return l == 1 ? 0 : growth_[l - 2]; }
  int layer_end(int l) const { return growth_[l - 1]; }
  int layer_dim(int l) const { return layer_end(l) - layer_begin(l); }

  /// c_ij^k for all i, j (antisymmetric in i, j).
  const Rational& c(int i, int j, int k) const { return c_[(i * dim_ + j) * dim_ + k]; }

  RatVector bracket(std::span<const Rational> x, std::span<const Rational> y) const;
  /// Coefficients of [e_i, e_j].
  RatVector bracket_basis(int i, int j) const;

  /// Nonzero c_ij^k with i < j, for fast floating-point brackets.
  struct Term {
    int i, j, k;
    double value;
  };
  const std::vector<Term>& terms() const { return terms_; }
  /// out = [x, y] in floating point; out must not alias x or y.
  void bracket(std::span<const double> x, std::span<const double> y, std::span<double> out) const;

  AlgebraSpec to_spec() const;

  friend GradedLieAlgebra build_algebra(const AlgebraSpec& spec);

private:
  GradedLieAlgebra() = default;
  int dim_ = 0;
  std::vector<int> growth_;
  std::vector<int> layer_;
  std::vector<Rational> c_;
  std::vector<Term> terms_;
};

/// Validates the spec (antisymmetry by storage, grading, Jacobi,
/// bracket generation) and builds the algebra. Throws MalformedSpec,
/// GradingViolation, JacobiViolation or NotBracketGenerating.
GradedLieAlgebra build_algebra(const AlgebraSpec& spec);

/// Free nilpotent Lie algebra on `generators` generators truncated at `step`,
/// in a Hall basis ordered by degree. For two generators and step 3 the basis
/// is e3 = [e1,e2], e4 = [e1,e3], e5 = [e2,e3].
GradedLieAlgebra free_nilpotent(int generators, int step);

/// Extended metric on n: identity on n_{-1}, and on each higher layer the
/// metric transported from (ker pi_l)^perp inside the l-fold tensor power of
/// n_{-1}. Kept as an exact block-diagonal Gram matrix.
struct ExtendedMetric {
  RatMatrix gram;             ///< n x n
  std::vector<RatMatrix> pi;  ///< pi[l-2]: layer_dim(l) x k1^l matrix of pi_l, l >= 2
};

/// Throws SurjectivityFailure if some pi_l is not onto its layer.
ExtendedMetric extend_metric(const GradedLieAlgebra& alg);

/// Derivations of n that preserve the grading and are skew on n_{-1}.
struct SymmetryAlgebra {
  std::vector<RatMatrix> basis;  ///< n x n matrices; column c is A e_c
  RatMatrix ker;                 ///< rows: basis of ker h inside n_{-1} (length k1)
  int k0 = 0;                    ///< k1 - dim ker h

  int dim() const { return static_cast<int>(basis.size()); }
  /// Upper-left k1 x k1 block of basis[alpha].
  RatMatrix layer1_block(int alpha, int k1) const;
};

/// Solves the exact linear system for the symmetry algebra. Also checks the
/// theorem-level invariants (closure under commutators, preservation of the
/// full extended metric) and throws TheoremCheckFailed if they fail.
SymmetryAlgebra symmetry_algebra(const GradedLieAlgebra& alg, const ExtendedMetric& metric);

/// g = n (+) h with [e_alpha, e_i] = A_alpha e_i and [e_alpha, e_beta] the
/// matrix commutator. Basis order: e_1..e_n, then h_1..h_dimH.
class AmbientAlgebra {
public:
  const GradedLieAlgebra& nilpotent() const { return nil_; }
  const SymmetryAlgebra& symmetry() const { return sym_; }
  int dim() const { return dim_; }
  int n() const { return nil_.dim(); }
  int dim_h() const { return sym_.dim(); }
  bool is_h(int a) const { return a >= nil_.dim(); }
  /// Weight of e_a: l for n_{-l}, 0 for h.
  int weight(int a) const { return is_h(a) ? 0 : nil_.layer(a); }

  const Rational& c(int a, int b, int k) const { return c_[(a * dim_ + b) * dim_ + k]; }
  RatVector bracket(std::span<const Rational> x, std::span<const Rational> y) const;
  RatVector bracket_basis(int a, int b) const;

  /// Gram matrix of g: extended metric on n, and on h the bi-invariant form
  /// <A, B> = (1/2) tr(A1^T B1) on layer-1 blocks; n and h orthogonal.
  RatMatrix gram(const ExtendedMetric& metric) const;

  friend AmbientAlgebra ambient(const GradedLieAlgebra& alg, const SymmetryAlgebra& sym);

private:
  AmbientAlgebra(GradedLieAlgebra nil, SymmetryAlgebra sym)
      : nil_(std::move(nil)), sym_(std::move(sym)) {}
  GradedLieAlgebra nil_;
  SymmetryAlgebra sym_;
  int dim_ = 0;
  std::vector<Rational> c_;
};

/// Throws ClosureFailure if [h, h] leaves span(h), TheoremCheckFailed if
/// the assembled bracket violates Jacobi.
AmbientAlgebra ambient(const GradedLieAlgebra& alg, const SymmetryAlgebra& sym);

}  // namespace srdev
