#pragma once

#include <compare>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "srdev/algebra.hpp"

namespace srdev {

/// e_a (x) e^{J[0]} ^ ... ^ e^{J[k-1]}: a ranges over the ambient basis,
/// J is strictly increasing over the basis of n.
struct Monomial {
  int a = 0;
  std::vector<int> J;
  friend auto operator<=>(const Monomial&, const Monomial&) = default;
};

/// Element of hom(^k n, g) with exact coefficients; zero terms are never stored.
class HomElement {
public:
  explicit HomElement(int arity = 0) : arity_(arity) {}

  int arity() const { return arity_; }
  const std::map<Monomial, Rational>& terms() const { return terms_; }
  bool is_zero() const { return terms_.empty(); }
  Rational coeff(const Monomial& m) const;

  /// Adds c times e_a (x) e^{idx}; idx need not be sorted (sign applied,
  /// repeated indices give zero).
  void add(int a, std::vector<int> idx, const Rational& c);
  HomElement& operator+=(const HomElement& o);
  HomElement& operator*=(const Rational& c);
  friend HomElement operator-(const HomElement& a, const HomElement& b);
  friend bool operator==(const HomElement&, const HomElement&) = default;

private:
  int arity_;
  std::map<Monomial, Rational> terms_;
};

/// degreeOf(e_a (x) e^J) = sum of layers of J minus the weight of e_a.
int degree_of(const AmbientAlgebra& g, const Monomial& m);

/// Labels: e1..en for n, h1..hd for the symmetry algebra. Example "-e1^{1,2}".
std::string to_string(const AmbientAlgebra& g, const HomElement& x);

/// Sorts idx in place and returns the permutation sign, or 0 on a repeat.
int sort_with_sign(std::vector<int>& idx);

/// Monomial basis of hom(^k n, g), ordered by (J, a).
class HomSpace {
public:
  HomSpace(const AmbientAlgebra& g, int arity);

  int arity() const { return arity_; }
  int size() const { return static_cast<int>(basis_.size()); }
  const Monomial& monomial(int i) const { return basis_[i]; }
  int index(const Monomial& m) const;
  int degree(int i) const { return degree_[i]; }
  /// Indices of positive-degree monomials.
  const std::vector<int>& plus() const { return plus_; }

  RatVector coords(const HomElement& x) const;
  HomElement element(std::span<const Rational> v) const;

private:
  int arity_;
  std::vector<Monomial> basis_;
  std::vector<int> degree_;
  std::vector<int> plus_;
  std::map<Monomial, int> index_;
};

/// Subspace of hom(^k n, g) kept as a reduced row-echelon basis in
/// HomSpace coordinates, so equal subspaces have equal bases.
struct HomSubspace {
  int arity = 0;
  RatMatrix basis;
  std::vector<std::size_t> pivots;
  int dim() const { return static_cast<int>(basis.rows()); }
  bool contains(std::span<const Rational> v) const;
  friend bool operator==(const HomSubspace& a, const HomSubspace& b) {
    return a.arity == b.arity && a.basis == b.basis;
  }
};

HomSubspace make_subspace(int arity, const RatMatrix& rows);

/// The cochain complex hom(^k n, g), k = 0..max_arity, with the
/// Chevalley-Eilenberg differential and the Gram metric induced by the
/// ambient metric and the inverse Gram of n on covectors.
class CochainComplex {
public:
  CochainComplex(AmbientAlgebra g, const ExtendedMetric& metric, int max_arity = 3);

  const AmbientAlgebra& algebra() const { return g_; }
  const RatMatrix& ambient_gram() const { return ggram_; }
  const RatMatrix& dual_gram() const { return dual_; }
  int max_arity() const { return static_cast<int>(spaces_.size()) - 1; }
  const HomSpace& space(int k) const { return spaces_.at(k); }

  HomElement differential(const HomElement& x) const;
  /// Matrix of d: hom_k -> hom_{k+1} (rows index hom_{k+1}).
  RatMatrix differential_matrix(int k) const;
  const RatMatrix& gram(int k) const { return gram_.at(k); }
  Rational inner(const HomElement& x, const HomElement& y) const;
  /// Gram adjoint of the differential, hom_{k+1} -> hom_k.
  HomElement codifferential(const HomElement& y) const;
  RatMatrix codifferential_matrix(int k) const;

  /// (A.x)(v, ...) = ad_A(x(v, ...)) - sum_r x(.., A v_r, ..) for h generator alpha.
  HomElement act(int alpha, const HomElement& x) const;
  RatMatrix action_matrix(int alpha, int k) const;

private:
  AmbientAlgebra g_;
  RatMatrix ggram_, dual_;
  std::vector<HomSpace> spaces_;
  std::vector<RatMatrix> gram_, gram_inv_;
};

/// d(hom(n, g)_+) inside hom(^2 n, g)_+.
HomSubspace image_partial_plus(const CochainComplex& cx);

/// span{ sum_j e_j (x) e^j ^ u : u in (ker h)^perp }.
HomSubspace s_module(const CochainComplex& cx);

struct NormalModule {
  HomSubspace module;
  bool feasible = true;
  std::optional<HomElement> witness;  ///< nonzero element of S meet (im d_+)^perp
  bool complements_image = false;
  bool h_invariant = false;
};

NormalModule normal_module_popp(const CochainComplex& cx);
/// ker d* meet hom(^2 n, g)_+. Throws TheoremCheckFailed if it does not
/// complement im d_+.
NormalModule normal_module_morimoto(const CochainComplex& cx);

/// d(sum_j e_j (x) e^j) ^ e^i for a generator index i (0-based, < k1).
HomElement morimoto_popp_obstruction(const CochainComplex& cx, int i);

/// A vector in a but not in b, if any.
std::optional<RatVector> separating_vector(const HomSubspace& a, const HomSubspace& b);

}  // namespace srdev
