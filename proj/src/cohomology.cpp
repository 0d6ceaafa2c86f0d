#include "srdev/cohomology.hpp"

#include <algorithm>
#include <sstream>

#include "srdev/errors.hpp"

namespace srdev {

// ---------------------------------------------------------------------------
// HomElement

int sort_with_sign(std::vector<int>& idx) {
  int sign = 1;
  for (std::size_t i = 1; i < idx.size(); ++i)
    for (std::size_t j = i; j > 0 && idx[j - 1] >= idx[j]; --j) {
      if (idx[j - 1] == idx[j]) return 0;
      std::swap(idx[j - 1], idx[j]);
      sign = -sign;
    }
  return sign;
}

Rational HomElement::coeff(const Monomial& m) const {
  auto it = terms_.find(m);
  return it == terms_.end() ? Rational(0) : it->second;
}

void HomElement::add(int a, std::vector<int> idx, const Rational& c) {
  if (static_cast<int>(idx.size()) != arity_) throw DimensionMismatch("monomial arity");
  if (sgn(c) == 0) return;
  int s = sort_with_sign(idx);
  if (s == 0) return;
  Monomial m{a, std::move(idx)};
  Rational& slot = terms_[m];
  if (s > 0)
    slot += c;
  else
    slot -= c;
  if (sgn(slot) == 0) terms_.erase(m);
}

HomElement& HomElement::operator+=(const HomElement& o) {
  if (o.arity_ != arity_) throw DimensionMismatch("adding hom elements of different arity");
  for (const auto& [m, c] : o.terms_) add(m.a, m.J, c);
  return *this;
}

HomElement& HomElement::operator*=(const Rational& c) {
  if (sgn(c) == 0) {
    terms_.clear();
    return *this;
  }
  for (auto& [m, v] : terms_) v *= c;
  return *this;
}

HomElement operator-(const HomElement& a, const HomElement& b) {
  HomElement out = b;
  out *= -1;
  out += a;
  return out;
}

int degree_of(const AmbientAlgebra& g, const Monomial& m) {
  int d = -g.weight(m.a);
  for (int j : m.J) d += g.nilpotent().layer(j);
  return d;
}

std::string to_string(const AmbientAlgebra& g, const HomElement& x) {
  if (x.is_zero()) return "0";
  std::ostringstream os;
  bool first = true;
  for (const auto& [m, c] : x.terms()) {
    Rational mag = abs(c);
    if (first)
      os << (sgn(c) < 0 ? "-" : "");
    else
      os << (sgn(c) < 0 ? " - " : " + ");
    first = false;
    if (mag != 1) os << to_string(mag) << "*";
    if (g.is_h(m.a))
      os << "h" << (m.a - g.n() + 1);
    else
      os << "e" << (m.a + 1);
    if (!m.J.empty()) {
      os << "^{";
      for (std::size_t r = 0; r < m.J.size(); ++r) os << (r ? "," : "") << (m.J[r] + 1);
      os << "}";
    }
  }
  return os.str();
}

// ---------------------------------------------------------------------------
// HomSpace

namespace {

void subsets(int n, int k, std::vector<std::vector<int>>& out) {
  std::vector<int> cur(k);
  for (int i = 0; i < k; ++i) cur[i] = i;
  if (k > n) return;
  while (true) {
    out.push_back(cur);
    int i = k - 1;
    while (i >= 0 && cur[i] == n - k + i) --i;
    if (i < 0) return;
    ++cur[i];
    for (int j = i + 1; j < k; ++j) cur[j] = cur[j - 1] + 1;
  }
}

}  // namespace

HomSpace::HomSpace(const AmbientAlgebra& g, int arity) : arity_(arity) {
  std::vector<std::vector<int>> js;
  subsets(g.n(), arity, js);
  for (const auto& J : js)
    for (int a = 0; a < g.dim(); ++a) {
      Monomial m{a, J};
      index_[m] = static_cast<int>(basis_.size());
      int d = degree_of(g, m);
      degree_.push_back(d);
      if (d > 0) plus_.push_back(static_cast<int>(basis_.size()));
      basis_.push_back(std::move(m));
    }
}

int HomSpace::index(const Monomial& m) const {
  auto it = index_.find(m);
  if (it == index_.end()) throw DimensionMismatch("monomial not in hom space");
  return it->second;
}

RatVector HomSpace::coords(const HomElement& x) const {
  if (x.arity() != arity_) throw DimensionMismatch("hom element arity");
  RatVector v(basis_.size());
  for (const auto& [m, c] : x.terms()) v[index(m)] = c;
  return v;
}

HomElement HomSpace::element(std::span<const Rational> v) const {
  if (v.size() != basis_.size()) throw DimensionMismatch("coordinate vector length");
  HomElement x(arity_);
  for (std::size_t i = 0; i < v.size(); ++i)
    if (sgn(v[i]) != 0) x.add(basis_[i].a, basis_[i].J, v[i]);
  return x;
}

bool HomSubspace::contains(std::span<const Rational> v) const { return in_row_span(basis, v); }

HomSubspace make_subspace(int arity, const RatMatrix& rows) {
  HomSubspace s;
  s.arity = arity;
  Rref rr = rref(rows);
  s.pivots = rr.pivots;
  s.basis = RatMatrix(0, rows.cols());
  for (std::size_t i = 0; i < rr.pivots.size(); ++i) s.basis.append_row(rr.reduced.row(i));
  return s;
}

// ---------------------------------------------------------------------------
// Evaluation helpers

namespace {

using Sparse = std::map<int, Rational>;

// x viewed as a map from sorted argument tuples to g-vectors.
class Evaluator {
public:
  explicit Evaluator(const HomElement& x) {
    for (const auto& [m, c] : x.terms()) table_[m.J][m.a] = c;
  }
  // x(e_{idx...}) for an arbitrary index tuple; returns false when zero.
  bool eval(std::vector<int> idx, Sparse& out, int& sign) const {
    sign = sort_with_sign(idx);
    if (sign == 0) return false;
    auto it = table_.find(idx);
    if (it == table_.end()) return false;
    out = it->second;
    return true;
  }

private:
  std::map<std::vector<int>, Sparse> table_;
};

void axpy(Sparse& acc, const Rational& f, const Sparse& v) {
  for (const auto& [k, c] : v) {
    Rational& s = acc[k];
    s += f * c;
  }
}

Sparse ad(const AmbientAlgebra& g, int a, const Sparse& v) {
  Sparse out;
  for (const auto& [b, c] : v)
    for (int k = 0; k < g.dim(); ++k)
      if (sgn(g.c(a, b, k)) != 0) out[k] += c * g.c(a, b, k);
  return out;
}

RatMatrix block_inverse(const RatMatrix& m, const std::vector<std::vector<int>>& blocks) {
  RatMatrix inv(m.rows(), m.cols());
  for (const auto& b : blocks) {
    RatMatrix sub(b.size(), b.size());
    for (std::size_t r = 0; r < b.size(); ++r)
      for (std::size_t c = 0; c < b.size(); ++c) sub(r, c) = m(b[r], b[c]);
    auto si = inverse(sub);
    if (!si) throw TheoremCheckFailed("hom-space Gram matrix is singular");
    for (std::size_t r = 0; r < b.size(); ++r)
      for (std::size_t c = 0; c < b.size(); ++c) inv(b[r], b[c]) = (*si)(r, c);
  }
  return inv;
}

Rational det(RatMatrix m) {
  const std::size_t n = m.rows();
  Rational d = 1;
  for (std::size_t c = 0; c < n; ++c) {
    std::size_t p = c;
    while (p < n && sgn(m(p, c)) == 0) ++p;
    if (p == n) return 0;
    if (p != c) {
      for (std::size_t j = 0; j < n; ++j) swap(m(p, j), m(c, j));
      d = -d;
    }
    d *= m(c, c);
    for (std::size_t r = c + 1; r < n; ++r) {
      if (sgn(m(r, c)) == 0) continue;
      Rational f = m(r, c) / m(c, c);
      for (std::size_t j = c; j < n; ++j) m(r, j) -= f * m(c, j);
    }
  }
  return d;
}

}  // namespace

// ---------------------------------------------------------------------------
// CochainComplex

CochainComplex::CochainComplex(AmbientAlgebra g, const ExtendedMetric& metric, int max_arity)
    : g_(std::move(g)) {
  ggram_ = g_.gram(metric);
  auto di = inverse(metric.gram);
  if (!di) throw TheoremCheckFailed("extended metric is singular");
  dual_ = *di;
  const int n = g_.n();
  const int top = std::min(max_arity, n);
  for (int k = 0; k <= top; ++k) {
    spaces_.emplace_back(g_, k);
    const HomSpace& s = spaces_.back();
    Rational fact = 1;
    for (int t = 2; t <= k; ++t) fact *= t;
    RatMatrix m(s.size(), s.size());
    // Entries vanish unless both the weight of e_a and the layer profile of J agree.
    std::map<std::vector<int>, std::vector<int>> groups;
    for (int i = 0; i < s.size(); ++i) {
      const Monomial& mi = s.monomial(i);
      std::vector<int> key{g_.weight(mi.a)};
      for (int j : mi.J) key.push_back(g_.nilpotent().layer(j));
      groups[key].push_back(i);
    }
    std::vector<std::vector<int>> blocks;
    for (auto& [key, idx] : groups) {
      for (int i : idx)
        for (int j : idx) {
          const Monomial &mi = s.monomial(i), &mj = s.monomial(j);
          const Rational& ga = ggram_(mi.a, mj.a);
          if (sgn(ga) == 0) continue;
          RatMatrix sub(k, k);
          for (int r = 0; r < k; ++r)
            for (int c = 0; c < k; ++c) sub(r, c) = dual_(mi.J[r], mj.J[c]);
          m(i, j) = ga * det(sub) / fact;
        }
      blocks.push_back(idx);
    }
    gram_inv_.push_back(block_inverse(m, blocks));
    gram_.push_back(std::move(m));
  }
}

HomElement CochainComplex::differential(const HomElement& x) const {
  const int k = x.arity();
  const int n = g_.n();
  HomElement out(k + 1);
  if (x.is_zero()) return out;
  Evaluator ev(x);
  std::vector<std::vector<int>> tuples;
  subsets(n, k + 1, tuples);
  Sparse val;
  int sign = 0;
  for (const auto& J : tuples) {
    Sparse acc;
    for (int i = 0; i <= k; ++i) {
      std::vector<int> rest;
      for (int r = 0; r <= k; ++r)
        if (r != i) rest.push_back(J[r]);
      if (!ev.eval(rest, val, sign)) continue;
      Rational f = (i % 2 == 0 ? 1 : -1) * sign;
      axpy(acc, f, ad(g_, J[i], val));
    }
    for (int i = 0; i <= k; ++i)
      for (int l = i + 1; l <= k; ++l) {
        std::vector<int> rest;
        for (int r = 0; r <= k; ++r)
          if (r != i && r != l) rest.push_back(J[r]);
        for (int m = 0; m < n; ++m) {
          const Rational& cm = g_.c(J[i], J[l], m);
          if (sgn(cm) == 0) continue;
          std::vector<int> args{m};
          args.insert(args.end(), rest.begin(), rest.end());
          if (!ev.eval(args, val, sign)) continue;
          Rational f = ((i + l) % 2 == 0 ? 1 : -1) * sign * cm;
          axpy(acc, f, val);
        }
      }
    for (const auto& [a, c] : acc) out.add(a, J, c);
  }
  return out;
}

RatMatrix CochainComplex::differential_matrix(int k) const {
  const HomSpace& src = space(k);
  const HomSpace& dst = space(k + 1);
  RatMatrix d(dst.size(), src.size());
  for (int c = 0; c < src.size(); ++c) {
    HomElement e(k);
    e.add(src.monomial(c).a, src.monomial(c).J, 1);
    HomElement img = differential(e);
    for (const auto& [m, v] : img.terms()) d(dst.index(m), c) = v;
  }
  return d;
}

Rational CochainComplex::inner(const HomElement& x, const HomElement& y) const {
  if (x.arity() != y.arity()) throw DimensionMismatch("inner product of different arities");
  const HomSpace& s = space(x.arity());
  const RatMatrix& m = gram(x.arity());
  Rational out = 0;
  for (const auto& [mx, cx] : x.terms()) {
    int i = s.index(mx);
    for (const auto& [my, cy] : y.terms()) {
      const Rational& gij = m(i, s.index(my));
      if (sgn(gij) != 0) out += cx * gij * cy;
    }
  }
  return out;
}

RatMatrix CochainComplex::codifferential_matrix(int k) const {
  return gram_inv_.at(k) * differential_matrix(k).transpose() * gram(k + 1);
}

HomElement CochainComplex::codifferential(const HomElement& y) const {
  const int k = y.arity() - 1;
  if (k < 0) throw DimensionMismatch("codifferential of a 0-cochain");
  RatVector v = space(k + 1).coords(y);
  RatVector w = gram(k + 1) * std::span<const Rational>(v);
  RatVector z = differential_matrix(k).transpose() * std::span<const Rational>(w);
  return space(k).element(gram_inv_.at(k) * std::span<const Rational>(z));
}

HomElement CochainComplex::act(int alpha, const HomElement& x) const {
  const int k = x.arity();
  const int n = g_.n();
  const RatMatrix& A = g_.symmetry().basis.at(alpha);
  HomElement out(k);
  Evaluator ev(x);
  std::vector<std::vector<int>> tuples;
  subsets(n, k, tuples);
  Sparse val;
  int sign = 0;
  for (const auto& J : tuples) {
    Sparse acc;
    if (ev.eval(J, val, sign)) axpy(acc, Rational(sign), ad(g_, n + alpha, val));
    for (int r = 0; r < k; ++r)
      for (int s = 0; s < n; ++s) {
        const Rational& a = A(s, J[r]);
        if (sgn(a) == 0) continue;
        std::vector<int> args = J;
        args[r] = s;
        if (ev.eval(args, val, sign)) axpy(acc, -a * sign, val);
      }
    for (const auto& [b, c] : acc) out.add(b, J, c);
  }
  return out;
}

RatMatrix CochainComplex::action_matrix(int alpha, int k) const {
  const HomSpace& s = space(k);
  RatMatrix m(s.size(), s.size());
  for (int c = 0; c < s.size(); ++c) {
    HomElement e(k);
    e.add(s.monomial(c).a, s.monomial(c).J, 1);
    HomElement img = act(alpha, e);
    for (const auto& [mono, v] : img.terms()) m(s.index(mono), c) = v;
  }
  return m;
}

// ---------------------------------------------------------------------------
// Normal modules

namespace {

// {v supported on idx : <r, v>_M = 0 for every row r}, in full coordinates.
RatMatrix complement_within(const std::vector<int>& idx, const RatMatrix& rows, const RatMatrix& m) {
  const std::size_t width = m.cols();
  RatMatrix out(0, width);
  RatMatrix sys(rows.rows(), idx.size());
  for (std::size_t r = 0; r < rows.rows(); ++r) {
    RatVector rm(width);
    for (std::size_t c = 0; c < width; ++c) {
      if (sgn(rows(r, c)) == 0) continue;
      for (int j : idx)
        if (sgn(m(c, j)) != 0) rm[j] += rows(r, c) * m(c, j);
    }
    for (std::size_t j = 0; j < idx.size(); ++j) sys(r, j) = rm[idx[j]];
  }
  RatMatrix ns = rows.rows() ? nullspace(sys) : RatMatrix::identity(idx.size());
  RatVector v(width);
  for (std::size_t s = 0; s < ns.rows(); ++s) {
    for (auto& x : v) x = 0;
    for (std::size_t j = 0; j < idx.size(); ++j) v[idx[j]] = ns(s, j);
    out.append_row(v);
  }
  return out;
}

bool invariant(const CochainComplex& cx, const HomSubspace& s) {
  const AmbientAlgebra& g = cx.algebra();
  for (int al = 0; al < g.dim_h(); ++al) {
    RatMatrix act = cx.action_matrix(al, s.arity);
    for (int r = 0; r < s.dim(); ++r) {
      RatVector img = act * s.basis.row(r);
      if (!s.contains(img)) return false;
    }
  }
  return true;
}

bool complements(const HomSubspace& a, const HomSubspace& b, int total) {
  if (a.dim() + b.dim() != total) return false;
  return static_cast<int>(rank(vstack(a.basis, b.basis))) == total;
}

}  // namespace

HomSubspace image_partial_plus(const CochainComplex& cx) {
  const HomSpace& h1 = cx.space(1);
  RatMatrix d = cx.differential_matrix(1);
  RatMatrix rows(0, d.rows());
  RatVector col(d.rows());
  for (int c : h1.plus()) {
    for (std::size_t r = 0; r < d.rows(); ++r) col[r] = d(r, c);
    rows.append_row(col);
  }
  return make_subspace(2, rows.rows() ? rows : RatMatrix(0, d.rows()));
}

HomSubspace s_module(const CochainComplex& cx) {
  const AmbientAlgebra& g = cx.algebra();
  const GradedLieAlgebra& nil = g.nilpotent();
  const int k1 = nil.generators();
  const HomSpace& h2 = cx.space(2);
  // (ker h)^perp inside the orthonormal layer one.
  const RatMatrix& ker = g.symmetry().ker;
  RatMatrix perp = ker.rows() ? nullspace(ker) : RatMatrix::identity(k1);
  RatMatrix rows(0, h2.size());
  for (std::size_t u = 0; u < perp.rows(); ++u) {
    HomElement s(2);
    for (int j = 0; j < nil.dim(); ++j)
      for (int i = 0; i < k1; ++i)
        if (sgn(perp(u, i)) != 0) s.add(j, {j, i}, perp(u, i));
    rows.append_row(h2.coords(s));
  }
  return make_subspace(2, rows);
}

NormalModule normal_module_popp(const CochainComplex& cx) {
  const HomSpace& h2 = cx.space(2);
  const RatMatrix& m = cx.gram(2);
  const std::vector<int>& plus = h2.plus();
  HomSubspace im = image_partial_plus(cx);
  HomSubspace s = s_module(cx);
  RatMatrix im_perp = complement_within(plus, im.basis, m);

  NormalModule out;
  RatMatrix meet = intersection(s.basis, im_perp);
  if (meet.rows() > 0) {
    out.feasible = false;
    out.witness = h2.element(meet.row(0));
    out.module = make_subspace(2, RatMatrix(0, h2.size()));
    return out;
  }
  RatMatrix t = vstack(s.basis, im_perp);
  RatMatrix t_perp = complement_within(plus, t, m);
  RatMatrix n_perp = vstack(s.basis, t_perp);
  out.module = make_subspace(2, complement_within(plus, n_perp, m));
  out.complements_image = complements(out.module, im, static_cast<int>(plus.size()));
  out.h_invariant = invariant(cx, out.module);
  return out;
}

NormalModule normal_module_morimoto(const CochainComplex& cx) {
  const HomSpace& h2 = cx.space(2);
  const std::vector<int>& plus = h2.plus();
  RatMatrix dstar = cx.codifferential_matrix(1);
  RatMatrix sys(dstar.rows(), plus.size());
  for (std::size_t r = 0; r < dstar.rows(); ++r)
    for (std::size_t j = 0; j < plus.size(); ++j) sys(r, j) = dstar(r, plus[j]);
  RatMatrix ns = nullspace(sys);
  RatMatrix rows(0, h2.size());
  RatVector v(h2.size());
  for (std::size_t s = 0; s < ns.rows(); ++s) {
    for (auto& x : v) x = 0;
    for (std::size_t j = 0; j < plus.size(); ++j) v[plus[j]] = ns(s, j);
    rows.append_row(v);
  }
  NormalModule out;
  out.module = make_subspace(2, rows);
  HomSubspace im = image_partial_plus(cx);
  out.complements_image = complements(out.module, im, static_cast<int>(plus.size()));
  if (!out.complements_image)
    throw TheoremCheckFailed("ker d* does not complement im d_+ in positive degree");
  out.h_invariant = invariant(cx, out.module);
  return out;
}

HomElement morimoto_popp_obstruction(const CochainComplex& cx, int i) {
  const AmbientAlgebra& g = cx.algebra();
  if (i < 0 || i >= g.nilpotent().generators())
    throw DimensionMismatch("obstruction index must be a generator index");
  HomElement id(1);
  for (int j = 0; j < g.n(); ++j) id.add(j, {j}, 1);
  HomElement d = cx.differential(id);
  HomElement out(3);
  for (const auto& [m, c] : d.terms()) out.add(m.a, {m.J[0], m.J[1], i}, c);
  return out;
}

std::optional<RatVector> separating_vector(const HomSubspace& a, const HomSubspace& b) {
  for (int r = 0; r < a.dim(); ++r)
    if (!b.contains(a.basis.row(r))) return a.basis.row_vector(r);
  return std::nullopt;
}

}  // namespace srdev
