#include "srdev/algebra.hpp"

#include <algorithm>
#include <sstream>

#include "srdev/errors.hpp"

namespace srdev {

namespace {

std::string e(int i) { return "e" + std::to_string(i + 1); }

std::string describe(const RatVector& v) {
  std::ostringstream os;
  bool first = true;
  for (std::size_t k = 0; k < v.size(); ++k) {
    if (sgn(v[k]) == 0) continue;
    if (!first) os << " + ";
    os << "(" << to_string(v[k]) << ")" << e(static_cast<int>(k));
    first = false;
  }
  if (first) os << "0";
  return os.str();
}

}  // namespace

// ---------------------------------------------------------------------------
// GradedLieAlgebra

RatVector GradedLieAlgebra::bracket(std::span<const Rational> x, std::span<const Rational> y) const {
  if (static_cast<int>(x.size()) != dim_ || static_cast<int>(y.size()) != dim_)
    throw DimensionMismatch("bracket: expected vectors of length " + std::to_string(dim_));
  RatVector out(dim_);
  for (const auto& t : terms_) {
    Rational w = x[t.i] * y[t.j] - x[t.j] * y[t.i];
    if (sgn(w) != 0) out[t.k] += w * c(t.i, t.j, t.k);
  }
  return out;
}

RatVector GradedLieAlgebra::bracket_basis(int i, int j) const {
  RatVector out(dim_);
  for (int k = 0; k < dim_; ++k) out[k] = c(i, j, k);
  return out;
}

void GradedLieAlgebra::bracket(std::span<const double> x, std::span<const double> y,
                               std::span<double> out) const {
  std::fill(out.begin(), out.end(), 0.0);
  for (const auto& t : terms_) out[t.k] += t.value * (x[t.i] * y[t.j] - x[t.j] * y[t.i]);
}

AlgebraSpec GradedLieAlgebra::to_spec() const {
  AlgebraSpec s;
  s.dim = dim_;
  s.growth = growth_;
  for (int i = 0; i < dim_; ++i)
    for (int j = i + 1; j < dim_; ++j)
      for (int k = 0; k < dim_; ++k)
        if (sgn(c(i, j, k)) != 0) s.brackets[{i, j}][k] = c(i, j, k);
  return s;
}

GradedLieAlgebra build_algebra(const AlgebraSpec& spec) {
  const int n = spec.dim;
  if (n <= 0) throw MalformedSpec("dim must be positive, got " + std::to_string(n));
  if (spec.growth.empty()) throw MalformedSpec("growth vector is empty");
  for (std::size_t l = 0; l < spec.growth.size(); ++l) {
    int prev = l == 0 ? 0 : spec.growth[l - 1];
    if (spec.growth[l] <= prev)
      throw MalformedSpec("growth vector must be strictly increasing and positive");
  }
  if (spec.growth.back() != n)
    throw MalformedSpec("last growth entry " + std::to_string(spec.growth.back()) +
                        " differs from dim " + std::to_string(n));

  GradedLieAlgebra alg;
  alg.dim_ = n;
  alg.growth_ = spec.growth;
  alg.layer_.resize(n);
  for (int i = 0, l = 0; i < n; ++i) {
    while (i >= spec.growth[l]) ++l;
    alg.layer_[i] = l + 1;
  }
  alg.c_.assign(static_cast<std::size_t>(n) * n * n, Rational(0));
  auto at = [&](int i, int j, int k) -> Rational& { return alg.c_[(i * n + j) * n + k]; };

  for (const auto& [pair, coeffs] : spec.brackets) {
    auto [i, j] = pair;
    if (i < 0 || j < 0 || i >= n || j >= n)
      throw MalformedSpec("bracket [" + e(i) + "," + e(j) + "] index out of range");
    if (i >= j)
      throw MalformedSpec("bracket [" + e(i) + "," + e(j) + "] must be listed with i < j");
    for (const auto& [k, v] : coeffs) {
      if (k < 0 || k >= n)
        throw MalformedSpec("bracket [" + e(i) + "," + e(j) + "] has component index out of range");
      if (sgn(v) == 0) continue;
      if (alg.layer_[k] != alg.layer_[i] + alg.layer_[j])
        throw GradingViolation("c_{" + std::to_string(i + 1) + std::to_string(j + 1) + "}^" +
                               std::to_string(k + 1) + " = " + to_string(v) + " but degree(" +
                               e(k) + ") = " + std::to_string(alg.layer_[k]) + " != " +
                               std::to_string(alg.layer_[i]) + " + " +
                               std::to_string(alg.layer_[j]));
      at(i, j, k) = v;
      at(j, i, k) = -v;
    }
  }
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j)
      for (int k = 0; k < n; ++k)
        if (sgn(at(i, j, k)) != 0)
          alg.terms_.push_back({i, j, k, at(i, j, k).get_d()});

  // Jacobi on every basis triple.
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j)
      for (int k = j + 1; k < n; ++k) {
        RatVector sum(n);
        auto acc = [&](int a, int b, int c) {
          RatVector bc = alg.bracket_basis(b, c);
          RatVector ea(n);
          ea[a] = 1;
          RatVector r = alg.bracket(ea, bc);
          for (int t = 0; t < n; ++t) sum[t] += r[t];
        };
        acc(i, j, k);
        acc(j, k, i);
        acc(k, i, j);
        for (int t = 0; t < n; ++t)
          if (sgn(sum[t]) != 0)
            throw JacobiViolation("Jacobi identity fails on (" + e(i) + "," + e(j) + "," + e(k) +
                                  "): cyclic sum = " + describe(sum));
      }

  // Bracket generation: [n_{-1}, n_{-(l-1)}] spans n_{-l}.
  for (int l = 2; l <= alg.step(); ++l) {
    const int lo = alg.layer_begin(l), hi = alg.layer_end(l);
    RatMatrix span(0, hi - lo);
    RatVector row(hi - lo);
    for (int a = alg.layer_begin(1); a < alg.layer_end(1); ++a)
      for (int b = alg.layer_begin(l - 1); b < alg.layer_end(l - 1); ++b) {
        for (int k = lo; k < hi; ++k) row[k - lo] = at(a, b, k);
        span.append_row(row);
      }
    const std::size_t r = span.rows() ? rank(span) : 0;
    if (static_cast<int>(r) != hi - lo)
      throw NotBracketGenerating("brackets of layer 1 with layer " + std::to_string(l - 1) +
                                 " span a " + std::to_string(r) + "-dimensional subspace of layer " +
                                 std::to_string(l) + " (dimension " + std::to_string(hi - lo) + ")");
  }
  return alg;
}

// ---------------------------------------------------------------------------
// Free nilpotent algebras via word expansions in the free associative algebra.

namespace {

using Word = std::vector<int>;
using LiePoly = std::map<Word, Rational>;

LiePoly commutator(const LiePoly& p, const LiePoly& q) {
  LiePoly out;
  for (const auto& [u, a] : p)
    for (const auto& [v, b] : q) {
      Word uv = u;
      uv.insert(uv.end(), v.begin(), v.end());
      Word vu = v;
      vu.insert(vu.end(), u.begin(), u.end());
      out[uv] += a * b;
      out[vu] -= a * b;
    }
  std::erase_if(out, [](const auto& kv) { return sgn(kv.second) == 0; });
  return out;
}

struct HallElement {
  int left = -1, right = -1;  // -1 for generators
  int degree = 1;
  LiePoly poly;
};

}  // namespace

GradedLieAlgebra free_nilpotent(int generators, int step) {
  if (generators < 1) throw MalformedSpec("free_nilpotent needs at least one generator");
  if (step < 1) throw MalformedSpec("free_nilpotent needs step >= 1");

  std::vector<HallElement> hall;
  for (int g = 0; g < generators; ++g) {
    HallElement h;
    h.poly[{g}] = 1;
    hall.push_back(std::move(h));
  }
  std::vector<int> growth{generators};
  for (int d = 2; d <= step; ++d) {
    // [a, b] with a < b, and b = [b1, b2] composite requires b1 <= a.
    std::vector<std::pair<int, int>> cands;
    const int count = static_cast<int>(hall.size());
    for (int b = 0; b < count; ++b)
      for (int a = 0; a < b; ++a) {
        if (hall[a].degree + hall[b].degree != d) continue;
        if (hall[b].left >= 0 && hall[b].left > a) continue;
        cands.emplace_back(a, b);
      }
    for (auto [a, b] : cands) {
      HallElement h;
      h.left = a;
      h.right = b;
      h.degree = d;
      h.poly = commutator(hall[a].poly, hall[b].poly);
      hall.push_back(std::move(h));
    }
    growth.push_back(static_cast<int>(hall.size()));
  }
  // Drop empty trailing layers (only possible for a single generator).
  while (growth.size() > 1 && growth.back() == growth[growth.size() - 2]) growth.pop_back();

  const int n = static_cast<int>(hall.size());
  // Per-degree coordinate systems on words.
  std::map<int, std::vector<int>> by_degree;
  for (int i = 0; i < n; ++i) by_degree[hall[i].degree].push_back(i);
  std::map<int, std::map<Word, std::size_t>> word_index;
  std::map<int, RatMatrix> basis_matrix;  // words x elements
  for (auto& [d, idx] : by_degree) {
    auto& wi = word_index[d];
    for (int i : idx)
      for (const auto& [w, _] : hall[i].poly) wi.emplace(w, 0);
    std::size_t pos = 0;
    for (auto& [w, p] : wi) p = pos++;
    RatMatrix m(wi.size(), idx.size());
    for (std::size_t c = 0; c < idx.size(); ++c)
      for (const auto& [w, v] : hall[idx[c]].poly) m(wi[w], c) = v;
    if (rank(m) != idx.size())
      throw TheoremCheckFailed("Hall elements of degree " + std::to_string(d) +
                               " are linearly dependent");
    basis_matrix[d] = std::move(m);
  }

  AlgebraSpec spec;
  spec.dim = n;
  spec.growth = growth;
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j) {
      const int d = hall[i].degree + hall[j].degree;
      if (d > step) continue;
      LiePoly p = commutator(hall[i].poly, hall[j].poly);
      if (p.empty()) continue;
      auto& wi = word_index[d];
      RatVector rhs(wi.size());
      for (const auto& [w, v] : p) {
        auto it = wi.find(w);
        if (it == wi.end())
          throw TheoremCheckFailed("bracket leaves the span of the Hall basis in degree " +
                                   std::to_string(d));
        rhs[it->second] = v;
      }
      auto x = solve(basis_matrix[d], rhs);
      if (!x)
        throw TheoremCheckFailed("bracket leaves the span of the Hall basis in degree " +
                                 std::to_string(d));
      const auto& idx = by_degree[d];
      for (std::size_t c = 0; c < idx.size(); ++c)
        if (sgn((*x)[c]) != 0) spec.brackets[{i, j}][idx[c]] = (*x)[c];
    }
  return build_algebra(spec);
}

// ---------------------------------------------------------------------------
// Extended metric

ExtendedMetric extend_metric(const GradedLieAlgebra& alg) {
  const int n = alg.dim();
  const int k1 = alg.generators();
  ExtendedMetric out;
  out.gram = RatMatrix(n, n);
  for (int i = 0; i < k1; ++i) out.gram(i, i) = 1;

  for (int l = 2; l <= alg.step(); ++l) {
    const int lo = alg.layer_begin(l), hi = alg.layer_end(l);
    std::size_t tensors = 1;
    for (int t = 0; t < l; ++t) tensors *= static_cast<std::size_t>(k1);
    RatMatrix pi(hi - lo, tensors);
    std::vector<int> digits(l, 0);
    for (std::size_t col = 0; col < tensors; ++col) {
      // Right-nested [v1, [v2, ..., [v_{l-1}, v_l]]].
      RatVector acc(n);
      acc[digits[l - 1]] = 1;
      for (int t = l - 2; t >= 0; --t) {
        RatVector ev(n);
        ev[digits[t]] = 1;
        acc = alg.bracket(ev, acc);
      }
      for (int k = 0; k < n; ++k) {
        if (sgn(acc[k]) == 0) continue;
        if (k < lo || k >= hi) throw TheoremCheckFailed("iterated bracket left its layer");
        pi(k - lo, col) = acc[k];
      }
      for (int t = l - 1; t >= 0; --t) {
        if (++digits[t] < k1) break;
        digits[t] = 0;
      }
    }
    // Preimage of y in (ker pi)^perp is pi^T (pi pi^T)^{-1} y, so the
    // transported Gram matrix is (pi pi^T)^{-1}.
    auto inv = inverse(pi * pi.transpose());
    if (!inv)
      throw SurjectivityFailure("pi_" + std::to_string(l) + " is not onto layer " +
                                std::to_string(l));
    for (int a = lo; a < hi; ++a)
      for (int b = lo; b < hi; ++b) out.gram(a, b) = (*inv)(a - lo, b - lo);
    out.pi.push_back(std::move(pi));
  }
  return out;
}

// ---------------------------------------------------------------------------
// Symmetry algebra

RatMatrix SymmetryAlgebra::layer1_block(int alpha, int k1) const {
  RatMatrix b(k1, k1);
  for (int r = 0; r < k1; ++r)
    for (int c = 0; c < k1; ++c) b(r, c) = basis[alpha](r, c);
  return b;
}

namespace {

RatMatrix commutator(const RatMatrix& a, const RatMatrix& b) { return a * b - b * a; }

RatVector flatten(const RatMatrix& m) {
  RatVector v;
  v.reserve(m.rows() * m.cols());
  for (std::size_t r = 0; r < m.rows(); ++r)
    for (std::size_t c = 0; c < m.cols(); ++c) v.push_back(m(r, c));
  return v;
}

}  // namespace

SymmetryAlgebra symmetry_algebra(const GradedLieAlgebra& alg, const ExtendedMetric& metric) {
  const int n = alg.dim();
  const int k1 = alg.generators();
  // Unknowns: A(r, c) with layer(r) == layer(c), enumerated column-major.
  std::vector<int> var(static_cast<std::size_t>(n) * n, -1);
  std::vector<std::pair<int, int>> entries;
  for (int c = 0; c < n; ++c)
    for (int r = 0; r < n; ++r)
      if (alg.layer(r) == alg.layer(c)) {
        var[r * n + c] = static_cast<int>(entries.size());
        entries.emplace_back(r, c);
      }
  const std::size_t nv = entries.size();
  RatMatrix eqs(0, nv);
  RatVector row(nv);
  auto add = [&](int r, int c, const Rational& coef) {
    int v = var[r * n + c];
    if (v >= 0) row[v] += coef;
  };
  auto flush = [&] {
    bool nonzero = std::any_of(row.begin(), row.end(), [](const Rational& x) { return sgn(x) != 0; });
    if (nonzero) eqs.append_row(row);
    for (auto& x : row) x = 0;
  };
  // A[e_i, e_j] - [A e_i, e_j] - [e_i, A e_j] = 0, component r.
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j)
      for (int r = 0; r < n; ++r) {
        for (int k = 0; k < n; ++k)
          if (sgn(alg.c(i, j, k)) != 0) add(r, k, alg.c(i, j, k));
        for (int s = 0; s < n; ++s) {
          if (sgn(alg.c(s, j, r)) != 0) add(s, i, -alg.c(s, j, r));
          if (sgn(alg.c(i, s, r)) != 0) add(s, j, -alg.c(i, s, r));
        }
        flush();
      }
  // Skew on n_{-1}.
  for (int r = 0; r < k1; ++r)
    for (int c = r; c < k1; ++c) {
      add(r, c, 1);
      add(c, r, 1);
      flush();
    }
  RatMatrix sol = eqs.rows() ? nullspace(eqs) : RatMatrix::identity(nv);

  SymmetryAlgebra sym;
  for (std::size_t s = 0; s < sol.rows(); ++s) {
    RatMatrix a(n, n);
    for (std::size_t v = 0; v < nv; ++v) a(entries[v].first, entries[v].second) = sol(s, v);
    sym.basis.push_back(std::move(a));
  }

  // ker h = {v in n_{-1} : A v = 0 for all A}.
  RatMatrix stacked(0, k1);
  for (int al = 0; al < sym.dim(); ++al) {
    RatMatrix b = sym.layer1_block(al, k1);
    for (int r = 0; r < k1; ++r) stacked.append_row(b.row(r));
  }
  sym.ker = stacked.rows() ? nullspace(stacked) : RatMatrix::identity(k1);
  sym.k0 = k1 - static_cast<int>(sym.ker.rows());

  // Closure under commutators.
  RatMatrix flat(0, static_cast<std::size_t>(n) * n);
  for (const auto& a : sym.basis) flat.append_row(flatten(a));
  for (int a = 0; a < sym.dim(); ++a)
    for (int b = a + 1; b < sym.dim(); ++b)
      if (!in_row_span(flat, flatten(commutator(sym.basis[a], sym.basis[b]))))
        throw TheoremCheckFailed("symmetry algebra not closed under commutator (" +
                                 std::to_string(a + 1) + "," + std::to_string(b + 1) + ")");
  // Each A preserves the whole extended metric.
  for (int a = 0; a < sym.dim(); ++a) {
    const auto& m = sym.basis[a];
    if (!(m.transpose() * metric.gram + metric.gram * m).is_zero())
      throw TheoremCheckFailed("symmetry generator " + std::to_string(a + 1) +
                               " does not preserve the extended metric");
  }
  return sym;
}

// ---------------------------------------------------------------------------
// Ambient algebra

RatVector AmbientAlgebra::bracket(std::span<const Rational> x, std::span<const Rational> y) const {
  if (static_cast<int>(x.size()) != dim_ || static_cast<int>(y.size()) != dim_)
    throw DimensionMismatch("bracket: expected vectors of length " + std::to_string(dim_));
  RatVector out(dim_);
  for (int a = 0; a < dim_; ++a) {
    if (sgn(x[a]) == 0) continue;
    for (int b = 0; b < dim_; ++b) {
      if (sgn(y[b]) == 0) continue;
      Rational w = x[a] * y[b];
      for (int k = 0; k < dim_; ++k)
        if (sgn(c(a, b, k)) != 0) out[k] += w * c(a, b, k);
    }
  }
  return out;
}

RatVector AmbientAlgebra::bracket_basis(int a, int b) const {
  RatVector out(dim_);
  for (int k = 0; k < dim_; ++k) out[k] = c(a, b, k);
  return out;
}

RatMatrix AmbientAlgebra::gram(const ExtendedMetric& metric) const {
  const int n = nil_.dim(), k1 = nil_.generators();
  RatMatrix g(dim_, dim_);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) g(i, j) = metric.gram(i, j);
  for (int a = 0; a < dim_h(); ++a)
    for (int b = 0; b < dim_h(); ++b) {
      RatMatrix pa = sym_.layer1_block(a, k1), pb = sym_.layer1_block(b, k1);
      Rational tr = 0;
      for (int r = 0; r < k1; ++r)
        for (int c = 0; c < k1; ++c) tr += pa(r, c) * pb(r, c);
      g(n + a, n + b) = tr / 2;
    }
  return g;
}

AmbientAlgebra ambient(const GradedLieAlgebra& alg, const SymmetryAlgebra& sym) {
  AmbientAlgebra amb(alg, sym);
  const int n = alg.dim(), h = sym.dim(), N = n + h;
  amb.dim_ = N;
  amb.c_.assign(static_cast<std::size_t>(N) * N * N, Rational(0));
  auto at = [&](int a, int b, int k) -> Rational& { return amb.c_[(a * N + b) * N + k]; };
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      for (int k = 0; k < n; ++k) at(i, j, k) = alg.c(i, j, k);
  for (int al = 0; al < h; ++al)
    for (int i = 0; i < n; ++i)
      for (int r = 0; r < n; ++r) {
        const Rational& v = sym.basis[al](r, i);
        at(n + al, i, r) = v;
        at(i, n + al, r) = -v;
      }
  RatMatrix flat(0, static_cast<std::size_t>(n) * n);
  for (const auto& a : sym.basis) flat.append_row(flatten(a));
  RatMatrix flat_t = flat.transpose();
  for (int a = 0; a < h; ++a)
    for (int b = a + 1; b < h; ++b) {
      auto x = solve(flat_t, flatten(commutator(sym.basis[a], sym.basis[b])));
      if (!x)
        throw ClosureFailure("[h" + std::to_string(a + 1) + ",h" + std::to_string(b + 1) +
                             "] leaves span(h)");
      for (int g = 0; g < h; ++g) {
        at(n + a, n + b, n + g) = (*x)[g];
        at(n + b, n + a, n + g) = -(*x)[g];
      }
    }
  // Jacobi on g.
  for (int a = 0; a < N; ++a)
    for (int b = a + 1; b < N; ++b)
      for (int c = b + 1; c < N; ++c) {
        RatVector sum(N);
        auto acc = [&](int x, int y, int z) {
          RatVector ex(N);
          ex[x] = 1;
          RatVector r = amb.bracket(ex, amb.bracket_basis(y, z));
          for (int t = 0; t < N; ++t) sum[t] += r[t];
        };
        acc(a, b, c);
        acc(b, c, a);
        acc(c, a, b);
        for (const auto& s : sum)
          if (sgn(s) != 0) throw TheoremCheckFailed("Jacobi identity fails on the ambient algebra");
      }
  return amb;
}

}  // namespace srdev
