#include "srdev/linalg.hpp"

#include <cassert>

#include "srdev/errors.hpp"

namespace srdev {

RatMatrix RatMatrix::identity(std::size_t n) {
  RatMatrix m(n, n);
  for (std::size_t i = 0; i < n; ++i) m(i, i) = 1;
  return m;
}

RatMatrix RatMatrix::from_rows(const std::vector<RatVector>& rows, std::size_t cols) {
  RatMatrix m(rows.size(), cols);
  for (std::size_t r = 0; r < rows.size(); ++r) {
    if (rows[r].size() != cols) throw DimensionMismatch("row width differs from column count");
    for (std::size_t c = 0; c < cols; ++c) m(r, c) = rows[r][c];
  }
  return m;
}

RatVector RatMatrix::row_vector(std::size_t r) const {
  auto s = row(r);
  return RatVector(s.begin(), s.end());
}

void RatMatrix::append_row(std::span<const Rational> v) {
  if (rows_ == 0 && cols_ == 0) cols_ = v.size();
  if (v.size() != cols_) throw DimensionMismatch("appended row has wrong width");
  data_.insert(data_.end(), v.begin(), v.end());
  ++rows_;
}

RatMatrix RatMatrix::transpose() const {
  RatMatrix t(cols_, rows_);
  for (std::size_t r = 0; r < rows_; ++r)
    for (std::size_t c = 0; c < cols_; ++c) t(c, r) = (*this)(r, c);
  return t;
}

bool RatMatrix::is_zero() const {
  for (const auto& x : data_)
    if (sgn(x) != 0) return false;
  return true;
}

RatMatrix operator*(const RatMatrix& a, const RatMatrix& b) {
  if (a.cols() != b.rows()) throw DimensionMismatch("matrix product shape mismatch");
  RatMatrix out(a.rows(), b.cols());
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t k = 0; k < a.cols(); ++k) {
      const Rational& aik = a(i, k);
      if (sgn(aik) == 0) continue;
      for (std::size_t j = 0; j < b.cols(); ++j)
        if (sgn(b(k, j)) != 0) out(i, j) += aik * b(k, j);
    }
  return out;
}

RatMatrix operator+(const RatMatrix& a, const RatMatrix& b) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) throw DimensionMismatch("matrix sum shape");
  RatMatrix out = a;
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t j = 0; j < a.cols(); ++j) out(i, j) += b(i, j);
  return out;
}

RatMatrix operator-(const RatMatrix& a, const RatMatrix& b) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) throw DimensionMismatch("matrix difference shape");
  RatMatrix out = a;
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t j = 0; j < a.cols(); ++j) out(i, j) -= b(i, j);
  return out;
}

bool operator==(const RatMatrix& a, const RatMatrix& b) {
  return a.rows_ == b.rows_ && a.cols_ == b.cols_ && a.data_ == b.data_;
}

RatVector operator*(const RatMatrix& a, std::span<const Rational> x) {
  if (a.cols() != x.size()) throw DimensionMismatch("matrix-vector shape mismatch");
  RatVector out(a.rows());
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t j = 0; j < a.cols(); ++j)
      if (sgn(a(i, j)) != 0 && sgn(x[j]) != 0) out[i] += a(i, j) * x[j];
  return out;
}

Rref rref(RatMatrix m) {
  Rref out;
  const std::size_t rows = m.rows(), cols = m.cols();
  std::size_t r = 0;
  std::vector<std::size_t> nz;
  for (std::size_t c = 0; c < cols && r < rows; ++c) {
    std::size_t p = r;
    while (p < rows && sgn(m(p, c)) == 0) ++p;
    if (p == rows) continue;
    if (p != r)
      for (std::size_t j = 0; j < cols; ++j) swap(m(p, j), m(r, j));
    const Rational inv = 1 / m(r, c);
    nz.clear();
    for (std::size_t j = c; j < cols; ++j)
      if (sgn(m(r, j)) != 0) {
        m(r, j) *= inv;
        nz.push_back(j);
      }
    for (std::size_t i = 0; i < rows; ++i) {
      if (i == r || sgn(m(i, c)) == 0) continue;
      const Rational f = m(i, c);
      for (std::size_t j : nz) m(i, j) -= f * m(r, j);
    }
    out.pivots.push_back(c);
    ++r;
  }
  out.reduced = std::move(m);
  return out;
}

std::size_t rank(const RatMatrix& m) { return rref(m).pivots.size(); }

RatMatrix nullspace(const RatMatrix& m) {
  const std::size_t cols = m.cols();
  Rref rr = rref(m);
  std::vector<int> pivot_row(cols, -1);
  for (std::size_t i = 0; i < rr.pivots.size(); ++i) pivot_row[rr.pivots[i]] = static_cast<int>(i);
  RatMatrix out(0, cols);
  RatVector v(cols);
  for (std::size_t f = 0; f < cols; ++f) {
    if (pivot_row[f] >= 0) continue;
    for (auto& x : v) x = 0;
    v[f] = 1;
    for (std::size_t i = 0; i < rr.pivots.size(); ++i) v[rr.pivots[i]] = -rr.reduced(i, f);
    out.append_row(v);
  }
  return out;
}

RatMatrix row_basis(const RatMatrix& m) {
  Rref rr = rref(m);
  RatMatrix out(0, m.cols());
  for (std::size_t i = 0; i < rr.pivots.size(); ++i) out.append_row(rr.reduced.row(i));
  return out;
}

RatMatrix vstack(const RatMatrix& a, const RatMatrix& b) {
  if (a.rows() == 0) return b.rows() == 0 ? RatMatrix(0, std::max(a.cols(), b.cols())) : b;
  if (b.rows() == 0) return a;
  if (a.cols() != b.cols()) throw DimensionMismatch("vstack width mismatch");
  RatMatrix out = a;
  for (std::size_t i = 0; i < b.rows(); ++i) out.append_row(b.row(i));
  return out;
}

bool in_row_span(const RatMatrix& span, std::span<const Rational> v) {
  RatMatrix ext = span.rows() ? span : RatMatrix(0, v.size());
  std::size_t before = rank(ext);
  ext.append_row(v);
  return rank(ext) == before;
}

std::optional<RatVector> solve(const RatMatrix& a, std::span<const Rational> b) {
  if (a.rows() != b.size()) throw DimensionMismatch("solve: rhs length");
  RatMatrix aug(a.rows(), a.cols() + 1);
  for (std::size_t i = 0; i < a.rows(); ++i) {
    for (std::size_t j = 0; j < a.cols(); ++j) aug(i, j) = a(i, j);
    aug(i, a.cols()) = b[i];
  }
  Rref rr = rref(aug);
  RatVector x(a.cols());
  for (std::size_t i = 0; i < rr.pivots.size(); ++i) {
    if (rr.pivots[i] == a.cols()) return std::nullopt;
    x[rr.pivots[i]] = rr.reduced(i, a.cols());
  }
  return x;
}

std::optional<RatMatrix> inverse(const RatMatrix& a) {
  if (a.rows() != a.cols()) throw DimensionMismatch("inverse of non-square matrix");
  const std::size_t n = a.rows();
  RatMatrix aug(n, 2 * n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) aug(i, j) = a(i, j);
    aug(i, n + i) = 1;
  }
  Rref rr = rref(aug);
  if (rr.pivots.size() < n || (n > 0 && rr.pivots[n - 1] != n - 1)) return std::nullopt;
  RatMatrix inv(n, n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) inv(i, j) = rr.reduced(i, n + j);
  return inv;
}

RatMatrix pseudo_inverse(const RatMatrix& a) {
  Rref rr = rref(a);
  const std::size_t r = rr.pivots.size();
  if (r == 0) return RatMatrix(a.cols(), a.rows());
  RatMatrix c(a.rows(), r);  // pivot columns of a
  RatMatrix f(r, a.cols());  // nonzero rows of rref(a); a = c f
  for (std::size_t k = 0; k < r; ++k) {
    for (std::size_t i = 0; i < a.rows(); ++i) c(i, k) = a(i, rr.pivots[k]);
    for (std::size_t j = 0; j < a.cols(); ++j) f(k, j) = rr.reduced(k, j);
  }
  RatMatrix ct = c.transpose(), ft = f.transpose();
  auto ctc_inv = inverse(ct * c);
  auto fft_inv = inverse(f * ft);
  assert(ctc_inv && fft_inv);
  return ft * *fft_inv * *ctc_inv * ct;
}

RatMatrix orthogonal_complement(const RatMatrix& span, const RatMatrix& gram) {
  if (span.rows() == 0) return RatMatrix::identity(gram.rows());
  return nullspace(span * gram);
}

RatMatrix intersection(const RatMatrix& a, const RatMatrix& b) {
  const std::size_t width = std::max(a.cols(), b.cols());
  if (a.rows() == 0 || b.rows() == 0) return RatMatrix(0, width);
  RatMatrix ab = row_basis(a), bb = row_basis(b);
  // Solve sum_i x_i a_i - sum_j y_j b_j = 0.
  RatMatrix k(width, ab.rows() + bb.rows());
  for (std::size_t i = 0; i < ab.rows(); ++i)
    for (std::size_t c = 0; c < width; ++c) k(c, i) = ab(i, c);
  for (std::size_t j = 0; j < bb.rows(); ++j)
    for (std::size_t c = 0; c < width; ++c) k(c, ab.rows() + j) = -bb(j, c);
  RatMatrix ns = nullspace(k);
  RatMatrix out(0, width);
  RatVector v(width);
  for (std::size_t s = 0; s < ns.rows(); ++s) {
    for (auto& x : v) x = 0;
    for (std::size_t i = 0; i < ab.rows(); ++i)
      if (sgn(ns(s, i)) != 0)
        for (std::size_t c = 0; c < width; ++c) v[c] += ns(s, i) * ab(i, c);
    out.append_row(v);
  }
  return row_basis(out);
}

Rational dot(std::span<const Rational> a, std::span<const Rational> b) {
  if (a.size() != b.size()) throw DimensionMismatch("dot length mismatch");
  Rational s = 0;
  for (std::size_t i = 0; i < a.size(); ++i)
    if (sgn(a[i]) != 0 && sgn(b[i]) != 0) s += a[i] * b[i];
  return s;
}

Rational inner(std::span<const Rational> a, const RatMatrix& gram, std::span<const Rational> b) {
  if (gram.rows() != a.size() || gram.cols() != b.size()) throw DimensionMismatch("inner: gram shape");
  Rational s = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (sgn(a[i]) == 0) continue;
    for (std::size_t j = 0; j < b.size(); ++j)
      if (sgn(b[j]) != 0 && sgn(gram(i, j)) != 0) s += a[i] * gram(i, j) * b[j];
  }
  return s;
}

}  // namespace srdev
