#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

#include "srdev/rational.hpp"

namespace srdev {

using RatVector = std::vector<Rational>;

/// Dense row-major matrix of exact rationals. Subspaces are represented as
/// matrices whose rows span them.
class RatMatrix {
public:
  RatMatrix() = default;
  RatMatrix(std::size_t rows, std::size_t cols) : rows_(rows), cols_(cols), data_(rows * cols) {}

  static RatMatrix identity(std::size_t n);
  static RatMatrix from_rows(const std::vector<RatVector>& rows, std::size_t cols);

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  bool empty() const { return rows_ == 0; }

  Rational& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
  const Rational& operator()(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }

  std::span<Rational> row(std::size_t r) { return {data_.data() + r * cols_, cols_}; }
  std::span<const Rational> row(std::size_t r) const { return {data_.data() + r * cols_, cols_}; }
  RatVector row_vector(std::size_t r) const;

  void append_row(std::span<const Rational> v);

  RatMatrix transpose() const;
  bool is_zero() const;

  friend RatMatrix operator*(const RatMatrix& a, const RatMatrix& b);
  friend RatMatrix operator+(const RatMatrix& a, const RatMatrix& b);
  friend RatMatrix operator-(const RatMatrix& a, const RatMatrix& b);
  friend bool operator==(const RatMatrix& a, const RatMatrix& b);

private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<Rational> data_;
};

RatVector operator*(const RatMatrix& a, std::span<const Rational> x);

struct Rref {
  RatMatrix reduced;                 ///< reduced row-echelon form, zero rows at the bottom
  std::vector<std::size_t> pivots;   ///< pivot column of each nonzero row
};

/// Gauss-Jordan elimination. Pivoting is deterministic: the first column with
/// a nonzero entry at or below the current row, taking the smallest such row.
Rref rref(RatMatrix m);
std::size_t rank(const RatMatrix& m);

/// Rows form a basis of {x : m x = 0}, one row per free column.
RatMatrix nullspace(const RatMatrix& m);
/// Nonzero rows of rref(m): a canonical basis of the row space.
RatMatrix row_basis(const RatMatrix& m);

RatMatrix vstack(const RatMatrix& a, const RatMatrix& b);
bool in_row_span(const RatMatrix& span, std::span<const Rational> v);

std::optional<RatVector> solve(const RatMatrix& a, std::span<const Rational> b);
std::optional<RatMatrix> inverse(const RatMatrix& a);
/// Moore-Penrose pseudo-inverse through a full-rank factorisation.
RatMatrix pseudo_inverse(const RatMatrix& a);

/// {x : <u, x>_G = 0 for every row u of span}, G symmetric.
RatMatrix orthogonal_complement(const RatMatrix& span, const RatMatrix& gram);
/// Basis of the intersection of two row spaces of equal width.
RatMatrix intersection(const RatMatrix& a, const RatMatrix& b);

Rational dot(std::span<const Rational> a, std::span<const Rational> b);
Rational inner(std::span<const Rational> a, const RatMatrix& gram, std::span<const Rational> b);

}  // namespace srdev
