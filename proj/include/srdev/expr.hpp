#pragma once

#include <memory>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "srdev/rational.hpp"

namespace srdev {

/// Coordinate chart: coordinate names, which of them are angles, and the box
/// used for sample grids and exit detection.
struct Chart {
  std::vector<std::string> coords;
  std::vector<bool> periodic;                    ///< same length as coords
  std::vector<std::pair<double, double>> box;    ///< same length as coords

  int dim() const { return static_cast<int>(coords.size()); }
  /// Index of a coordinate name, or -1.
  int index(std::string_view name) const;
  /// True if q lies in the box, periodic coordinates taken mod 2 pi.
  bool contains(std::span<const double> q) const;
  friend bool operator==(const Chart&, const Chart&) = default;
};

enum class Op { Const, Var, Neg, Add, Sub, Mul, Div, Pow, Sin, Cos, Exp };

struct ExprNode;

/// Immutable expression tree. Constructors fold rational constants and drop
/// neutral elements, so derivatives stay small.
class Expr {
public:
  Expr();  // zero
  Expr(int value);
  Expr(const Rational& value);

  static Expr var(int index);
  static Expr sin(const Expr& a);
  static Expr cos(const Expr& a);
  static Expr exp(const Expr& a);
  static Expr pow(const Expr& a, int k);

  Op op() const;
  const Rational& value() const;  ///< Const only
  int index() const;              ///< Var only
  int exponent() const;           ///< Pow only
  Expr lhs() const;
  Expr rhs() const;

  bool is_const() const { return op() == Op::Const; }
  bool is_zero() const;
  bool is_one() const;

  double eval(std::span<const double> x) const;
  Expr derivative(int var) const;
  /// Replaces variable i by subs[i].
  Expr substitute(const std::vector<Expr>& subs) const;
  /// Structural equality.
  bool same(const Expr& o) const;

  const ExprNode* node() const { return node_.get(); }

  friend Expr operator-(const Expr& a);
  friend Expr operator+(const Expr& a, const Expr& b);
  friend Expr operator-(const Expr& a, const Expr& b);
  friend Expr operator*(const Expr& a, const Expr& b);
  friend Expr operator/(const Expr& a, const Expr& b);

  explicit Expr(std::shared_ptr<const ExprNode> n) : node_(std::move(n)) {}

private:
  std::shared_ptr<const ExprNode> node_;
};

struct ExprNode {
  Op op;
  Rational value;
  int index = 0;  ///< variable index or exponent
  std::shared_ptr<const ExprNode> a, b;
};

/// Grammar: IDENT | NUMBER | NUMBER "/" NUMBER | "(" E ")" | "-" E |
/// E ("+"|"-"|"*"|"/") E | E "^" UINT | ("sin"|"cos"|"exp") "(" E ")".
/// Throws SyntaxError or UnknownIdentifier with a 0-based position.
Expr parse_expr(std::string_view text, const std::vector<std::string>& names);
inline Expr parse_expr(std::string_view text, const Chart& chart) {
  return parse_expr(text, chart.coords);
}

/// Printed form re-parses to an equal-valued expression.
std::string to_string(const Expr& e, const std::vector<std::string>& names);

/// Vector field sum_a v[a] d/dx^a applied to f.
Expr apply_field(const std::vector<Expr>& v, const Expr& f);

/// Several expressions compiled into one register tape with shared
/// subexpressions merged. Evaluation is reentrant given separate workspaces.
class ExprProgram {
public:
  ExprProgram() = default;
  explicit ExprProgram(const std::vector<Expr>& outputs);

  std::size_t outputs() const { return out_.size(); }
  std::size_t registers() const { return code_.size(); }
  std::vector<double> workspace() const { return std::vector<double>(code_.size()); }
  void eval(const double* x, double* out, double* ws) const;
  std::vector<double> eval(std::span<const double> x) const;

private:
  struct Instr {
    Op op;
    int a = -1, b = -1, k = 0;
    double c = 0.0;
  };
  std::vector<Instr> code_;
  std::vector<int> out_;
};

}  // namespace srdev
