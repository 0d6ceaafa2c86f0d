#include "srdev/expr.hpp"

#include <cctype>
#include <cmath>
#include <map>
#include <numbers>
#include <tuple>
#include <unordered_map>

#include "srdev/errors.hpp"

namespace srdev {

// ---------------------------------------------------------------------------
// Chart

int Chart::index(std::string_view name) const {
  for (int i = 0; i < dim(); ++i)
    if (coords[i] == name) return i;
  return -1;
}

bool Chart::contains(std::span<const double> q) const {
  for (int i = 0; i < dim(); ++i) {
    double v = q[i];
    auto [lo, hi] = box[i];
    if (periodic[i]) {
      const double tau = 2 * std::numbers::pi;
      v = lo + std::fmod(std::fmod(v - lo, tau) + tau, tau);
    }
    if (v < lo || v > hi) return false;
  }
  return true;
}

// ---------------------------------------------------------------------------
// Construction with folding

namespace {

using NodePtr = std::shared_ptr<const ExprNode>;

NodePtr make(Op op, NodePtr a = nullptr, NodePtr b = nullptr, int index = 0) {
  auto n = std::make_shared<ExprNode>();
  n->op = op;
  n->a = std::move(a);
  n->b = std::move(b);
  n->index = index;
  return n;
}

NodePtr constant(const Rational& v) {
  auto n = std::make_shared<ExprNode>();
  n->op = Op::Const;
  n->value = v;
  return n;
}

const NodePtr& zero_node() {
  static const NodePtr z = constant(0);
  return z;
}

Rational ipow(const Rational& v, int k) {
  Rational r = 1;
  for (int i = 0; i < k; ++i) r *= v;
  return r;
}

}  // namespace

Expr::Expr() : node_(zero_node()) {}
Expr::Expr(int value) : node_(value == 0 ? zero_node() : constant(value)) {}
Expr::Expr(const Rational& value) : node_(sgn(value) == 0 ? zero_node() : constant(value)) {}

Expr Expr::var(int index) { return Expr(make(Op::Var, nullptr, nullptr, index)); }

Op Expr::op() const { return node_->op; }
const Rational& Expr::value() const { return node_->value; }
int Expr::index() const { return node_->index; }
int Expr::exponent() const { return node_->index; }
Expr Expr::lhs() const { return Expr(node_->a); }
Expr Expr::rhs() const { return Expr(node_->b); }
bool Expr::is_zero() const { return is_const() && sgn(value()) == 0; }
bool Expr::is_one() const { return is_const() && value() == 1; }

Expr Expr::sin(const Expr& a) {
  if (a.is_zero()) return Expr(0);
  return Expr(make(Op::Sin, a.node_));
}

Expr Expr::cos(const Expr& a) {
  if (a.is_zero()) return Expr(1);
  return Expr(make(Op::Cos, a.node_));
}

Expr Expr::exp(const Expr& a) {
  if (a.is_zero()) return Expr(1);
  return Expr(make(Op::Exp, a.node_));
}

Expr Expr::pow(const Expr& a, int k) {
  if (k < 0) throw SyntaxError("negative exponent", 0);
  if (k == 0) return Expr(1);
  if (k == 1) return a;
  if (a.is_const()) return Expr(ipow(a.value(), k));
  if (a.op() == Op::Pow) return pow(a.lhs(), a.exponent() * k);
  return Expr(make(Op::Pow, a.node_, nullptr, k));
}

Expr operator-(const Expr& a) {
  if (a.is_const()) return Expr(Rational(-a.value()));
  if (a.op() == Op::Neg) return a.lhs();
  return Expr(make(Op::Neg, a.node_));
}

Expr operator+(const Expr& a, const Expr& b) {
  if (a.is_const() && b.is_const()) return Expr(Rational(a.value() + b.value()));
  if (a.is_zero()) return b;
  if (b.is_zero()) return a;
  if (b.op() == Op::Neg) return a - b.lhs();
  return Expr(make(Op::Add, a.node_, b.node_));
}

Expr operator-(const Expr& a, const Expr& b) {
  if (a.is_const() && b.is_const()) return Expr(Rational(a.value() - b.value()));
  if (b.is_zero()) return a;
  if (a.is_zero()) return -b;
  if (a.same(b)) return Expr(0);
  if (b.op() == Op::Neg) return a + b.lhs();
  return Expr(make(Op::Sub, a.node_, b.node_));
}

Expr operator*(const Expr& a, const Expr& b) {
  if (a.is_const() && b.is_const()) return Expr(Rational(a.value() * b.value()));
  if (a.is_zero() || b.is_zero()) return Expr(0);
  if (a.is_one()) return b;
  if (b.is_one()) return a;
  if (a.is_const() && a.value() == -1) return -b;
  if (b.is_const() && b.value() == -1) return -a;
  if (a.op() == Op::Neg) return -(a.lhs() * b);
  if (b.op() == Op::Neg) return -(a * b.lhs());
  if (b.is_const()) return b * a;
  if (a.is_const() && b.op() == Op::Mul && b.lhs().is_const())
    return Expr(Rational(a.value() * b.lhs().value())) * b.rhs();
  if (a.same(b)) return Expr::pow(a, 2);
  return Expr(make(Op::Mul, a.node_, b.node_));
}

Expr operator/(const Expr& a, const Expr& b) {
  if (b.is_zero()) return Expr(make(Op::Div, a.node_, b.node_));
  if (a.is_zero()) return Expr(0);
  if (b.is_one()) return a;
  if (a.is_const() && b.is_const()) return Expr(Rational(a.value() / b.value()));
  if (b.is_const()) return Expr(Rational(1 / b.value())) * a;
  if (a.same(b)) return Expr(1);
  if (a.op() == Op::Neg) return -(a.lhs() / b);
  return Expr(make(Op::Div, a.node_, b.node_));
}

bool Expr::same(const Expr& o) const {
  const ExprNode* x = node_.get();
  const ExprNode* y = o.node_.get();
  if (x == y) return true;
  if (x->op != y->op) return false;
  switch (x->op) {
    case Op::Const:
      return x->value == y->value;
    case Op::Var:
      return x->index == y->index;
    case Op::Pow:
      return x->index == y->index && lhs().same(o.lhs());
    case Op::Neg:
    case Op::Sin:
    case Op::Cos:
    case Op::Exp:
      return lhs().same(o.lhs());
    default:
      return lhs().same(o.lhs()) && rhs().same(o.rhs());
  }
}

// ---------------------------------------------------------------------------
// Evaluation, derivatives, substitution

double Expr::eval(std::span<const double> x) const {
  switch (op()) {
    case Op::Const:
      return value().get_d();
    case Op::Var:
      return x[index()];
    case Op::Neg:
      return -lhs().eval(x);
    case Op::Add:
      return lhs().eval(x) + rhs().eval(x);
    case Op::Sub:
      return lhs().eval(x) - rhs().eval(x);
    case Op::Mul:
      return lhs().eval(x) * rhs().eval(x);
    case Op::Div:
      return lhs().eval(x) / rhs().eval(x);
    case Op::Pow: {
      double base = lhs().eval(x), r = 1;
      for (int i = 0; i < exponent(); ++i) r *= base;
      return r;
    }
    case Op::Sin:
      return std::sin(lhs().eval(x));
    case Op::Cos:
      return std::cos(lhs().eval(x));
    case Op::Exp:
      return std::exp(lhs().eval(x));
  }
  return 0;
}

Expr Expr::derivative(int v) const {
  switch (op()) {
    case Op::Const:
      return Expr(0);
    case Op::Var:
      return Expr(index() == v ? 1 : 0);
    case Op::Neg:
      return -lhs().derivative(v);
    case Op::Add:
      return lhs().derivative(v) + rhs().derivative(v);
    case Op::Sub:
      return lhs().derivative(v) - rhs().derivative(v);
    case Op::Mul:
      return lhs().derivative(v) * rhs() + lhs() * rhs().derivative(v);
    case Op::Div: {
      Expr db = rhs().derivative(v);
      Expr t = lhs().derivative(v) / rhs();
      if (db.is_zero()) return t;
      return t - lhs() * db / pow(rhs(), 2);
    }
    case Op::Pow:
      return Expr(exponent()) * pow(lhs(), exponent() - 1) * lhs().derivative(v);
    case Op::Sin:
      return cos(lhs()) * lhs().derivative(v);
    case Op::Cos:
      return -(sin(lhs()) * lhs().derivative(v));
    case Op::Exp:
      return *this * lhs().derivative(v);
  }
  return Expr(0);
}

Expr Expr::substitute(const std::vector<Expr>& subs) const {
  switch (op()) {
    case Op::Const:
      return *this;
    case Op::Var:
      return index() < static_cast<int>(subs.size()) ? subs[index()] : *this;
    case Op::Neg:
      return -lhs().substitute(subs);
    case Op::Add:
      return lhs().substitute(subs) + rhs().substitute(subs);
    case Op::Sub:
      return lhs().substitute(subs) - rhs().substitute(subs);
    case Op::Mul:
      return lhs().substitute(subs) * rhs().substitute(subs);
    case Op::Div:
      return lhs().substitute(subs) / rhs().substitute(subs);
    case Op::Pow:
      return pow(lhs().substitute(subs), exponent());
    case Op::Sin:
      return sin(lhs().substitute(subs));
    case Op::Cos:
      return cos(lhs().substitute(subs));
    case Op::Exp:
      return exp(lhs().substitute(subs));
  }
  return *this;
}

Expr apply_field(const std::vector<Expr>& v, const Expr& f) {
  Expr out;
  for (std::size_t a = 0; a < v.size(); ++a)
    if (!v[a].is_zero()) out = out + v[a] * f.derivative(static_cast<int>(a));
  return out;
}

// ---------------------------------------------------------------------------
// Parser

namespace {

class Parser {
public:
  Parser(std::string_view s, const std::vector<std::string>& names) : s_(s), names_(names) {}

  Expr parse() {
    Expr e = expr();
    skip();
    if (pos_ != s_.size()) throw SyntaxError(std::string("unexpected '") + s_[pos_] + "'", pos_);
    return e;
  }

private:
  void skip() {
    while (pos_ < s_.size() && std::isspace(static_cast<unsigned char>(s_[pos_]))) ++pos_;
  }
  bool accept(char c) {
    skip();
    if (pos_ < s_.size() && s_[pos_] == c) {
      ++pos_;
      return true;
    }
    return false;
  }
  void expect(char c) {
    if (!accept(c)) {
      if (pos_ >= s_.size()) throw SyntaxError(std::string("expected '") + c + "' but input ended", pos_);
      throw SyntaxError(std::string("expected '") + c + "'", pos_);
    }
  }

  Expr expr() {
    Expr e = term();
    while (true) {
      if (accept('+'))
        e = e + term();
      else if (accept('-'))
        e = e - term();
      else
        return e;
    }
  }

  Expr term() {
    Expr e = unary();
    while (true) {
      if (accept('*'))
        e = e * unary();
      else if (accept('/'))
        e = e / unary();
      else
        return e;
    }
  }

  Expr unary() {
    if (accept('-')) return -unary();
    return power();
  }

  Expr power() {
    Expr base = primary();
    std::vector<int> exps;
    while (accept('^')) {
      skip();
      std::size_t start = pos_;
      while (pos_ < s_.size() && std::isdigit(static_cast<unsigned char>(s_[pos_]))) ++pos_;
      if (start == pos_) throw SyntaxError("exponent must be a nonnegative integer", start);
      long v = std::stol(std::string(s_.substr(start, pos_ - start)));
      if (v > 64) throw SyntaxError("exponent too large", start);
      exps.push_back(static_cast<int>(v));
    }
    if (exps.empty()) return base;
    long k = exps.back();
    for (int i = static_cast<int>(exps.size()) - 2; i >= 0; --i) {
      long r = 1;
      for (int t = 0; t < k; ++t) {
        r *= exps[i];
        if (r > 64) throw SyntaxError("exponent too large", pos_);
      }
      k = r;
    }
    return Expr::pow(base, static_cast<int>(k));
  }

  Expr primary() {
    skip();
    if (pos_ >= s_.size()) throw SyntaxError("unexpected end of input", pos_);
    const char c = s_[pos_];
    if (c == '(') {
      ++pos_;
      Expr e = expr();
      expect(')');
      return e;
    }
    if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') {
      std::size_t start = pos_;
      while (pos_ < s_.size() &&
             (std::isdigit(static_cast<unsigned char>(s_[pos_])) || s_[pos_] == '.'))
        ++pos_;
      try {
        return Expr(parse_rational(s_.substr(start, pos_ - start)));
      } catch (const MalformedSpec&) {
        throw SyntaxError("malformed number", start);
      }
    }
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
      std::size_t start = pos_;
      while (pos_ < s_.size() &&
             (std::isalnum(static_cast<unsigned char>(s_[pos_])) || s_[pos_] == '_'))
        ++pos_;
      std::string name(s_.substr(start, pos_ - start));
      skip();
      if (pos_ < s_.size() && s_[pos_] == '(') {
        if (name != "sin" && name != "cos" && name != "exp")
          throw UnknownIdentifier(name, start);
        ++pos_;
        Expr arg = expr();
        expect(')');
        if (name == "sin") return Expr::sin(arg);
        if (name == "cos") return Expr::cos(arg);
        return Expr::exp(arg);
      }
      for (std::size_t i = 0; i < names_.size(); ++i)
        if (names_[i] == name) return Expr::var(static_cast<int>(i));
      throw UnknownIdentifier(name, start);
    }
    throw SyntaxError(std::string("unexpected '") + c + "'", pos_);
  }

  std::string_view s_;
  const std::vector<std::string>& names_;
  std::size_t pos_ = 0;
};

int precedence(const Expr& e) {
  switch (e.op()) {
    case Op::Add:
    case Op::Sub:
      return 1;
    case Op::Mul:
    case Op::Div:
      return 2;
    case Op::Neg:
      return 3;
    case Op::Pow:
      return 4;
    default:
      return 5;
  }
}

void print(const Expr& e, const std::vector<std::string>& names, int need, std::string& out) {
  const bool wrap = precedence(e) < need;
  if (wrap) out += "(";
  switch (e.op()) {
    case Op::Const:
      if (sgn(e.value()) < 0 || e.value().get_den() != 1)
        out += "(" + to_string(e.value()) + ")";
      else
        out += to_string(e.value());
      break;
    case Op::Var:
      out += e.index() < static_cast<int>(names.size()) ? names[e.index()]
                                                         : "v" + std::to_string(e.index());
      break;
    case Op::Neg:
      out += "-";
      print(e.lhs(), names, 3, out);
      break;
    case Op::Add:
    case Op::Sub:
      print(e.lhs(), names, 1, out);
      out += e.op() == Op::Add ? " + " : " - ";
      print(e.rhs(), names, 2, out);
      break;
    case Op::Mul:
    case Op::Div:
      print(e.lhs(), names, 2, out);
      out += e.op() == Op::Mul ? "*" : "/";
      print(e.rhs(), names, 3, out);
      break;
    case Op::Pow:
      print(e.lhs(), names, 5, out);
      out += "^" + std::to_string(e.exponent());
      break;
    case Op::Sin:
    case Op::Cos:
    case Op::Exp:
      out += e.op() == Op::Sin ? "sin(" : e.op() == Op::Cos ? "cos(" : "exp(";
      print(e.lhs(), names, 0, out);
      out += ")";
      break;
  }
  if (wrap) out += ")";
}

}  // namespace

Expr parse_expr(std::string_view text, const std::vector<std::string>& names) {
  return Parser(text, names).parse();
}

std::string to_string(const Expr& e, const std::vector<std::string>& names) {
  std::string out;
  print(e, names, 0, out);
  return out;
}

// ---------------------------------------------------------------------------
// Compiled programs

namespace {

struct Compiler {
  using Key = std::tuple<int, int, int, int, double>;
  std::vector<std::tuple<Op, int, int, int, double>>& code;
  std::map<Key, int> seen;
  std::unordered_map<const ExprNode*, int> by_node;

  int emit(Op op, int a, int b, int k, double c) {
    Key key{static_cast<int>(op), a, b, k, c};
    auto it = seen.find(key);
    if (it != seen.end()) return it->second;
    int r = static_cast<int>(code.size());
    code.emplace_back(op, a, b, k, c);
    seen.emplace(key, r);
    return r;
  }

  int compile(const Expr& e) {
    auto it = by_node.find(e.node());
    if (it != by_node.end()) return it->second;
    int r = -1;
    switch (e.op()) {
      case Op::Const:
        r = emit(Op::Const, -1, -1, 0, e.value().get_d());
        break;
      case Op::Var:
        r = emit(Op::Var, -1, -1, e.index(), 0.0);
        break;
      case Op::Pow:
        r = emit(Op::Pow, compile(e.lhs()), -1, e.exponent(), 0.0);
        break;
      case Op::Neg:
      case Op::Sin:
      case Op::Cos:
      case Op::Exp:
        r = emit(e.op(), compile(e.lhs()), -1, 0, 0.0);
        break;
      case Op::Add:
      case Op::Mul: {
        int a = compile(e.lhs()), b = compile(e.rhs());
        if (a > b) std::swap(a, b);  // commutative
        r = emit(e.op(), a, b, 0, 0.0);
        break;
      }
      default:
        r = emit(e.op(), compile(e.lhs()), compile(e.rhs()), 0, 0.0);
    }
    by_node.emplace(e.node(), r);
    return r;
  }
};

}  // namespace

ExprProgram::ExprProgram(const std::vector<Expr>& outputs) {
  std::vector<std::tuple<Op, int, int, int, double>> raw;
  Compiler comp{raw, {}, {}};
  for (const auto& e : outputs) out_.push_back(comp.compile(e));
  code_.reserve(raw.size());
  for (auto& [op, a, b, k, c] : raw) code_.push_back({op, a, b, k, c});
}

void ExprProgram::eval(const double* x, double* out, double* r) const {
  const std::size_t n = code_.size();
  for (std::size_t i = 0; i < n; ++i) {
    const Instr& in = code_[i];
    switch (in.op) {
      case Op::Const:
        r[i] = in.c;
        break;
      case Op::Var:
        r[i] = x[in.k];
        break;
      case Op::Neg:
        r[i] = -r[in.a];
        break;
      case Op::Add:
        r[i] = r[in.a] + r[in.b];
        break;
      case Op::Sub:
        r[i] = r[in.a] - r[in.b];
        break;
      case Op::Mul:
        r[i] = r[in.a] * r[in.b];
        break;
      case Op::Div:
        r[i] = r[in.a] / r[in.b];
        break;
      case Op::Pow: {
        double base = r[in.a], p = 1;
        for (int t = 0; t < in.k; ++t) p *= base;
        r[i] = p;
        break;
      }
      case Op::Sin:
        r[i] = std::sin(r[in.a]);
        break;
      case Op::Cos:
        r[i] = std::cos(r[in.a]);
        break;
      case Op::Exp:
        r[i] = std::exp(r[in.a]);
        break;
    }
  }
  for (std::size_t o = 0; o < out_.size(); ++o) out[o] = r[out_[o]];
}

std::vector<double> ExprProgram::eval(std::span<const double> x) const {
  std::vector<double> ws(code_.size()), out(out_.size());
  eval(x.data(), out.data(), ws.data());
  return out;
}

}  // namespace srdev
