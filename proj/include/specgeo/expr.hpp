#pragma once

// Holomorphic expressions in z1..zn: recursive-descent parser, printer and
// jet evaluation.
//
// Grammar (whitespace insignificant, '-' and U+2212 both accepted as minus):
//   expr   := term (('+' | '-') term)*
//   term   := factor (('*' | '/') factor)*
//   factor := '-' factor | base ('^' int)?
//   base   := 'z' INT | number | 'i' | 'pi' | '(' expr ')'
//           | ('exp' | 'log') '(' expr ')'
//   int    := ['-'] digits | '(' ['-'] digits ')'

#include <cctype>
#include <cmath>
#include <complex>
#include <cstdio>
#include <memory>
#include <numbers>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "specgeo/error.hpp"
#include "specgeo/jet.hpp"

namespace specgeo {

using cplx = std::complex<double>;

enum class Op { literal, variable, add, sub, mul, div, pow, neg, exp, log };

struct ExprNode {
  Op op = Op::literal;
  cplx value{};       // literal
  int index = 0;      // variable, 0-based
  int exponent = 0;   // pow
  std::shared_ptr<const ExprNode> lhs, rhs;
};

/// Immutable expression tree; copies share nodes.
class Expression {
 public:
  Expression() = default;
  Expression(std::shared_ptr<const ExprNode> root, int n)
      : root_(std::move(root)), n_(n) {}

  const ExprNode& root() const { return *root_; }
  int vars() const { return n_; }
  bool empty() const { return !root_; }

  std::size_t node_count() const { return count(root_.get()); }

 private:
  static std::size_t count(const ExprNode* node) {
    if (!node) return 0;
    return 1 + count(node->lhs.get()) + count(node->rhs.get());
  }

  std::shared_ptr<const ExprNode> root_;
  int n_ = 0;
};

namespace detail {

inline std::shared_ptr<const ExprNode> make_literal(cplx v) {
  auto node = std::make_shared<ExprNode>();
  node->op = Op::literal;
  node->value = v;
  return node;
}

inline bool is_literal(const std::shared_ptr<const ExprNode>& node) {
  return node->op == Op::literal;
}

inline cplx int_pow(cplx base, int k) {
  if (k < 0) return cplx(1.0) / int_pow(base, -k);
  cplx result(1.0);
  while (k > 0) {
    if (k & 1) result *= base;
    k >>= 1;
    if (k > 0) base *= base;
  }
  return result;
}

/// Builds a node, folding literal-only subtrees. Folding never hides an
/// evaluation error: 1/0, 0^-k and log(0) are kept as nodes.
inline std::shared_ptr<const ExprNode> make_node(
    Op op, std::shared_ptr<const ExprNode> lhs,
    std::shared_ptr<const ExprNode> rhs = nullptr, int exponent = 0) {
  const bool foldable =
      is_literal(lhs) && (!rhs || is_literal(rhs));
  if (foldable) {
    const cplx a = lhs->value;
    const cplx b = rhs ? rhs->value : cplx{};
    switch (op) {
      case Op::add: return make_literal(a + b);
      case Op::sub: return make_literal(a - b);
      case Op::mul: return make_literal(a * b);
      case Op::div:
        if (b != cplx(0.0)) return make_literal(a / b);
        break;
      case Op::neg: return make_literal(-a);
      case Op::pow:
        if (a != cplx(0.0) || exponent >= 0)
          return make_literal(int_pow(a, exponent));
        break;
      case Op::exp: return make_literal(std::exp(a));
      case Op::log:
        if (a != cplx(0.0)) return make_literal(std::log(a));
        break;
      default: break;
    }
  }
  auto node = std::make_shared<ExprNode>();
  node->op = op;
  node->lhs = std::move(lhs);
  node->rhs = std::move(rhs);
  node->exponent = exponent;
  return node;
}

class Parser {
 public:
  Parser(std::string_view src, int n) : src_(src), n_(n) {}

  std::shared_ptr<const ExprNode> parse() {
    skip_ws();
    if (pos_ >= src_.size()) fail("empty expression");
    auto node = expr();
    skip_ws();
    if (pos_ < src_.size()) fail("unexpected trailing input");
    return node;
  }

 private:
  [[noreturn]] void fail(const std::string& msg) const {
    throw SyntaxError(pos_, msg);
  }

  void skip_ws() {
    while (pos_ < src_.size() &&
           std::isspace(static_cast<unsigned char>(src_[pos_])))
      ++pos_;
  }

  // Consumes a minus sign (ASCII or U+2212) if present.
  bool accept_minus() {
    skip_ws();
    if (pos_ < src_.size() && src_[pos_] == '-') {
      ++pos_;
      return true;
    }
    if (src_.substr(pos_, 3) == "\xE2\x88\x92") {
      pos_ += 3;
      return true;
    }
    return false;
  }

  bool accept(char c) {
    skip_ws();
    if (pos_ < src_.size() && src_[pos_] == c) {
      ++pos_;
      return true;
    }
    return false;
  }

  void expect(char c) {
    if (!accept(c)) fail(std::string("expected '") + c + "'");
  }

  std::shared_ptr<const ExprNode> expr() {
    auto lhs = term();
    for (;;) {
      if (accept('+')) {
        lhs = make_node(Op::add, lhs, term());
      } else if (accept_minus()) {
        lhs = make_node(Op::sub, lhs, term());
      } else {
        return lhs;
      }
    }
  }

  std::shared_ptr<const ExprNode> term() {
    auto lhs = factor();
    for (;;) {
      if (accept('*')) {
        lhs = make_node(Op::mul, lhs, factor());
      } else if (accept('/')) {
        lhs = make_node(Op::div, lhs, factor());
      } else {
        return lhs;
      }
    }
  }

  std::shared_ptr<const ExprNode> factor() {
    if (accept_minus()) return make_node(Op::neg, factor());
    auto b = base();
    if (accept('^')) return make_node(Op::pow, b, nullptr, integer());
    return b;
  }

  int integer() {
    const bool paren = accept('(');
    const bool negative = accept_minus();
    skip_ws();
    const std::size_t start = pos_;
    long long v = 0;
    while (pos_ < src_.size() &&
           std::isdigit(static_cast<unsigned char>(src_[pos_]))) {
      v = v * 10 + (src_[pos_] - '0');
      if (v > 1000000) fail("exponent too large");
      ++pos_;
    }
    if (pos_ == start) fail("expected integer exponent");
    if (paren) expect(')');
    return static_cast<int>(negative ? -v : v);
  }

  std::shared_ptr<const ExprNode> base() {
    skip_ws();
    if (pos_ >= src_.size()) fail("unexpected end of input");
    const char c = src_[pos_];
    if (c == '(') {
      ++pos_;
      auto inner = expr();
      expect(')');
      return inner;
    }
    if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') return number();
    if (std::isalpha(static_cast<unsigned char>(c))) return word();
    fail(std::string("unexpected character '") + c + "'");
  }

  std::shared_ptr<const ExprNode> number() {
    const std::size_t start = pos_;
    auto digits = [&] {
      while (pos_ < src_.size() &&
             std::isdigit(static_cast<unsigned char>(src_[pos_])))
        ++pos_;
    };
    digits();
    if (pos_ < src_.size() && src_[pos_] == '.') {
      ++pos_;
      digits();
    }
    if (pos_ < src_.size() && (src_[pos_] == 'e' || src_[pos_] == 'E')) {
      std::size_t save = pos_++;
      if (pos_ < src_.size() && (src_[pos_] == '+' || src_[pos_] == '-')) ++pos_;
      const std::size_t exp_start = pos_;
      digits();
      if (pos_ == exp_start) pos_ = save;  // 'e' belongs to something else
    }
    const std::string text(src_.substr(start, pos_ - start));
    if (text == ".") fail("malformed number");
    return make_literal(cplx(std::stod(text), 0.0));
  }

  std::shared_ptr<const ExprNode> word() {
    const std::size_t start = pos_;
    while (pos_ < src_.size() &&
           std::isalpha(static_cast<unsigned char>(src_[pos_])))
      ++pos_;
    const std::string_view name = src_.substr(start, pos_ - start);
    if (name == "z") {
      const std::size_t digits_start = pos_;
      int index = 0;
      while (pos_ < src_.size() &&
             std::isdigit(static_cast<unsigned char>(src_[pos_]))) {
        index = index * 10 + (src_[pos_] - '0');
        if (index > 100000) fail("variable index too large");
        ++pos_;
      }
      if (pos_ == digits_start) fail("expected variable index after 'z'");
      if (index == 0) {
        pos_ = start;
        fail("variables are numbered from z1");
      }
      if (index > n_) throw UnknownVariable(start, index, n_);
      auto node = std::make_shared<ExprNode>();
      node->op = Op::variable;
      node->index = index - 1;
      return node;
    }
    if (name == "i") return make_literal(cplx(0.0, 1.0));
    if (name == "pi") return make_literal(cplx(std::numbers::pi, 0.0));
    if (name == "exp" || name == "log") {
      expect('(');
      auto arg = expr();
      expect(')');
      return make_node(name == "exp" ? Op::exp : Op::log, arg);
    }
    pos_ = start;
    fail("unknown identifier '" + std::string(name) + "'");
  }

  std::string_view src_;
  int n_;
  std::size_t pos_ = 0;
};

inline std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

inline void print_node(const ExprNode& node, std::string& out) {
  auto binary = [&](const char* op) {
    out += '(';
    print_node(*node.lhs, out);
    out += op;
    print_node(*node.rhs, out);
    out += ')';
  };
  switch (node.op) {
    case Op::literal: {
      // Always "(re+im*i)" or "(re-im*i)", which folds back to one literal.
      const double im = node.value.imag();
      out += '(' + format_double(node.value.real());
      out += std::signbit(im) ? '-' : '+';
      out += format_double(std::abs(im)) + "*i)";
      break;
    }
    case Op::variable: out += 'z' + std::to_string(node.index + 1); break;
    case Op::add: binary("+"); break;
    case Op::sub: binary("-"); break;
    case Op::mul: binary("*"); break;
    case Op::div: binary("/"); break;
    case Op::pow:
      out += '(';
      print_node(*node.lhs, out);
      out += "^(" + std::to_string(node.exponent) + "))";
      break;
    case Op::neg:
      out += "(-";
      print_node(*node.lhs, out);
      out += ')';
      break;
    case Op::exp:
    case Op::log:
      out += node.op == Op::exp ? "exp(" : "log(";
      print_node(*node.lhs, out);
      out += ')';
      break;
  }
}

inline HoloJet eval_node(const ExprNode& node, std::span<const HoloJet> vars,
                         int n, int order) {
  switch (node.op) {
    case Op::literal: return HoloJet::constant(n, order, node.value);
    case Op::variable: return vars[static_cast<std::size_t>(node.index)];
    case Op::add:
      return eval_node(*node.lhs, vars, n, order) +
             eval_node(*node.rhs, vars, n, order);
    case Op::sub:
      return eval_node(*node.lhs, vars, n, order) -
             eval_node(*node.rhs, vars, n, order);
    case Op::mul:
      return eval_node(*node.lhs, vars, n, order) *
             eval_node(*node.rhs, vars, n, order);
    case Op::div:
      return eval_node(*node.lhs, vars, n, order) /
             eval_node(*node.rhs, vars, n, order);
    case Op::pow: return pow(eval_node(*node.lhs, vars, n, order), node.exponent);
    case Op::neg: return -eval_node(*node.lhs, vars, n, order);
    case Op::exp: return exp(eval_node(*node.lhs, vars, n, order));
    case Op::log: return log(eval_node(*node.lhs, vars, n, order));
  }
  throw std::logic_error("corrupt expression node");
}

}  // namespace detail

/// Parses `source` as a holomorphic expression in z1..zn.
inline Expression parse_expression(std::string_view source, int n) {
  if (n < 1) throw std::invalid_argument("dimension must be positive");
  return Expression(detail::Parser(source, n).parse(), n);
}

/// Fully parenthesized text that parses back to an equivalent tree.
inline std::string print(const Expression& e) {
  std::string out;
  detail::print_node(e.root(), out);
  return out;
}

/// Exact holomorphic jet of `e` at `z` through `order` (0..3).
template <class Vector>
HoloJet eval_jet(const Expression& e, const Vector& z, int order) {
  if (order < 0 || order > kMaxJetOrder)
    throw std::invalid_argument("jet order must be in 0..3");
  const int n = e.vars();
  if (static_cast<int>(z.size()) != n)
    throw std::invalid_argument("point dimension does not match expression");
  std::vector<HoloJet> vars;
  vars.reserve(static_cast<std::size_t>(n));
  for (int k = 0; k < n; ++k)
    vars.push_back(HoloJet::variable(n, order, k, cplx(z[k])));
  return detail::eval_node(e.root(), vars, n, order);
}

template <class Vector>
cplx evaluate(const Expression& e, const Vector& z) {
  return eval_jet(e, z, 0).value();
}

}  // namespace specgeo
