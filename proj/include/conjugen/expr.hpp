#pragma once

#include <charconv>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "conjugen/dual.hpp"

namespace conjugen {

// ---------------------------------------------------------------------------
// Errors
// ---------------------------------------------------------------------------

struct ParseError : std::runtime_error {
  std::size_t position;
  ParseError(std::size_t pos, const std::string& what)
      : std::runtime_error(what + " (at position " + std::to_string(pos) + ")"),
        position(pos) {}
};

/// Malformed input: bad token, unbalanced parens, non-integer exponent, ...
struct SyntaxError : ParseError {
  using ParseError::ParseError;
};

/// Variable index outside 1..k.
struct ArityError : ParseError {
  using ParseError::ParseError;
};

/// Function name outside the holomorphic primitive set (conj, abs, ...).
struct NonHolomorphic : ParseError {
  using ParseError::ParseError;
};

/// Pole or branch point hit while evaluating (division by zero, log 0).
struct EvalDomainError : std::runtime_error {
  std::string subexpression;
  explicit EvalDomainError(const std::string& what, std::string subexpr)
      : std::runtime_error(what + " in " + subexpr), subexpression(std::move(subexpr)) {}
};

// ---------------------------------------------------------------------------
// AST
// ---------------------------------------------------------------------------

enum class NodeKind : std::uint8_t { Literal, Variable, Negate, Add, Sub, Mul, Div, PowInt, Call };
enum class FuncKind : std::uint8_t { Exp, Sin, Cos, Log };

struct ExprNode {
  NodeKind kind{};
  cdouble literal{};   // Literal
  int var_index = 0;   // Variable, 1-based
  int lhs = -1;        // Negate/Call operand, binary left, PowInt base
  int rhs = -1;        // binary right
  long exponent = 0;   // PowInt
  FuncKind func{};     // Call
};

/// A parsed holomorphic expression in k complex variables phi1..phiK.
/// Nodes live in an arena; immutable after parse.
struct HoloExpr {
  std::vector<ExprNode> nodes;
  int root = -1;
  int arity = 0;
};

HoloExpr parse(std::string_view source, int arity);
std::string print(const HoloExpr& expr);

namespace detail {

struct Token {
  enum Kind { Number, Ident, Plus, Minus, Star, Slash, Caret, LParen, RParen, End } kind;
  std::size_t pos;
  std::string_view text;
  double number = 0.0;
  bool integral = false;  // digits only: usable as an exponent
};

class Lexer {
 public:
  explicit Lexer(std::string_view src) : src_(src) { advance(); }

  const Token& peek() const { return tok_; }

  Token take() {
    Token t = tok_;
    advance();
    return t;
  }

 private:
  void advance() {
    while (i_ < src_.size() && std::isspace(static_cast<unsigned char>(src_[i_]))) ++i_;
    tok_.pos = i_;
    if (i_ >= src_.size()) {
      tok_.kind = Token::End;
      tok_.text = {};
      return;
    }
    char c = src_[i_];
    switch (c) {
      case '+': single(Token::Plus); return;
      case '-': single(Token::Minus); return;
      case '*': single(Token::Star); return;
      case '/': single(Token::Slash); return;
      case '^': single(Token::Caret); return;
      case '(': single(Token::LParen); return;
      case ')': single(Token::RParen); return;
      default: break;
    }
    if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') {
      std::size_t start = i_;
      bool integral = true;
      while (i_ < src_.size() && std::isdigit(static_cast<unsigned char>(src_[i_]))) ++i_;
      if (i_ < src_.size() && src_[i_] == '.') {
        integral = false;
        ++i_;
        while (i_ < src_.size() && std::isdigit(static_cast<unsigned char>(src_[i_]))) ++i_;
      }
      if (i_ < src_.size() && (src_[i_] == 'e' || src_[i_] == 'E')) {
        std::size_t j = i_ + 1;
        if (j < src_.size() && (src_[j] == '+' || src_[j] == '-')) ++j;
        if (j < src_.size() && std::isdigit(static_cast<unsigned char>(src_[j]))) {
          integral = false;
          i_ = j;
          while (i_ < src_.size() && std::isdigit(static_cast<unsigned char>(src_[i_]))) ++i_;
        }
      }
      tok_.kind = Token::Number;
      tok_.text = src_.substr(start, i_ - start);
      tok_.integral = integral;
      double v = 0.0;
      auto [p, ec] = std::from_chars(tok_.text.data(), tok_.text.data() + tok_.text.size(), v);
      if (ec != std::errc() || p != tok_.text.data() + tok_.text.size())
        throw SyntaxError(start, "malformed number '" + std::string(tok_.text) + "'");
      tok_.number = v;
      return;
    }
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
      std::size_t start = i_;
      while (i_ < src_.size() &&
             (std::isalnum(static_cast<unsigned char>(src_[i_])) || src_[i_] == '_'))
        ++i_;
      tok_.kind = Token::Ident;
      tok_.text = src_.substr(start, i_ - start);
      return;
    }
    throw SyntaxError(i_, std::string("unexpected character '") + c + "'");
  }

  void single(Token::Kind k) {
    tok_.kind = k;
    tok_.text = src_.substr(i_, 1);
    ++i_;
  }

  std::string_view src_;
  std::size_t i_ = 0;
  Token tok_{};
};

class Parser {
 public:
  Parser(std::string_view src, int arity) : lex_(src), arity_(arity) {}

  HoloExpr run() {
    HoloExpr e;
    e.arity = arity_;
    nodes_ = &e.nodes;
    e.root = expression();
    const Token& t = lex_.peek();
    if (t.kind != Token::End)
      throw SyntaxError(t.pos, "unexpected trailing input '" + std::string(t.text) + "'");
    return e;
  }

 private:
  int add(ExprNode n) {
    nodes_->push_back(n);
    return static_cast<int>(nodes_->size()) - 1;
  }

  int expression() {
    int lhs = term();
    while (true) {
      Token::Kind k = lex_.peek().kind;
      if (k != Token::Plus && k != Token::Minus) return lhs;
      lex_.take();
      int rhs = term();
      ExprNode n;
      n.kind = (k == Token::Plus) ? NodeKind::Add : NodeKind::Sub;
      n.lhs = lhs;
      n.rhs = rhs;
      lhs = add(n);
    }
  }

  int term() {
    int lhs = factor();
    while (true) {
      Token::Kind k = lex_.peek().kind;
      if (k != Token::Star && k != Token::Slash) return lhs;
      lex_.take();
      int rhs = factor();
      ExprNode n;
      n.kind = (k == Token::Star) ? NodeKind::Mul : NodeKind::Div;
      n.lhs = lhs;
      n.rhs = rhs;
      lhs = add(n);
    }
  }

  int factor() {
    if (lex_.peek().kind == Token::Minus) {
      std::size_t pos = lex_.peek().pos;
      lex_.take();
      int operand = factor();
      (void)pos;
      ExprNode n;
      n.kind = NodeKind::Negate;
      n.lhs = operand;
      return add(n);
    }
    return power();
  }

  int power() {
    int base = primary();
    if (lex_.peek().kind != Token::Caret) return base;
    lex_.take();
    long sign = 1;
    if (lex_.peek().kind == Token::Minus) {
      lex_.take();
      sign = -1;
    }
    Token t = lex_.take();
    if (t.kind != Token::Number || !t.integral)
      throw SyntaxError(t.pos, "exponent must be an integer literal");
    ExprNode n;
    n.kind = NodeKind::PowInt;
    n.lhs = base;
    n.exponent = sign * static_cast<long>(t.number);
    return add(n);
  }

  int primary() {
    Token t = lex_.take();
    switch (t.kind) {
      case Token::Number: {
        ExprNode n;
        n.kind = NodeKind::Literal;
        n.literal = cdouble{t.number, 0.0};
        return add(n);
      }
      case Token::LParen: {
        int inner = expression();
        Token close = lex_.take();
        if (close.kind != Token::RParen)
          throw SyntaxError(close.pos, "expected ')'");
        return inner;
      }
      case Token::Ident:
        return identifier(t);
      default:
        throw SyntaxError(t.pos, "expected a number, variable, function or '('");
    }
  }

  int identifier(const Token& t) {
    std::string_view name = t.text;
    if (name == "i") {
      ExprNode n;
      n.kind = NodeKind::Literal;
      n.literal = cdouble{0.0, 1.0};
      return add(n);
    }
    if (lex_.peek().kind == Token::LParen) {
      FuncKind f;
      if (name == "exp") f = FuncKind::Exp;
      else if (name == "sin") f = FuncKind::Sin;
      else if (name == "cos") f = FuncKind::Cos;
      else if (name == "log") f = FuncKind::Log;
      else
        throw NonHolomorphic(t.pos, "function '" + std::string(name) +
                                        "' is not an admitted holomorphic primitive");
      lex_.take();
      int arg = expression();
      Token close = lex_.take();
      if (close.kind != Token::RParen)
        throw SyntaxError(close.pos, "expected ')' after function argument");
      ExprNode n;
      n.kind = NodeKind::Call;
      n.func = f;
      n.lhs = arg;
      return add(n);
    }
    if (name.size() > 3 && name.substr(0, 3) == "phi") {
      std::string_view digits = name.substr(3);
      bool all_digits = !digits.empty();
      for (char c : digits)
        if (!std::isdigit(static_cast<unsigned char>(c))) all_digits = false;
      if (all_digits) {
        int idx = 0;
        std::from_chars(digits.data(), digits.data() + digits.size(), idx);
        if (idx < 1 || idx > arity_)
          throw ArityError(t.pos, "variable phi" + std::to_string(idx) +
                                      " out of range 1.." + std::to_string(arity_));
        ExprNode n;
        n.kind = NodeKind::Variable;
        n.var_index = idx;
        return add(n);
      }
    }
    throw SyntaxError(t.pos, "unknown identifier '" + std::string(name) + "'");
  }

  Lexer lex_;
  int arity_;
  std::vector<ExprNode>* nodes_ = nullptr;
};

inline std::string format_double(double v) {
  char buf[32];
  auto [p, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, p);
}

inline void print_node(const HoloExpr& e, int idx, std::string& out) {
  const ExprNode& n = e.nodes[idx];
  switch (n.kind) {
    case NodeKind::Literal:
      if (n.literal == cdouble{0.0, 1.0}) {
        out += 'i';
      } else {
        out += format_double(n.literal.real());
      }
      return;
    case NodeKind::Variable:
      out += "phi" + std::to_string(n.var_index);
      return;
    case NodeKind::Negate:
      out += "(-";
      print_node(e, n.lhs, out);
      out += ')';
      return;
    case NodeKind::Add:
    case NodeKind::Sub:
    case NodeKind::Mul:
    case NodeKind::Div: {
      const char* op = n.kind == NodeKind::Add   ? " + "
                       : n.kind == NodeKind::Sub ? " - "
                       : n.kind == NodeKind::Mul ? " * "
                                                 : " / ";
      out += '(';
      print_node(e, n.lhs, out);
      out += op;
      print_node(e, n.rhs, out);
      out += ')';
      return;
    }
    case NodeKind::PowInt:
      out += '(';
      print_node(e, n.lhs, out);
      out += '^';
      out += std::to_string(n.exponent);
      out += ')';
      return;
    case NodeKind::Call: {
      const char* f = n.func == FuncKind::Exp   ? "exp"
                      : n.func == FuncKind::Sin ? "sin"
                      : n.func == FuncKind::Cos ? "cos"
                                                : "log";
      out += f;
      out += '(';
      print_node(e, n.lhs, out);
      out += ')';
      return;
    }
  }
}

inline std::string print_subtree(const HoloExpr& e, int idx) {
  std::string s;
  print_node(e, idx, s);
  return s;
}

template <class S>
S eval_node(const HoloExpr& e, int idx, std::span<const S> vars, const S& exemplar) {
  const ExprNode& n = e.nodes[idx];
  switch (n.kind) {
    case NodeKind::Literal:
      return constant_like(exemplar, n.literal);
    case NodeKind::Variable:
      return vars[static_cast<std::size_t>(n.var_index - 1)];
    case NodeKind::Negate:
      return -eval_node(e, n.lhs, vars, exemplar);
    case NodeKind::Add:
      return eval_node(e, n.lhs, vars, exemplar) + eval_node(e, n.rhs, vars, exemplar);
    case NodeKind::Sub:
      return eval_node(e, n.lhs, vars, exemplar) - eval_node(e, n.rhs, vars, exemplar);
    case NodeKind::Mul:
      return eval_node(e, n.lhs, vars, exemplar) * eval_node(e, n.rhs, vars, exemplar);
    case NodeKind::Div: {
      S num = eval_node(e, n.lhs, vars, exemplar);
      S den = eval_node(e, n.rhs, vars, exemplar);
      if (primal(den) == cdouble{})
        throw EvalDomainError("division by zero", print_subtree(e, idx));
      return num / den;
    }
    case NodeKind::PowInt: {
      S base = eval_node(e, n.lhs, vars, exemplar);
      if (n.exponent >= 0) return pow_nonneg(base, n.exponent);
      if (primal(base) == cdouble{})
        throw EvalDomainError("zero raised to a negative power", print_subtree(e, idx));
      return constant_like(exemplar, cdouble{1.0, 0.0}) / pow_nonneg(base, -n.exponent);
    }
    case NodeKind::Call: {
      S arg = eval_node(e, n.lhs, vars, exemplar);
      switch (n.func) {
        case FuncKind::Exp: return exp(arg);
        case FuncKind::Sin: return sin(arg);
        case FuncKind::Cos: return cos(arg);
        case FuncKind::Log:
          if (primal(arg) == cdouble{})
            throw EvalDomainError("log of zero", print_subtree(e, idx));
          return log(arg);
      }
    }
  }
  throw std::logic_error("corrupt expression node");
}

}  // namespace detail

inline HoloExpr parse(std::string_view source, int arity) {
  if (source.empty()) throw SyntaxError(0, "empty expression");
  if (arity < 1) throw ArityError(0, "arity must be >= 1");
  return detail::Parser(source, arity).run();
}

inline std::string print(const HoloExpr& expr) { return detail::print_subtree(expr, expr.root); }

/// Node count along the longest root-to-leaf chain.
inline int depth(const HoloExpr& expr) {
  struct Rec {
    const HoloExpr& e;
    int operator()(int idx) const {
      const ExprNode& n = e.nodes[idx];
      int d = 0;
      if (n.lhs >= 0) d = (*this)(n.lhs);
      if (n.rhs >= 0) d = std::max(d, (*this)(n.rhs));
      return d + 1;
    }
  };
  return Rec{expr}(expr.root);
}

inline bool structurally_equal(const HoloExpr& a, const HoloExpr& b) {
  if (a.arity != b.arity) return false;
  struct Rec {
    const HoloExpr& a;
    const HoloExpr& b;
    bool operator()(int ia, int ib) const {
      const ExprNode& na = a.nodes[ia];
      const ExprNode& nb = b.nodes[ib];
      if (na.kind != nb.kind) return false;
      switch (na.kind) {
        case NodeKind::Literal: return na.literal == nb.literal;
        case NodeKind::Variable: return na.var_index == nb.var_index;
        case NodeKind::Negate: return (*this)(na.lhs, nb.lhs);
        case NodeKind::PowInt:
          return na.exponent == nb.exponent && (*this)(na.lhs, nb.lhs);
        case NodeKind::Call: return na.func == nb.func && (*this)(na.lhs, nb.lhs);
        default: return (*this)(na.lhs, nb.lhs) && (*this)(na.rhs, nb.rhs);
      }
    }
  };
  return Rec{a, b}(a.root, b.root);
}

/// Value, gradient and Hessian of F at phi.
struct EvalResult {
  cdouble value;
  std::vector<cdouble> grad;
  std::vector<std::vector<cdouble>> hess;
};

namespace detail {

inline void check_arity(const HoloExpr& expr, std::size_t got) {
  if (static_cast<std::size_t>(expr.arity) != got)
    throw ArityError(0, "expected " + std::to_string(expr.arity) + " variables, got " +
                            std::to_string(got));
}

}  // namespace detail

inline cdouble evaluate_value(const HoloExpr& expr, std::span<const cdouble> phi) {
  detail::check_arity(expr, phi.size());
  cdouble exemplar{};
  return detail::eval_node<cdouble>(expr, expr.root, phi, exemplar);
}

inline std::vector<cdouble> evaluate_gradient(const HoloExpr& expr,
                                              std::span<const cdouble> phi) {
  detail::check_arity(expr, phi.size());
  const std::size_t k = phi.size();
  using D = Dual<cdouble>;
  std::vector<D> vars(k);
  for (std::size_t m = 0; m < k; ++m) {
    vars[m].value = phi[m];
    vars[m].part.assign(k, cdouble{});
    vars[m].part[m] = cdouble{1.0, 0.0};
  }
  D exemplar;
  exemplar.part.assign(k, cdouble{});
  D r = detail::eval_node<D>(expr, expr.root, std::span<const D>(vars), exemplar);
  return r.part;
}

inline EvalResult evaluate(const HoloExpr& expr, std::span<const cdouble> phi) {
  detail::check_arity(expr, phi.size());
  const std::size_t k = phi.size();
  using D1 = Dual<cdouble>;
  using D2 = Dual<D1>;
  D1 inner_zero;
  inner_zero.part.assign(k, cdouble{});
  std::vector<D2> vars(k);
  for (std::size_t m = 0; m < k; ++m) {
    vars[m].value = inner_zero;
    vars[m].value.value = phi[m];
    vars[m].value.part[m] = cdouble{1.0, 0.0};
    vars[m].part.assign(k, inner_zero);
    vars[m].part[m].value = cdouble{1.0, 0.0};
  }
  D2 exemplar;
  exemplar.value = inner_zero;
  exemplar.part.assign(k, inner_zero);
  D2 r = detail::eval_node<D2>(expr, expr.root, std::span<const D2>(vars), exemplar);
  EvalResult out;
  out.value = r.value.value;
  out.grad.resize(k);
  for (std::size_t i = 0; i < k; ++i) out.grad[i] = r.value.part[i];
  out.hess.assign(k, std::vector<cdouble>(k));
  // the (i,j) and (j,i) slots are one mixed partial; fill both from i<=j
  for (std::size_t i = 0; i < k; ++i)
    for (std::size_t j = i; j < k; ++j) {
      cdouble v = r.part[i].part[j];
      out.hess[i][j] = v;
      out.hess[j][i] = v;
    }
  return out;
}

}  // namespace conjugen
