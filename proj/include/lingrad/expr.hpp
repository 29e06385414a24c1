#pragma once

#include <charconv>
#include <cmath>
#include <cstdio>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "lingrad/core.hpp"
#include "lingrad/errors.hpp"

namespace lingrad::expr {

// ---------------------------------------------------------------------------
// AST
// ---------------------------------------------------------------------------

struct Node;
using ExprPtr = std::shared_ptr<const Node>;

enum class NodeKind { Number, Parameter, Variable, Unary, Binary, Call };
enum class BinaryOp { Add, Sub, Mul, Div, Pow };
enum class Func { Sin, Cos, Exp, Ln, Sqrt, Tanh };

/// Immutable AST node. `a` holds the only child of Unary/Call nodes.
struct Node {
  NodeKind kind = NodeKind::Number;
  double number = 0.0;     // Number
  std::string name;        // Parameter
  int index = 0;           // Variable, 1-based
  BinaryOp op = BinaryOp::Add;
  Func func = Func::Sin;
  ExprPtr a;
  ExprPtr b;
};

inline const char* to_string(Func f) {
  switch (f) {
    case Func::Sin:
      return "sin";
    case Func::Cos:
      return "cos";
    case Func::Exp:
      return "exp";
    case Func::Ln:
      return "ln";
    case Func::Sqrt:
      return "sqrt";
    case Func::Tanh:
      return "tanh";
  }
  return "?";
}

namespace detail {

inline double checked(double v, const char* what) {
  if (!std::isfinite(v)) {
    throw EvaluationDomainError(std::string(what) +
                                ": result is not finite (overflow)");
  }
  return v;
}

inline bool is_integral(double v) {
  return std::isfinite(v) && std::nearbyint(v) == v &&
         std::abs(v) < 9.007199254740992e15;
}

inline double eval_pow(double a, double b) {
  if (a > 0.0) return checked(std::pow(a, b), "'^'");
  if (a == 0.0) {
    if (b > 0.0) return 0.0;
    if (b == 0.0) return 1.0;
    throw EvaluationDomainError("'^': zero base with negative exponent");
  }
  if (is_integral(b)) return checked(std::pow(a, b), "'^'");
  throw EvaluationDomainError("'^': negative base with non-integer exponent");
}

inline double eval_binary(BinaryOp op, double a, double b) {
  switch (op) {
    case BinaryOp::Add:
      return checked(a + b, "'+'");
    case BinaryOp::Sub:
      return checked(a - b, "'-'");
    case BinaryOp::Mul:
      return checked(a * b, "'*'");
    case BinaryOp::Div:
      if (b == 0.0) throw EvaluationDomainError("'/': division by zero");
      return checked(a / b, "'/'");
    case BinaryOp::Pow:
      return eval_pow(a, b);
  }
  throw EvaluationDomainError("unknown binary operator");
}

inline double eval_func(Func f, double a) {
  switch (f) {
    case Func::Sin:
      return std::sin(a);
    case Func::Cos:
      return std::cos(a);
    case Func::Exp:
      return checked(std::exp(a), "exp");
    case Func::Ln:
      if (!(a > 0.0)) {
        throw EvaluationDomainError("ln: argument must be positive");
      }
      return std::log(a);
    case Func::Sqrt:
      if (a < 0.0) {
        throw EvaluationDomainError("sqrt: argument must be non-negative");
      }
      return std::sqrt(a);
    case Func::Tanh:
      return std::tanh(a);
  }
  throw EvaluationDomainError("unknown function");
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Factories (constant folding only; no algebraic simplification)
// ---------------------------------------------------------------------------

inline ExprPtr number(double v) {
  auto n = std::make_shared<Node>();
  n->kind = NodeKind::Number;
  n->number = v;
  return n;
}

inline ExprPtr parameter(std::string name) {
  auto n = std::make_shared<Node>();
  n->kind = NodeKind::Parameter;
  n->name = std::move(name);
  return n;
}

inline ExprPtr variable(int index) {
  if (index < 1) throw InvalidArgumentError("variable: index must be >= 1");
  auto n = std::make_shared<Node>();
  n->kind = NodeKind::Variable;
  n->index = index;
  return n;
}

inline ExprPtr unary_minus(ExprPtr a) {
  if (a->kind == NodeKind::Number) return number(-a->number);
  auto n = std::make_shared<Node>();
  n->kind = NodeKind::Unary;
  n->a = std::move(a);
  return n;
}

inline ExprPtr binary(BinaryOp op, ExprPtr a, ExprPtr b) {
  if (a->kind == NodeKind::Number && b->kind == NodeKind::Number) {
    // Fold only when the constant operation is well defined and finite;
    // otherwise the domain error must surface at evaluation time.
    try {
      return number(detail::eval_binary(op, a->number, b->number));
    } catch (const EvaluationDomainError&) {
    }
  }
  auto n = std::make_shared<Node>();
  n->kind = NodeKind::Binary;
  n->op = op;
  n->a = std::move(a);
  n->b = std::move(b);
  return n;
}

inline ExprPtr call(Func f, ExprPtr a) {
  if (a->kind == NodeKind::Number) {
    try {
      return number(detail::checked(detail::eval_func(f, a->number), "fold"));
    } catch (const EvaluationDomainError&) {
    }
  }
  auto n = std::make_shared<Node>();
  n->kind = NodeKind::Call;
  n->func = f;
  n->a = std::move(a);
  return n;
}

/// A parsed expression bound to a state dimension and a set of declared
/// parameter names. Every variable index in the tree is <= dimension.
struct Expression {
  ExprPtr root;
  int dimension = 0;
  std::vector<std::string> parameter_names;
};

// ---------------------------------------------------------------------------
// Lexer
// ---------------------------------------------------------------------------

namespace detail {

enum class TokenType {
  Number,
  Identifier,
  Plus,
  Minus,
  Star,
  Slash,
  Caret,
  LParen,
  RParen,
  End,
};

struct Token {
  TokenType type = TokenType::End;
  double number = 0.0;
  std::string ident;
  std::size_t line = 1;
  std::size_t column = 1;
};

inline const char* token_name(TokenType t) {
  switch (t) {
    case TokenType::Number:
      return "number";
    case TokenType::Identifier:
      return "identifier";
    case TokenType::Plus:
      return "'+'";
    case TokenType::Minus:
      return "'-'";
    case TokenType::Star:
      return "'*'";
    case TokenType::Slash:
      return "'/'";
    case TokenType::Caret:
      return "'^'";
    case TokenType::LParen:
      return "'('";
    case TokenType::RParen:
      return "')'";
    case TokenType::End:
      return "end of input";
  }
  return "?";
}

inline bool ident_start(char c) {
  return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || c == '_';
}

inline bool ident_char(char c) {
  return ident_start(c) || (c >= '0' && c <= '9');
}

inline std::vector<Token> tokenize(std::string_view src) {
  std::vector<Token> out;
  std::size_t i = 0;
  std::size_t line = 1;
  std::size_t col = 1;
  auto push = [&](TokenType t) {
    Token tok;
    tok.type = t;
    tok.line = line;
    tok.column = col;
    out.push_back(tok);
  };
  while (i < src.size()) {
    const char c = src[i];
    if (c == '\n') {
      ++line;
      col = 1;
      ++i;
      continue;
    }
    if (c == ' ' || c == '\t' || c == '\r') {
      ++col;
      ++i;
      continue;
    }
    // U+2212 (minus sign) is accepted as '-'.
    if (static_cast<unsigned char>(c) == 0xE2 && i + 2 < src.size() &&
        static_cast<unsigned char>(src[i + 1]) == 0x88 &&
        static_cast<unsigned char>(src[i + 2]) == 0x92) {
      push(TokenType::Minus);
      i += 3;
      ++col;
      continue;
    }
    switch (c) {
      case '+':
        push(TokenType::Plus);
        ++i;
        ++col;
        continue;
      case '-':
        push(TokenType::Minus);
        ++i;
        ++col;
        continue;
      case '*':
        push(TokenType::Star);
        ++i;
        ++col;
        continue;
      case '/':
        push(TokenType::Slash);
        ++i;
        ++col;
        continue;
      case '^':
        push(TokenType::Caret);
        ++i;
        ++col;
        continue;
      case '(':
        push(TokenType::LParen);
        ++i;
        ++col;
        continue;
      case ')':
        push(TokenType::RParen);
        ++i;
        ++col;
        continue;
      default:
        break;
    }
    if ((c >= '0' && c <= '9') ||
        (c == '.' && i + 1 < src.size() && src[i + 1] >= '0' &&
         src[i + 1] <= '9')) {
      double v = 0.0;
      const char* first = src.data() + i;
      const char* last = src.data() + src.size();
      auto [ptr, ec] = std::from_chars(first, last, v);
      if (ec != std::errc{}) {
        throw SyntaxError("invalid numeric literal", line, col);
      }
      Token tok;
      tok.type = TokenType::Number;
      tok.number = v;
      tok.line = line;
      tok.column = col;
      out.push_back(tok);
      const std::size_t len = static_cast<std::size_t>(ptr - first);
      i += len;
      col += len;
      continue;
    }
    if (ident_start(c)) {
      std::size_t j = i + 1;
      while (j < src.size() && ident_char(src[j])) ++j;
      Token tok;
      tok.type = TokenType::Identifier;
      tok.ident = std::string(src.substr(i, j - i));
      tok.line = line;
      tok.column = col;
      out.push_back(tok);
      col += j - i;
      i = j;
      continue;
    }
    throw SyntaxError(std::string("unexpected character '") + c + "'", line,
                      col);
  }
  Token end;
  end.type = TokenType::End;
  end.line = line;
  end.column = col;
  out.push_back(end);
  return out;
}

// ---------------------------------------------------------------------------
// Parser
// ---------------------------------------------------------------------------

/// Grammar (whitespace insignificant):
///   expression := term (('+' | '-') term)*
///   term       := factor (('*' | '/') factor)*
///   factor     := '-' factor | power
///   power      := atom ('^' factor)?            // right-associative
///   atom       := number | identifier | func '(' expression ')'
///              | '(' expression ')'
/// so that '^' binds tighter than unary minus, which binds tighter than
/// '*' and '/'. "e^u" is sugar for exp(u); "pi" and "e" are constants.
class Parser {
 public:
  Parser(std::string_view src, int dimension,
         const std::vector<std::string>& parameter_names)
      : tokens_(tokenize(src)),
        dimension_(dimension),
        parameter_names_(parameter_names) {}

  ExprPtr parse() {
    if (tokens_.size() == 1) {
      throw SyntaxError("empty expression", 1, 1);
    }
    ExprPtr e = expression();
    if (peek().type != TokenType::End) {
      fail("unexpected trailing input", peek());
    }
    return e;
  }

 private:
  const Token& peek(std::size_t ahead = 0) const {
    const std::size_t i = pos_ + ahead;
    return tokens_[i < tokens_.size() ? i : tokens_.size() - 1];
  }

  const Token& advance() { return tokens_[pos_++]; }

  bool match(TokenType t) {
    if (peek().type == t) {
      ++pos_;
      return true;
    }
    return false;
  }

  [[noreturn]] void fail(const std::string& msg, const Token& at) const {
    throw SyntaxError(msg + " at " + token_name(at.type), at.line, at.column);
  }

  ExprPtr expression() {
    ExprPtr e = term();
    for (;;) {
      if (match(TokenType::Plus)) {
        e = binary(BinaryOp::Add, e, term());
      } else if (match(TokenType::Minus)) {
        e = binary(BinaryOp::Sub, e, term());
      } else {
        return e;
      }
    }
  }

  ExprPtr term() {
    ExprPtr e = factor();
    for (;;) {
      if (match(TokenType::Star)) {
        e = binary(BinaryOp::Mul, e, factor());
      } else if (match(TokenType::Slash)) {
        e = binary(BinaryOp::Div, e, factor());
      } else {
        return e;
      }
    }
  }

  ExprPtr factor() {
    if (match(TokenType::Minus)) {
      return unary_minus(factor());
    }
    return power();
  }

  ExprPtr power() {
    // "e^u" means exp(u); checked before the ordinary atom path so the
    // constant e does not capture the exponent.
    if (peek().type == TokenType::Identifier && peek().ident == "e" &&
        peek(1).type == TokenType::Caret) {
      advance();
      advance();
      return call(Func::Exp, factor());
    }
    ExprPtr base = atom();
    if (match(TokenType::Caret)) {
      return binary(BinaryOp::Pow, base, factor());
    }
    return base;
  }

  ExprPtr atom() {
    const Token& tok = peek();
    switch (tok.type) {
      case TokenType::Number:
        advance();
        return number(tok.number);
      case TokenType::LParen: {
        advance();
        ExprPtr e = expression();
        if (!match(TokenType::RParen)) {
          fail("expected ')'", peek());
        }
        return e;
      }
      case TokenType::Identifier:
        advance();
        return identifier(tok);
      default:
        fail("expected a value", tok);
    }
  }

  ExprPtr identifier(const Token& tok) {
    const std::string& name = tok.ident;
    if (name == "pi") return number(M_PI);
    if (name == "e") return number(M_E);
    if (auto f = function_named(name)) {
      if (!match(TokenType::LParen)) {
        fail("expected '(' after function '" + name + "'", peek());
      }
      ExprPtr arg = expression();
      if (!match(TokenType::RParen)) {
        fail("expected ')' closing '" + name + "'", peek());
      }
      return call(*f, arg);
    }
    if (name.size() >= 2 && name[0] == 'x' && name[1] >= '0' &&
        name[1] <= '9') {
      int idx = 0;
      auto [ptr, ec] =
          std::from_chars(name.data() + 1, name.data() + name.size(), idx);
      if (ec == std::errc{} && ptr == name.data() + name.size()) {
        if (idx < 1 || idx > dimension_) {
          throw SyntaxError("variable index out of range: " + name +
                                " (dimension " + std::to_string(dimension_) +
                                ")",
                            tok.line, tok.column);
        }
        return variable(idx);
      }
    }
    for (const auto& p : parameter_names_) {
      if (p == name) return parameter(name);
    }
    throw SyntaxError("unknown identifier '" + name + "'", tok.line,
                      tok.column);
  }

  static std::optional<Func> function_named(const std::string& name) {
    if (name == "sin") return Func::Sin;
    if (name == "cos") return Func::Cos;
    if (name == "exp") return Func::Exp;
    if (name == "ln") return Func::Ln;
    if (name == "sqrt") return Func::Sqrt;
    if (name == "tanh") return Func::Tanh;
    return std::nullopt;
  }

  std::vector<Token> tokens_;
  std::size_t pos_ = 0;
  int dimension_;
  const std::vector<std::string>& parameter_names_;
};

}  // namespace detail

/// Parses `source` over variables x1..xn and the declared parameter names.
/// Standard precedence (^ above unary minus above * / above + -),
/// ^ right-associative, whitespace insignificant.
inline Expression parse(std::string_view source, int n,
                        const std::vector<std::string>& parameter_names = {}) {
  if (n < 1) throw InvalidArgumentError("parse: dimension must be >= 1");
  for (const auto& p : parameter_names) {
    if (p.empty() || !detail::ident_start(p[0])) {
      throw InvalidArgumentError("parse: invalid parameter name '" + p + "'");
    }
    for (char c : p) {
      if (!detail::ident_char(c)) {
        throw InvalidArgumentError("parse: invalid parameter name '" + p +
                                   "'");
      }
    }
    if (p == "pi" || p == "e" || p == "sin" || p == "cos" || p == "exp" ||
        p == "ln" || p == "sqrt" || p == "tanh") {
      throw InvalidArgumentError("parse: parameter name '" + p +
                                 "' is reserved");
    }
    if (p.size() >= 2 && p[0] == 'x' && p[1] >= '0' && p[1] <= '9') {
      throw InvalidArgumentError("parse: parameter name '" + p +
                                 "' collides with variable names");
    }
  }
  detail::Parser parser(source, n, parameter_names);
  return Expression{parser.parse(), n, parameter_names};
}

/// Evaluates the tree with real arithmetic; domain violations throw
/// EvaluationDomainError instead of producing NaN/Inf.
inline double evaluate_node(const ExprPtr& node, const StateVector& x,
                            const Params& params) {
  switch (node->kind) {
    case NodeKind::Number:
      return node->number;
    case NodeKind::Parameter: {
      auto it = params.find(node->name);
      if (it == params.end()) {
        throw UnboundParameterError("unbound parameter '" + node->name + "'");
      }
      return it->second;
    }
    case NodeKind::Variable:
      if (node->index < 1 || node->index > x.size()) {
        throw InvalidArgumentError("variable x" + std::to_string(node->index) +
                                   " outside state dimension");
      }
      return x[node->index - 1];
    case NodeKind::Unary:
      return -evaluate_node(node->a, x, params);
    case NodeKind::Binary:
      return detail::eval_binary(node->op, evaluate_node(node->a, x, params),
                                 evaluate_node(node->b, x, params));
    case NodeKind::Call:
      return detail::checked(
          detail::eval_func(node->func, evaluate_node(node->a, x, params)),
          to_string(node->func));
  }
  throw InvalidArgumentError("evaluate: malformed node");
}

inline double evaluate(const Expression& e, const StateVector& x,
                       const Params& params = {}) {
  lingrad::detail::require_dimension(x, e.dimension, "evaluate");
  lingrad::detail::require_finite(x, "evaluate input");
  return evaluate_node(e.root, x, params);
}

/// Exact symbolic partial derivative with respect to x_i.
inline ExprPtr differentiate_node(const ExprPtr& node, int i) {
  switch (node->kind) {
    case NodeKind::Number:
    case NodeKind::Parameter:
      return number(0.0);
    case NodeKind::Variable:
      return number(node->index == i ? 1.0 : 0.0);
    case NodeKind::Unary:
      return unary_minus(differentiate_node(node->a, i));
    case NodeKind::Binary: {
      const ExprPtr& a = node->a;
      const ExprPtr& b = node->b;
      ExprPtr da = differentiate_node(a, i);
      ExprPtr db = differentiate_node(b, i);
      switch (node->op) {
        case BinaryOp::Add:
          return binary(BinaryOp::Add, da, db);
        case BinaryOp::Sub:
          return binary(BinaryOp::Sub, da, db);
        case BinaryOp::Mul:
          return binary(BinaryOp::Add, binary(BinaryOp::Mul, da, b),
                        binary(BinaryOp::Mul, a, db));
        case BinaryOp::Div:
          return binary(
              BinaryOp::Div,
              binary(BinaryOp::Sub, binary(BinaryOp::Mul, da, b),
                     binary(BinaryOp::Mul, a, db)),
              binary(BinaryOp::Pow, b, number(2.0)));
        case BinaryOp::Pow:
          if (b->kind == NodeKind::Number) {
            // d(u^c) = c u^(c-1) u'
            const double c = b->number;
            return binary(
                BinaryOp::Mul,
                binary(BinaryOp::Mul, number(c),
                       binary(BinaryOp::Pow, a, number(c - 1.0))),
                da);
          }
          if (a->kind == NodeKind::Number) {
            // d(c^v) = c^v ln(c) v'
            return binary(BinaryOp::Mul,
                          binary(BinaryOp::Mul,
                                 binary(BinaryOp::Pow, a, b),
                                 call(Func::Ln, a)),
                          db);
          }
          // d(u^v) = u^v (v' ln u + v u'/u)
          return binary(
              BinaryOp::Mul, binary(BinaryOp::Pow, a, b),
              binary(BinaryOp::Add,
                     binary(BinaryOp::Mul, db, call(Func::Ln, a)),
                     binary(BinaryOp::Mul, b, binary(BinaryOp::Div, da, a))));
      }
      throw InvalidArgumentError("differentiate: malformed binary node");
    }
    case NodeKind::Call: {
      const ExprPtr& a = node->a;
      ExprPtr da = differentiate_node(a, i);
      switch (node->func) {
        case Func::Sin:
          return binary(BinaryOp::Mul, call(Func::Cos, a), da);
        case Func::Cos:
          return binary(BinaryOp::Mul, unary_minus(call(Func::Sin, a)), da);
        case Func::Exp:
          return binary(BinaryOp::Mul, call(Func::Exp, a), da);
        case Func::Ln:
          return binary(BinaryOp::Div, da, a);
        case Func::Sqrt:
          return binary(BinaryOp::Div, da,
                        binary(BinaryOp::Mul, number(2.0),
                               call(Func::Sqrt, a)));
        case Func::Tanh:
          return binary(
              BinaryOp::Mul,
              binary(BinaryOp::Sub, number(1.0),
                     binary(BinaryOp::Pow, call(Func::Tanh, a), number(2.0))),
              da);
      }
      throw InvalidArgumentError("differentiate: malformed call node");
    }
  }
  throw InvalidArgumentError("differentiate: malformed node");
}

inline Expression differentiate(const Expression& e, int i) {
  if (i < 1 || i > e.dimension) {
    throw InvalidArgumentError("differentiate: index " + std::to_string(i) +
                               " outside dimension " +
                               std::to_string(e.dimension));
  }
  return Expression{differentiate_node(e.root, i), e.dimension,
                    e.parameter_names};
}

// ---------------------------------------------------------------------------
// Printing (precedence-aware; print-then-parse reproduces the tree)
// ---------------------------------------------------------------------------

namespace detail {

inline int print_level(const Node& n) {
  switch (n.kind) {
    case NodeKind::Number:
      return n.number < 0.0 ? 3 : 5;  // negative literals act like unary minus
    case NodeKind::Parameter:
    case NodeKind::Variable:
    case NodeKind::Call:
      return 5;
    case NodeKind::Unary:
      return 3;
    case NodeKind::Binary:
      switch (n.op) {
        case BinaryOp::Add:
        case BinaryOp::Sub:
          return 1;
        case BinaryOp::Mul:
        case BinaryOp::Div:
          return 2;
        case BinaryOp::Pow:
          return 4;
      }
  }
  return 5;
}

inline std::string format_number(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

inline void render(const ExprPtr& node, int min_level, std::string& out) {
  const int level = print_level(*node);
  if (level < min_level) {
    out += '(';
    render(node, 0, out);
    out += ')';
    return;
  }
  switch (node->kind) {
    case NodeKind::Number:
      out += format_number(node->number);
      return;
    case NodeKind::Parameter:
      out += node->name;
      return;
    case NodeKind::Variable:
      out += 'x';
      out += std::to_string(node->index);
      return;
    case NodeKind::Unary:
      out += '-';
      render(node->a, 3, out);
      return;
    case NodeKind::Call:
      out += to_string(node->func);
      out += '(';
      render(node->a, 0, out);
      out += ')';
      return;
    case NodeKind::Binary:
      switch (node->op) {
        case BinaryOp::Add:
          render(node->a, 1, out);
          out += " + ";
          render(node->b, 2, out);
          return;
        case BinaryOp::Sub:
          render(node->a, 1, out);
          out += " - ";
          render(node->b, 2, out);
          return;
        case BinaryOp::Mul:
          render(node->a, 2, out);
          out += " * ";
          render(node->b, 3, out);
          return;
        case BinaryOp::Div:
          render(node->a, 2, out);
          out += " / ";
          render(node->b, 3, out);
          return;
        case BinaryOp::Pow:
          render(node->a, 5, out);
          out += '^';
          render(node->b, 3, out);
          return;
      }
  }
}

}  // namespace detail

inline std::string print(const ExprPtr& node) {
  std::string out;
  detail::render(node, 0, out);
  return out;
}

inline std::string print(const Expression& e) { return print(e.root); }

inline bool structurally_equal(const ExprPtr& x, const ExprPtr& y) {
  if (x->kind != y->kind) return false;
  switch (x->kind) {
    case NodeKind::Number:
      return x->number == y->number;
    case NodeKind::Parameter:
      return x->name == y->name;
    case NodeKind::Variable:
      return x->index == y->index;
    case NodeKind::Unary:
      return structurally_equal(x->a, y->a);
    case NodeKind::Binary:
      return x->op == y->op && structurally_equal(x->a, y->a) &&
             structurally_equal(x->b, y->b);
    case NodeKind::Call:
      return x->func == y->func && structurally_equal(x->a, y->a);
  }
  return false;
}

/// Replaces variable i by replacements[i-1] everywhere, rebuilding (and
/// re-folding) the tree.
inline ExprPtr substitute(const ExprPtr& node,
                          const std::vector<ExprPtr>& replacements) {
  switch (node->kind) {
    case NodeKind::Number:
    case NodeKind::Parameter:
      return node;
    case NodeKind::Variable: {
      const std::size_t i = static_cast<std::size_t>(node->index);
      if (i < 1 || i > replacements.size()) {
        throw InvalidArgumentError("substitute: no replacement for variable x" +
                                   std::to_string(node->index));
      }
      return replacements[i - 1];
    }
    case NodeKind::Unary:
      return unary_minus(substitute(node->a, replacements));
    case NodeKind::Binary:
      return binary(node->op, substitute(node->a, replacements),
                    substitute(node->b, replacements));
    case NodeKind::Call:
      return call(node->func, substitute(node->a, replacements));
  }
  throw InvalidArgumentError("substitute: malformed node");
}

// ---------------------------------------------------------------------------
// Compilation to fields
// ---------------------------------------------------------------------------

/// Binds an expression and its symbolic gradient into a ScalarField with the
/// given parameter values (parameters resolved at construction).
inline ScalarField to_scalar_field(const Expression& e,
                                   const Params& params = {}) {
  auto grads = std::make_shared<std::vector<Expression>>();
  grads->reserve(e.dimension);
  for (int i = 1; i <= e.dimension; ++i) {
    grads->push_back(differentiate(e, i));
  }
  const int n = e.dimension;
  return ScalarField{
      n,
      [e, params](const StateVector& x) { return evaluate(e, x, params); },
      [grads, params, n](const StateVector& x) {
        StateVector g(n);
        for (int i = 0; i < n; ++i) {
          g[i] = evaluate((*grads)[static_cast<std::size_t>(i)], x, params);
        }
        return g;
      }};
}

/// Binds n component expressions into a VectorField.
inline VectorField to_vector_field(const std::vector<Expression>& components,
                                   const Params& params = {}) {
  if (components.empty()) {
    throw InvalidArgumentError("to_vector_field: no components");
  }
  const int n = components.front().dimension;
  if (static_cast<int>(components.size()) != n) {
    throw InvalidArgumentError(
        "to_vector_field: need exactly n component expressions");
  }
  for (const auto& c : components) {
    if (c.dimension != n) {
      throw InvalidArgumentError("to_vector_field: mixed dimensions");
    }
  }
  auto comps = std::make_shared<std::vector<Expression>>(components);
  return VectorField{n, [comps, params, n](const StateVector& x) {
                       StateVector y(n);
                       for (int i = 0; i < n; ++i) {
                         y[i] = evaluate((*comps)[static_cast<std::size_t>(i)],
                                         x, params);
                       }
                       return y;
                     }};
}

}  // namespace lingrad::expr
