// SPDX-License-Identifier: Apache-2.0
//
// A small expression language for densities, integrands and region
// indicators.
//
//   expr    := conj
//   conj    := rel { "and" rel }
//   rel     := sum [ ("<=" | ">=" | "<" | ">") sum ]
//   sum     := term { ("+" | "-") term }
//   term    := factor { ("*" | "/") factor }
//   factor  := [ "-" ] power
//   power   := atom [ "^" factor ]
//   atom    := number | ident | ident "(" expr { "," expr } ")" | "(" expr ")"
//
// "^" is right-associative and binds tighter than unary minus, so -x^2 is
// -(x^2). Relations evaluate to exactly 0.0 or 1.0; "and" multiplies the
// indicator values of its operands.
#pragma once

#include <array>
#include <bit>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <system_error>
#include <vector>

#include "rmc/errors.hpp"

namespace rmc {

/// Ordered, distinct coordinate names. The position of a name is the index
/// of that coordinate in every point handed to `Expression::eval`.
class VarOrder {
 public:
  VarOrder() = default;

  explicit VarOrder(std::vector<std::string> names) : names_(std::move(names)) {
    if (names_.empty())
      throw ParseError(ParseError::Kind::Syntax, 0,
                       "variable list must not be empty");
    for (std::size_t i = 0; i < names_.size(); ++i) {
      const auto& n = names_[i];
      if (!is_identifier(n))
        throw ParseError(ParseError::Kind::Syntax, 0,
                         "'" + n + "' is not a valid identifier");
      if (is_reserved(n))
        throw ParseError(ParseError::Kind::ReservedName, 0,
                         "'" + n + "' is reserved and cannot name a variable");
      for (std::size_t j = 0; j < i; ++j)
        if (names_[j] == n)
          throw ParseError(ParseError::Kind::Syntax, 0,
                           "duplicate variable '" + n + "'");
    }
  }

  VarOrder(std::initializer_list<std::string> names)
      : VarOrder(std::vector<std::string>(names)) {}

  /// Parses a comma separated list such as "x,y".
  static VarOrder parse(std::string_view text) {
    std::vector<std::string> names;
    std::size_t start = 0;
    while (true) {
      auto comma = text.find(',', start);
      auto piece = text.substr(start, comma == std::string_view::npos
                                          ? std::string_view::npos
                                          : comma - start);
      while (!piece.empty() && piece.front() == ' ') piece.remove_prefix(1);
      while (!piece.empty() && piece.back() == ' ') piece.remove_suffix(1);
      names.emplace_back(piece);
      if (comma == std::string_view::npos) break;
      start = comma + 1;
    }
    return VarOrder(std::move(names));
  }

  std::size_t dims() const noexcept { return names_.size(); }
  const std::vector<std::string>& names() const noexcept { return names_; }
  const std::string& operator[](std::size_t i) const { return names_[i]; }

  /// Position of `name`, or dims() if absent.
  std::size_t index_of(std::string_view name) const noexcept {
    for (std::size_t i = 0; i < names_.size(); ++i)
      if (names_[i] == name) return i;
    return names_.size();
  }

  std::string joined() const {
    std::string out;
    for (std::size_t i = 0; i < names_.size(); ++i) {
      if (i) out += ',';
      out += names_[i];
    }
    return out;
  }

  friend bool operator==(const VarOrder&, const VarOrder&) = default;

  static bool is_identifier(std::string_view s) noexcept {
    if (s.empty() || !(is_alpha(s[0]) || s[0] == '_')) return false;
    for (char c : s)
      if (!(is_alpha(c) || is_digit(c) || c == '_')) return false;
    return true;
  }

  static bool is_reserved(std::string_view s) noexcept {
    return s == "pi" || s == "e" || s == "and";
  }

 private:
  static bool is_alpha(char c) noexcept {
    return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z');
  }
  static bool is_digit(char c) noexcept { return c >= '0' && c <= '9'; }

  std::vector<std::string> names_;
};

enum class Func : std::uint8_t { Sin, Cos, Tan, Exp, Log, Sqrt, Abs, Min, Max };

enum class NodeKind : std::uint8_t {
  Literal,
  Constant,  // pi or e; value holds the number, name kept for printing
  Variable,
  Negate,
  Add,
  Sub,
  Mul,
  Div,
  Pow,
  Call,
  Less,
  LessEqual,
  Greater,
  GreaterEqual,
  And,
};

struct Node {
  NodeKind kind;
  Func func = Func::Sin;       // Call only
  std::uint32_t var = 0;       // Variable only
  std::uint32_t lhs = 0;       // first operand / argument
  std::uint32_t rhs = 0;       // second operand / argument
  std::uint32_t arity = 0;     // number of children
  double value = 0.0;          // Literal, Constant
  std::size_t offset = 0;      // byte offset of the node's token
};

namespace detail {

struct FuncInfo {
  std::string_view name;
  Func func;
  std::uint32_t arity;
};

inline constexpr std::array<FuncInfo, 9> kFunctions{{
    {"sin", Func::Sin, 1},
    {"cos", Func::Cos, 1},
    {"tan", Func::Tan, 1},
    {"exp", Func::Exp, 1},
    {"log", Func::Log, 1},
    {"sqrt", Func::Sqrt, 1},
    {"abs", Func::Abs, 1},
    {"min", Func::Min, 2},
    {"max", Func::Max, 2},
}};

inline const FuncInfo* find_function(std::string_view name) noexcept {
  for (const auto& f : kFunctions)
    if (f.name == name) return &f;
  return nullptr;
}

inline std::string_view function_name(Func f) noexcept {
  for (const auto& info : kFunctions)
    if (info.func == f) return info.name;
  return "?";
}

inline std::string_view op_symbol(NodeKind k) noexcept {
  switch (k) {
    case NodeKind::Add: return "+";
    case NodeKind::Sub: return "-";
    case NodeKind::Mul: return "*";
    case NodeKind::Div: return "/";
    case NodeKind::Pow: return "^";
    case NodeKind::Less: return "<";
    case NodeKind::LessEqual: return "<=";
    case NodeKind::Greater: return ">";
    case NodeKind::GreaterEqual: return ">=";
    case NodeKind::And: return "and";
    default: return "";
  }
}

inline std::string format_double(double v) {
  std::array<char, 64> buf{};
  auto res = std::to_chars(buf.data(), buf.data() + buf.size(), v);
  return std::string(buf.data(), res.ptr);
}

}  // namespace detail

/// Immutable parsed expression. Evaluation is reentrant.
class Expression {
 public:
  Expression() = default;

  static Expression parse(std::string_view text, const VarOrder& vars);

  const VarOrder& vars() const noexcept { return vars_; }
  std::size_t dims() const noexcept { return vars_.dims(); }
  const std::vector<Node>& nodes() const noexcept { return nodes_; }
  std::uint32_t root() const noexcept { return root_; }
  const std::string& source() const noexcept { return source_; }

  /// Evaluates at `point` (ordered by vars()). Throws DomainError instead of
  /// ever returning NaN.
  double eval(std::span<const double> point) const {
    if (point.size() != vars_.dims())
      throw Error("point has " + std::to_string(point.size()) +
                  " coordinates, expression expects " +
                  std::to_string(vars_.dims()));
    return eval_node(root_, point);
  }

  double operator()(std::span<const double> point) const { return eval(point); }

  /// True when the root is a relation or a conjunction.
  bool is_indicator() const noexcept {
    switch (nodes_[root_].kind) {
      case NodeKind::Less:
      case NodeKind::LessEqual:
      case NodeKind::Greater:
      case NodeKind::GreaterEqual:
      case NodeKind::And:
        return true;
      default:
        return false;
    }
  }

  std::set<std::string> free_vars() const {
    std::set<std::string> out;
    for (const auto& n : nodes_)
      if (n.kind == NodeKind::Variable) out.insert(vars_[n.var]);
    return out;
  }

  /// Fully parenthesised rendering that re-parses to the same tree.
  std::string to_string() const { return print_node(root_); }

  /// Structural equality of the two trees (node layout is ignored).
  friend bool operator==(const Expression& a, const Expression& b) {
    if (a.nodes_.empty() || b.nodes_.empty())
      return a.nodes_.empty() && b.nodes_.empty();
    return a.vars_ == b.vars_ && same_tree(a, a.root_, b, b.root_);
  }

 private:
  friend class ExpressionParser;

  static bool same_tree(const Expression& a, std::uint32_t i,
                        const Expression& b, std::uint32_t j) {
    const Node& x = a.nodes_[i];
    const Node& y = b.nodes_[j];
    if (x.kind != y.kind || x.arity != y.arity) return false;
    switch (x.kind) {
      case NodeKind::Literal:
      case NodeKind::Constant:
        return std::bit_cast<std::uint64_t>(x.value) ==
               std::bit_cast<std::uint64_t>(y.value);
      case NodeKind::Variable:
        return x.var == y.var;
      case NodeKind::Call:
        if (x.func != y.func) return false;
        break;
      default:
        break;
    }
    if (x.arity >= 1 && !same_tree(a, x.lhs, b, y.lhs)) return false;
    if (x.arity >= 2 && !same_tree(a, x.rhs, b, y.rhs)) return false;
    return true;
  }

  [[noreturn]] void fault(std::uint32_t i, const std::string& why) const {
    const Node& n = nodes_[i];
    std::string what;
    if (n.kind == NodeKind::Call)
      what = std::string(detail::function_name(n.func));
    else if (n.kind == NodeKind::Negate)
      what = "negation";
    else if (n.kind == NodeKind::Variable)
      what = "variable " + vars_[n.var];
    else
      what = "'" + std::string(detail::op_symbol(n.kind)) + "'";
    throw DomainError(i, "domain fault in " + what + " at offset " +
                             std::to_string(n.offset) + ": " + why);
  }

  static double indicator(bool b) noexcept { return b ? 1.0 : 0.0; }

  double eval_node(std::uint32_t i, std::span<const double> p) const {
    const Node& n = nodes_[i];
    double r = 0.0;
    switch (n.kind) {
      case NodeKind::Literal:
      case NodeKind::Constant:
        return n.value;
      case NodeKind::Variable:
        r = p[n.var];
        if (std::isnan(r)) fault(i, "NaN coordinate");
        return r;
      case NodeKind::Negate:
        return -eval_node(n.lhs, p);
      case NodeKind::Add:
        r = eval_node(n.lhs, p) + eval_node(n.rhs, p);
        break;
      case NodeKind::Sub:
        r = eval_node(n.lhs, p) - eval_node(n.rhs, p);
        break;
      case NodeKind::Mul:
        r = eval_node(n.lhs, p) * eval_node(n.rhs, p);
        break;
      case NodeKind::Div: {
        const double num = eval_node(n.lhs, p);
        const double den = eval_node(n.rhs, p);
        if (den == 0.0) fault(i, "division by zero");
        r = num / den;
        break;
      }
      case NodeKind::Pow: {
        const double base = eval_node(n.lhs, p);
        const double ex = eval_node(n.rhs, p);
        if (base == 0.0 && ex < 0.0) fault(i, "zero raised to a negative power");
        r = std::pow(base, ex);
        if (std::isnan(r))
          fault(i, "negative base " + detail::format_double(base) +
                       " with non-integer exponent " + detail::format_double(ex));
        return r;
      }
      case NodeKind::Call:
        r = eval_call(i, n, p);
        break;
      case NodeKind::Less:
        return indicator(eval_node(n.lhs, p) < eval_node(n.rhs, p));
      case NodeKind::LessEqual:
        return indicator(eval_node(n.lhs, p) <= eval_node(n.rhs, p));
      case NodeKind::Greater:
        return indicator(eval_node(n.lhs, p) > eval_node(n.rhs, p));
      case NodeKind::GreaterEqual:
        return indicator(eval_node(n.lhs, p) >= eval_node(n.rhs, p));
      case NodeKind::And:
        return indicator(eval_node(n.lhs, p) != 0.0) *
               indicator(eval_node(n.rhs, p) != 0.0);
    }
    if (std::isnan(r)) fault(i, "result is not a number");
    return r;
  }

  double eval_call(std::uint32_t i, const Node& n,
                   std::span<const double> p) const {
    const double a = eval_node(n.lhs, p);
    switch (n.func) {
      case Func::Sin: return std::sin(a);
      case Func::Cos: return std::cos(a);
      case Func::Tan: return std::tan(a);
      case Func::Exp: return std::exp(a);
      case Func::Log:
        if (!(a > 0.0))
          fault(i, "argument " + detail::format_double(a) + " <= 0");
        return std::log(a);
      case Func::Sqrt:
        if (a < 0.0) fault(i, "argument " + detail::format_double(a) + " < 0");
        return std::sqrt(a);
      case Func::Abs: return std::abs(a);
      case Func::Min: return std::min(a, eval_node(n.rhs, p));
      case Func::Max: return std::max(a, eval_node(n.rhs, p));
    }
    return 0.0;
  }

  std::string print_node(std::uint32_t i) const {
    const Node& n = nodes_[i];
    auto wrap = [this](std::uint32_t c) {
      const auto k = nodes_[c].kind;
      if (k == NodeKind::Literal || k == NodeKind::Constant ||
          k == NodeKind::Variable || k == NodeKind::Call)
        return print_node(c);
      return "(" + print_node(c) + ")";
    };
    switch (n.kind) {
      case NodeKind::Literal:
        return detail::format_double(n.value);
      case NodeKind::Constant:
        return n.value == std::numbers::pi ? "pi" : "e";
      case NodeKind::Variable:
        return vars_[n.var];
      case NodeKind::Negate:
        return "-" + wrap(n.lhs);
      case NodeKind::Call: {
        std::string out(detail::function_name(n.func));
        out += "(" + print_node(n.lhs);
        if (n.arity == 2) out += ", " + print_node(n.rhs);
        return out + ")";
      }
      default:
        return wrap(n.lhs) + " " + std::string(detail::op_symbol(n.kind)) +
               " " + wrap(n.rhs);
    }
  }

  std::vector<Node> nodes_;
  std::uint32_t root_ = 0;
  VarOrder vars_;
  std::string source_;
};

/// Recursive-descent parser over the grammar at the top of this file.
class ExpressionParser {
 public:
  ExpressionParser(std::string_view text, const VarOrder& vars)
      : text_(text), vars_(vars) {}

  Expression run() {
    if (text_.find_first_not_of(" \t\r\n") == std::string_view::npos)
      throw ParseError(ParseError::Kind::Syntax, 0, "empty expression",
                       "an expression");
    advance();
    const auto root = parse_conj();
    if (tok_.kind != Tok::End)
      throw ParseError(ParseError::Kind::Syntax, tok_.offset,
                       "unexpected " + describe(tok_),
                       "'and', ')' or end of input");
    out_.root_ = root;
    out_.vars_ = vars_;
    out_.source_ = std::string(text_);
    return std::move(out_);
  }

 private:
  enum class Tok {
    End, Number, Ident, Plus, Minus, Star, Slash, Caret,
    Less, LessEqual, Greater, GreaterEqual, LParen, RParen, Comma,
  };

  struct Token {
    Tok kind = Tok::End;
    std::size_t offset = 0;
    std::string_view text;
    double number = 0.0;
  };

  static std::string describe(const Token& t) {
    if (t.kind == Tok::End) return "end of input";
    return "'" + std::string(t.text) + "'";
  }

  static bool ident_start(char c) {
    return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || c == '_';
  }
  static bool digit(char c) { return c >= '0' && c <= '9'; }

  void advance() {
    while (pos_ < text_.size() &&
           (text_[pos_] == ' ' || text_[pos_] == '\t' || text_[pos_] == '\n' ||
            text_[pos_] == '\r'))
      ++pos_;
    tok_ = Token{};
    tok_.offset = pos_;
    if (pos_ >= text_.size()) return;
    const char c = text_[pos_];
    auto single = [&](Tok k, std::size_t len = 1) {
      tok_.kind = k;
      tok_.text = text_.substr(pos_, len);
      pos_ += len;
    };
    if (digit(c)) return lex_number();
    if (ident_start(c)) {
      std::size_t end = pos_ + 1;
      while (end < text_.size() && (ident_start(text_[end]) || digit(text_[end])))
        ++end;
      return single(Tok::Ident, end - pos_);
    }
    const bool eq_next = pos_ + 1 < text_.size() && text_[pos_ + 1] == '=';
    switch (c) {
      case '+': return single(Tok::Plus);
      case '-': return single(Tok::Minus);
      case '*': return single(Tok::Star);
      case '/': return single(Tok::Slash);
      case '^': return single(Tok::Caret);
      case '(': return single(Tok::LParen);
      case ')': return single(Tok::RParen);
      case ',': return single(Tok::Comma);
      case '<': return eq_next ? single(Tok::LessEqual, 2) : single(Tok::Less);
      case '>':
        return eq_next ? single(Tok::GreaterEqual, 2) : single(Tok::Greater);
      default:
        throw ParseError(ParseError::Kind::Syntax, pos_,
                         std::string("unexpected character '") + c + "'",
                         "a number, identifier, operator or parenthesis");
    }
  }

  void lex_number() {
    std::size_t end = pos_;
    while (end < text_.size() && digit(text_[end])) ++end;
    if (end < text_.size() && text_[end] == '.') {
      ++end;
      while (end < text_.size() && digit(text_[end])) ++end;
    }
    if (end < text_.size() && (text_[end] == 'e' || text_[end] == 'E')) {
      std::size_t exp = end + 1;
      if (exp < text_.size() && (text_[exp] == '+' || text_[exp] == '-')) ++exp;
      if (exp < text_.size() && digit(text_[exp])) {
        end = exp;
        while (end < text_.size() && digit(text_[end])) ++end;
      }
    }
    tok_.kind = Tok::Number;
    tok_.text = text_.substr(pos_, end - pos_);
    auto res = std::from_chars(text_.data() + pos_, text_.data() + end,
                               tok_.number);
    if (res.ec != std::errc{} || res.ptr != text_.data() + end ||
        !std::isfinite(tok_.number))
      throw ParseError(ParseError::Kind::Syntax, pos_,
                       "number '" + std::string(tok_.text) + "' out of range",
                       "a finite decimal literal");
    pos_ = end;
  }

  std::uint32_t push(Node n) {
    out_.nodes_.push_back(n);
    return static_cast<std::uint32_t>(out_.nodes_.size() - 1);
  }

  std::uint32_t binary(NodeKind k, std::uint32_t l, std::uint32_t r,
                       std::size_t offset) {
    Node n{k};
    n.lhs = l;
    n.rhs = r;
    n.arity = 2;
    n.offset = offset;
    return push(n);
  }

  bool at_and() const { return tok_.kind == Tok::Ident && tok_.text == "and"; }

  std::uint32_t parse_conj() {
    auto lhs = parse_rel();
    while (at_and()) {
      const auto off = tok_.offset;
      advance();
      lhs = binary(NodeKind::And, lhs, parse_rel(), off);
    }
    return lhs;
  }

  std::uint32_t parse_rel() {
    const auto lhs = parse_sum();
    NodeKind k;
    switch (tok_.kind) {
      case Tok::Less: k = NodeKind::Less; break;
      case Tok::LessEqual: k = NodeKind::LessEqual; break;
      case Tok::Greater: k = NodeKind::Greater; break;
      case Tok::GreaterEqual: k = NodeKind::GreaterEqual; break;
      default: return lhs;
    }
    const auto off = tok_.offset;
    advance();
    return binary(k, lhs, parse_sum(), off);
  }

  std::uint32_t parse_sum() {
    auto lhs = parse_term();
    while (tok_.kind == Tok::Plus || tok_.kind == Tok::Minus) {
      const auto k = tok_.kind == Tok::Plus ? NodeKind::Add : NodeKind::Sub;
      const auto off = tok_.offset;
      advance();
      lhs = binary(k, lhs, parse_term(), off);
    }
    return lhs;
  }

  std::uint32_t parse_term() {
    auto lhs = parse_factor();
    while (tok_.kind == Tok::Star || tok_.kind == Tok::Slash) {
      const auto k = tok_.kind == Tok::Star ? NodeKind::Mul : NodeKind::Div;
      const auto off = tok_.offset;
      advance();
      lhs = binary(k, lhs, parse_factor(), off);
    }
    return lhs;
  }

  std::uint32_t parse_factor() {
    if (tok_.kind == Tok::Minus) {
      const auto off = tok_.offset;
      advance();
      Node n{NodeKind::Negate};
      n.lhs = parse_power();
      n.arity = 1;
      n.offset = off;
      return push(n);
    }
    return parse_power();
  }

  std::uint32_t parse_power() {
    const auto base = parse_atom();
    if (tok_.kind != Tok::Caret) return base;
    const auto off = tok_.offset;
    advance();
    return binary(NodeKind::Pow, base, parse_factor(), off);
  }

  void expect(Tok k, const char* what) {
    if (tok_.kind != k)
      throw ParseError(ParseError::Kind::Syntax, tok_.offset,
                       "unexpected " + describe(tok_), what);
    advance();
  }

  std::uint32_t parse_atom() {
    const Token t = tok_;
    switch (t.kind) {
      case Tok::Number: {
        advance();
        Node n{NodeKind::Literal};
        n.value = t.number;
        n.offset = t.offset;
        return push(n);
      }
      case Tok::LParen: {
        advance();
        const auto inner = parse_conj();
        expect(Tok::RParen, "')'");
        return inner;
      }
      case Tok::Ident:
        if (t.text != "and") {
          advance();
          if (tok_.kind == Tok::LParen) return parse_call(t);
          return identifier(t);
        }
        [[fallthrough]];
      default:
        throw ParseError(ParseError::Kind::Syntax, t.offset,
                         "unexpected " + describe(t),
                         "a number, identifier, function call or '('");
    }
  }

  std::uint32_t identifier(const Token& t) {
    Node n{NodeKind::Variable};
    n.offset = t.offset;
    if (t.text == "pi" || t.text == "e") {
      n.kind = NodeKind::Constant;
      n.value = t.text == "pi" ? std::numbers::pi : std::numbers::e;
      return push(n);
    }
    const auto idx = vars_.index_of(t.text);
    if (idx == vars_.dims()) {
      std::string msg = "unknown identifier '" + std::string(t.text) + "'";
      if (detail::find_function(t.text)) msg += " (function used without arguments)";
      throw ParseError(ParseError::Kind::UnknownIdentifier, t.offset, msg,
                       "one of the variables " + vars_.joined() +
                           ", pi or e");
    }
    n.var = static_cast<std::uint32_t>(idx);
    return push(n);
  }

  std::uint32_t parse_call(const Token& name) {
    const auto* info = detail::find_function(name.text);
    if (!info)
      throw ParseError(ParseError::Kind::UnknownIdentifier, name.offset,
                       "unknown function '" + std::string(name.text) + "'",
                       "sin, cos, tan, exp, log, sqrt, abs, min or max");
    advance();  // '('
    std::vector<std::uint32_t> args{parse_conj()};
    while (tok_.kind == Tok::Comma) {
      advance();
      args.push_back(parse_conj());
    }
    expect(Tok::RParen, "',' or ')'");
    if (args.size() != info->arity)
      throw ParseError(ParseError::Kind::Arity, name.offset,
                       std::string(info->name) + " takes " +
                           std::to_string(info->arity) + " argument" +
                           (info->arity == 1 ? "" : "s") + ", got " +
                           std::to_string(args.size()));
    Node n{NodeKind::Call};
    n.func = info->func;
    n.arity = info->arity;
    n.lhs = args[0];
    if (args.size() == 2) n.rhs = args[1];
    n.offset = name.offset;
    return push(n);
  }

  std::string_view text_;
  const VarOrder& vars_;
  std::size_t pos_ = 0;
  Token tok_;
  Expression out_;
};

inline Expression Expression::parse(std::string_view text,
                                    const VarOrder& vars) {
  return ExpressionParser(text, vars).run();
}

inline Expression parse(std::string_view text, const VarOrder& vars) {
  return Expression::parse(text, vars);
}

}  // namespace rmc
