#include "portthermo/expr.hpp"

#include <array>
#include <charconv>
#include <cmath>
#include <numbers>
#include <optional>

namespace portthermo::expr {

SyntaxError::SyntaxError(std::size_t offset, std::string expected, std::string found)
    : Error("syntax error at offset " + std::to_string(offset) + ": expected " + expected + ", found " +
            found),
      offset_(offset),
      expected_(std::move(expected)),
      found_(std::move(found)) {}

namespace {

constexpr std::size_t kMaxDepth = 200;

struct FunctionInfo {
  std::string_view name;
  Function function;
  std::size_t arity;
};

constexpr std::array<FunctionInfo, 7> kFunctions{{
    {"exp", Function::Exp, 1},
    {"ln", Function::Ln, 1},
    {"sqrt", Function::Sqrt, 1},
    {"sin", Function::Sin, 1},
    {"cos", Function::Cos, 1},
    {"pow", Function::Pow, 2},
    {"min", Function::Min, 2},
}};

std::optional<FunctionInfo> find_function(std::string_view name) {
  for (const auto& f : kFunctions)
    if (f.name == name) return f;
  return std::nullopt;
}

std::string_view function_name(Function f) {
  for (const auto& info : kFunctions)
    if (info.function == f) return info.name;
  return "?";
}

enum class Tok { Number, Name, Op, End, Invalid };

struct Token {
  Tok type = Tok::End;
  std::size_t offset = 0;  // 0-based
  std::string text;
  double number = 0.0;
};

bool is_name_start(char c) { return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || c == '_'; }
bool is_digit(char c) { return c >= '0' && c <= '9'; }

class Parser {
 public:
  explicit Parser(std::string_view text) : text_(text) { advance(); }

  Expr run() {
    NodePtr root = sum();
    if (cur_.type != Tok::End) fail("operator or end of input");
    return Expr(std::move(root));
  }

 private:
  [[noreturn]] void fail(const std::string& expected) const {
    const std::string found = cur_.type == Tok::End ? "end of input" : "'" + cur_.text + "'";
    throw SyntaxError(cur_.offset + 1, expected, found);
  }

  void advance() {
    std::size_t i = pos_;
    while (i < text_.size() && (text_[i] == ' ' || text_[i] == '\t' || text_[i] == '\n' || text_[i] == '\r'))
      ++i;
    cur_ = Token{};
    cur_.offset = i;
    if (i >= text_.size()) {
      cur_.type = Tok::End;
      pos_ = i;
      return;
    }
    const char c = text_[i];
    if (is_digit(c) || (c == '.' && i + 1 < text_.size() && is_digit(text_[i + 1]))) {
      std::size_t j = i;
      while (j < text_.size() && is_digit(text_[j])) ++j;
      if (j < text_.size() && text_[j] == '.') {
        ++j;
        while (j < text_.size() && is_digit(text_[j])) ++j;
      }
      if (j < text_.size() && (text_[j] == 'e' || text_[j] == 'E')) {
        std::size_t k = j + 1;
        if (k < text_.size() && (text_[k] == '+' || text_[k] == '-')) ++k;
        if (k < text_.size() && is_digit(text_[k])) {
          while (k < text_.size() && is_digit(text_[k])) ++k;
          j = k;
        }
      }
      cur_.type = Tok::Number;
      cur_.text = std::string(text_.substr(i, j - i));
      const auto res = std::from_chars(text_.data() + i, text_.data() + j, cur_.number);
      if (res.ec != std::errc() || res.ptr != text_.data() + j || !std::isfinite(cur_.number)) {
        pos_ = j;
        fail("number within double range");
      }
      pos_ = j;
      return;
    }
    if (is_name_start(c)) {
      std::size_t j = i;
      while (j < text_.size() && (is_name_start(text_[j]) || is_digit(text_[j]))) ++j;
      cur_.type = Tok::Name;
      cur_.text = std::string(text_.substr(i, j - i));
      pos_ = j;
      return;
    }
    switch (c) {
      case '+': case '-': case '*': case '/': case '^': case '(': case ')': case ',':
        cur_.type = Tok::Op;
        cur_.text = std::string(1, c);
        pos_ = i + 1;
        return;
      default:
        cur_.type = Tok::Invalid;
        cur_.text = std::string(1, c);
        pos_ = i + 1;
        return;
    }
  }

  bool at_op(char c) const { return cur_.type == Tok::Op && cur_.text[0] == c; }

  void expect_op(char c) {
    if (!at_op(c)) fail(std::string("'") + c + "'");
    advance();
  }

  struct DepthGuard {
    explicit DepthGuard(Parser& p) : parser(p) {
      if (++parser.depth_ > kMaxDepth) parser.fail("shallower nesting");
    }
    ~DepthGuard() { --parser.depth_; }
    Parser& parser;
  };

  static NodePtr binary(Kind k, NodePtr a, NodePtr b) {
    auto n = std::make_shared<Node>();
    n->kind = k;
    n->args = {std::move(a), std::move(b)};
    return n;
  }

  NodePtr sum() {
    DepthGuard guard(*this);
    NodePtr lhs = product();
    while (at_op('+') || at_op('-')) {
      const Kind k = at_op('+') ? Kind::Add : Kind::Subtract;
      advance();
      lhs = binary(k, std::move(lhs), product());
    }
    return lhs;
  }

  NodePtr product() {
    NodePtr lhs = power();
    while (at_op('*') || at_op('/')) {
      const Kind k = at_op('*') ? Kind::Multiply : Kind::Divide;
      advance();
      lhs = binary(k, std::move(lhs), power());
    }
    return lhs;
  }

  NodePtr power() {
    DepthGuard guard(*this);
    NodePtr base = unary();
    if (at_op('^')) {
      advance();
      return binary(Kind::Power, std::move(base), power());
    }
    return base;
  }

  NodePtr unary() {
    DepthGuard guard(*this);
    if (at_op('-')) {
      advance();
      auto n = std::make_shared<Node>();
      n->kind = Kind::Negate;
      n->args = {unary()};
      return n;
    }
    return primary();
  }

  NodePtr primary() {
    auto n = std::make_shared<Node>();
    switch (cur_.type) {
      case Tok::Number:
        n->kind = Kind::Number;
        n->number = cur_.number;
        advance();
        return n;
      case Tok::Name: {
        const std::string name = cur_.text;
        const Token name_tok = cur_;
        advance();
        if (name == "pi" || name == "e") {
          n->kind = Kind::Constant;
          n->name = name;
          n->number = name == "pi" ? std::numbers::pi : std::numbers::e;
          return n;
        }
        const auto fn = find_function(name);
        if (at_op('(')) {
          if (!fn) throw SyntaxError(name_tok.offset + 1, "known function (exp, ln, sqrt, sin, cos, pow, min)",
                                     "'" + name + "'");
          advance();
          n->kind = Kind::Call;
          n->name = name;
          n->function = fn->function;
          n->args.push_back(sum());
          for (std::size_t k = 1; k < fn->arity; ++k) {
            expect_op(',');
            n->args.push_back(sum());
          }
          expect_op(')');
          return n;
        }
        if (fn) fail("'(' after function name");
        n->kind = Kind::Variable;
        n->name = name;
        return n;
      }
      case Tok::Op:
        if (at_op('(')) {
          advance();
          NodePtr inner = sum();
          expect_op(')');
          return inner;
        }
        [[fallthrough]];
      default:
        fail("number, name, '(' or '-'");
    }
  }

  std::string_view text_;
  std::size_t pos_ = 0;
  std::size_t depth_ = 0;
  Token cur_;
};

void collect_variables(const Node& n, std::set<std::string>& out) {
  if (n.kind == Kind::Variable) out.insert(n.name);
  for (const auto& a : n.args) collect_variables(*a, out);
}

bool contains_function(const Node& n, Function f) {
  if (n.kind == Kind::Call && n.function == f) return true;
  for (const auto& a : n.args)
    if (contains_function(*a, f)) return true;
  return false;
}

// Precedence levels used by the printer.
int precedence(const Node& n) {
  switch (n.kind) {
    case Kind::Add:
    case Kind::Subtract: return 1;
    case Kind::Multiply:
    case Kind::Divide: return 2;
    case Kind::Power: return 3;
    case Kind::Negate: return 4;
    case Kind::Number: return n.number < 0.0 ? 4 : 5;
    default: return 5;
  }
}

std::string format_number(double v) {
  std::array<char, 64> buf{};
  const auto res = std::to_chars(buf.data(), buf.data() + buf.size(), v);
  return std::string(buf.data(), res.ptr);
}

void print(const Node& n, std::string& out);

void print_wrapped(const Node& n, bool parens, std::string& out) {
  if (parens) out += '(';
  print(n, out);
  if (parens) out += ')';
}

void print(const Node& n, std::string& out) {
  switch (n.kind) {
    case Kind::Number:
      if (n.number < 0.0) {
        out += '-';
        out += format_number(-n.number);
      } else {
        out += format_number(n.number);
      }
      return;
    case Kind::Variable:
    case Kind::Constant:
      out += n.name;
      return;
    case Kind::Negate:
      out += '-';
      print_wrapped(*n.args[0], precedence(*n.args[0]) < 4, out);
      return;
    case Kind::Call:
      out += function_name(n.function);
      out += '(';
      for (std::size_t i = 0; i < n.args.size(); ++i) {
        if (i) out += ", ";
        print(*n.args[i], out);
      }
      out += ')';
      return;
    case Kind::Power:
      print_wrapped(*n.args[0], precedence(*n.args[0]) <= 3, out);
      out += '^';
      print_wrapped(*n.args[1], precedence(*n.args[1]) < 3, out);
      return;
    default: {
      const int p = precedence(n);
      const char* op = n.kind == Kind::Add        ? " + "
                       : n.kind == Kind::Subtract ? " - "
                       : n.kind == Kind::Multiply ? "*"
                                                  : "/";
      print_wrapped(*n.args[0], precedence(*n.args[0]) < p, out);
      out += op;
      print_wrapped(*n.args[1], precedence(*n.args[1]) <= p, out);
      return;
    }
  }
}

NodePtr bind_slots(const NodePtr& n, const std::vector<std::string>& coordinates,
             const std::map<std::string, double>& parameters) {
  if (n->kind == Kind::Variable) {
    auto copy = std::make_shared<Node>(*n);
    for (std::size_t i = 0; i < coordinates.size(); ++i) {
      if (coordinates[i] == n->name) {
        copy->slot = i;
        return copy;
      }
    }
    auto it = parameters.find(n->name);
    if (it == parameters.end()) throw UnboundVariable("unbound variable '" + n->name + "'");
    copy->kind = Kind::Number;
    copy->number = it->second;
    return copy;
  }
  if (n->args.empty()) return n;
  auto copy = std::make_shared<Node>(*n);
  for (auto& a : copy->args) a = bind_slots(a, coordinates, parameters);
  return copy;
}

}  // namespace

Expr parse(std::string_view text) { return Parser(text).run(); }

std::variant<Expr, SyntaxError> try_parse(std::string_view text) {
  try {
    return parse(text);
  } catch (const SyntaxError& e) {
    return e;
  }
}

std::set<std::string> free_variables(const Expr& e) {
  std::set<std::string> out;
  collect_variables(e.root(), out);
  return out;
}

bool uses_function(const Expr& e, Function f) { return contains_function(e.root(), f); }

std::string to_string(const Expr& e) {
  std::string out;
  print(e.root(), out);
  return out;
}

CompiledExpr::CompiledExpr(const Expr& e, const std::vector<std::string>& coordinates,
                           const std::map<std::string, double>& parameters)
    : root_(bind_slots(e.root_ptr(), coordinates, parameters)) {}

ScalarField to_field(const Expr& e, const std::vector<std::string>& coordinates,
                     const std::map<std::string, double>& parameters, bool allow_min) {
  if (!allow_min && uses_function(e, Function::Min))
    throw PreconditionError("min() is only allowed in diagnostic expressions");
  CompiledExpr compiled(e, coordinates, parameters);
  return ScalarField(coordinates, [compiled](auto x) { return compiled(x); });
}

}  // namespace portthermo::expr
