#pragma once

// Arithmetic expression language used by configuration files.
//
// Grammar (highest precedence first):
//   primary  := number | name | 'pi' | 'e' | func '(' args ')' | '(' sum ')'
//   unary    := '-' unary | primary
//   power    := unary ('^' power)?            right-associative
//   product  := power (('*' | '/') power)*    left-associative
//   sum      := product (('+' | '-') product)*
// Functions: exp ln sqrt sin cos (one argument), pow min (two arguments).
// Note that unary minus binds tighter than '^': "-x^2" is (-x)^2.

#include <cstddef>
#include <map>
#include <memory>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "portthermo/ad.hpp"
#include "portthermo/errors.hpp"
#include "portthermo/field.hpp"

namespace portthermo::expr {

enum class Kind { Number, Variable, Constant, Negate, Add, Subtract, Multiply, Divide, Power, Call };
enum class Function { Exp, Ln, Sqrt, Sin, Cos, Pow, Min };

struct Node {
  Kind kind = Kind::Number;
  double number = 0.0;          // Number, Constant
  std::string name;             // Variable, Constant, Call
  Function function = Function::Exp;
  std::size_t slot = 0;         // Variable, after binding
  std::vector<std::shared_ptr<const Node>> args;
};

using NodePtr = std::shared_ptr<const Node>;

class Expr {
 public:
  explicit Expr(NodePtr root) : root_(std::move(root)) {}
  [[nodiscard]] const Node& root() const { return *root_; }
  [[nodiscard]] const NodePtr& root_ptr() const { return root_; }

 private:
  NodePtr root_;
};

class SyntaxError : public Error {
 public:
  SyntaxError(std::size_t offset, std::string expected, std::string found);
  /// 1-based byte offset of the offending token (length + 1 at end of input).
  [[nodiscard]] std::size_t offset() const { return offset_; }
  [[nodiscard]] const std::string& expected() const { return expected_; }
  [[nodiscard]] const std::string& found() const { return found_; }

 private:
  std::size_t offset_;
  std::string expected_;
  std::string found_;
};

class UnboundVariable : public Error {
 public:
  using Error::Error;
};

Expr parse(std::string_view text);

/// Non-throwing parse: either an AST or the positioned error.
std::variant<Expr, SyntaxError> try_parse(std::string_view text);

std::set<std::string> free_variables(const Expr& e);
bool uses_function(const Expr& e, Function f);

/// Canonical text with minimal parentheses; parse(to_string(e)) has the
/// same tree as e.
std::string to_string(const Expr& e);

namespace detail {

template <class N, class Lookup>
N eval_node(const Node& node, const Lookup& lookup) {
  switch (node.kind) {
    case Kind::Number:
    case Kind::Constant:
      return N(node.number);
    case Kind::Variable:
      return lookup(node);
    case Kind::Negate:
      return -eval_node<N>(*node.args[0], lookup);
    case Kind::Add:
      return eval_node<N>(*node.args[0], lookup) + eval_node<N>(*node.args[1], lookup);
    case Kind::Subtract:
      return eval_node<N>(*node.args[0], lookup) - eval_node<N>(*node.args[1], lookup);
    case Kind::Multiply:
      return eval_node<N>(*node.args[0], lookup) * eval_node<N>(*node.args[1], lookup);
    case Kind::Divide: {
      N num = eval_node<N>(*node.args[0], lookup);
      N den = eval_node<N>(*node.args[1], lookup);
      if (ad::primal(den) == 0.0) throw DomainError("division by zero");
      return num / den;
    }
    case Kind::Power:
      return ad::pow(eval_node<N>(*node.args[0], lookup), eval_node<N>(*node.args[1], lookup));
    case Kind::Call: {
      N a = eval_node<N>(*node.args[0], lookup);
      switch (node.function) {
        case Function::Exp: return ad::exp(a);
        case Function::Ln: return ad::log(a);
        case Function::Sqrt: return ad::sqrt(a);
        case Function::Sin: return ad::sin(a);
        case Function::Cos: return ad::cos(a);
        case Function::Pow: return ad::pow(a, eval_node<N>(*node.args[1], lookup));
        case Function::Min: return ad::min(a, eval_node<N>(*node.args[1], lookup));
      }
    }
  }
  throw Error("corrupt expression tree");
}

}  // namespace detail

/// Evaluates over any supported number type (double or a dual).
template <class N>
N evaluate(const Expr& e, const std::map<std::string, N>& bindings) {
  return detail::eval_node<N>(e.root(), [&](const Node& v) -> N {
    auto it = bindings.find(v.name);
    if (it == bindings.end()) throw UnboundVariable("unbound variable '" + v.name + "'");
    return it->second;
  });
}

/// An expression with variables resolved to coordinate slots; named
/// parameters are folded in as constants.
class CompiledExpr {
 public:
  CompiledExpr(const Expr& e, const std::vector<std::string>& coordinates,
               const std::map<std::string, double>& parameters = {});

  template <class N>
  N operator()(std::span<const N> x) const {
    return detail::eval_node<N>(*root_, [&](const Node& v) -> N { return x[v.slot]; });
  }

 private:
  NodePtr root_;
};

/// ScalarField over `coordinates` evaluating `e`. Rejects min() unless
/// `allow_min` (it is only meant for diagnostic fields).
ScalarField to_field(const Expr& e, const std::vector<std::string>& coordinates,
                     const std::map<std::string, double>& parameters = {}, bool allow_min = false);

}  // namespace portthermo::expr
