#include <cmath>
#include <map>
#include <string>
#include <variant>
#include <vector>

#include "doctest.h"
#include "generators.hpp"
#include "oracle_values.hpp"
#include "portthermo/expr.hpp"

using namespace portthermo;
using namespace portthermo::expr;

namespace {

bool same_tree(const Node& a, const Node& b) {
  if (a.kind != b.kind || a.args.size() != b.args.size()) return false;
  switch (a.kind) {
    case Kind::Number: return a.number == b.number;
    case Kind::Variable:
    case Kind::Constant: return a.name == b.name;
    case Kind::Call:
      if (a.function != b.function) return false;
      break;
    default: break;
  }
  for (std::size_t i = 0; i < a.args.size(); ++i)
    if (!same_tree(*a.args[i], *b.args[i])) return false;
  return true;
}

const std::vector<std::string> kXyz{"x", "y", "z"};

double eval_at(const std::string& text, const std::vector<double>& at) {
  return to_field(parse(text), kXyz)(at);
}

}  // namespace

TEST_CASE("corpus round-trips through canonical text") {
  for (const auto& entry : oracle::kCorpus) {
    CAPTURE(entry.text);
    const Expr e = parse(entry.text);
    const std::string canon = to_string(e);
    const Expr back = parse(canon);
    CHECK(same_tree(e.root(), back.root()));
    CHECK(to_string(back) == canon);
  }
}

TEST_CASE("corpus values and gradients match symbolic derivatives") {
  const std::vector<double> at(oracle::kCorpusPoint.begin(), oracle::kCorpusPoint.end());
  for (const auto& entry : oracle::kCorpus) {
    CAPTURE(entry.text);
    const auto f = to_field(parse(entry.text), kXyz);
    const auto vg = value_gradient(f, std::span<const double>(at));
    CHECK(vg.value == doctest::Approx(entry.value).epsilon(1e-12));
    for (std::size_t i = 0; i < 3; ++i)
      CHECK(std::abs(vg.gradient[i] - entry.gradient[i]) <= 1e-12 * (1 + std::abs(entry.gradient[i])));
  }
}

TEST_CASE("precedence and associativity") {
  const std::vector<double> at{2.0, 3.0, 4.0};
  CHECK(eval_at("x - y - z", at) == -5.0);
  CHECK(eval_at("x ^ y ^ 2", at) == 512.0);
  CHECK(eval_at("-x ^ 2", at) == 4.0);
  CHECK(eval_at("-(x ^ 2)", at) == -4.0);
  CHECK(eval_at("z / x / x", at) == 1.0);
  CHECK(eval_at("x + y * z", at) == 14.0);
  CHECK(to_field(parse("min(x, y) + pi - pi"), kXyz, {}, true)(at) == doctest::Approx(2.0));
}

TEST_CASE("syntax errors carry 1-based offsets") {
  struct Case {
    const char* text;
    std::size_t offset;
  };
  const Case cases[] = {{"x +", 4}, {"(x", 3}, {"x y", 3}, {"foo(x)", 1}, {"exp x", 5}, {"", 1},
                        {"pow(x)", 6}, {"x $ y", 3}, {"2 * * 3", 5}};
  for (const auto& c : cases) {
    CAPTURE(c.text);
    const auto r = try_parse(c.text);
    REQUIRE(std::holds_alternative<SyntaxError>(r));
    CHECK(std::get<SyntaxError>(r).offset() == c.offset);
  }
}

TEST_CASE("binding and free variables") {
  const Expr e = parse("a * x + ln(b)");
  CHECK(free_variables(e) == std::set<std::string>{"a", "b", "x"});
  CHECK(evaluate<double>(e, {{"a", 2.0}, {"x", 3.0}, {"b", 1.0}}) == 6.0);
  CHECK_THROWS_AS(evaluate<double>(e, {{"a", 2.0}}), UnboundVariable);
  CHECK_THROWS_AS(to_field(e, {"x"}), UnboundVariable);
  const auto f = to_field(e, {"x"}, {{"a", 2.0}, {"b", std::exp(1.0)}});
  CHECK(f(std::vector<double>{3.0}) == doctest::Approx(7.0));
  CHECK(uses_function(e, Function::Ln));
  CHECK_FALSE(uses_function(e, Function::Exp));
}

TEST_CASE("min is restricted to diagnostic fields") {
  const Expr e = parse("min(x, 1)");
  CHECK_THROWS_AS(to_field(e, {"x"}), PreconditionError);
  CHECK(to_field(e, {"x"}, {}, true)(std::vector<double>{3.0}) == 1.0);
}

TEST_CASE("evaluation domain errors") {
  CHECK_THROWS_AS(eval_at("ln(x - 2)", {2.0, 0, 0}), DomainError);
  CHECK_THROWS_AS(eval_at("1 / (x - 2)", {2.0, 0, 0}), DomainError);
  CHECK_THROWS_AS(eval_at("sqrt(-x)", {2.0, 0, 0}), DomainError);
}

TEST_CASE("deep nesting is a positioned error, not a crash") {
  const std::string deep = std::string(5000, '(') + "x" + std::string(5000, ')');
  CHECK(std::holds_alternative<SyntaxError>(try_parse(deep)));
  const std::string negs = std::string(5000, '-') + "x";
  CHECK(std::holds_alternative<SyntaxError>(try_parse(negs)));
}

TEST_CASE("property: generated expressions round-trip and differentiate like finite differences") {
  Rng rng(21);
  gen::ExpressionGen make(rng, kXyz);
  int checked = 0;
  for (int trial = 0; trial < 500; ++trial) {
    const std::string text = make(static_cast<int>(1 + rng.uniform() * 4));
    CAPTURE(text);
    const Expr e = parse(text);
    CHECK(same_tree(e.root(), parse(to_string(e)).root()));
    const auto f = to_field(e, kXyz);
    const auto at = gen::uniform_vector(rng, 3, 0.5, 2.0);
    try {
      const auto g = gradient_of(f, std::span<const double>(at));
      for (std::size_t i = 0; i < 3; ++i) {
        const double h = 1e-4;
        auto shifted = [&](double k) {
          auto p = at;
          p[i] += k * h;
          return f(p);
        };
        const double fd = (shifted(-2) - 8 * shifted(-1) + 8 * shifted(1) - shifted(2)) / (12 * h);
        CHECK(std::abs(fd - g[i]) <= 1e-6 * std::max(1.0, std::abs(g[i])));
      }
      ++checked;
    } catch (const DomainError&) {
    }
  }
  CHECK(checked > 400);
}

TEST_CASE("property: fuzzed input is classified") {
  Rng rng(5);
  std::size_t parsed = 0;
  for (int trial = 0; trial < 10000; ++trial) {
    const std::string s = gen::fuzz_string(rng);
    const auto r = try_parse(s);
    if (const auto* err = std::get_if<SyntaxError>(&r)) {
      CHECK(err->offset() >= 1);
      CHECK(err->offset() <= s.size() + 1);
    } else {
      ++parsed;
      const auto& e = std::get<Expr>(r);
      CHECK(same_tree(e.root(), parse(to_string(e)).root()));
    }
  }
  CHECK(parsed > 0);
}
