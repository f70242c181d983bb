#include <cmath>
#include <vector>

#include "doctest.h"
#include "generators.hpp"
#include "portthermo/ad.hpp"
#include "portthermo/field.hpp"

using namespace portthermo;
using ad::D1;
using ad::D2;

TEST_CASE("dual arithmetic follows the chain rule") {
  const D1 x = ad::variable(0.7, 0, 2);
  const D1 y = ad::variable(1.3, 1, 2);
  const D1 f = x * y + ad::sin(x) / y - ad::exp(x * 0.5);
  CHECK(f.v == doctest::Approx(0.7 * 1.3 + std::sin(0.7) / 1.3 - std::exp(0.35)));
  CHECK(f.partial(0) == doctest::Approx(1.3 + std::cos(0.7) / 1.3 - 0.5 * std::exp(0.35)));
  CHECK(f.partial(1) == doctest::Approx(0.7 - std::sin(0.7) / (1.3 * 1.3)));
}

TEST_CASE("constants carry no partials") {
  const D1 c(3.0);
  CHECK(c.is_constant());
  const D1 x = ad::variable(2.0, 0, 1);
  const D1 r = c * x + c;
  CHECK(r.partial(0) == doctest::Approx(3.0));
  CHECK((c * c).is_constant());
}

TEST_CASE("nested duals give second derivatives") {
  // f(x) = x^3 ln x; f'' = 6x ln x + 5x
  const double x0 = 1.7;
  const D2 x = ad::variable(D1(ad::variable(x0, 0, 1)), 0, 1);
  const D2 f = x * x * x * ad::log(x);
  CHECK(f.partial(0).partial(0) == doctest::Approx(6 * x0 * std::log(x0) + 5 * x0));
  CHECK(f.partial(0).v == doctest::Approx(3 * x0 * x0 * std::log(x0) + x0 * x0));
}

TEST_CASE("power with variable exponent") {
  const D1 a = ad::variable(2.0, 0, 2);
  const D1 b = ad::variable(3.0, 1, 2);
  const D1 p = ad::pow(a, b);
  CHECK(p.v == doctest::Approx(8.0));
  CHECK(p.partial(0) == doctest::Approx(12.0));
  CHECK(p.partial(1) == doctest::Approx(8.0 * std::log(2.0)));
  CHECK_THROWS_AS(ad::pow(D1(-2.0), b), DomainError);
  CHECK(ad::pow(D1(-2.0), D1(3.0)).v == doctest::Approx(-8.0));
}

TEST_CASE("domain errors on the primal") {
  CHECK_THROWS_AS(ad::log(D1(0.0)), DomainError);
  CHECK_THROWS_AS(ad::sqrt(D1(-1.0)), DomainError);
  CHECK_THROWS_AS(D1(1.0) / D1(0.0), DomainError);
  CHECK_THROWS_AS(ad::pow(0.0, -1.0), DomainError);
}

TEST_CASE("mismatched seed bases are rejected") {
  const D1 a = ad::variable(1.0, 0, 2);
  const D1 b = ad::variable(1.0, 0, 3);
  CHECK_THROWS_AS(a + b, PreconditionError);
}

TEST_CASE("property: AD gradient agrees with central differences") {
  Rng rng(11);
  const ScalarField f({"a", "b", "c"}, [](auto v) {
    return ad::exp(v[0] * 0.3) * ad::log(v[1] + 2.0) + ad::sqrt(v[2] * v[2] + 1.0) * ad::cos(v[0] - v[1]);
  });
  for (int trial = 0; trial < 200; ++trial) {
    const auto x = gen::uniform_vector(rng, 3, -1.0, 1.0);
    const auto g = gradient_of(f, std::span<const double>(x));
    for (std::size_t i = 0; i < 3; ++i) {
      auto xp = x;
      auto xm = x;
      const double h = 1e-6;
      xp[i] += h;
      xm[i] -= h;
      const double fd = (f(xp) - f(xm)) / (2 * h);
      CHECK(std::abs(fd - g[i]) <= 1e-7 * (1 + std::abs(g[i])));
    }
  }
}

TEST_CASE("property: symmetric mixed second partials") {
  Rng rng(12);
  const ScalarField f({"a", "b"}, [](auto v) { return ad::sin(v[0] * v[1]) + v[0] * v[0] * ad::exp(v[1]); });
  for (int trial = 0; trial < 100; ++trial) {
    const auto x = gen::uniform_vector(rng, 2, -2.0, 2.0);
    std::vector<D1> seeded{ad::variable(x[0], 0, 2), ad::variable(x[1], 1, 2)};
    const auto g = gradient_of(f, std::span<const D1>(seeded));
    CHECK(g[0].partial(1) == doctest::Approx(g[1].partial(0)).epsilon(1e-12));
  }
}

TEST_CASE("partial_of and active slots") {
  const ScalarField f({"a", "b", "c"}, [](auto v) { return v[0] * v[1] * v[2]; });
  const std::vector<double> x{2.0, 3.0, 5.0};
  CHECK(partial_of(f, std::span<const double>(x), 1) == doctest::Approx(10.0));
  const std::size_t active[] = {2};
  const auto g = gradient_of(f, std::span<const double>(x), std::span<const std::size_t>(active));
  CHECK(g[0] == 0.0);
  CHECK(g[2] == doctest::Approx(6.0));
}

TEST_CASE("field arity is enforced") {
  const ScalarField f({"a"}, [](auto v) { return v[0]; });
  CHECK_THROWS_AS(f(std::vector<double>{1.0, 2.0}), PreconditionError);
  CHECK_THROWS_AS(ScalarField()(std::vector<double>{}), PreconditionError);
}

TEST_CASE("embed and fix_last") {
  const ScalarField f({"b", "a"}, [](auto v) { return v[0] - 2.0 * v[1]; });
  const auto g = embed(f, {"a", "c", "b"});
  CHECK(g(std::vector<double>{1.0, 100.0, 5.0}) == doctest::Approx(3.0));
  CHECK_THROWS_AS(embed(f, {"a"}), PreconditionError);
  const auto h = fix_last(f, 4.0);
  CHECK(h.arity() == 1);
  CHECK(h(std::vector<double>{1.0}) == doctest::Approx(-7.0));
}
