#include <cmath>
#include <vector>

#include "doctest.h"
#include "generators.hpp"
#include "portthermo/calculus.hpp"

using namespace portthermo;

namespace {

const std::vector<std::string> kNames{"E", "S", "q", "p_E", "p_S", "p_q"};

ScalarField coordinate(std::size_t slot) {
  return ScalarField(kNames, [slot](auto x) { return x[slot]; });
}

// Random smooth fields: a quadratic plus a few transcendental terms with
// random coefficients.
ScalarField random_field(Rng& rng) {
  const auto a = gen::normal_vector(rng, 6);
  const auto b = gen::normal_vector(rng, 6);
  return ScalarField(kNames, [a, b](auto x) {
    using N = typename decltype(x)::value_type;
    N acc(0.0);
    for (std::size_t i = 0; i < 6; ++i) acc = acc + a[i] * x[i] * x[(i + 3) % 6] + b[i] * ad::sin(x[i]);
    return acc + ad::exp(x[0] * x[4] * 0.1);
  });
}

}  // namespace

TEST_CASE("canonical bracket relations") {
  Rng rng(1);
  const auto at = gen::phase_point(rng, 1);
  for (std::size_t i = 0; i < 3; ++i) {
    for (std::size_t j = 0; j < 3; ++j) {
      CHECK(poisson_bracket(coordinate(i), coordinate(3 + j), at) == (i == j ? 1.0 : 0.0));
      CHECK(poisson_bracket(coordinate(i), coordinate(j), at) == 0.0);
      CHECK(poisson_bracket(coordinate(3 + i), coordinate(3 + j), at) == 0.0);
    }
  }
}

TEST_CASE("property: bracket antisymmetry, Leibniz and Jacobi") {
  Rng rng(2);
  for (int trial = 0; trial < 50; ++trial) {
    const auto F = random_field(rng);
    const auto G = random_field(rng);
    const auto H = random_field(rng);
    const auto at = gen::phase_point(rng, 1);
    const double fg = poisson_bracket(F, G, at);
    CHECK(fg == doctest::Approx(-poisson_bracket(G, F, at)).epsilon(1e-12));

    const ScalarField GH(kNames, [G, H](auto x) { return G(x) * H(x); });
    const double leibniz = poisson_bracket(F, G, at) * H(at) + G(at) * poisson_bracket(F, H, at);
    CHECK(poisson_bracket(F, GH, at) == doctest::Approx(leibniz).epsilon(1e-10));

    // {F,{G,H}} + cyclic, with the inner brackets as fields.
    auto bracket_field = [](ScalarField A, ScalarField B) {
      return ScalarField(kNames, [A, B](auto x) {
        using N = typename decltype(x)::value_type;
        const auto ga = gradient_of(A, x);
        const auto gb = gradient_of(B, x);
        N acc(0.0);
        for (std::size_t i = 0; i < 3; ++i) acc = acc + ga[i] * gb[3 + i] - ga[3 + i] * gb[i];
        return acc;
      });
    };
    const double jacobi = poisson_bracket(F, bracket_field(G, H), at) + poisson_bracket(G, bracket_field(H, F), at) +
                          poisson_bracket(H, bracket_field(F, G), at);
    CHECK(std::abs(jacobi) <= 1e-8);
  }
}

TEST_CASE("euler residual and scale check") {
  Rng rng(4);
  const ScalarField homogeneous(kNames, [](auto x) { return x[3] * ad::exp(x[2]) + x[4] * x[5] / x[3]; });
  const ScalarField quadratic(kNames, [](auto x) { return x[4] * x[4]; });
  const ScalarField affine(kNames, [](auto x) { return x[3] + 1.0; });
  for (int trial = 0; trial < 50; ++trial) {
    const auto at = gen::phase_point(rng, 1);
    CHECK(std::abs(euler_residual(homogeneous, at)) <= 1e-12 * (1 + std::abs(homogeneous(at))));
    CHECK(homogeneity_scale_check(homogeneous, at) <= 1e-12);
    CHECK(euler_residual(quadratic, at) == doctest::Approx(-at[4] * at[4]));
    CHECK(euler_residual(affine, at) == doctest::Approx(1.0));
    if (std::abs(at[4]) > 0.1) CHECK(homogeneity_scale_check(quadratic, at) > 1e-3);
  }
}

TEST_CASE("gradient helper") {
  const ScalarField f({"a", "b"}, [](auto x) { return x[0] * x[0] * x[1]; });
  const auto g = gradient(f, std::vector<double>{3.0, 2.0});
  CHECK(g[0] == doctest::Approx(12.0));
  CHECK(g[1] == doctest::Approx(9.0));
}
