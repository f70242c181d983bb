#pragma once

// Hand-rolled generators for the property tests. Everything draws from the
// library's own seeded Rng so failures reproduce from the printed seed.

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <iterator>
#include <string>
#include <vector>

#include "portthermo/random.hpp"
#include "portthermo/system.hpp"

namespace gen {

using portthermo::Rng;

inline std::vector<double> uniform_vector(Rng& rng, std::size_t n, double lo, double hi) {
  std::vector<double> v(n);
  for (auto& x : v) x = rng.uniform(lo, hi);
  return v;
}

inline std::vector<double> normal_vector(Rng& rng, std::size_t n) {
  std::vector<double> v(n);
  for (auto& x : v) x = rng.normal();
  return v;
}

inline double nonzero_scale(Rng& rng) {
  double s = 0.0;
  while (std::abs(s) < 0.1) s = rng.uniform(-4.0, 4.0);
  return s;
}

/// Arbitrary flat phase vector with nonzero p_E.
inline std::vector<double> phase_point(Rng& rng, std::size_t n) {
  auto v = normal_vector(rng, 2 * n + 4);
  if (std::abs(v[n + 2]) < 0.1) v[n + 2] = 1.0;
  return v;
}

/// Well-formed expression over the given variables, built from the whole
/// grammar. Arguments of ln/sqrt and power bases are kept positive so
/// generated expressions evaluate at positive points.
class ExpressionGen {
 public:
  ExpressionGen(Rng& rng, std::vector<std::string> vars) : rng_(rng), vars_(std::move(vars)) {}

  std::string operator()(int depth = 4) { return positive(depth); }

 private:
  std::string leaf() {
    if (rng_.uniform() < 0.6) return vars_[static_cast<std::size_t>(rng_.uniform() * vars_.size())];
    const double c = 0.25 + std::floor(rng_.uniform() * 12.0) * 0.25;
    return std::to_string(c).substr(0, 4);
  }

  // Expression positive on the positive orthant.
  std::string positive(int depth) {
    if (depth <= 0) return leaf();
    switch (static_cast<int>(rng_.uniform() * 7)) {
      case 0: return "(" + positive(depth - 1) + " + " + positive(depth - 1) + ")";
      case 1: return positive(depth - 1) + " * " + positive(depth - 1);
      case 2: return positive(depth - 1) + " / (" + positive(depth - 1) + ")";
      case 3: return "exp(" + any(depth - 1) + " / 4)";
      case 4: return "sqrt(" + positive(depth - 1) + ")";
      case 5: return "(" + positive(depth - 1) + ") ^ " + leaf_exponent();
      default: return "pow(" + positive(depth - 1) + ", " + leaf_exponent() + ")";
    }
  }

  std::string any(int depth) {
    if (depth <= 0) return leaf();
    switch (static_cast<int>(rng_.uniform() * 6)) {
      case 0: return any(depth - 1) + " - " + positive(depth - 1);
      case 1: return "-" + positive(depth - 1);
      case 2: return "ln(" + positive(depth - 1) + ")";
      case 3: return "sin(" + any(depth - 1) + ")";
      case 4: return "cos(" + any(depth - 1) + ")";
      default: return positive(depth);
    }
  }

  std::string leaf_exponent() {
    static const char* const kExp[] = {"2", "3", "0.5", "1.5", "-1"};
    return kExp[static_cast<std::size_t>(rng_.uniform() * 5)];
  }

  Rng& rng_;
  std::vector<std::string> vars_;
};

/// Arbitrary byte strings biased toward the expression alphabet.
inline std::string fuzz_string(Rng& rng) {
  static const std::string kTokens[] = {"x", "y", "1", "2.5", "1e3", "1e", ".", "+", "-", "*", "/", "^",
                                        "(", ")", ",", " ", "exp", "ln", "sqrt", "sin", "cos", "pow",
                                        "min", "pi", "e", "E", "_", "foo", "@", "#", "\t"};
  const std::size_t length = static_cast<std::size_t>(rng.uniform() * 24);
  std::string s;
  for (std::size_t i = 0; i < length; ++i) {
    if (rng.uniform() < 0.08) {
      s.push_back(static_cast<char>(rng() & 0xff));
    } else {
      s += kTokens[static_cast<std::size_t>(rng.uniform() * std::size(kTokens))];
    }
  }
  return s;
}

/// Random reaction network: `species` species, complexes are the unit
/// vectors plus random pairs, reactions are random edges between them.
struct Network {
  std::vector<std::vector<double>> Z;
  std::vector<std::vector<double>> B;
  std::vector<double> weights;
};

inline Network reaction_network(Rng& rng, std::size_t species, std::size_t reactions) {
  Network net;
  const std::size_t complexes = species + 1;
  net.Z.assign(species, std::vector<double>(complexes, 0.0));
  for (std::size_t i = 0; i < species; ++i) net.Z[i][i] = 1.0;
  net.Z[0][species] = 1.0;
  net.Z[species - 1][species] += 1.0;
  net.B.assign(complexes, std::vector<double>(reactions, 0.0));
  for (std::size_t r = 0; r < reactions; ++r) {
    const auto from = static_cast<std::size_t>(rng.uniform() * complexes);
    auto to = static_cast<std::size_t>(rng.uniform() * (complexes - 1));
    if (to >= from) ++to;
    net.B[from][r] = -1.0;
    net.B[to][r] = 1.0;
    net.weights.push_back(rng.uniform(0.2, 2.0));
  }
  return net;
}

}  // namespace gen
