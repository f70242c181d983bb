#include "portthermo/calculus.hpp"

#include <algorithm>
#include <cmath>

namespace portthermo {

namespace {

PhaseLayout layout_for(std::size_t size) {
  if (size < 4 || size % 2 != 0) throw PreconditionError("phase-space field needs 2n+4 coordinates");
  return PhaseLayout{(size - 4) / 2};
}

}  // namespace

std::vector<double> gradient(const ScalarField& f, std::span<const double> at) {
  return gradient_of(f, at);
}

double poisson_bracket(const ScalarField& F, const ScalarField& G, std::span<const double> at) {
  const PhaseLayout lay = layout_for(at.size());
  const auto dF = gradient_of(F, at);
  const auto dG = gradient_of(G, at);
  const std::size_t half = lay.n + 2;
  double acc = 0.0;
  for (std::size_t i = 0; i < half; ++i) acc += dF[i] * dG[half + i] - dF[half + i] * dG[i];
  return acc;
}

double poisson_bracket(const ScalarField& F, const ScalarField& G, const PhasePoint& at) {
  const auto flat = at.flat();
  return poisson_bracket(F, G, std::span<const double>(flat));
}

double euler_residual(const ScalarField& K, std::span<const double> at) {
  const PhaseLayout lay = layout_for(at.size());
  const auto slots = lay.momentum_slots();
  const auto vg = value_gradient(K, at, std::span<const std::size_t>(slots));
  double euler = 0.0;
  for (auto s : slots) euler += at[s] * vg.gradient[s];
  return vg.value - euler;
}

double euler_residual(const ScalarField& K, const PhasePoint& at) {
  const auto flat = at.flat();
  return euler_residual(K, std::span<const double>(flat));
}

double homogeneity_scale_check(const ScalarField& K, std::span<const double> at,
                               std::span<const double> scales) {
  const PhaseLayout lay = layout_for(at.size());
  const double k0 = K(at);
  std::vector<double> scaled(at.begin(), at.end());
  double worst = 0.0;
  for (double lambda : scales) {
    if (lambda == 0.0 || !std::isfinite(lambda)) throw PreconditionError("scales must be finite and nonzero");
    for (auto s : lay.momentum_slots()) scaled[s] = lambda * at[s];
    const double ks = K(std::span<const double>(scaled));
    worst = std::max(worst, std::abs(ks - lambda * k0) / (1.0 + std::abs(lambda * k0)));
  }
  return worst;
}

double homogeneity_scale_check(const ScalarField& K, const PhasePoint& at, std::span<const double> scales) {
  const auto flat = at.flat();
  return homogeneity_scale_check(K, std::span<const double>(flat), scales);
}

}  // namespace portthermo
