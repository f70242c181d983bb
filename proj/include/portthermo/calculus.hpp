#pragma once

// Gradients, the canonical Poisson bracket on T*Q and homogeneity checks.
//
// Bracket convention: {F, G} = Σ ∂F/∂q^e ∂G/∂p^e − ∂F/∂p^e ∂G/∂q^e, so
// that dC/dt along X_K equals {C, K}.

#include <span>
#include <vector>

#include "portthermo/core.hpp"
#include "portthermo/field.hpp"

namespace portthermo {

std::vector<double> gradient(const ScalarField& f, std::span<const double> at);

/// F and G are fields over the flat phase coordinates (2n+4 slots).
double poisson_bracket(const ScalarField& F, const ScalarField& G, std::span<const double> at);
double poisson_bracket(const ScalarField& F, const ScalarField& G, const PhasePoint& at);

/// K − Σ p^e ∂K/∂p^e at the point; zero iff Euler's identity holds there.
double euler_residual(const ScalarField& K, std::span<const double> at);
double euler_residual(const ScalarField& K, const PhasePoint& at);

inline const std::vector<double> kDefaultHomogeneityScales{0.5, 2.0, -3.0};

/// max over λ of |K(q^e, λp^e) − λK(q^e, p^e)| / (1 + |λK|).
double homogeneity_scale_check(const ScalarField& K, std::span<const double> at,
                               std::span<const double> scales = kDefaultHomogeneityScales);
double homogeneity_scale_check(const ScalarField& K, const PhasePoint& at,
                               std::span<const double> scales = kDefaultHomogeneityScales);

}  // namespace portthermo
