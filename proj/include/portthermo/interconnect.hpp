#pragma once

// Pairwise interconnection of port-thermodynamic systems through power
// ports (shared E, p_E1 = p_E2) or entropy-flow ports (shared S,
// p_S1 = p_S2), plus the linear damper.

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "portthermo/system.hpp"

namespace portthermo {

enum class LawKind { NegativeFeedback, GyrativeSkew, Custom };

std::string_view to_string(LawKind k);

/// How the selected ports are coupled.
///  NegativeFeedback: u1 = −y2 + v, u2 = y1 (v becomes a new external port).
///  GyrativeSkew:     (u1, u2) = J (y1, y2) with J skew; an empty J means zero.
///  Custom:           u1_j, u2_k given as fields over (y1..., y2...); v ≡ 0.
struct FeedbackLaw {
  LawKind kind = LawKind::NegativeFeedback;
  std::vector<std::vector<double>> J;
  std::vector<ScalarField> u1;
  std::vector<ScalarField> u2;

  static FeedbackLaw negative_feedback();
  static FeedbackLaw gyrative(std::vector<std::vector<double>> J);
  /// All selected inputs held at zero.
  static FeedbackLaw decoupled();
  static FeedbackLaw custom(std::vector<ScalarField> u1, std::vector<ScalarField> u2);
};

/// Ports taking part in the interconnection; nullopt selects every port.
struct PortSelection {
  std::optional<std::vector<std::size_t>> first;
  std::optional<std::vector<std::size_t>> second;
};

enum class CompositionKind { Power, Entropy };

struct CompositionOptions {
  std::string name;
  std::size_t samples = 20;
  std::uint64_t seed = 0;
  double tolerance = 1e-9;
};

struct ComposedSystem {
  PortThermoSystem system;
  CompositionKind kind = CompositionKind::Power;
  std::shared_ptr<const PortThermoSystem> first;
  std::shared_ptr<const PortThermoSystem> second;
  FeedbackLaw law;
  /// Composed base index of every base coordinate of each constituent.
  std::vector<std::size_t> first_base;
  std::vector<std::size_t> second_base;
  /// True for Custom laws, whose balance property was only sampled.
  bool law_checked_numerically = false;
  /// Worst balance residual seen over the composition samples.
  double law_residual = 0.0;

  /// Base coordinates of constituent `which` (1 or 2) inside a composed base point.
  [[nodiscard]] std::vector<double> constituent_base(int which, std::span<const double> base) const;
};

ComposedSystem compose_power(const PortThermoSystem& sys1, const PortThermoSystem& sys2,
                             const FeedbackLaw& law, const PortSelection& ports = {},
                             const CompositionOptions& options = {});

ComposedSystem compose_entropy(const PortThermoSystem& sys1, const PortThermoSystem& sys2,
                               const FeedbackLaw& law, const PortSelection& ports = {},
                               const CompositionOptions& options = {});

/// One-port damper with internal energy Ū_d(S_d) and
/// K^c = (p_U + p_S / Ū_d'(S_d)) d u.
PortThermoSystem make_damper(const ScalarField& internal_energy, double d, std::string name = "damper",
                             std::string port_label = "u_d");

}  // namespace portthermo
