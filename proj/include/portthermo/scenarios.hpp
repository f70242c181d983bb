#pragma once

// Built-in, parameterized systems: ideal gas, mass-spring with controller
// and damper, chemical reaction networks and heat conduction, plus a few
// deliberately broken fixtures.

#include <map>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "portthermo/dynamics.hpp"
#include "portthermo/interconnect.hpp"
#include "portthermo/stability.hpp"
#include "portthermo/system.hpp"

namespace portthermo {

using Matrix = std::vector<std::vector<double>>;
using ParamValue = std::variant<double, std::string, Matrix>;

std::string describe(const ParamValue& v);

struct ParamDoc {
  std::string name;
  ParamValue default_value;
  std::string doc;
};

struct ScenarioInfo {
  std::string name;
  std::string summary;
  std::vector<ParamDoc> params;
  /// Deliberately broken systems used to exercise the checks.
  bool fixture = false;
};

/// Parameter overrides by name. Anything not set takes the documented default.
class ScenarioParams {
 public:
  ScenarioParams() = default;
  ScenarioParams(std::initializer_list<std::pair<const std::string, ParamValue>> values) : values_(values) {}

  void set(const std::string& key, ParamValue value) { values_[key] = std::move(value); }
  [[nodiscard]] bool has(const std::string& key) const { return values_.count(key) != 0; }
  [[nodiscard]] const std::map<std::string, ParamValue>& values() const { return values_; }

 private:
  std::map<std::string, ParamValue> values_;
};

/// A system together with the data needed to run and analyse it.
struct Scenario {
  Scenario(std::string name, PortThermoSystem system);

  std::string name;
  PortThermoSystem system;
  std::optional<ComposedSystem> composed;
  std::vector<double> x0;
  double t_end = 1.0;
  InputSignal input;
  std::vector<ConservedQuantity> conserved;
  std::vector<LyapunovCandidate> candidates;
  /// Resolved parameter values, defaults included.
  std::map<std::string, ParamValue> params;

  /// Drift channels for the conserved quantities, drift and rate channels for the candidates.
  [[nodiscard]] std::vector<TrackedQuantity> tracked() const;
};

/// Every scenario in a fixed order.
const std::vector<ScenarioInfo>& scenario_catalog();
const ScenarioInfo& scenario_info(const std::string& name);
Scenario build_scenario(const std::string& name, const ScenarioParams& params = {});

// ---- expression helpers ---------------------------------------------------

/// Parses `text` into a field over `coordinates`, folding in `parameters`.
ScalarField expression_field(const std::string& text, const std::vector<std::string>& coordinates,
                             const std::map<std::string, double>& parameters = {});

/// A conserved quantity on the system's own side, written over its base coordinates.
ConservedQuantity conserved_from_expression(const PortThermoSystem& sys, const std::string& name,
                                            const std::string& text,
                                            const std::map<std::string, double>& parameters = {});

/// A Lyapunov candidate over the base coordinates its expression mentions.
LyapunovCandidate candidate_from_expression(const PortThermoSystem& sys, const std::string& name,
                                            const std::string& text, const std::map<std::string, double>& equilibrium,
                                            const std::map<std::string, double>& parameters = {});

// ---- builders -------------------------------------------------------------

PortThermoSystem build_ideal_gas(double cv, double R, double N, Representation rep = Representation::Entropy);

PortThermoSystem build_mass_spring(double k, double m);

/// One-port controller with energy Ē_c(q_c) given as an expression in q_c.
PortThermoSystem build_controller(const std::string& energy_expression);

struct ClosedLoopParams {
  double k = 1.0;
  double m = 1.0;
  double z_star = 1.0;
  double d = 0.5;
  /// Controller state at the set-point; unset means z_star.
  std::optional<double> qc_star;
  std::string damper_energy = "exp(S_d)";
  /// Ē_c as an expression in q_c; empty selects ½(q_c − q_c⁰)² with Ē_c'(q_c*) = −k z*.
  std::string controller_energy;
};

struct ClosedLoop {
  /// Plant and controller under negative feedback.
  ComposedSystem controlled;
  /// The same with the damper on the remaining external port.
  ComposedSystem damped;
  double qc_star = 0.0;
  /// Φ(z − q_c) = −k z*(z − q_c) on each of the two systems.
  ConservedQuantity conserved_controlled;
  ConservedQuantity conserved_damped;
  /// Ē_p + Ē_c + Φ over (z, pi_m, q_c), minimum at (z*, 0, q_c*).
  LyapunovCandidate shaped;
};

ClosedLoop closed_loop_mass_spring(const ClosedLoopParams& params = {});

struct CrnSpec {
  /// Species × complexes.
  Matrix Z{{1.0, 0.0}, {0.0, 1.0}};
  /// Complexes × reactions, each column one edge (−1 at the source, +1 at the target).
  Matrix B{{-1.0}, {1.0}};
  std::vector<double> weights{1.0};
  double c = 1.5;
  double R = 1.0;
  /// Per-species offset of the chemical potential (μ_i/T = R(ln q_i + θ_i)).
  std::vector<double> theta;
};

/// Entropy-representation reaction network with S̄ = c ln E − R Σ(q ln q − q + θ q).
PortThermoSystem build_crn(const CrnSpec& spec);

/// Two bodies with internal energies Ū_1(S1), Ū_2(S2) exchanging heat at rate λ(T1 − T2).
PortThermoSystem build_heat_exchanger(double lambda, const std::string& U1 = "exp(S1)",
                                      const std::string& U2 = "exp(S2)");

}  // namespace portthermo
