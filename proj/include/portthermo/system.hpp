#pragma once

// Port-thermodynamic systems: a Liouville submanifold together with an
// internal Hamiltonian K^a and control Hamiltonians K^c_j, all homogeneous
// of degree 1 in the co-extensive variables.

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "portthermo/core.hpp"
#include "portthermo/field.hpp"
#include "portthermo/random.hpp"

namespace portthermo {

/// K^c_j over the phase coordinates followed by the port's own input u_j.
struct ControlHamiltonian {
  std::string label;
  ScalarField field;
  bool linear_in_u = true;
};

/// Role of a q coordinate. Composed systems carry the constituents' second
/// energy or entropy among their q coordinates; the Law checks and the
/// bookkeeping channels sum over those slots.
enum class SlotKind { Plain, Energy, Entropy };

class PortThermoSystem {
 public:
  PortThermoSystem(std::string name, StateManifold manifold, ScalarField internal,
                   std::vector<ControlHamiltonian> controls = {}, std::vector<SlotKind> q_kinds = {});

  [[nodiscard]] const std::string& name() const { return name_; }
  [[nodiscard]] const StateManifold& manifold() const { return manifold_; }
  [[nodiscard]] const ScalarField& internal() const { return internal_; }
  [[nodiscard]] const std::vector<ControlHamiltonian>& controls() const { return controls_; }
  [[nodiscard]] std::size_t ports() const { return controls_.size(); }
  [[nodiscard]] const std::vector<SlotKind>& q_kinds() const { return q_kinds_; }
  [[nodiscard]] PhaseLayout layout() const { return manifold_.layout(); }

  /// Phase slots whose momenta make up the total energy (p_E and flagged q).
  [[nodiscard]] std::vector<std::size_t> energy_momenta() const;
  [[nodiscard]] std::vector<std::size_t> entropy_momenta() const;

  /// E plus every energy-flagged q coordinate.
  [[nodiscard]] double total_energy(std::span<const double> phase) const;
  [[nodiscard]] double total_entropy(std::span<const double> phase) const;

  /// K = K^a + Σ K^c_j(·, u_j) u_j at a flat phase point.
  template <class N>
  N hamiltonian(std::span<const N> phase, std::span<const double> u) const;

  /// The total Hamiltonian with the inputs frozen, as a field over phase.
  [[nodiscard]] ScalarField hamiltonian_field(std::vector<double> u) const;

  /// A copy with a different name.
  [[nodiscard]] PortThermoSystem renamed(std::string name) const;

 private:
  std::string name_;
  StateManifold manifold_;
  ScalarField internal_;
  std::vector<ControlHamiltonian> controls_;
  std::vector<SlotKind> q_kinds_;
};

struct CheckResult {
  std::string name;
  double worst = 0.0;
  double tolerance = 0.0;
  /// Lower-bound checks pass when worst ≥ tolerance, the rest when worst ≤ tolerance.
  bool lower_bound = false;
  bool passed = true;
  std::size_t worst_sample = 0;
};

struct ValidationReport {
  std::string system;
  std::size_t samples = 0;
  std::vector<CheckResult> checks;

  [[nodiscard]] bool passed() const;
  [[nodiscard]] const CheckResult& check(std::string_view name) const;
};

struct ValidationTolerances {
  double euler = 1e-9;
  double homogeneity = 1e-10;
  double restriction = 1e-9;
  double first_law = 1e-9;
  double second_law = -1e-12;
};

struct ValidationOptions {
  ValidationTolerances tolerances;
  int jobs = 1;
};

ValidationReport validate(const PortThermoSystem& sys, const std::vector<std::vector<double>>& samples,
                          const std::vector<std::vector<double>>& u_samples,
                          const ValidationOptions& options = {});

/// Zero input, all ones, and one standard-normal draw.
std::vector<std::vector<double>> default_input_samples(std::size_t ports, Rng& rng);

/// Draws `count` admissible samples and the default input set, then validates.
ValidationReport validate(const PortThermoSystem& sys, std::size_t count, Rng& rng,
                          const ValidationOptions& options = {});

std::vector<double> power_output(const PortThermoSystem& sys, const PhasePoint& pt,
                                 std::span<const double> u);
std::vector<double> entropy_output(const PortThermoSystem& sys, const PhasePoint& pt,
                                   std::span<const double> u);

/// Same as above without the membership check, at a flat phase point.
std::vector<double> power_output_flat(const PortThermoSystem& sys, std::span<const double> phase,
                                      std::span<const double> u);
std::vector<double> entropy_output_flat(const PortThermoSystem& sys, std::span<const double> phase,
                                        std::span<const double> u);

/// Euclidean norm of dK^a at the default-gauge lift of `base`.
double equilibrium_residual(const PortThermoSystem& sys, std::span<const double> base);

// ---- template definitions -------------------------------------------------

template <class N>
N PortThermoSystem::hamiltonian(std::span<const N> phase, std::span<const double> u) const {
  if (u.size() != controls_.size()) throw PreconditionError("input vector has wrong length");
  N k = internal_(phase);
  if (controls_.empty()) return k;
  std::vector<N> ext(phase.begin(), phase.end());
  ext.emplace_back(0.0);
  for (std::size_t j = 0; j < controls_.size(); ++j) {
    if (u[j] == 0.0 && controls_[j].linear_in_u) continue;
    ext.back() = N(u[j]);
    k = k + controls_[j].field(std::span<const N>(ext)) * u[j];
  }
  return k;
}

}  // namespace portthermo
