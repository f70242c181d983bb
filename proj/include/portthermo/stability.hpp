#pragma once

// Conserved quantities, the canonical point transformations they generate,
// shaped systems, the availability function and sampled Lyapunov
// certificates.

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "portthermo/dynamics.hpp"
#include "portthermo/system.hpp"

namespace portthermo {

/// Which extensive variable a transformation shifts: E (energy side, C over
/// (S, q)) or S (entropy side, C over (E, q)).
enum class Side { Energy, Entropy };

std::string_view to_string(Side s);

struct ConservationCheck {
  std::size_t samples = 0;
  /// max |{C∘π, K^a}| at lifted samples.
  double bracket = 0.0;
  /// max |∂K^a/∂p_E| (energy side) or |∂K^a/∂p_S| (entropy side) at random
  /// phase points off the submanifold.
  double off_manifold_law = 0.0;
  bool strong_law_holds = false;
};

class ConservedQuantity {
 public:
  /// `field` takes the n+1 base coordinates of its side, in order.
  ConservedQuantity(std::string name, ScalarField field, Side side);

  [[nodiscard]] const std::string& name() const { return name_; }
  [[nodiscard]] const ScalarField& field() const { return field_; }
  [[nodiscard]] Side side() const { return side_; }

  /// C∘π over a flat phase vector.
  template <class N>
  N on_phase(std::span<const N> phase) const;

  /// C∘π as a field over the given phase coordinate names.
  [[nodiscard]] ScalarField phase_field(const std::vector<std::string>& phase_names) const;

  [[nodiscard]] ConservationCheck verify(const PortThermoSystem& sys, std::size_t samples, Rng& rng) const;

  /// −C.
  [[nodiscard]] ConservedQuantity negated() const;

 private:
  std::string name_;
  ScalarField field_;
  Side side_;
};

inline constexpr double kBracketTolerance = 1e-10;

class PointTransformation {
 public:
  /// Verifies {C∘π, K^a} = 0 at `samples` lifted points of `sys`; throws
  /// ConstructionError with the worst residual otherwise.
  PointTransformation(ConservedQuantity generator, const PortThermoSystem& sys, std::size_t samples = 50,
                      std::uint64_t seed = 0, double tolerance = kBracketTolerance);

  /// A transformation whose generator has not been checked against any
  /// system (usable with apply_transform and verify_canonical only).
  static PointTransformation unverified(ConservedQuantity generator);

  [[nodiscard]] const ConservedQuantity& generator() const { return generator_; }
  [[nodiscard]] bool verified() const { return check_.has_value(); }
  [[nodiscard]] const std::optional<ConservationCheck>& check() const { return check_; }
  [[nodiscard]] bool is_inverse() const { return inverse_; }

  /// The transformation generated by −C.
  [[nodiscard]] PointTransformation inverse() const;

  template <class N>
  std::vector<N> apply_flat(std::span<const N> phase) const;

 private:
  explicit PointTransformation(ConservedQuantity generator);

  ConservedQuantity generator_;
  std::optional<ConservationCheck> check_;
  bool inverse_ = false;
};

PhasePoint apply_transform(const PointTransformation& T, const PhasePoint& pt);

/// A map of flat phase vectors, differentiable once.
using PhaseMap = std::function<std::vector<D1>(std::span<const D1>)>;

/// max over tangents v of |α_T(x)(DT v) − α_x(v)|.
double verify_canonical(const PointTransformation& T, const PhasePoint& pt,
                        const std::vector<std::vector<double>>& tangents);
double verify_canonical(const PhaseMap& map, std::span<const double> phase,
                        const std::vector<std::vector<double>>& tangents);

/// Generator shifted by C and Hamiltonians pulled back through T⁻¹.
PortThermoSystem transform_system(const PortThermoSystem& sys, const PointTransformation& T);

/// S̄(x*) − S̄(x) + ∇S̄(x*)·(x − x*).
double availability(const ScalarField& entropy, std::span<const double> setpoint, std::span<const double> at);
ScalarField availability_field(const ScalarField& entropy, std::vector<double> setpoint);

struct LyapunovCandidate {
  std::string name;
  /// Over a subset of the system's base coordinates (by name).
  ScalarField V;
  /// Equilibrium values of V's coordinates.
  std::vector<double> equilibrium;
};

struct ShellSpec {
  double r_min = 0.05;
  double r_max = 0.5;
  std::size_t count = 500;
};

struct LyapunovReport {
  std::string candidate;
  std::vector<std::string> coordinates;
  std::vector<double> equilibrium;
  double value_at_equilibrium = 0.0;
  std::size_t shell_samples = 0;
  /// min over the shell of V(x) − V(x*).
  double margin = 0.0;
  std::vector<double> margin_at;
  std::size_t trajectory_samples = 0;
  double max_dVdt = 0.0;
  double max_dVdt_time = 0.0;
  std::optional<double> hessian_min_eigenvalue;
  bool verdict = false;
};

inline constexpr double kLyapunovRateTolerance = 1e-9;

LyapunovReport lyapunov_certificate(const PortThermoSystem& sys, const LyapunovCandidate& candidate,
                                    const ShellSpec& shell, const Trajectory& trajectory, Rng& rng,
                                    int jobs = 1);

/// Smallest Hessian eigenvalue of f at x (central differences of the AD gradient).
double hessian_min_eigenvalue(const ScalarField& f, std::span<const double> x, double h = 1e-5);

/// Hessian of f at x by central differences of the AD gradient, symmetrized.
std::vector<std::vector<double>> hessian(const ScalarField& f, std::span<const double> x, double h = 1e-5);

// ---- template definitions -------------------------------------------------

template <class N>
N ConservedQuantity::on_phase(std::span<const N> phase) const {
  const std::size_t n = (phase.size() - 4) / 2;
  std::vector<N> base;
  base.reserve(n + 1);
  base.push_back(phase[side_ == Side::Energy ? PhaseLayout::S : PhaseLayout::E]);
  for (std::size_t i = 0; i < n; ++i) base.push_back(phase[2 + i]);
  return field_(std::span<const N>(base));
}

template <class N>
std::vector<N> PointTransformation::apply_flat(std::span<const N> phase) const {
  if (phase.size() < 4 || phase.size() % 2 != 0) throw PreconditionError("flat phase vector has bad size");
  const PhaseLayout lay{(phase.size() - 4) / 2};
  if (generator_.field().arity() != lay.n + 1) throw PreconditionError("generator dimension does not match point");
  const bool energy = generator_.side() == Side::Energy;
  std::vector<N> base;
  base.reserve(lay.n + 1);
  base.push_back(phase[energy ? PhaseLayout::S : PhaseLayout::E]);
  for (std::size_t i = 0; i < lay.n; ++i) base.push_back(phase[lay.q(i)]);
  const auto vg = value_gradient(generator_.field(), std::span<const N>(base));
  std::vector<N> out(phase.begin(), phase.end());
  const N& lead = phase[energy ? lay.pE() : lay.pS()];
  out[energy ? PhaseLayout::E : PhaseLayout::S] = out[energy ? PhaseLayout::E : PhaseLayout::S] + vg.value;
  const std::size_t conj = energy ? lay.pS() : lay.pE();
  out[conj] = out[conj] - lead * vg.gradient[0];
  for (std::size_t i = 0; i < lay.n; ++i) out[lay.p(i)] = out[lay.p(i)] - lead * vg.gradient[1 + i];
  return out;
}

}  // namespace portthermo
