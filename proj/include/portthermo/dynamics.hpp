#pragma once

// Integration of the Hamiltonian dynamics restricted to the Liouville
// submanifold, in the submanifold's own base coordinates.

#include <cstddef>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "portthermo/system.hpp"

namespace portthermo {

/// Input rule of one port.
struct InputRule {
  enum class Kind { Constant, Time, Feedback };
  Kind kind = Kind::Constant;
  double value = 0.0;
  std::function<double(double t)> of_time;
  /// Receives t, the base point and the power outputs y_p (evaluated at u = 0).
  std::function<double(double t, std::span<const double> base, std::span<const double> y)> feedback;

  static InputRule constant(double v);
  static InputRule time(std::function<double(double)> f);
  static InputRule state_feedback(
      std::function<double(double, std::span<const double>, std::span<const double>)> f);
};

class InputSignal {
 public:
  /// Zero on every port.
  InputSignal() = default;
  explicit InputSignal(std::vector<InputRule> rules) : rules_(std::move(rules)) {}

  static InputSignal constant(const std::vector<double>& values);

  [[nodiscard]] std::vector<double> operator()(const PortThermoSystem& sys, double t,
                                               std::span<const double> base) const;
  [[nodiscard]] const std::vector<InputRule>& rules() const { return rules_; }

 private:
  std::vector<InputRule> rules_;
};

struct Channel {
  std::string name;
  std::vector<double> values;
};

struct Trajectory {
  std::vector<std::string> state_names;
  std::vector<double> times;
  std::vector<std::vector<double>> states;
  std::vector<std::vector<double>> inputs;
  std::vector<Channel> channels;

  [[nodiscard]] std::size_t size() const { return times.size(); }
  [[nodiscard]] bool empty() const { return times.empty(); }
  [[nodiscard]] const Channel& channel(std::string_view name) const;
  [[nodiscard]] bool has_channel(std::string_view name) const;
};

enum class Method { RK4, RK45 };

struct IntegrationOptions {
  Method method = Method::RK4;
  /// RK4 step; 0 means span / 10^4.
  double h = 0.0;
  double atol = 1e-9;
  double rtol = 1e-9;
  std::size_t max_steps = 10'000'000;
};

/// A scalar over (a subset of) the base coordinates followed along the run:
/// Drift records f(x(t)) − f(x(t0)), Rate records ∇f · ẋ.
struct TrackedQuantity {
  enum class Kind { Drift, Rate };
  std::string name;
  ScalarField field;
  Kind kind = Kind::Drift;
};

/// Integration left the admissible domain; carries everything up to the
/// last valid time.
class DomainExitError : public DomainError {
 public:
  DomainExitError(const std::string& what, Trajectory partial, double last_time)
      : DomainError(what), partial_(std::move(partial)), last_time_(last_time) {}
  [[nodiscard]] const Trajectory& partial() const { return partial_; }
  [[nodiscard]] double last_time() const { return last_time_; }

 private:
  Trajectory partial_;
  double last_time_;
};

class StepSizeError : public Error {
 public:
  using Error::Error;
};

/// Base-coordinate velocity: (∂K/∂p_S, ∂K/∂p) in energy representation,
/// (∂K/∂p_E, ∂K/∂p) in entropy representation, at lift(base, scale).
std::vector<double> reduced_vector_field(const PortThermoSystem& sys, std::span<const double> base,
                                         std::span<const double> u, double scale = 1.0);

Trajectory integrate(const PortThermoSystem& sys, std::span<const double> x0, const InputSignal& input,
                     double t0, double t1, const IntegrationOptions& options = {},
                     const std::vector<TrackedQuantity>& tracked = {});

struct InvariantReport {
  std::size_t samples = 0;
  /// max |dE/dt − y_pᵀu| / max(1, |dE/dt|, |y_pᵀu|)
  double max_balance_residual = 0.0;
  /// min over samples of the summed ∂K^a/∂p_S
  double min_entropy_production = 0.0;
  double max_conserved_drift = 0.0;
  double max_k_residual = 0.0;
  /// max |E(t) − E(t0)| / max(1, |E(t0)|)
  double max_energy_drift = 0.0;
};

/// Recomputes the invariant channels along a trajectory of `sys`.
InvariantReport monitor(const PortThermoSystem& sys, const Trajectory& trajectory,
                        const std::vector<TrackedQuantity>& conserved = {});

/// Relative difference |a − b| / max(1, |a|, |b|).
double relative_residual(double a, double b);

/// Total energy rate by the chain rule through the generator.
double energy_rate(const PortThermoSystem& sys, std::span<const double> base, std::span<const double> velocity);

}  // namespace portthermo
