#include "portthermo/system.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "portthermo/calculus.hpp"
#include "portthermo/kernels.hpp"

namespace portthermo {

PortThermoSystem::PortThermoSystem(std::string name, StateManifold manifold, ScalarField internal,
                                   std::vector<ControlHamiltonian> controls, std::vector<SlotKind> q_kinds)
    : name_(std::move(name)),
      manifold_(std::move(manifold)),
      internal_(std::move(internal)),
      controls_(std::move(controls)),
      q_kinds_(std::move(q_kinds)) {
  const std::size_t size = manifold_.layout().size();
  if (internal_.empty() || internal_.arity() != size)
    throw PreconditionError("internal Hamiltonian of '" + name_ + "' must take " + std::to_string(size) +
                            " phase coordinates");
  for (const auto& c : controls_) {
    if (c.field.empty() || c.field.arity() != size + 1)
      throw PreconditionError("control Hamiltonian '" + c.label + "' must take the phase coordinates and u");
  }
  for (std::size_t i = 0; i < controls_.size(); ++i)
    for (std::size_t j = 0; j < i; ++j)
      if (controls_[i].label == controls_[j].label)
        throw PreconditionError("duplicate port label '" + controls_[i].label + "'");
  if (q_kinds_.empty()) q_kinds_.assign(manifold_.n(), SlotKind::Plain);
  if (q_kinds_.size() != manifold_.n()) throw PreconditionError("one slot kind per q coordinate expected");
}

std::vector<std::size_t> PortThermoSystem::energy_momenta() const {
  const PhaseLayout lay = layout();
  std::vector<std::size_t> out{lay.pE()};
  for (std::size_t i = 0; i < q_kinds_.size(); ++i)
    if (q_kinds_[i] == SlotKind::Energy) out.push_back(lay.p(i));
  return out;
}

std::vector<std::size_t> PortThermoSystem::entropy_momenta() const {
  const PhaseLayout lay = layout();
  std::vector<std::size_t> out{lay.pS()};
  for (std::size_t i = 0; i < q_kinds_.size(); ++i)
    if (q_kinds_[i] == SlotKind::Entropy) out.push_back(lay.p(i));
  return out;
}

double PortThermoSystem::total_energy(std::span<const double> phase) const {
  const PhaseLayout lay = layout();
  double e = phase[PhaseLayout::E];
  for (std::size_t i = 0; i < q_kinds_.size(); ++i)
    if (q_kinds_[i] == SlotKind::Energy) e += phase[lay.q(i)];
  return e;
}

double PortThermoSystem::total_entropy(std::span<const double> phase) const {
  const PhaseLayout lay = layout();
  double s = phase[PhaseLayout::S];
  for (std::size_t i = 0; i < q_kinds_.size(); ++i)
    if (q_kinds_[i] == SlotKind::Entropy) s += phase[lay.q(i)];
  return s;
}

ScalarField PortThermoSystem::hamiltonian_field(std::vector<double> u) const {
  if (u.size() != controls_.size()) throw PreconditionError("input vector has wrong length");
  return ScalarField(manifold_.phase_names(), [self = *this, u](auto x) {
    return self.hamiltonian(x, std::span<const double>(u));
  });
}

PortThermoSystem PortThermoSystem::renamed(std::string name) const {
  PortThermoSystem copy = *this;
  copy.name_ = std::move(name);
  return copy;
}

bool ValidationReport::passed() const {
  return std::all_of(checks.begin(), checks.end(), [](const CheckResult& c) { return c.passed; });
}

const CheckResult& ValidationReport::check(std::string_view name) const {
  for (const auto& c : checks)
    if (c.name == name) return c;
  throw PreconditionError("no check named '" + std::string(name) + "'");
}

namespace {

// K − Σ p ∂K/∂p for a field whose momentum slots are `slots`.
double euler_at(const ScalarField& f, std::span<const double> x, std::span<const std::size_t> slots) {
  const auto vg = value_gradient(f, x, slots);
  double acc = 0.0;
  for (auto s : slots) acc += x[s] * vg.gradient[s];
  return vg.value - acc;
}

double homogeneity_at(const ScalarField& f, std::span<const double> x, std::span<const std::size_t> slots) {
  const double k0 = f(x);
  std::vector<double> scaled(x.begin(), x.end());
  double worst = 0.0;
  for (double lambda : kDefaultHomogeneityScales) {
    for (auto s : slots) scaled[s] = lambda * x[s];
    const double ks = f(std::span<const double>(scaled));
    worst = std::max(worst, std::abs(ks - lambda * k0) / (1.0 + std::abs(lambda * k0)));
  }
  return worst;
}

struct SampleOutcome {
  double euler_internal = 0.0;
  std::vector<double> euler_control;
  double homogeneity = 0.0;
  double restriction = 0.0;
  double first_law = 0.0;
  double second_law = std::numeric_limits<double>::infinity();
};

constexpr double kLiftScales[] = {1.0, -2.5};

SampleOutcome check_sample(const PortThermoSystem& sys, std::span<const double> base,
                           const std::vector<std::vector<double>>& u_samples) {
  const PhaseLayout lay = sys.layout();
  const auto slots = lay.momentum_slots();
  SampleOutcome out;
  out.euler_control.assign(sys.ports(), 0.0);
  for (double scale : kLiftScales) {
    const auto phase = sys.manifold().lift_flat(base, scale);
    const std::span<const double> x(phase);
    out.euler_internal = std::max(out.euler_internal, std::abs(euler_at(sys.internal(), x, slots)));
    out.homogeneity = std::max(out.homogeneity, homogeneity_at(sys.internal(), x, slots));
    std::vector<double> ext(phase);
    ext.push_back(0.0);
    for (const auto& u : u_samples) {
      for (std::size_t j = 0; j < sys.ports(); ++j) {
        ext.back() = u[j];
        const auto& f = sys.controls()[j].field;
        out.euler_control[j] = std::max(out.euler_control[j], std::abs(euler_at(f, ext, slots)));
        out.homogeneity = std::max(out.homogeneity, homogeneity_at(f, ext, slots));
      }
      out.restriction = std::max(out.restriction, std::abs(sys.hamiltonian(x, std::span<const double>(u))));
    }
    const auto grad = gradient_of(sys.internal(), x, std::span<const std::size_t>(slots));
    double first = 0.0;
    for (auto s : sys.energy_momenta()) first += grad[s];
    double second = 0.0;
    for (auto s : sys.entropy_momenta()) second += grad[s];
    out.first_law = std::max(out.first_law, std::abs(first));
    out.second_law = std::min(out.second_law, second);
  }
  return out;
}

void track(CheckResult& c, double value, std::size_t sample) {
  const bool worse = c.lower_bound ? value < c.worst : value > c.worst;
  if (worse || std::isnan(value)) {
    c.worst = value;
    c.worst_sample = sample;
  }
}

}  // namespace

ValidationReport validate(const PortThermoSystem& sys, const std::vector<std::vector<double>>& samples,
                          const std::vector<std::vector<double>>& u_samples, const ValidationOptions& options) {
  if (samples.empty()) throw PreconditionError("validation needs at least one sample");
  std::vector<std::vector<double>> inputs = u_samples;
  if (inputs.empty()) inputs.emplace_back(sys.ports(), 0.0);
  for (const auto& u : inputs)
    if (u.size() != sys.ports()) throw PreconditionError("input sample has wrong length");

  const auto outcomes = kernels::map_indexed(samples.size(), options.jobs, [&](std::size_t i) {
    return check_sample(sys, std::span<const double>(samples[i]), inputs);
  });

  const auto& tol = options.tolerances;
  ValidationReport report;
  report.system = sys.name();
  report.samples = samples.size();
  auto upper = [](std::string name, double t) { return CheckResult{std::move(name), 0.0, t, false, true, 0}; };
  CheckResult euler = upper("euler_internal", tol.euler);
  std::vector<CheckResult> euler_c;
  for (const auto& c : sys.controls()) euler_c.push_back(upper("euler_control:" + c.label, tol.euler));
  CheckResult homog = upper("homogeneity", tol.homogeneity);
  CheckResult restr = upper("restriction", tol.restriction);
  CheckResult first = upper("first_law", tol.first_law);
  CheckResult second{"second_law", std::numeric_limits<double>::infinity(), tol.second_law, true, true, 0};

  for (std::size_t i = 0; i < outcomes.size(); ++i) {
    const auto& o = outcomes[i];
    track(euler, o.euler_internal, i);
    for (std::size_t j = 0; j < euler_c.size(); ++j) track(euler_c[j], o.euler_control[j], i);
    track(homog, o.homogeneity, i);
    track(restr, o.restriction, i);
    track(first, o.first_law, i);
    track(second, o.second_law, i);
  }
  report.checks.push_back(euler);
  for (auto& c : euler_c) report.checks.push_back(c);
  report.checks.push_back(homog);
  report.checks.push_back(restr);
  report.checks.push_back(first);
  report.checks.push_back(second);
  for (auto& c : report.checks)
    c.passed = c.lower_bound ? (c.worst >= c.tolerance) : (c.worst <= c.tolerance);
  return report;
}

std::vector<std::vector<double>> default_input_samples(std::size_t ports, Rng& rng) {
  std::vector<std::vector<double>> out;
  out.emplace_back(ports, 0.0);
  out.emplace_back(ports, 1.0);
  std::vector<double> draw(ports);
  for (auto& v : draw) v = rng.normal();
  out.push_back(std::move(draw));
  return out;
}

ValidationReport validate(const PortThermoSystem& sys, std::size_t count, Rng& rng,
                          const ValidationOptions& options) {
  const auto samples = sample_base_points(sys.manifold(), count, rng);
  const auto inputs = default_input_samples(sys.ports(), rng);
  return validate(sys, samples, inputs, options);
}

namespace {

std::vector<double> outputs_flat(const PortThermoSystem& sys, std::span<const double> phase,
                                 std::span<const double> u, std::size_t slot) {
  if (u.size() != sys.ports()) throw PreconditionError("input vector has wrong length");
  std::vector<double> ext(phase.begin(), phase.end());
  ext.push_back(0.0);
  std::vector<double> y;
  y.reserve(sys.ports());
  for (std::size_t j = 0; j < sys.ports(); ++j) {
    ext.back() = u[j];
    y.push_back(partial_of(sys.controls()[j].field, std::span<const double>(ext), slot));
  }
  return y;
}

void require_on_manifold(const PortThermoSystem& sys, const PhasePoint& pt) {
  const double res = membership_residual(sys.manifold(), pt);
  if (!(res <= kMembershipTolerance))
    throw PreconditionError("outputs requested at a point off the submanifold (residual " +
                            std::to_string(res) + ")");
}

}  // namespace

std::vector<double> power_output_flat(const PortThermoSystem& sys, std::span<const double> phase,
                                      std::span<const double> u) {
  return outputs_flat(sys, phase, u, sys.layout().pE());
}

std::vector<double> entropy_output_flat(const PortThermoSystem& sys, std::span<const double> phase,
                                        std::span<const double> u) {
  return outputs_flat(sys, phase, u, sys.layout().pS());
}

std::vector<double> power_output(const PortThermoSystem& sys, const PhasePoint& pt, std::span<const double> u) {
  require_on_manifold(sys, pt);
  const auto flat = pt.flat();
  return power_output_flat(sys, flat, u);
}

std::vector<double> entropy_output(const PortThermoSystem& sys, const PhasePoint& pt,
                                   std::span<const double> u) {
  require_on_manifold(sys, pt);
  const auto flat = pt.flat();
  return entropy_output_flat(sys, flat, u);
}

double equilibrium_residual(const PortThermoSystem& sys, std::span<const double> base) {
  const auto phase = sys.manifold().lift_flat(base, 1.0);
  const auto grad = gradient_of(sys.internal(), std::span<const double>(phase));
  double acc = 0.0;
  for (double g : grad) acc += g * g;
  return std::sqrt(acc);
}

}  // namespace portthermo
