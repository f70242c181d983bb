#include "portthermo/dynamics.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>

namespace portthermo {

InputRule InputRule::constant(double v) {
  InputRule r;
  r.kind = Kind::Constant;
  r.value = v;
  return r;
}

InputRule InputRule::time(std::function<double(double)> f) {
  InputRule r;
  r.kind = Kind::Time;
  r.of_time = std::move(f);
  return r;
}

InputRule InputRule::state_feedback(
    std::function<double(double, std::span<const double>, std::span<const double>)> f) {
  InputRule r;
  r.kind = Kind::Feedback;
  r.feedback = std::move(f);
  return r;
}

InputSignal InputSignal::constant(const std::vector<double>& values) {
  std::vector<InputRule> rules;
  for (double v : values) rules.push_back(InputRule::constant(v));
  return InputSignal(std::move(rules));
}

std::vector<double> InputSignal::operator()(const PortThermoSystem& sys, double t,
                                            std::span<const double> base) const {
  std::vector<double> u(sys.ports(), 0.0);
  if (rules_.empty()) return u;
  if (rules_.size() != sys.ports())
    throw PreconditionError("input signal has " + std::to_string(rules_.size()) + " rules for " +
                            std::to_string(sys.ports()) + " ports");
  std::vector<double> y;
  for (std::size_t j = 0; j < rules_.size(); ++j) {
    const auto& r = rules_[j];
    switch (r.kind) {
      case InputRule::Kind::Constant: u[j] = r.value; break;
      case InputRule::Kind::Time: u[j] = r.of_time(t); break;
      case InputRule::Kind::Feedback:
        if (y.empty()) {
          const auto phase = sys.manifold().lift_flat(base, 1.0);
          const std::vector<double> zero(sys.ports(), 0.0);
          y = power_output_flat(sys, phase, zero);
        }
        u[j] = r.feedback(t, base, y);
        break;
    }
  }
  return u;
}

const Channel& Trajectory::channel(std::string_view name) const {
  for (const auto& c : channels)
    if (c.name == name) return c;
  throw PreconditionError("trajectory has no channel '" + std::string(name) + "'");
}

bool Trajectory::has_channel(std::string_view name) const {
  return std::any_of(channels.begin(), channels.end(), [&](const Channel& c) { return c.name == name; });
}

double relative_residual(double a, double b) {
  return std::abs(a - b) / std::max({1.0, std::abs(a), std::abs(b)});
}

namespace {

std::vector<double> velocity_from_gradient(const PortThermoSystem& sys, const std::vector<double>& grad) {
  const PhaseLayout lay = sys.layout();
  std::vector<double> v(lay.n + 1);
  v[0] = sys.manifold().representation() == Representation::Energy ? grad[lay.pS()] : grad[lay.pE()];
  for (std::size_t i = 0; i < lay.n; ++i) v[1 + i] = grad[lay.p(i)];
  return v;
}

}  // namespace

std::vector<double> reduced_vector_field(const PortThermoSystem& sys, std::span<const double> base,
                                         std::span<const double> u, double scale) {
  const auto phase = sys.manifold().lift_flat(base, scale);
  const auto slots = sys.layout().momentum_slots();
  const ScalarField K = sys.hamiltonian_field(std::vector<double>(u.begin(), u.end()));
  const auto grad = gradient_of(K, std::span<const double>(phase), std::span<const std::size_t>(slots));
  return velocity_from_gradient(sys, grad);
}

double energy_rate(const PortThermoSystem& sys, std::span<const double> base, std::span<const double> velocity) {
  const auto& M = sys.manifold();
  double rate = 0.0;
  if (M.representation() == Representation::Energy) {
    const auto g = gradient_of(M.generator(), base);
    for (std::size_t i = 0; i < g.size(); ++i) rate += g[i] * velocity[i];
  } else {
    rate = velocity[0];
  }
  for (std::size_t i = 0; i < sys.q_kinds().size(); ++i)
    if (sys.q_kinds()[i] == SlotKind::Energy) rate += velocity[1 + i];
  return rate;
}

namespace {

struct Sample {
  std::vector<double> velocity;
  double energy = 0.0;
  double entropy = 0.0;
  std::vector<double> yp;
  std::vector<double> ye;
  double k_residual = 0.0;
  double balance = 0.0;
  double entropy_production = 0.0;
};

Sample evaluate_sample(const PortThermoSystem& sys, std::span<const double> base, std::span<const double> u) {
  Sample s;
  const auto phase = sys.manifold().lift_flat(base, 1.0);
  const std::span<const double> x(phase);
  const auto slots = sys.layout().momentum_slots();
  const ScalarField K = sys.hamiltonian_field(std::vector<double>(u.begin(), u.end()));
  const auto vg = value_gradient(K, x, std::span<const std::size_t>(slots));
  s.velocity = velocity_from_gradient(sys, vg.gradient);
  s.k_residual = std::abs(vg.value);
  s.energy = sys.total_energy(x);
  s.entropy = sys.total_entropy(x);
  s.yp = power_output_flat(sys, x, u);
  s.ye = entropy_output_flat(sys, x, u);
  double supplied = 0.0;
  for (std::size_t j = 0; j < u.size(); ++j) supplied += s.yp[j] * u[j];
  s.balance = relative_residual(energy_rate(sys, base, s.velocity), supplied);
  const auto ga = gradient_of(sys.internal(), x, std::span<const std::size_t>(slots));
  for (auto slot : sys.entropy_momenta()) s.entropy_production += ga[slot];
  return s;
}

// Builds the channel table sample by sample.
class Recorder {
 public:
  Recorder(const PortThermoSystem& sys, const std::vector<TrackedQuantity>& tracked) : sys_(sys), tracked_(tracked) {
    traj_.state_names = sys.manifold().base_names();
    auto add = [&](std::string name) { traj_.channels.push_back(Channel{std::move(name), {}}); };
    add("energy");
    add("entropy");
    for (const auto& c : sys.controls()) add("y_" + c.label);
    for (const auto& c : sys.controls()) add("ye_" + c.label);
    for (const auto& c : sys.controls()) add("u_" + c.label);
    add("K_residual");
    add("balance_residual");
    add("entropy_production");
    for (const auto& q : tracked) {
      add((q.kind == TrackedQuantity::Kind::Drift ? "drift_" : "rate_") + q.name);
      std::vector<std::size_t> idx;
      for (const auto& name : q.field.names()) {
        auto it = std::find(traj_.state_names.begin(), traj_.state_names.end(), name);
        if (it == traj_.state_names.end())
          throw PreconditionError("tracked quantity '" + q.name + "' uses unknown coordinate '" + name + "'");
        idx.push_back(static_cast<std::size_t>(it - traj_.state_names.begin()));
      }
      index_.push_back(std::move(idx));
    }
  }

  void record(double t, std::span<const double> base, std::span<const double> u) {
    const Sample s = evaluate_sample(sys_, base, u);
    std::size_t c = 0;
    auto push = [&](double v) { traj_.channels[c++].values.push_back(v); };
    push(s.energy);
    push(s.entropy);
    for (double v : s.yp) push(v);
    for (double v : s.ye) push(v);
    for (double v : u) push(v);
    push(s.k_residual);
    push(s.balance);
    push(s.entropy_production);
    for (std::size_t k = 0; k < tracked_.size(); ++k) {
      std::vector<double> sub;
      for (auto i : index_[k]) sub.push_back(base[i]);
      const auto& q = tracked_[k];
      if (q.kind == TrackedQuantity::Kind::Drift) {
        const double v = q.field(std::span<const double>(sub));
        if (traj_.times.empty()) initial_.push_back(v);
        push(v - initial_[drift_index(k)]);
      } else {
        const auto g = gradient_of(q.field, std::span<const double>(sub));
        double rate = 0.0;
        for (std::size_t i = 0; i < g.size(); ++i) rate += g[i] * s.velocity[index_[k][i]];
        push(rate);
      }
    }
    traj_.times.push_back(t);
    traj_.states.emplace_back(base.begin(), base.end());
    traj_.inputs.emplace_back(u.begin(), u.end());
  }

  Trajectory& trajectory() { return traj_; }

 private:
  std::size_t drift_index(std::size_t k) const {
    std::size_t d = 0;
    for (std::size_t i = 0; i < k; ++i)
      if (tracked_[i].kind == TrackedQuantity::Kind::Drift) ++d;
    return d;
  }

  const PortThermoSystem& sys_;
  const std::vector<TrackedQuantity>& tracked_;
  std::vector<std::vector<std::size_t>> index_;
  std::vector<double> initial_;
  Trajectory traj_;
};

using State = std::vector<double>;

State axpy(const State& x, double a, const State& k) {
  State r(x);
  for (std::size_t i = 0; i < r.size(); ++i) r[i] += a * k[i];
  return r;
}

struct Stepper {
  const PortThermoSystem& sys;
  const InputSignal& input;

  State f(double t, const State& x) const {
    sys.manifold().require_admissible(x);
    const auto u = input(sys, t, x);
    return reduced_vector_field(sys, x, u);
  }
};

[[noreturn]] void domain_exit(Recorder& rec, const std::string& why) {
  auto& traj = rec.trajectory();
  const double last = traj.times.empty() ? std::numeric_limits<double>::quiet_NaN() : traj.times.back();
  throw DomainExitError("integration left the admissible domain after t = " + std::to_string(last) + ": " + why,
                        std::move(traj), last);
}

void integrate_rk4(const Stepper& st, Recorder& rec, State x, double t0, double t1, double h_req) {
  const double span = t1 - t0;
  const double h0 = h_req > 0.0 ? h_req : span / 1e4;
  const auto steps = static_cast<std::size_t>(std::max(1.0, std::round(span / h0)));
  const double h = span / static_cast<double>(steps);
  for (std::size_t i = 0; i < steps; ++i) {
    const double t = t0 + h * static_cast<double>(i);
    State next;
    try {
      const State k1 = st.f(t, x);
      const State k2 = st.f(t + h / 2, axpy(x, h / 2, k1));
      const State k3 = st.f(t + h / 2, axpy(x, h / 2, k2));
      const State k4 = st.f(t + h, axpy(x, h, k3));
      next = x;
      for (std::size_t j = 0; j < x.size(); ++j) next[j] += h / 6 * (k1[j] + 2 * k2[j] + 2 * k3[j] + k4[j]);
      st.sys.manifold().require_admissible(next);
      const double tn = i + 1 == steps ? t1 : t0 + h * static_cast<double>(i + 1);
      rec.record(tn, next, st.input(st.sys, tn, next));
    } catch (const DomainError& e) {
      domain_exit(rec, e.what());
    }
    x = std::move(next);
  }
}

// Dormand–Prince 5(4) tableau.
constexpr std::array<double, 7> kC{0.0, 1.0 / 5, 3.0 / 10, 4.0 / 5, 8.0 / 9, 1.0, 1.0};
constexpr double kA[7][6] = {
    {},
    {1.0 / 5},
    {3.0 / 40, 9.0 / 40},
    {44.0 / 45, -56.0 / 15, 32.0 / 9},
    {19372.0 / 6561, -25360.0 / 2187, 64448.0 / 6561, -212.0 / 729},
    {9017.0 / 3168, -355.0 / 33, 46732.0 / 5247, 49.0 / 176, -5103.0 / 18656},
    {35.0 / 384, 0.0, 500.0 / 1113, 125.0 / 192, -2187.0 / 6784, 11.0 / 84},
};
constexpr std::array<double, 7> kB5{35.0 / 384, 0.0, 500.0 / 1113, 125.0 / 192, -2187.0 / 6784, 11.0 / 84, 0.0};
constexpr std::array<double, 7> kB4{5179.0 / 57600, 0.0,          7571.0 / 16695, 393.0 / 640,
                                    -92097.0 / 339200, 187.0 / 2100, 1.0 / 40};

void integrate_rk45(const Stepper& st, Recorder& rec, State x, double t0, double t1,
                    const IntegrationOptions& opt) {
  if (!(opt.atol > 0.0) || !(opt.rtol > 0.0)) throw PreconditionError("tolerances must be positive");
  double t = t0;
  double h = (t1 - t0) / 100.0;
  std::string last_domain_error;
  std::size_t steps = 0;
  while (t < t1) {
    if (++steps > opt.max_steps) throw StepSizeError("adaptive integration exceeded the step budget");
    h = std::min(h, t1 - t);
    if (h < 1e-12 * std::max(1.0, std::abs(t))) {
      if (!last_domain_error.empty()) domain_exit(rec, last_domain_error);
      throw StepSizeError("adaptive step size underflow at t = " + std::to_string(t));
    }
    std::array<State, 7> k;
    State y5, y4;
    try {
      for (std::size_t s = 0; s < 7; ++s) {
        State xs = x;
        for (std::size_t j = 0; j < s; ++j)
          if (kA[s][j] != 0.0) xs = axpy(xs, h * kA[s][j], k[j]);
        k[s] = st.f(t + kC[s] * h, xs);
      }
      y5 = x;
      y4 = x;
      for (std::size_t s = 0; s < 7; ++s) {
        y5 = axpy(y5, h * kB5[s], k[s]);
        y4 = axpy(y4, h * kB4[s], k[s]);
      }
      st.sys.manifold().require_admissible(y5);
    } catch (const DomainError& e) {
      last_domain_error = e.what();
      h *= 0.5;
      continue;
    }
    double err = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
      const double sc = opt.atol + opt.rtol * std::max(std::abs(x[i]), std::abs(y5[i]));
      err = std::max(err, std::abs(y5[i] - y4[i]) / sc);
    }
    if (err <= 1.0) {
      const double tn = (t1 - (t + h) <= 1e-14 * std::max(1.0, std::abs(t1))) ? t1 : t + h;
      try {
        rec.record(tn, y5, st.input(st.sys, tn, y5));
      } catch (const DomainError& e) {
        domain_exit(rec, e.what());
      }
      t = tn;
      x = std::move(y5);
      last_domain_error.clear();
    }
    const double factor = err == 0.0 ? 5.0 : std::clamp(0.9 * std::pow(err, -0.2), 0.2, 5.0);
    h *= factor;
  }
}

}  // namespace

Trajectory integrate(const PortThermoSystem& sys, std::span<const double> x0, const InputSignal& input, double t0,
                     double t1, const IntegrationOptions& options, const std::vector<TrackedQuantity>& tracked) {
  if (x0.size() != sys.manifold().n() + 1) throw PreconditionError("initial state has wrong dimension");
  if (!(t1 >= t0)) throw PreconditionError("time span must be nondecreasing");
  if (options.h < 0.0) throw PreconditionError("step size must be positive");
  sys.manifold().require_admissible(x0);
  Recorder rec(sys, tracked);
  if (t1 == t0) return std::move(rec.trajectory());
  rec.record(t0, x0, input(sys, t0, x0));
  const Stepper st{sys, input};
  State x(x0.begin(), x0.end());
  if (options.method == Method::RK4) integrate_rk4(st, rec, std::move(x), t0, t1, options.h);
  else integrate_rk45(st, rec, std::move(x), t0, t1, options);
  return std::move(rec.trajectory());
}

InvariantReport monitor(const PortThermoSystem& sys, const Trajectory& trajectory,
                        const std::vector<TrackedQuantity>& conserved) {
  if (trajectory.empty()) throw PreconditionError("cannot monitor an empty trajectory");
  if (trajectory.state_names != sys.manifold().base_names())
    throw PreconditionError("trajectory does not belong to system '" + sys.name() + "'");
  InvariantReport r;
  r.samples = trajectory.size();
  r.min_entropy_production = std::numeric_limits<double>::infinity();
  std::vector<std::vector<std::size_t>> index;
  std::vector<double> initial;
  for (const auto& q : conserved) {
    std::vector<std::size_t> idx;
    for (const auto& name : q.field.names()) {
      auto it = std::find(trajectory.state_names.begin(), trajectory.state_names.end(), name);
      if (it == trajectory.state_names.end())
        throw PreconditionError("conserved quantity '" + q.name + "' uses unknown coordinate '" + name + "'");
      idx.push_back(static_cast<std::size_t>(it - trajectory.state_names.begin()));
    }
    index.push_back(std::move(idx));
  }
  double e0 = 0.0;
  for (std::size_t i = 0; i < trajectory.size(); ++i) {
    const auto& base = trajectory.states[i];
    const auto& u = trajectory.inputs[i];
    const Sample s = evaluate_sample(sys, base, u);
    if (i == 0) e0 = s.energy;
    r.max_balance_residual = std::max(r.max_balance_residual, s.balance);
    r.min_entropy_production = std::min(r.min_entropy_production, s.entropy_production);
    r.max_k_residual = std::max(r.max_k_residual, s.k_residual);
    r.max_energy_drift = std::max(r.max_energy_drift, std::abs(s.energy - e0) / std::max(1.0, std::abs(e0)));
    for (std::size_t k = 0; k < conserved.size(); ++k) {
      std::vector<double> sub;
      for (auto j : index[k]) sub.push_back(base[j]);
      const double v = conserved[k].field(std::span<const double>(sub));
      if (i == 0) initial.push_back(v);
      r.max_conserved_drift = std::max(r.max_conserved_drift, std::abs(v - initial[k]));
    }
  }
  return r;
}

}  // namespace portthermo
