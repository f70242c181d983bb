#include "portthermo/interconnect.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <utility>

namespace portthermo {

std::string_view to_string(LawKind k) {
  switch (k) {
    case LawKind::NegativeFeedback: return "negative_feedback";
    case LawKind::GyrativeSkew: return "gyrative";
    case LawKind::Custom: return "custom";
  }
  return "?";
}

FeedbackLaw FeedbackLaw::negative_feedback() { return FeedbackLaw{}; }

FeedbackLaw FeedbackLaw::gyrative(std::vector<std::vector<double>> J) {
  FeedbackLaw law;
  law.kind = LawKind::GyrativeSkew;
  law.J = std::move(J);
  return law;
}

FeedbackLaw FeedbackLaw::decoupled() { return gyrative({}); }

FeedbackLaw FeedbackLaw::custom(std::vector<ScalarField> u1, std::vector<ScalarField> u2) {
  FeedbackLaw law;
  law.kind = LawKind::Custom;
  law.u1 = std::move(u1);
  law.u2 = std::move(u2);
  return law;
}

std::vector<double> ComposedSystem::constituent_base(int which, std::span<const double> base) const {
  const auto& index = which == 1 ? first_base : second_base;
  if (which != 1 && which != 2) throw PreconditionError("constituent index must be 1 or 2");
  std::vector<double> out;
  out.reserve(index.size());
  for (auto i : index) out.push_back(base[i]);
  return out;
}

namespace {

// Everything the composed Hamiltonians need, shared by all their closures.
struct Plan {
  bool power = true;
  PortThermoSystem s1;
  PortThermoSystem s2;
  std::size_t n1 = 0;
  std::size_t n2 = 0;
  LawKind law = LawKind::NegativeFeedback;
  std::vector<std::vector<double>> J;
  std::vector<ScalarField> custom_u1;
  std::vector<ScalarField> custom_u2;
  std::vector<std::size_t> sel1;
  std::vector<std::size_t> sel2;

  [[nodiscard]] std::size_t n() const { return n1 + 1 + n2; }

  template <class N>
  void split(std::span<const N> x, std::vector<N>& x1, std::vector<N>& x2) const {
    const PhaseLayout L{n()}, L1{n1}, L2{n2};
    const std::size_t shared = power ? PhaseLayout::E : PhaseLayout::S;
    const std::size_t own = power ? PhaseLayout::S : PhaseLayout::E;
    const std::size_t shared_p = power ? L.pE() : L.pS();
    x1.assign(L1.size(), N(0.0));
    x2.assign(L2.size(), N(0.0));
    x1[own] = x[own];
    for (std::size_t i = 0; i < n1; ++i) {
      x1[L1.q(i)] = x[L.q(i)];
      x1[L1.p(i)] = x[L.p(i)];
    }
    x2[own] = x[L.q(n1)];
    for (std::size_t i = 0; i < n2; ++i) {
      x2[L2.q(i)] = x[L.q(n1 + 1 + i)];
      x2[L2.p(i)] = x[L.p(n1 + 1 + i)];
    }
    x1[power ? L1.pE() : L1.pS()] = x[shared_p];
    x2[power ? L2.pE() : L2.pS()] = x[shared_p];
    x1[power ? L1.pS() : L1.pE()] = x[power ? L.pS() : L.pE()];
    x2[power ? L2.pS() : L2.pE()] = x[L.p(n1)];
    // The constituent's own E (resp. S) is read off its generator.
    std::vector<N> base1{x1[own]}, base2{x2[own]};
    for (std::size_t i = 0; i < n1; ++i) base1.push_back(x1[L1.q(i)]);
    for (std::size_t i = 0; i < n2; ++i) base2.push_back(x2[L2.q(i)]);
    x1[shared] = s1.manifold().generator()(std::span<const N>(base1));
    x2[shared] = s2.manifold().generator()(std::span<const N>(base2));
  }

  /// (K^c_j(x_i, u), ∂K^c_j/∂p_E or ∂/∂p_S) of a constituent port.
  template <class N>
  std::pair<N, N> port(const PortThermoSystem& s, const std::vector<N>& xi, std::size_t j, const N& u) const {
    std::vector<N> ext(xi);
    ext.push_back(u);
    const PhaseLayout L{s.manifold().n()};
    const std::size_t slot[1] = {power ? L.pE() : L.pS()};
    auto vg = value_gradient(s.controls()[j].field, std::span<const N>(ext), std::span<const std::size_t>(slot));
    return {std::move(vg.value), std::move(vg.gradient[slot[0]])};
  }

  /// Inputs of the selected ports given their outputs (linear laws only).
  template <class N>
  std::vector<N> law_inputs(const std::vector<N>& y) const {
    const std::size_t m = y.size();
    std::vector<N> u(m, N(0.0));
    if (law == LawKind::GyrativeSkew) {
      if (J.empty()) return u;
      for (std::size_t a = 0; a < m; ++a)
        for (std::size_t b = 0; b < m; ++b)
          if (J[a][b] != 0.0) u[a] = u[a] + J[a][b] * y[b];
      return u;
    }
    for (std::size_t a = 0; a < sel1.size(); ++a) u[a] = custom_u1[a](std::span<const N>(y));
    for (std::size_t b = 0; b < sel2.size(); ++b) u[sel1.size() + b] = custom_u2[b](std::span<const N>(y));
    return u;
  }

  /// Interconnection terms: Σ K^c(·,u) u over the selected ports, plus the
  /// balance y1ᵀu1 + y2ᵀu2 (with v = 0).
  template <class N>
  std::pair<N, N> coupling(const std::vector<N>& x1, const std::vector<N>& x2) const {
    N k(0.0), balance(0.0);
    if (law == LawKind::NegativeFeedback) {
      for (std::size_t j = 0; j < sel1.size(); ++j) {
        auto [c1, y1] = port(s1, x1, sel1[j], N(0.0));
        auto [c2, y2] = port(s2, x2, sel2[j], y1);
        k = k + c2 * y1 - c1 * y2;
        balance = balance + y1 * (-y2) + y2 * y1;
      }
      return {k, balance};
    }
    std::vector<N> c, y;
    for (auto j : sel1) {
      auto [cv, yv] = port(s1, x1, j, N(0.0));
      c.push_back(std::move(cv));
      y.push_back(std::move(yv));
    }
    for (auto j : sel2) {
      auto [cv, yv] = port(s2, x2, j, N(0.0));
      c.push_back(std::move(cv));
      y.push_back(std::move(yv));
    }
    const auto u = law_inputs(y);
    for (std::size_t a = 0; a < u.size(); ++a) {
      k = k + c[a] * u[a];
      balance = balance + y[a] * u[a];
    }
    return {k, balance};
  }

  template <class N>
  N internal(std::span<const N> x) const {
    std::vector<N> x1, x2;
    split(x, x1, x2);
    N k = s1.internal()(std::span<const N>(x1)) + s2.internal()(std::span<const N>(x2));
    return k + coupling(x1, x2).first;
  }

  template <class N>
  N control(std::span<const N> xu, int which, std::size_t j) const {
    std::vector<N> x1, x2;
    split(xu.first(xu.size() - 1), x1, x2);
    auto& xi = which == 1 ? x1 : x2;
    xi.push_back(xu.back());
    const auto& s = which == 1 ? s1 : s2;
    return s.controls()[j].field(std::span<const N>(xi));
  }

  [[nodiscard]] double balance_at(std::span<const double> x) const {
    std::vector<double> x1, x2;
    split(x, x1, x2);
    return coupling(x1, x2).second;
  }
};

std::vector<std::size_t> resolve_ports(const std::optional<std::vector<std::size_t>>& sel,
                                       const PortThermoSystem& s) {
  std::vector<std::size_t> out;
  if (!sel) {
    for (std::size_t j = 0; j < s.ports(); ++j) out.push_back(j);
    return out;
  }
  for (auto j : *sel) {
    if (j >= s.ports())
      throw ConstructionError("system '" + s.name() + "' has no port " + std::to_string(j));
    if (std::find(out.begin(), out.end(), j) != out.end())
      throw ConstructionError("port " + std::to_string(j) + " selected twice");
    out.push_back(j);
  }
  return out;
}

void require_linear(const PortThermoSystem& s, const std::vector<std::size_t>& sel, std::string_view why) {
  for (auto j : sel)
    if (!s.controls()[j].linear_in_u)
      throw ConstructionError("port '" + s.controls()[j].label + "' of '" + s.name() +
                              "' depends nonlinearly on its input; " + std::string(why));
}

// ∂K/∂E (power) or ∂K/∂S (entropy) must vanish for every Hamiltonian of s.
void require_independent(const PortThermoSystem& s, bool power, const CompositionOptions& opt) {
  Rng rng(opt.seed);
  const auto samples = sample_base_points(s.manifold(), opt.samples, rng);
  const auto inputs = default_input_samples(s.ports(), rng);
  const std::size_t slot = power ? PhaseLayout::E : PhaseLayout::S;
  const char* what = power ? "energy" : "entropy";
  auto fail = [&](const std::string& field, double value, std::size_t i) {
    throw ConstructionError(field + " of '" + s.name() + "' depends on the " + what + " variable (|∂K| = " +
                            std::to_string(value) + " at sample " + std::to_string(i) + ")");
  };
  for (std::size_t i = 0; i < samples.size(); ++i) {
    auto phase = s.manifold().lift_flat(std::span<const double>(samples[i]), 1.0);
    const double da = std::abs(partial_of(s.internal(), std::span<const double>(phase), slot));
    if (da > opt.tolerance) fail("internal Hamiltonian", da, i);
    phase.push_back(0.0);
    for (const auto& u : inputs) {
      for (std::size_t j = 0; j < s.ports(); ++j) {
        phase.back() = u[j];
        const double dc = std::abs(partial_of(s.controls()[j].field, std::span<const double>(phase), slot));
        if (dc > opt.tolerance) fail("control Hamiltonian '" + s.controls()[j].label + "'", dc, i);
      }
    }
  }
}

std::string unique_name(const std::string& wanted, const std::string& suffix, std::vector<std::string>& taken) {
  std::string name = wanted;
  if (std::find(taken.begin(), taken.end(), name) != taken.end()) name = wanted + "_" + suffix;
  if (std::find(taken.begin(), taken.end(), name) != taken.end())
    throw ConstructionError("cannot find a free name for coordinate '" + wanted + "'");
  taken.push_back(name);
  return name;
}

ComposedSystem compose(const PortThermoSystem& sys1, const PortThermoSystem& sys2, const FeedbackLaw& law,
                       const PortSelection& ports, const CompositionOptions& options, bool power) {
  const Representation need = power ? Representation::Energy : Representation::Entropy;
  if (sys1.manifold().representation() != need || sys2.manifold().representation() != need)
    throw ConstructionError(std::string(power ? "power" : "entropy") + " composition needs both systems in " +
                            std::string(to_string(need)) + " representation");

  auto plan = std::make_shared<Plan>(Plan{power, sys1, sys2, sys1.manifold().n(), sys2.manifold().n(), law.kind,
                                          law.J, law.u1, law.u2, resolve_ports(ports.first, sys1),
                                          resolve_ports(ports.second, sys2)});
  const std::size_t m1 = plan->sel1.size(), m2 = plan->sel2.size();
  switch (law.kind) {
    case LawKind::NegativeFeedback:
      if (m1 != m2) throw ConstructionError("negative feedback needs as many ports on each side");
      require_linear(sys1, plan->sel1, "negative feedback needs linear ports on the first system");
      break;
    case LawKind::GyrativeSkew: {
      require_linear(sys1, plan->sel1, "gyrative coupling needs linear ports");
      require_linear(sys2, plan->sel2, "gyrative coupling needs linear ports");
      if (law.J.empty()) break;
      const std::size_t m = m1 + m2;
      if (law.J.size() != m) throw ConstructionError("coupling matrix has wrong size");
      for (const auto& row : law.J)
        if (row.size() != m) throw ConstructionError("coupling matrix has wrong size");
      for (std::size_t a = 0; a < m; ++a)
        for (std::size_t b = 0; b < m; ++b)
          if (std::abs(law.J[a][b] + law.J[b][a]) > 1e-12)
            throw ConstructionError("coupling matrix is not skew-symmetric");
      break;
    }
    case LawKind::Custom:
      require_linear(sys1, plan->sel1, "custom laws need linear ports");
      require_linear(sys2, plan->sel2, "custom laws need linear ports");
      if (law.u1.size() != m1 || law.u2.size() != m2)
        throw ConstructionError("custom law needs one input rule per selected port");
      for (const auto& f : law.u1)
        if (f.arity() != m1 + m2) throw ConstructionError("custom law rules take every selected output");
      for (const auto& f : law.u2)
        if (f.arity() != m1 + m2) throw ConstructionError("custom law rules take every selected output");
      break;
  }
  require_independent(sys1, power, options);
  require_independent(sys2, power, options);

  // Coordinates: shared slot from sys1, then (own_1, q_1, own_2, q_2).
  const auto& M1 = sys1.manifold();
  const auto& M2 = sys2.manifold();
  std::vector<std::string> taken;
  const std::string shared_name = power ? M1.energy_name() : M1.entropy_name();
  taken.push_back(shared_name);
  const std::string own1 = unique_name(power ? M1.entropy_name() : M1.energy_name(), sys1.name(), taken);
  std::vector<std::string> q_names;
  for (const auto& q : M1.q_names()) q_names.push_back(unique_name(q, sys1.name(), taken));
  q_names.push_back(unique_name(power ? M2.entropy_name() : M2.energy_name(), sys2.name(), taken));
  for (const auto& q : M2.q_names()) q_names.push_back(unique_name(q, sys2.name(), taken));

  std::vector<std::string> base_names{own1};
  base_names.insert(base_names.end(), q_names.begin(), q_names.end());
  const std::size_t n1 = plan->n1;
  ScalarField generator(base_names, [plan](auto b) {
    return plan->s1.manifold().generator()(b.first(plan->n1 + 1)) +
           plan->s2.manifold().generator()(b.subspan(plan->n1 + 1));
  });

  const auto& D1 = M1.domain();
  const auto& D2 = M2.domain();
  AdmissibleDomain domain;
  domain.contains = [c1 = D1.contains, c2 = D2.contains, n1](std::span<const double> b) {
    return c1(b.first(n1 + 1)) && c2(b.subspan(n1 + 1));
  };
  domain.description = D1.description + "; " + D2.description;
  if (!D1.sample_box.empty() && !D2.sample_box.empty()) {
    domain.sample_box = D1.sample_box;
    domain.sample_box.insert(domain.sample_box.end(), D2.sample_box.begin(), D2.sample_box.end());
  }

  StateManifold manifold = power ? StateManifold(Representation::Energy, generator, shared_name, own1, q_names,
                                                 std::move(domain))
                                 : StateManifold(Representation::Entropy, generator, own1, shared_name, q_names,
                                                 std::move(domain));
  const auto phase_names = manifold.phase_names();

  ScalarField internal(phase_names, [plan](auto x) { return plan->internal(x); });

  std::vector<ControlHamiltonian> controls;
  std::vector<std::string> labels;
  auto add_port = [&](int which, std::size_t j, const std::string& suffix) {
    const auto& s = which == 1 ? sys1 : sys2;
    const auto& src = s.controls()[j];
    std::string label = unique_name(src.label, suffix, labels);
    auto names = phase_names;
    names.push_back("u");
    controls.push_back(ControlHamiltonian{
        std::move(label), ScalarField(names, [plan, which, j](auto xu) { return plan->control(xu, which, j); }),
        src.linear_in_u});
  };
  if (law.kind == LawKind::NegativeFeedback)
    for (auto j : plan->sel1) add_port(1, j, sys1.name());
  for (std::size_t j = 0; j < sys1.ports(); ++j)
    if (std::find(plan->sel1.begin(), plan->sel1.end(), j) == plan->sel1.end()) add_port(1, j, sys1.name());
  for (std::size_t j = 0; j < sys2.ports(); ++j)
    if (std::find(plan->sel2.begin(), plan->sel2.end(), j) == plan->sel2.end()) add_port(2, j, sys2.name());

  std::vector<SlotKind> kinds = sys1.q_kinds();
  kinds.push_back(power ? SlotKind::Entropy : SlotKind::Energy);
  kinds.insert(kinds.end(), sys2.q_kinds().begin(), sys2.q_kinds().end());

  std::string name = options.name.empty() ? sys1.name() + "+" + sys2.name() : options.name;
  PortThermoSystem system(std::move(name), std::move(manifold), std::move(internal), std::move(controls),
                          std::move(kinds));

  // Balance property of the law at composed samples.
  Rng rng(options.seed);
  const auto samples = sample_base_points(system.manifold(), options.samples, rng);
  double worst = power ? 0.0 : std::numeric_limits<double>::infinity();
  std::size_t worst_at = 0;
  for (std::size_t i = 0; i < samples.size(); ++i) {
    const auto phase = system.manifold().lift_flat(std::span<const double>(samples[i]), 1.0);
    const double r = plan->balance_at(phase);
    if (power ? std::abs(r) > worst : r < worst) {
      worst = power ? std::abs(r) : r;
      worst_at = i;
    }
  }
  if (samples.empty()) worst = 0.0;
  const bool violated = power ? worst > options.tolerance : worst < -1e-12;
  if (violated) {
    std::string where;
    for (std::size_t k = 0; k < samples[worst_at].size(); ++k)
      where += (k ? ", " : "") + system.manifold().base_names()[k] + "=" + std::to_string(samples[worst_at][k]);
    throw ConstructionError(std::string(power ? "law is not power preserving" : "law has negative entropy flow") +
                            " (balance " + std::to_string(worst) + " at " + where + ")");
  }

  ComposedSystem out{std::move(system),
                     power ? CompositionKind::Power : CompositionKind::Entropy,
                     std::make_shared<const PortThermoSystem>(sys1),
                     std::make_shared<const PortThermoSystem>(sys2),
                     law,
                     {},
                     {},
                     law.kind == LawKind::Custom,
                     worst};
  for (std::size_t i = 0; i <= n1; ++i) out.first_base.push_back(i);
  for (std::size_t i = 0; i <= plan->n2; ++i) out.second_base.push_back(n1 + 1 + i);
  return out;
}

}  // namespace

ComposedSystem compose_power(const PortThermoSystem& sys1, const PortThermoSystem& sys2, const FeedbackLaw& law,
                             const PortSelection& ports, const CompositionOptions& options) {
  return compose(sys1, sys2, law, ports, options, true);
}

ComposedSystem compose_entropy(const PortThermoSystem& sys1, const PortThermoSystem& sys2, const FeedbackLaw& law,
                               const PortSelection& ports, const CompositionOptions& options) {
  return compose(sys1, sys2, law, ports, options, false);
}

PortThermoSystem make_damper(const ScalarField& internal_energy, double d, std::string name,
                             std::string port_label) {
  if (!(d > 0.0)) throw PreconditionError("damping coefficient must be positive");
  if (internal_energy.arity() != 1) throw PreconditionError("damper internal energy takes S_d only");
  StateManifold manifold(Representation::Energy, internal_energy, "U_d", "S_d", {},
                         AdmissibleDomain::everywhere({{-1.0, 1.0}}));
  auto names = manifold.phase_names();
  ScalarField internal = ScalarField::constant(names, 0.0);
  names.push_back("u");
  ScalarField control(names, [U = internal_energy, d](auto x) {
    using N = typename decltype(x)::value_type;
    const N T = partial_of(U, x.subspan(1, 1), 0);
    if (!(ad::primal(T) > 0.0)) throw DomainError("damper temperature is not positive");
    return (x[2] + x[3] / T) * d * x[4];
  });
  return PortThermoSystem(std::move(name), std::move(manifold), std::move(internal),
                          {ControlHamiltonian{std::move(port_label), std::move(control), false}});
}

}  // namespace portthermo
