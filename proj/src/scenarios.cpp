#include "portthermo/scenarios.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <numbers>

#include "portthermo/expr.hpp"

namespace portthermo {

std::string describe(const ParamValue& v) {
  if (const auto* d = std::get_if<double>(&v)) return fmt::format("{}", *d);
  if (const auto* s = std::get_if<std::string>(&v)) return "\"" + *s + "\"";
  const auto& m = std::get<Matrix>(v);
  std::string out = "[";
  for (std::size_t i = 0; i < m.size(); ++i) {
    out += i ? ", [" : "[";
    for (std::size_t j = 0; j < m[i].size(); ++j) out += fmt::format("{}{}", j ? ", " : "", m[i][j]);
    out += "]";
  }
  return out + "]";
}

std::vector<TrackedQuantity> Scenario::tracked() const {
  std::vector<TrackedQuantity> out;
  for (const auto& c : conserved) out.push_back({c.name(), c.field(), TrackedQuantity::Kind::Drift});
  for (const auto& v : candidates) {
    out.push_back({v.name, v.V, TrackedQuantity::Kind::Drift});
    out.push_back({v.name, v.V, TrackedQuantity::Kind::Rate});
  }
  return out;
}

// ---- expression helpers ---------------------------------------------------

ScalarField expression_field(const std::string& text, const std::vector<std::string>& coordinates,
                             const std::map<std::string, double>& parameters) {
  return expr::to_field(expr::parse(text), coordinates, parameters);
}

ConservedQuantity conserved_from_expression(const PortThermoSystem& sys, const std::string& name,
                                            const std::string& text,
                                            const std::map<std::string, double>& parameters) {
  const auto& M = sys.manifold();
  const Side side = M.representation() == Representation::Energy ? Side::Energy : Side::Entropy;
  return ConservedQuantity(name, expression_field(text, M.base_names(), parameters), side);
}

LyapunovCandidate candidate_from_expression(const PortThermoSystem& sys, const std::string& name,
                                            const std::string& text, const std::map<std::string, double>& equilibrium,
                                            const std::map<std::string, double>& parameters) {
  const auto e = expr::parse(text);
  const auto used = expr::free_variables(e);
  std::vector<std::string> coords;
  std::vector<double> eq;
  for (const auto& b : sys.manifold().base_names()) {
    if (!used.count(b) || parameters.count(b)) continue;
    auto it = equilibrium.find(b);
    if (it == equilibrium.end())
      throw PreconditionError("candidate '" + name + "' has no equilibrium value for '" + b + "'");
    coords.push_back(b);
    eq.push_back(it->second);
  }
  if (coords.empty()) throw PreconditionError("candidate '" + name + "' uses no base coordinate");
  return LyapunovCandidate{name, expr::to_field(e, coords, parameters), std::move(eq)};
}

// ---- builders -------------------------------------------------------------

namespace {

void require_positive(double v, const char* what) {
  if (!(v > 0.0) || !std::isfinite(v)) throw PreconditionError(fmt::format("{} must be positive (got {})", what, v));
}

PortThermoSystem zero_dynamics(std::string name, StateManifold manifold) {
  auto names = manifold.phase_names();
  return PortThermoSystem(std::move(name), std::move(manifold), ScalarField::constant(names, 0.0));
}

PortThermoSystem controller_from_field(const ScalarField& Ec) {
  ScalarField generator({"S_c", "q_c"}, [Ec](auto b) { return Ec(b.subspan(1, 1)); });
  StateManifold M(Representation::Energy, generator, "E_c", "S_c", {"q_c"},
                  AdmissibleDomain::everywhere({{-1.0, 1.0}, {-3.0, 3.0}}));
  auto names = M.phase_names();
  ScalarField internal = ScalarField::constant(names, 0.0);
  names.push_back("u");
  // E_c S_c q_c p_E p_S p_q u
  ScalarField control(names, [Ec](auto x) { return x[5] + x[3] * partial_of(Ec, x.subspan(2, 1), 0); });
  return PortThermoSystem("controller", std::move(M), std::move(internal), {ControlHamiltonian{"u_c", control}});
}

Matrix laplacian(const Matrix& B, const std::vector<double>& w) {
  const std::size_t c = B.size();
  Matrix L(c, std::vector<double>(c, 0.0));
  for (std::size_t i = 0; i < c; ++i)
    for (std::size_t j = 0; j < c; ++j)
      for (std::size_t e = 0; e < w.size(); ++e) L[i][j] += B[i][e] * w[e] * B[j][e];
  return L;
}

}  // namespace

PortThermoSystem build_ideal_gas(double cv, double R, double N, Representation rep) {
  require_positive(cv, "c_v");
  require_positive(R, "R");
  require_positive(N, "N");
  if (rep == Representation::Entropy) {
    ScalarField S({"E", "V"}, [=](auto b) { return N * cv * ad::log(b[0]) + N * R * ad::log(b[1]); });
    StateManifold M(rep, S, "E", "S", {"V"},
                    AdmissibleDomain::positive({0, 1}, {{0.5, 3.0}, {0.5, 3.0}}, "E > 0 and V > 0"),
                    {"1/T", "P/T"});
    return zero_dynamics("ideal_gas", std::move(M));
  }
  ScalarField E({"S", "V"}, [=](auto b) { return ad::exp(b[0] / (N * cv) - (R / cv) * ad::log(b[1])); });
  StateManifold M(rep, E, "E", "S", {"V"}, AdmissibleDomain::positive({1}, {{-1.0, 2.0}, {0.5, 3.0}}, "V > 0"),
                  {"T", "-P"});
  return zero_dynamics("ideal_gas_energy", std::move(M));
}

PortThermoSystem build_mass_spring(double k, double m) {
  require_positive(k, "k");
  require_positive(m, "m");
  ScalarField generator({"S", "z", "pi_m"}, [=](auto b) { return 0.5 * k * b[1] * b[1] + b[2] * b[2] / (2.0 * m); });
  StateManifold M(Representation::Energy, generator, "E", "S", {"z", "pi_m"},
                  AdmissibleDomain::everywhere({{-1.0, 1.0}, {-2.0, 2.0}, {-2.0, 2.0}}));
  auto names = M.phase_names();
  // E S z pi p_E p_S p_z p_pi u
  ScalarField internal(names, [=](auto x) { return x[6] * x[3] / m - x[7] * k * x[2]; });
  names.push_back("u");
  ScalarField control(names, [=](auto x) { return x[7] + x[4] * x[3] / m; });
  return PortThermoSystem("mass_spring", std::move(M), std::move(internal), {ControlHamiltonian{"u_p", control}});
}

PortThermoSystem build_controller(const std::string& energy_expression) {
  return controller_from_field(expression_field(energy_expression, {"q_c"}));
}

ClosedLoop closed_loop_mass_spring(const ClosedLoopParams& p) {
  require_positive(p.d, "d");
  const double qc_star = p.qc_star.value_or(p.z_star);
  const double qc0 = qc_star + p.k * p.z_star;
  const std::map<std::string, double> consts{{"k", p.k}, {"m", p.m}, {"z_star", p.z_star}, {"qc_star", qc_star}};
  ScalarField Ec = p.controller_energy.empty()
                       ? ScalarField({"q_c"}, [qc0](auto q) { return 0.5 * (q[0] - qc0) * (q[0] - qc0); })
                       : expression_field(p.controller_energy, {"q_c"}, consts);

  const auto plant = build_mass_spring(p.k, p.m);
  const auto controller = controller_from_field(Ec);
  ComposedSystem controlled = compose_power(plant, controller, FeedbackLaw::negative_feedback(), {},
                                            CompositionOptions{.name = "controlled_mass_spring"});
  const auto damper = make_damper(expression_field(p.damper_energy, {"S_d"}, consts), p.d);
  ComposedSystem damped = compose_power(controlled.system, damper, FeedbackLaw::negative_feedback(), {},
                                        CompositionOptions{.name = "closed_loop_mass_spring"});

  const std::string phi = "-k*z_star*(z - q_c)";
  ConservedQuantity c1 = conserved_from_expression(controlled.system, "Phi", phi, consts);
  ConservedQuantity c2 = conserved_from_expression(damped.system, "Phi", phi, consts);

  const double k = p.k, m = p.m, zs = p.z_star;
  ScalarField V({"z", "pi_m", "q_c"}, [=](auto x) {
    return 0.5 * k * x[0] * x[0] + x[1] * x[1] / (2.0 * m) + Ec(x.subspan(2, 1)) - k * zs * (x[0] - x[2]);
  });
  std::vector<double> eq{p.z_star, 0.0, qc_star};
  const auto g = gradient_of(V, std::span<const double>(eq));
  double gnorm = 0.0;
  for (double gi : g) gnorm = std::max(gnorm, std::abs(gi));
  if (gnorm > 1e-8)
    throw PreconditionError(fmt::format(
        "shaping condition violated: shaped energy has gradient {:.3g} at (z*, 0, q_c*) = ({}, 0, {})", gnorm,
        p.z_star, qc_star));
  const double lmin = hessian_min_eigenvalue(V, eq);
  if (!(lmin > 0.0))
    throw PreconditionError(
        fmt::format("shaping condition violated: shaped energy Hessian has eigenvalue {:.3g} at the set-point", lmin));

  return ClosedLoop{std::move(controlled), std::move(damped), qc_star, std::move(c1), std::move(c2),
                    LyapunovCandidate{"shaped", std::move(V), std::move(eq)}};
}

PortThermoSystem build_crn(const CrnSpec& spec) {
  const std::size_t species = spec.Z.size();
  if (species == 0) throw PreconditionError("reaction network has no species");
  const std::size_t complexes = spec.B.size();
  const std::size_t edges = spec.weights.size();
  for (const auto& row : spec.Z)
    if (row.size() != complexes)
      throw PreconditionError("complex composition matrix must have one column per complex");
  for (const auto& row : spec.B)
    if (row.size() != edges) throw PreconditionError("incidence matrix must have one column per reaction weight");
  for (std::size_t e = 0; e < edges; ++e) {
    double sum = 0.0;
    for (std::size_t i = 0; i < complexes; ++i) {
      const double b = spec.B[i][e];
      if (b != -1.0 && b != 0.0 && b != 1.0) throw PreconditionError("incidence matrix entries must be -1, 0 or 1");
      sum += b;
    }
    if (sum != 0.0) throw PreconditionError(fmt::format("incidence matrix column {} does not sum to zero", e));
    require_positive(spec.weights[e], "reaction weight");
  }
  require_positive(spec.c, "c");
  require_positive(spec.R, "R");
  std::vector<double> theta = spec.theta.empty() ? std::vector<double>(species, 0.0) : spec.theta;
  if (theta.size() != species) throw PreconditionError("theta must have one entry per species");

  std::vector<std::string> q_names;
  for (std::size_t i = 0; i < species; ++i) q_names.push_back("q" + std::to_string(i + 1));
  std::vector<std::string> base{"E"};
  base.insert(base.end(), q_names.begin(), q_names.end());
  const double c = spec.c, R = spec.R;
  ScalarField S(base, [=](auto b) {
    auto s = c * ad::log(b[0]);
    for (std::size_t i = 0; i < species; ++i) s = s - R * (b[1 + i] * ad::log(b[1 + i]) - b[1 + i] + theta[i] * b[1 + i]);
    return s;
  });
  std::vector<std::size_t> positive(species + 1);
  for (std::size_t i = 0; i <= species; ++i) positive[i] = i;
  std::vector<std::pair<double, double>> box{{0.5, 3.0}};
  for (std::size_t i = 0; i < species; ++i) box.emplace_back(0.2, 3.0);
  StateManifold M(Representation::Entropy, S, "E", "S", q_names,
                  AdmissibleDomain::positive(positive, box, "E > 0 and all concentrations > 0"));

  const Matrix L = laplacian(spec.B, spec.weights);
  const Matrix Z = spec.Z;
  const PhaseLayout lay{species};
  ScalarField internal(M.phase_names(), [=](auto x) {
    using N = typename decltype(x)::value_type;
    std::vector<N> b{x[0]};
    for (std::size_t i = 0; i < species; ++i) b.push_back(x[lay.q(i)]);
    const auto g = gradient_of(S, std::span<const N>(b));
    std::vector<N> w(complexes, N(0.0));
    for (std::size_t j = 0; j < complexes; ++j) {
      N a(0.0);
      for (std::size_t i = 0; i < species; ++i)
        if (Z[i][j] != 0.0) a = a + Z[i][j] * g[1 + i];
      w[j] = ad::exp(-a / R);
    }
    std::vector<N> r(complexes, N(0.0));
    for (std::size_t i = 0; i < complexes; ++i)
      for (std::size_t j = 0; j < complexes; ++j)
        if (L[i][j] != 0.0) r[i] = r[i] + L[i][j] * w[j];
    N K(0.0);
    for (std::size_t i = 0; i < species; ++i) {
      N zr(0.0);
      for (std::size_t j = 0; j < complexes; ++j)
        if (Z[i][j] != 0.0) zr = zr + Z[i][j] * r[j];
      K = K - (x[lay.p(i)] + x[lay.pS()] * g[1 + i]) * zr;
    }
    return K;
  });
  return PortThermoSystem("crn", std::move(M), std::move(internal));
}

PortThermoSystem build_heat_exchanger(double lambda, const std::string& U1, const std::string& U2) {
  require_positive(lambda, "lambda");
  const ScalarField u1 = expression_field(U1, {"S1"});
  const ScalarField u2 = expression_field(U2, {"S2"});
  ScalarField generator({"S1", "S2"}, [u1, u2](auto b) { return u1(b.subspan(0, 1)) + u2(b.subspan(1, 1)); });
  AdmissibleDomain domain{[u1, u2](std::span<const double> b) {
                            return partial_of(u1, b.subspan(0, 1), 0) > 0.0 && partial_of(u2, b.subspan(1, 1), 0) > 0.0;
                          },
                          "T1 > 0 and T2 > 0",
                          {{-1.0, 1.5}, {-1.0, 1.5}}};
  StateManifold M(Representation::Energy, generator, "E", "S1", {"S2"}, std::move(domain));
  // E S1 S2 p_E p_S1 p_S2
  ScalarField internal(M.phase_names(), [=](auto x) {
    const auto T1 = partial_of(u1, x.subspan(1, 1), 0);
    const auto T2 = partial_of(u2, x.subspan(2, 1), 0);
    return lambda * (T1 - T2) * (x[5] / T2 - x[4] / T1);
  });
  return PortThermoSystem("heat_exchanger", std::move(M), std::move(internal), {}, {SlotKind::Entropy});
}

// ---- registry -------------------------------------------------------------

namespace {

using Resolved = std::map<std::string, ParamValue>;

double real(const Resolved& r, const std::string& key) {
  const auto& v = r.at(key);
  if (const auto* d = std::get_if<double>(&v)) return *d;
  throw PreconditionError("parameter '" + key + "' must be a number");
}

const std::string& text(const Resolved& r, const std::string& key) {
  const auto& v = r.at(key);
  if (const auto* s = std::get_if<std::string>(&v)) return *s;
  throw PreconditionError("parameter '" + key + "' must be an expression string");
}

const Matrix& matrix(const Resolved& r, const std::string& key) {
  const auto& v = r.at(key);
  if (const auto* m = std::get_if<Matrix>(&v)) return *m;
  throw PreconditionError("parameter '" + key + "' must be a matrix");
}

std::vector<double> row(const Resolved& r, const std::string& key) {
  const auto& m = matrix(r, key);
  if (m.empty()) return {};
  if (m.size() != 1) throw PreconditionError("parameter '" + key + "' must be a single row");
  return m.front();
}

std::vector<ScenarioInfo> make_catalog() {
  const ParamDoc k{"k", 1.0, "spring constant"};
  const ParamDoc m{"m", 1.0, "mass"};
  const ParamDoc d{"d", 0.5, "damping coefficient"};
  const ParamDoc Ud{"U_d", std::string("exp(S_d)"), "damper internal energy as a function of S_d"};
  const std::vector<ParamDoc> gas{{"cv", 1.5, "heat capacity per mole"},
                                  {"R", 1.0, "gas constant"},
                                  {"N", 1.0, "mole number"}};
  std::vector<ParamDoc> loop{k, m, {"z_star", 1.0, "spring extension set-point"},
                             {"qc_star", std::string("z_star"),
                              "controller state at the set-point (expression in k, m, z_star)"},
                             {"E_c", std::string(""), "controller energy in q_c; empty selects 0.5*(q_c - q_c0)^2"}};
  auto damped_loop = loop;
  damped_loop.push_back(d);
  damped_loop.push_back(Ud);
  return {
      {"ideal_gas", "ideal gas in entropy form S(E, V) = N cv ln E + N R ln V", gas},
      {"ideal_gas_energy", "ideal gas in energy form E(S, V)", gas},
      {"mass_spring", "mass-spring with external force port u_p", {k, m}},
      {"controller", "energy-shaping controller with port u_c",
       {{"E_c", std::string("0.5*(q_c+1)^2"), "controller energy in q_c"}}},
      {"damper", "linear damper with internal energy U_d(S_d)", {d, Ud}},
      {"controlled_mass_spring", "mass-spring and controller under negative feedback", loop},
      {"damped_mass_spring", "mass-spring with a damper on its force port", {k, m, d, Ud}},
      {"closed_loop_mass_spring", "mass-spring, controller and damper regulating z to z_star", damped_loop},
      {"crn",
       "mass-action reaction network (default A <-> B)",
       {{"Z", Matrix{{1, 0}, {0, 1}}, "complex composition matrix (species x complexes)"},
        {"B", Matrix{{-1}, {1}}, "incidence matrix (complexes x reactions)"},
        {"weights", Matrix{{1}}, "reaction weights, one row"},
        {"c", 1.5, "thermal coefficient in c ln E"},
        {"R", 1.0, "gas constant"},
        {"theta", Matrix{}, "per-species potential offsets, one row (empty = zero)"},
        {"E0", 1.0, "initial energy"},
        {"q0", Matrix{{2, 0.5}}, "initial concentrations, one row"},
        {"q_star", Matrix{{1.25, 1.25}}, "equilibrium concentrations for the availability candidate"}}},
      {"heat_exchanger",
       "two bodies exchanging heat by conduction",
       {{"lambda", 1.0, "conduction coefficient"},
        {"U1", std::string("exp(S1)"), "internal energy of body 1"},
        {"U2", std::string("exp(S2)"), "internal energy of body 2"}}},
      {"heat_compartments",
       "two compartments S = c ln E joined through entropy-flow ports by a conduction law",
       {{"c", 1.0, "heat capacity of each compartment"}, {"kappa", 1.0, "conductance"}}},
      {"corrupted_first_law", "mass-spring manifold with K^a = p_E z", {}, true},
      {"corrupted_second_law", "reaction network with the sign of K^a reversed", {}, true},
      {"corrupted_nonhomogeneous", "K^a = p_S^2 on E = exp(S)", {}, true},
  };
}

Resolved resolve(const ScenarioInfo& info, const ScenarioParams& given) {
  Resolved r;
  for (const auto& p : info.params) r[p.name] = p.default_value;
  for (const auto& [key, value] : given.values()) {
    auto it = r.find(key);
    if (it == r.end()) throw PreconditionError("scenario '" + info.name + "' has no parameter '" + key + "'");
    const bool def_matrix = std::holds_alternative<Matrix>(it->second);
    const bool def_string = std::holds_alternative<std::string>(it->second);
    if (def_matrix && !std::holds_alternative<Matrix>(value))
      throw PreconditionError("parameter '" + key + "' must be a matrix");
    if (!def_matrix && !def_string && !std::holds_alternative<double>(value))
      throw PreconditionError("parameter '" + key + "' must be a number");
    // qc_star accepts either form.
    if (def_string && key != "qc_star" && !std::holds_alternative<std::string>(value))
      throw PreconditionError("parameter '" + key + "' must be an expression string");
    it->second = value;
  }
  return r;
}

ClosedLoopParams loop_params(const Resolved& r, bool damped) {
  ClosedLoopParams p;
  p.k = real(r, "k");
  p.m = real(r, "m");
  p.z_star = real(r, "z_star");
  require_positive(p.k, "k");
  require_positive(p.m, "m");
  const auto& qc = r.at("qc_star");
  if (const auto* v = std::get_if<double>(&qc)) {
    p.qc_star = *v;
  } else {
    p.qc_star = expression_field(std::get<std::string>(qc), {}, {{"k", p.k}, {"m", p.m}, {"z_star", p.z_star}})(
        std::vector<double>{});
  }
  p.controller_energy = text(r, "E_c");
  if (damped) {
    p.d = real(r, "d");
    p.damper_energy = text(r, "U_d");
  }
  return p;
}

std::map<std::string, double> reals_of(const Resolved& r) {
  std::map<std::string, double> out;
  for (const auto& [k, v] : r)
    if (const auto* d = std::get_if<double>(&v)) out[k] = *d;
  return out;
}

Scenario make(std::string name, PortThermoSystem sys, std::vector<double> x0, double t_end, Resolved params) {
  Scenario s{std::move(name), std::move(sys)};
  s.x0 = std::move(x0);
  s.t_end = t_end;
  s.params = std::move(params);
  return s;
}

}  // namespace

Scenario::Scenario(std::string name_, PortThermoSystem system_) : name(std::move(name_)), system(std::move(system_)) {}

const std::vector<ScenarioInfo>& scenario_catalog() {
  static const std::vector<ScenarioInfo> catalog = make_catalog();
  return catalog;
}

const ScenarioInfo& scenario_info(const std::string& name) {
  for (const auto& info : scenario_catalog())
    if (info.name == name) return info;
  throw PreconditionError("unknown scenario '" + name + "'");
}

Scenario build_scenario(const std::string& name, const ScenarioParams& params) {
  const ScenarioInfo& info = scenario_info(name);
  const Resolved r = resolve(info, params);

  if (name == "ideal_gas" || name == "ideal_gas_energy") {
    const double cv = real(r, "cv"), R = real(r, "R"), N = real(r, "N");
    if (name == "ideal_gas") return make(name, build_ideal_gas(cv, R, N, Representation::Entropy), {1.5, 1.0}, 1.0, r);
    return make(name, build_ideal_gas(cv, R, N, Representation::Energy), {N * cv * std::log(1.5), 1.0}, 1.0, r);
  }
  if (name == "mass_spring") {
    auto s = make(name, build_mass_spring(real(r, "k"), real(r, "m")), {0.0, 1.0, 0.0}, 2.0 * std::numbers::pi, r);
    s.candidates.push_back(
        candidate_from_expression(s.system, "energy", "0.5*k*z^2 + pi_m^2/(2*m)", {{"z", 0.0}, {"pi_m", 0.0}}, reals_of(r)));
    return s;
  }
  if (name == "controller") return make(name, build_controller(text(r, "E_c")), {0.0, 0.0}, 1.0, r);
  if (name == "damper") {
    const double dd = real(r, "d");
    return make(name, make_damper(expression_field(text(r, "U_d"), {"S_d"}), dd), {0.0}, 1.0, r);
  }
  if (name == "controlled_mass_spring" || name == "closed_loop_mass_spring") {
    const bool damped = name == "closed_loop_mass_spring";
    ClosedLoop loop = closed_loop_mass_spring(loop_params(r, damped));
    ComposedSystem& chosen = damped ? loop.damped : loop.controlled;
    const std::size_t dim = chosen.system.manifold().n() + 1;
    auto s = make(name, chosen.system, std::vector<double>(dim, 0.0), damped ? 50.0 : 10.0, r);
    s.composed = std::move(chosen);
    s.conserved.push_back(damped ? loop.conserved_damped : loop.conserved_controlled);
    s.candidates.push_back(loop.shaped);
    return s;
  }
  if (name == "damped_mass_spring") {
    const auto plant = build_mass_spring(real(r, "k"), real(r, "m"));
    const auto damper = make_damper(expression_field(text(r, "U_d"), {"S_d"}), real(r, "d"));
    ComposedSystem c = compose_power(plant, damper, FeedbackLaw::negative_feedback(), {},
                                     CompositionOptions{.name = "damped_mass_spring"});
    auto s = make(name, c.system, {0.0, 1.0, 0.0, 0.0}, 30.0, r);
    s.composed = std::move(c);
    s.candidates.push_back(candidate_from_expression(s.system, "plant_energy", "0.5*k*z^2 + pi_m^2/(2*m)",
                                                     {{"z", 0.0}, {"pi_m", 0.0}}, reals_of(r)));
    return s;
  }
  if (name == "crn" || name == "corrupted_second_law") {
    CrnSpec spec;
    std::vector<double> x0{1.0, 2.0, 0.5};
    std::vector<double> qs{1.25, 1.25};
    if (name == "crn") {
      spec.Z = matrix(r, "Z");
      spec.B = matrix(r, "B");
      spec.weights = row(r, "weights");
      spec.c = real(r, "c");
      spec.R = real(r, "R");
      spec.theta = row(r, "theta");
      x0 = {real(r, "E0")};
      for (double q : row(r, "q0")) x0.push_back(q);
      qs = row(r, "q_star");
    }
    auto sys = build_crn(spec);
    const std::size_t species = spec.Z.size();
    if (x0.size() != species + 1) throw PreconditionError("q0 must have one entry per species");
    if (name == "corrupted_second_law") {
      ScalarField reversed(sys.manifold().phase_names(), [K = sys.internal()](auto x) { return -K(x); });
      return make(name, PortThermoSystem(name, sys.manifold(), reversed), x0, 1.0, r);
    }
    auto s = make(name, std::move(sys), x0, 10.0, r);
    // Σq is conserved when every reaction preserves the total species count.
    bool total_conserved = true;
    for (std::size_t e = 0; e < spec.weights.size(); ++e) {
      double col = 0.0;
      for (std::size_t i = 0; i < species; ++i)
        for (std::size_t j = 0; j < spec.B.size(); ++j) col += spec.Z[i][j] * spec.B[j][e];
      if (std::abs(col) > 1e-12) total_conserved = false;
    }
    if (total_conserved) {
      std::string sum;
      for (std::size_t i = 0; i < species; ++i) sum += (i ? " + q" : "q") + std::to_string(i + 1);
      s.conserved.push_back(conserved_from_expression(s.system, "total_q", sum));
    }
    if (!qs.empty()) {
      if (qs.size() != species) throw PreconditionError("q_star must have one entry per species");
      std::vector<double> setpoint{x0[0]};
      setpoint.insert(setpoint.end(), qs.begin(), qs.end());
      s.candidates.push_back(LyapunovCandidate{
          "availability", availability_field(s.system.manifold().generator(), setpoint), setpoint});
    }
    return s;
  }
  if (name == "heat_exchanger")
    return make(name, build_heat_exchanger(real(r, "lambda"), text(r, "U1"), text(r, "U2")), {1.0, 0.0}, 5.0, r);
  if (name == "heat_compartments") {
    const double c = real(r, "c"), kappa = real(r, "kappa");
    require_positive(c, "c");
    require_positive(kappa, "kappa");
    auto compartment = [c](const std::string& E, const std::string& label) {
      ScalarField S({E}, [c](auto b) { return c * ad::log(b[0]); });
      StateManifold M(Representation::Entropy, S, E, "S", {},
                      AdmissibleDomain::positive({0}, {{0.5, 3.0}}, E + " > 0"));
      auto names = M.phase_names();
      ScalarField internal = ScalarField::constant(names, 0.0);
      names.push_back("u");
      // E S p_E p_S u
      ScalarField control(names, [S](auto x) { return x[2] + x[3] * partial_of(S, x.subspan(0, 1), 0); });
      return PortThermoSystem("compartment_" + E, std::move(M), std::move(internal), {ControlHamiltonian{label, control}});
    };
    ScalarField u1({"y1", "y2"}, [kappa](auto y) { return kappa * (y[0] - y[1]); });
    ScalarField u2({"y1", "y2"}, [kappa](auto y) { return kappa * (y[1] - y[0]); });
    ComposedSystem comp = compose_entropy(compartment("E1", "u_1"), compartment("E2", "u_2"),
                                          FeedbackLaw::custom({u1}, {u2}), {},
                                          CompositionOptions{.name = "heat_compartments"});
    auto s = make(name, comp.system, {2.0, 1.0}, 5.0, r);
    s.composed = std::move(comp);
    s.conserved.push_back(conserved_from_expression(s.system, "total_energy", "E1 + E2"));
    std::vector<double> setpoint{1.5, 1.5};
    s.candidates.push_back(
        LyapunovCandidate{"availability", availability_field(s.system.manifold().generator(), setpoint), setpoint});
    return s;
  }
  if (name == "corrupted_first_law") {
    const auto ms = build_mass_spring(1.0, 1.0);
    // E S z pi p_E ...
    ScalarField bad(ms.manifold().phase_names(), [](auto x) { return x[4] * x[2]; });
    return make(name, PortThermoSystem(name, ms.manifold(), bad), {0.0, 1.0, 0.0}, 1.0, r);
  }
  if (name == "corrupted_nonhomogeneous") {
    ScalarField E({"S"}, [](auto b) { return ad::exp(b[0]); });
    StateManifold M(Representation::Energy, E, "E", "S", {}, AdmissibleDomain::everywhere({{-1.0, 1.0}}));
    // E S p_E p_S
    ScalarField bad(M.phase_names(), [](auto x) { return x[3] * x[3]; });
    return make(name, PortThermoSystem(name, std::move(M), bad), {0.0}, 1.0, r);
  }
  throw PreconditionError("unknown scenario '" + name + "'");
}

}  // namespace portthermo
