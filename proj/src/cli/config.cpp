#include <fmt/format.h>
#include <spdlog/spdlog.h>

#include <algorithm>
#include <fstream>
#include <json.hpp>

#include "portthermo/cli.hpp"
#include "portthermo/expr.hpp"

namespace portthermo::cli {

using json = nlohmann::ordered_json;
namespace fs = std::filesystem;

namespace {

json read_document(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file '" + path.string() + "'");
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw ConfigError("config file '" + path.filename().string() + "' is not valid JSON: " + e.what());
  }
}

const json* member(const json& j, const char* key) {
  auto it = j.find(key);
  return it == j.end() ? nullptr : &*it;
}

double number(const json& j, const std::string& where) {
  if (!j.is_number()) throw ConfigError(where + " must be a number");
  return j.get<double>();
}

std::string string(const json& j, const std::string& where) {
  if (!j.is_string()) throw ConfigError(where + " must be a string");
  return j.get<std::string>();
}

double number_or(const json& j, const char* key, double fallback, const std::string& where) {
  const json* v = member(j, key);
  return v ? number(*v, where + "." + key) : fallback;
}

std::vector<std::string> strings(const json& j, const std::string& where) {
  if (!j.is_array()) throw ConfigError(where + " must be a list of strings");
  std::vector<std::string> out;
  for (const auto& e : j) out.push_back(string(e, where));
  return out;
}

std::map<std::string, double> number_map(const json& j, const std::string& where) {
  if (!j.is_object()) throw ConfigError(where + " must be an object of numbers");
  std::map<std::string, double> out;
  for (const auto& [k, v] : j.items()) out[k] = number(v, where + "." + k);
  return out;
}

ParamValue param_value(const json& j, const std::string& where) {
  if (j.is_number()) return j.get<double>();
  if (j.is_string()) return j.get<std::string>();
  if (j.is_array()) {
    Matrix m;
    if (!j.empty() && j.front().is_number()) {
      m.emplace_back();
      for (const auto& e : j) m.back().push_back(number(e, where));
      return m;
    }
    for (const auto& row : j) {
      if (!row.is_array()) throw ConfigError(where + " must be a number, string or matrix");
      m.emplace_back();
      for (const auto& e : row) m.back().push_back(number(e, where));
    }
    return m;
  }
  throw ConfigError(where + " must be a number, string or matrix");
}

std::vector<std::string> with(std::vector<std::string> names, const std::vector<std::string>& extra) {
  names.insert(names.end(), extra.begin(), extra.end());
  return names;
}

// ---- systems --------------------------------------------------------------

BuiltSystem build_system(const json& block, const fs::path& dir, std::uint64_t seed,
                         const std::map<std::string, ParamValue>& overrides);

BuiltSystem from_scenario(const json& block, const std::map<std::string, ParamValue>& overrides) {
  const std::string name = string(block.at("scenario"), "system.scenario");
  ScenarioParams params;
  if (const json* p = member(block, "parameters")) {
    if (!p->is_object()) throw ConfigError("system.parameters must be an object");
    for (const auto& [k, v] : p->items()) params.set(k, param_value(v, "system.parameters." + k));
  }
  for (const auto& [k, v] : overrides) params.set(k, v);
  Scenario s = build_scenario(name, params);
  BuiltSystem b{s.system, s.composed, name, s.x0, s.t_end, s.input, {}, s.conserved, s.candidates};
  for (const auto& [k, v] : s.params)
    if (const auto* d = std::get_if<double>(&v)) b.parameters[k] = *d;
  return b;
}

BuiltSystem from_inline(const json& block, const std::map<std::string, ParamValue>& overrides) {
  const std::string where = "system.inline";
  if (!block.is_object()) throw ConfigError(where + " must be an object");
  const std::string name = block.contains("name") ? string(block["name"], where + ".name") : "inline";
  const std::string rep_text = string(block.value("representation", json("energy")), where + ".representation");
  if (rep_text != "energy" && rep_text != "entropy")
    throw ConfigError(where + ".representation must be \"energy\" or \"entropy\"");
  const auto rep = rep_text == "energy" ? Representation::Energy : Representation::Entropy;
  const std::string E = string(block.value("energy", json("E")), where + ".energy");
  const std::string S = string(block.value("entropy", json("S")), where + ".entropy");
  const auto q = block.contains("q") ? strings(block["q"], where + ".q") : std::vector<std::string>{};
  std::map<std::string, double> params;
  if (const json* p = member(block, "parameters")) params = number_map(*p, where + ".parameters");
  for (const auto& [k, v] : overrides) {
    if (!params.count(k)) throw ConfigError("inline system has no parameter '" + k + "'");
    const auto* d = std::get_if<double>(&v);
    if (!d) throw ConfigError("inline parameter '" + k + "' must be a number");
    params[k] = *d;
  }

  std::vector<std::string> base{rep == Representation::Energy ? S : E};
  base.insert(base.end(), q.begin(), q.end());
  // Domain: positive slots and the sampling box.
  std::vector<std::size_t> positive;
  if (const json* d = member(block, "domain"); d && d->contains("positive")) {
    for (const auto& n : strings((*d)["positive"], where + ".domain.positive")) {
      auto it = std::find(base.begin(), base.end(), n);
      if (it == base.end()) throw ConfigError(where + ".domain.positive names unknown coordinate '" + n + "'");
      positive.push_back(static_cast<std::size_t>(it - base.begin()));
    }
  }
  std::vector<std::pair<double, double>> box;
  for (std::size_t i = 0; i < base.size(); ++i) {
    const bool pos = std::find(positive.begin(), positive.end(), i) != positive.end();
    std::pair<double, double> range = pos ? std::pair{0.5, 2.0} : std::pair{-1.0, 1.0};
    if (const json* d = member(block, "domain"); d && d->contains("box") && (*d)["box"].contains(base[i])) {
      const json& r = (*d)["box"][base[i]];
      if (!r.is_array() || r.size() != 2) throw ConfigError(where + ".domain.box." + base[i] + " must be [lo, hi]");
      range = {number(r[0], "box"), number(r[1], "box")};
      if (!(range.first < range.second)) throw ConfigError(where + ".domain.box." + base[i] + " is empty");
    }
    box.push_back(range);
  }
  AdmissibleDomain domain = positive.empty() ? AdmissibleDomain::everywhere(box)
                                             : AdmissibleDomain::positive(positive, box, "positive coordinates");
  if (!block.contains("generator")) throw ConfigError(where + ".generator is required");
  StateManifold M(rep, expression_field(string(block["generator"], where + ".generator"), base, params), E, S, q,
                  std::move(domain));
  const auto phase = M.phase_names();
  const std::string internal_text = block.contains("internal") ? string(block["internal"], where + ".internal") : "0";
  ScalarField internal = expression_field(internal_text, phase, params);
  std::vector<ControlHamiltonian> controls;
  if (const json* c = member(block, "controls")) {
    if (!c->is_array()) throw ConfigError(where + ".controls must be a list");
    for (const auto& entry : *c) {
      const std::string label = string(entry.at("label"), where + ".controls.label");
      const auto e = expr::parse(string(entry.at("expression"), where + ".controls.expression"));
      const bool uses_u = expr::free_variables(e).count("u") != 0;
      controls.push_back({label, expr::to_field(e, with(phase, {"u"}), params), !uses_u});
    }
  }
  std::vector<SlotKind> kinds(q.size(), SlotKind::Plain);
  if (const json* k = member(block, "q_kinds")) {
    for (const auto& [n, v] : k->items()) {
      auto it = std::find(q.begin(), q.end(), n);
      if (it == q.end()) throw ConfigError(where + ".q_kinds names unknown coordinate '" + n + "'");
      const std::string kind = string(v, where + ".q_kinds." + n);
      const auto i = static_cast<std::size_t>(it - q.begin());
      if (kind == "energy") kinds[i] = SlotKind::Energy;
      else if (kind == "entropy") kinds[i] = SlotKind::Entropy;
      else if (kind != "plain") throw ConfigError(where + ".q_kinds." + n + " must be plain, energy or entropy");
    }
  }
  PortThermoSystem sys(name, std::move(M), std::move(internal), std::move(controls), std::move(kinds));
  BuiltSystem b{sys, std::nullopt, std::nullopt, {}, std::nullopt, {}, params, {}, {}};
  return b;
}

FeedbackLaw parse_law(const json& j, std::size_t m1, std::size_t m2, const std::map<std::string, double>& params) {
  const std::string where = "system.compose.law";
  const std::string type = string(j.value("type", json("negative_feedback")), where + ".type");
  if (type == "negative_feedback") return FeedbackLaw::negative_feedback();
  if (type == "decoupled") return FeedbackLaw::decoupled();
  if (type == "gyrative") {
    Matrix J;
    const auto v = param_value(j.at("J"), where + ".J");
    if (const auto* m = std::get_if<Matrix>(&v)) J = *m;
    else throw ConfigError(where + ".J must be a matrix");
    return FeedbackLaw::gyrative(J);
  }
  if (type == "custom") {
    std::vector<std::string> ys;
    for (std::size_t i = 0; i < m1; ++i) ys.push_back(fmt::format("y1_{}", i + 1));
    for (std::size_t i = 0; i < m2; ++i) ys.push_back(fmt::format("y2_{}", i + 1));
    auto fields = [&](const char* key) {
      std::vector<ScalarField> out;
      if (const json* list = member(j, key))
        for (const auto& t : strings(*list, where + "." + key)) out.push_back(expression_field(t, ys, params));
      return out;
    };
    return FeedbackLaw::custom(fields("u1"), fields("u2"));
  }
  throw ConfigError(where + ".type must be negative_feedback, gyrative, decoupled or custom");
}

std::optional<std::vector<std::size_t>> parse_ports(const json* j, const PortThermoSystem& s, const std::string& where) {
  if (!j) return std::nullopt;
  if (!j->is_array()) throw ConfigError(where + " must be a list of port labels or indices");
  std::vector<std::size_t> out;
  for (const auto& e : *j) {
    if (e.is_number_unsigned()) {
      out.push_back(e.get<std::size_t>());
      continue;
    }
    const std::string label = string(e, where);
    std::size_t i = 0;
    while (i < s.ports() && s.controls()[i].label != label) ++i;
    if (i == s.ports()) throw ConfigError(where + ": system '" + s.name() + "' has no port '" + label + "'");
    out.push_back(i);
  }
  return out;
}

BuiltSystem child_system(const json& spec, const fs::path& dir, std::uint64_t seed, const std::string& where) {
  if (spec.is_string()) {
    const fs::path path = dir / spec.get<std::string>();
    const json doc = read_document(path);
    if (!doc.contains("system")) throw ConfigError(where + ": '" + path.filename().string() + "' has no system block");
    BuiltSystem b = build_system(doc["system"], path.parent_path(), seed, {});
    if (const json* init = member(doc, "initial_state")) {
      const auto names = b.system.manifold().base_names();
      if (b.x0.size() != names.size()) b.x0.assign(names.size(), 0.0);
      for (const auto& [k, v] : init->items()) {
        auto it = std::find(names.begin(), names.end(), k);
        if (it == names.end()) throw ConfigError(where + ".initial_state names unknown coordinate '" + k + "'");
        b.x0[static_cast<std::size_t>(it - names.begin())] = number(v, where + ".initial_state." + k);
      }
    }
    return b;
  }
  return build_system(spec, dir, seed, {});
}

BuiltSystem from_compose(const json& block, const fs::path& dir, std::uint64_t seed) {
  const std::string where = "system.compose";
  const std::string kind = string(block.value("kind", json("power")), where + ".kind");
  if (kind != "power" && kind != "entropy") throw ConfigError(where + ".kind must be \"power\" or \"entropy\"");
  if (!block.contains("first") || !block.contains("second"))
    throw ConfigError(where + " needs a first and a second system");
  BuiltSystem a = child_system(block["first"], dir, seed, where + ".first");
  BuiltSystem b = child_system(block["second"], dir, seed, where + ".second");
  PortSelection ports;
  if (const json* p = member(block, "ports")) {
    ports.first = parse_ports(member(*p, "first"), a.system, where + ".ports.first");
    ports.second = parse_ports(member(*p, "second"), b.system, where + ".ports.second");
  }
  std::map<std::string, double> params;
  if (const json* p = member(block, "parameters")) params = number_map(*p, where + ".parameters");
  const std::size_t m1 = ports.first ? ports.first->size() : a.system.ports();
  const std::size_t m2 = ports.second ? ports.second->size() : b.system.ports();
  const FeedbackLaw law = block.contains("law") ? parse_law(block["law"], m1, m2, params)
                                                : FeedbackLaw::negative_feedback();
  CompositionOptions opt;
  opt.name = block.contains("name") ? string(block["name"], where + ".name") : "";
  opt.samples = static_cast<std::size_t>(number_or(block, "samples", 20, where));
  opt.tolerance = number_or(block, "tolerance", 1e-9, where);
  opt.seed = seed;
  ComposedSystem c = kind == "power" ? compose_power(a.system, b.system, law, ports, opt)
                                     : compose_entropy(a.system, b.system, law, ports, opt);
  BuiltSystem out{c.system, c, std::nullopt, {}, std::nullopt, {}, params, {}, {}};
  const std::size_t n = c.system.manifold().n() + 1;
  out.x0.assign(n, 0.0);
  if (a.x0.size() == c.first_base.size())
    for (std::size_t i = 0; i < a.x0.size(); ++i) out.x0[c.first_base[i]] = a.x0[i];
  if (b.x0.size() == c.second_base.size())
    for (std::size_t i = 0; i < b.x0.size(); ++i) out.x0[c.second_base[i]] = b.x0[i];
  if (a.t_end || b.t_end) out.t_end = std::max(a.t_end.value_or(0.0), b.t_end.value_or(0.0));
  return out;
}

BuiltSystem build_system(const json& block, const fs::path& dir, std::uint64_t seed,
                         const std::map<std::string, ParamValue>& overrides) {
  if (!block.is_object()) throw ConfigError("system block must be an object");
  const int kinds = int(block.contains("scenario")) + int(block.contains("inline")) + int(block.contains("compose"));
  if (kinds != 1) throw ConfigError("system block needs exactly one of scenario, inline or compose");
  if (block.contains("scenario")) return from_scenario(block, overrides);
  if (!overrides.empty() && block.contains("compose")) throw ConfigError("sweeps over composed systems are not supported");
  if (block.contains("inline")) return from_inline(block["inline"], overrides);
  return from_compose(block["compose"], dir, seed);
}

// ---- runs -----------------------------------------------------------------

// Later declarations replace earlier ones of the same name.
void upsert(std::vector<LyapunovCandidate>& list, LyapunovCandidate c) {
  for (auto& e : list)
    if (e.name == c.name) {
      e = std::move(c);
      return;
    }
  list.push_back(std::move(c));
}

void upsert(std::vector<ConservedQuantity>& list, ConservedQuantity c) {
  for (auto& e : list)
    if (e.name() == c.name()) {
      e = std::move(c);
      return;
    }
  list.push_back(std::move(c));
}

InputSignal parse_input(const json& j, const PortThermoSystem& sys, const std::map<std::string, double>& params) {
  if (!j.is_object()) throw ConfigError("input must be an object of port expressions");
  const auto base = sys.manifold().base_names();
  std::vector<std::string> ys;
  for (const auto& c : sys.controls()) ys.push_back("y_" + c.label);
  const auto names = with(with({"t"}, base), ys);
  std::vector<InputRule> rules(sys.ports(), InputRule::constant(0.0));
  for (const auto& [label, v] : j.items()) {
    std::size_t p = 0;
    while (p < sys.ports() && sys.controls()[p].label != label) ++p;
    if (p == sys.ports()) throw ConfigError("input names unknown port '" + label + "'");
    if (v.is_number()) {
      rules[p] = InputRule::constant(v.get<double>());
      continue;
    }
    const ScalarField f = expression_field(string(v, "input." + label), names, params);
    const std::size_t nb = base.size();
    rules[p] = InputRule::state_feedback(
        [f, nb](double t, std::span<const double> b, std::span<const double> y) {
          std::vector<double> x{t};
          x.insert(x.end(), b.begin(), b.end());
          x.insert(x.end(), y.begin(), y.end());
          if (x.size() != 1 + nb + y.size()) throw PreconditionError("input evaluated with wrong dimensions");
          return f(x);
        });
  }
  return InputSignal(std::move(rules));
}

LyapunovCandidate parse_candidate(const json& j, const BuiltSystem& b, const std::map<std::string, double>& params) {
  const std::string name = string(j.at("name"), "analyses.lyapunov.name");
  if (!j.contains("expression")) {
    for (const auto& c : b.candidates)
      if (c.name == name) return c;
    throw ConfigError("no built-in Lyapunov candidate named '" + name + "'");
  }
  if (!j.contains("equilibrium")) throw ConfigError("Lyapunov candidate '" + name + "' needs an equilibrium");
  return candidate_from_expression(b.system, name, string(j["expression"], "analyses.lyapunov.expression"),
                                   number_map(j["equilibrium"], "analyses.lyapunov.equilibrium"), params);
}

Job make_job(const json& doc, const fs::path& dir, std::uint64_t seed, const std::string& stem,
             const std::map<std::string, ParamValue>& overrides) {
  if (!doc.is_object()) throw ConfigError("config must be a JSON object");
  if (!doc.contains("system")) throw ConfigError("config has no system block");
  Job job(build_system(doc["system"], dir, seed, overrides));
  job.label = stem;
  job.seed = seed;
  const BuiltSystem& b = job.built;
  const auto& sys = b.system;
  const auto names = sys.manifold().base_names();
  auto params = b.parameters;

  if (const json* v = member(doc, "validation")) {
    job.samples = static_cast<std::size_t>(number_or(*v, "samples", 50, "validation"));
    if (job.samples == 0) throw ConfigError("validation.samples must be positive");
    if (const json* t = member(*v, "tolerances")) {
      auto& tol = job.tolerances;
      tol.euler = number_or(*t, "euler", tol.euler, "validation.tolerances");
      tol.homogeneity = number_or(*t, "homogeneity", tol.homogeneity, "validation.tolerances");
      tol.restriction = number_or(*t, "restriction", tol.restriction, "validation.tolerances");
      tol.first_law = number_or(*t, "first_law", tol.first_law, "validation.tolerances");
      tol.second_law = number_or(*t, "second_law", tol.second_law, "validation.tolerances");
    }
  }

  job.x0 = b.x0.size() == names.size() ? b.x0 : std::vector<double>(names.size(), 0.0);
  std::vector<bool> given(names.size(), b.x0.size() == names.size());
  if (const json* init = member(doc, "initial_state")) {
    if (!init->is_object()) throw ConfigError("initial_state must be an object");
    for (const auto& [k, v] : init->items()) {
      auto it = std::find(names.begin(), names.end(), k);
      if (it == names.end()) throw ConfigError("initial_state names unknown coordinate '" + k + "'");
      const auto i = static_cast<std::size_t>(it - names.begin());
      job.x0[i] = number(v, "initial_state." + k);
      given[i] = true;
    }
  }
  if (b.composed) std::fill(given.begin(), given.end(), true);
  for (std::size_t i = 0; i < names.size(); ++i)
    if (!given[i]) throw ConfigError("initial_state is missing coordinate '" + names[i] + "'");

  job.input = doc.contains("input") ? parse_input(doc["input"], sys, params) : b.input;

  job.t1 = b.t_end.value_or(1.0);
  if (const json* in = member(doc, "integration")) {
    const std::string method = string(in->value("method", json("rk4")), "integration.method");
    if (method == "rk4") job.integration.method = Method::RK4;
    else if (method == "rk45") job.integration.method = Method::RK45;
    else throw ConfigError("integration.method must be rk4 or rk45");
    job.t0 = number_or(*in, "t0", 0.0, "integration");
    job.t1 = number_or(*in, "t1", job.t0 + job.t1, "integration");
    job.integration.h = number_or(*in, "h", 0.0, "integration");
    job.integration.atol = number_or(*in, "atol", job.integration.atol, "integration");
    job.integration.rtol = number_or(*in, "rtol", job.integration.rtol, "integration");
    job.integration.max_steps =
        static_cast<std::size_t>(number_or(*in, "max_steps", double(job.integration.max_steps), "integration"));
    if (!(job.t1 >= job.t0)) throw ConfigError("integration.t1 must not precede t0");
    if (job.integration.h < 0.0) throw ConfigError("integration.h must be positive");
    if (!(job.integration.atol > 0.0) || !(job.integration.rtol > 0.0))
      throw ConfigError("integration tolerances must be positive");
  }

  job.conserved = b.conserved;
  job.candidates = b.candidates;
  if (const json* an = member(doc, "analyses")) {
    if (const json* cs = member(*an, "conserved")) {
      if (!cs->is_array()) throw ConfigError("analyses.conserved must be a list");
      for (const auto& c : *cs)
        upsert(job.conserved, conserved_from_expression(sys, string(c.at("name"), "analyses.conserved.name"),
                                                          string(c.at("expression"), "analyses.conserved.expression"),
                                                          params));
    }
    if (const json* ls = member(*an, "lyapunov")) {
      if (!ls->is_array()) throw ConfigError("analyses.lyapunov must be a list");
      job.candidates.clear();
      for (const auto& c : *ls) upsert(job.candidates, parse_candidate(c, b, params));
    }
    if (const json* av = member(*an, "availability")) {
      if (sys.manifold().representation() != Representation::Entropy)
        throw ConfigError("the availability candidate needs an entropy-representation system");
      const auto sp = number_map(av->at("setpoint"), "analyses.availability.setpoint");
      std::vector<double> setpoint;
      for (const auto& n : names) {
        auto it = sp.find(n);
        if (it == sp.end()) throw ConfigError("availability setpoint is missing coordinate '" + n + "'");
        setpoint.push_back(it->second);
      }
      upsert(job.candidates,
          LyapunovCandidate{"availability", availability_field(sys.manifold().generator(), setpoint), setpoint});
    }
    if (const json* sh = member(*an, "shell")) {
      job.shell.r_min = number_or(*sh, "r_min", job.shell.r_min, "analyses.shell");
      job.shell.r_max = number_or(*sh, "r_max", job.shell.r_max, "analyses.shell");
      job.shell.count = static_cast<std::size_t>(number_or(*sh, "count", double(job.shell.count), "analyses.shell"));
    }
  }

  job.csv_name = stem + ".csv";
  job.report_stem = stem;
  if (const json* o = member(doc, "output")) {
    if (o->contains("csv")) job.csv_name = string((*o)["csv"], "output.csv");
    if (o->contains("report")) job.report_stem = string((*o)["report"], "output.report");
  }
  return job;
}

}  // namespace

std::vector<Job> load_jobs(const fs::path& config, std::optional<std::uint64_t> seed) {
  const json doc = read_document(config);
  const fs::path dir = config.parent_path();
  const std::string stem = config.stem().string();
  std::uint64_t s = 0;
  if (doc.is_object() && doc.contains("seed")) {
    if (!doc["seed"].is_number_unsigned()) throw ConfigError("seed must be a nonnegative integer");
    s = doc["seed"].get<std::uint64_t>();
  }
  if (seed) s = *seed;
  spdlog::debug("loading config {}", config.filename().string());

  const json* sweep = doc.is_object() ? member(doc, "sweep") : nullptr;
  if (!sweep) return {make_job(doc, dir, s, stem, {})};
  const std::string param = string(sweep->at("parameter"), "sweep.parameter");
  const json& values = sweep->at("values");
  if (!values.is_array() || values.empty()) throw ConfigError("sweep.values must be a nonempty list");
  std::vector<Job> jobs;
  for (std::size_t i = 0; i < values.size(); ++i) {
    Job job = make_job(doc, dir, s, stem, {{param, param_value(values[i], "sweep.values")}});
    const std::string suffix = fmt::format("_{}{}", param, i);
    job.label = fmt::format("{} [{} = {}]", stem, param, describe(param_value(values[i], "sweep.values")));
    const auto dot = job.csv_name.rfind(".csv");
    job.csv_name = (dot == std::string::npos ? job.csv_name : job.csv_name.substr(0, dot)) + suffix + ".csv";
    job.report_stem += suffix;
    jobs.push_back(std::move(job));
  }
  return jobs;
}

}  // namespace portthermo::cli
