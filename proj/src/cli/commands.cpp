#include <fmt/format.h>
#include <spdlog/sinks/stdout_sinks.h>
#include <spdlog/spdlog.h>

#include <cstdlib>
#include <fstream>
#include <iterator>
#include <json.hpp>
#include <ostream>
#include <sstream>

#include "portthermo/cli.hpp"
#include "portthermo/expr.hpp"
#include "portthermo/kernels.hpp"

namespace portthermo::cli {

using json = nlohmann::ordered_json;
namespace fs = std::filesystem;

void configure_logging() {
  auto logger = std::make_shared<spdlog::logger>("portthermo", std::make_shared<spdlog::sinks::stderr_sink_mt>());
  logger->set_pattern("[%l] %v");
  auto level = spdlog::level::warn;
  if (const char* env = std::getenv("PORTTHERMO_LOG")) {
    const auto parsed = spdlog::level::from_str(env);
    // from_str maps anything unknown to off; only accept real names.
    if (parsed != spdlog::level::off || std::string(env) == "off") level = parsed;
  }
  logger->set_level(level);
  spdlog::set_default_logger(std::move(logger));
}

void write_csv(const Trajectory& tr, std::ostream& out) {
  fmt::memory_buffer buf;
  auto it = std::back_inserter(buf);
  fmt::format_to(it, "t");
  for (const auto& n : tr.state_names) fmt::format_to(it, ",{}", n);
  for (const auto& c : tr.channels) fmt::format_to(it, ",{}", c.name);
  fmt::format_to(it, "\n");
  for (std::size_t i = 0; i < tr.size(); ++i) {
    fmt::format_to(it, "{:.17g}", tr.times[i]);
    for (double v : tr.states[i]) fmt::format_to(it, ",{:.17g}", v);
    for (const auto& c : tr.channels) fmt::format_to(it, ",{:.17g}", c.values[i]);
    fmt::format_to(it, "\n");
  }
  out.write(buf.data(), static_cast<std::streamsize>(buf.size()));
}

namespace {

struct Outcome {
  int code = kOk;
  std::string report;
  std::string error;
};

std::string join(const std::vector<std::string>& v) {
  std::string out;
  for (std::size_t i = 0; i < v.size(); ++i) out += (i ? ", " : "") + v[i];
  return out;
}

std::string assignments(const std::vector<std::string>& names, const std::vector<double>& values) {
  std::string out;
  for (std::size_t i = 0; i < names.size(); ++i) out += fmt::format("{}{} = {:.17g}", i ? ", " : "", names[i], values[i]);
  return out;
}

std::string header(const Job& job) {
  const auto& sys = job.built.system;
  const auto& M = sys.manifold();
  std::string h = fmt::format("run: {}\nsystem: {}\nrepresentation: {}\ncoordinates: {}\n", job.label, sys.name(),
                              M.representation() == Representation::Energy ? "energy" : "entropy",
                              join(M.base_names()));
  std::vector<std::string> ports;
  for (const auto& c : sys.controls()) ports.push_back(c.label + (c.linear_in_u ? "" : " (nonlinear)"));
  h += fmt::format("ports: {}\n", ports.empty() ? "none" : join(ports));
  return h;
}

std::vector<TrackedQuantity> tracked_of(const Job& job) {
  std::vector<TrackedQuantity> out;
  for (const auto& c : job.conserved) out.push_back({c.name(), c.field(), TrackedQuantity::Kind::Drift});
  for (const auto& v : job.candidates) {
    out.push_back({v.name, v.V, TrackedQuantity::Kind::Drift});
    out.push_back({v.name, v.V, TrackedQuantity::Kind::Rate});
  }
  return out;
}

void write_file(const fs::path& path, const std::string& text) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw ConfigError("cannot write '" + path.filename().string() + "'");
  f << text;
}

fs::path out_dir(const RunOptions& opt) {
  fs::path dir = opt.out.value_or(fs::path("."));
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw ConfigError("cannot create output directory: " + ec.message());
  return dir;
}

// ---- validate -------------------------------------------------------------

Outcome run_validate(const Job& job, const fs::path& dir, int jobs) {
  Outcome o;
  const auto& sys = job.built.system;
  spdlog::info("validating {} at {} samples", sys.name(), job.samples);
  Rng rng(job.seed);
  const ValidationReport rep = validate(sys, job.samples, rng, ValidationOptions{job.tolerances, jobs});
  std::string r = header(job);
  r += fmt::format("samples: {}\nseed: {}\n\n", rep.samples, job.seed);
  r += fmt::format("{:<28} {:>14}   {:<14} {}\n", "check", "worst", "tolerance", "result");
  for (const auto& c : rep.checks) {
    r += fmt::format("{:<28} {:>14.6e}   {:<14} {}", c.name, c.worst,
                     fmt::format("{} {:g}", c.lower_bound ? ">=" : "<=", c.tolerance), c.passed ? "pass" : "FAIL");
    if (!c.passed) r += fmt::format(" (sample {})", c.worst_sample);
    r += "\n";
  }
  bool ok = rep.passed();
  if (!job.conserved.empty()) r += "\nconserved quantities:\n";
  for (const auto& c : job.conserved) {
    Rng crng(job.seed);
    const auto check = c.verify(sys, job.samples, crng);
    const bool pass = check.bracket <= kBracketTolerance;
    ok = ok && pass;
    r += fmt::format("{:<28} bracket {:.6e} (<= {:g}) {}; dK^a/dp_{} = 0 off the submanifold: {} (max {:.6e})\n",
                     c.name(), check.bracket, kBracketTolerance, pass ? "pass" : "FAIL",
                     c.side() == Side::Energy ? "E" : "S", check.strong_law_holds ? "holds" : "does not hold",
                     check.off_manifold_law);
  }
  if (const auto& comp = job.built.composed) {
    r += fmt::format("\ncomposition: {} of {} and {}, law {}, balance residual {:.6e}{}\n",
                     comp->kind == CompositionKind::Power ? "power" : "entropy", comp->first->name(),
                     comp->second->name(), to_string(comp->law.kind), comp->law_residual,
                     comp->law_checked_numerically ? " (sampled)" : "");
  }
  r += fmt::format("\nresult: {}\n", ok ? "pass" : "FAIL");
  write_file(dir / (job.report_stem + "_validate.txt"), r);
  o.report = std::move(r);
  o.code = ok ? kOk : kCheckFailed;
  return o;
}

// ---- simulate -------------------------------------------------------------

struct Run {
  Trajectory trajectory;
  std::optional<double> exit_time;
  std::string exit_message;
};

Run run_integration(const Job& job) {
  Run run;
  spdlog::info("integrating {} over [{}, {}]", job.built.system.name(), job.t0, job.t1);
  try {
    run.trajectory = integrate(job.built.system, job.x0, job.input, job.t0, job.t1, job.integration, tracked_of(job));
  } catch (const DomainExitError& e) {
    run.trajectory = e.partial();
    run.exit_time = e.last_time();
    run.exit_message = e.what();
    spdlog::warn("{}", e.what());
  }
  return run;
}

std::string integration_summary(const Job& job, const Run& run) {
  std::string r = fmt::format("method: {}\nt0: {:.17g}\nt1: {:.17g}\nsamples: {}\n",
                              job.integration.method == Method::RK4 ? "rk4" : "rk45", job.t0, job.t1,
                              run.trajectory.size());
  if (run.exit_time)
    r += fmt::format("status: domain exit after t = {:.17g} ({}); trajectory is partial\n", *run.exit_time,
                     run.exit_message);
  else
    r += "status: complete\n";
  return r;
}

Outcome run_simulate(const Job& job, const fs::path& dir) {
  Outcome o;
  const Run run = run_integration(job);
  {
    std::ofstream csv(dir / job.csv_name, std::ios::binary);
    if (!csv) throw ConfigError("cannot write '" + job.csv_name + "'");
    write_csv(run.trajectory, csv);
  }
  std::string r = header(job) + integration_summary(job, run);
  if (!run.trajectory.empty()) {
    std::vector<TrackedQuantity> conserved;
    for (const auto& c : job.conserved) conserved.push_back({c.name(), c.field(), TrackedQuantity::Kind::Drift});
    const auto m = monitor(job.built.system, run.trajectory, conserved);
    r += fmt::format("max balance residual: {:.6e}\n", m.max_balance_residual);
    r += fmt::format("min entropy production: {:.6e}\n", m.min_entropy_production);
    r += fmt::format("max K residual: {:.6e}\n", m.max_k_residual);
    r += fmt::format("max energy drift: {:.6e}\n", m.max_energy_drift);
    if (!conserved.empty()) r += fmt::format("max conserved drift: {:.6e}\n", m.max_conserved_drift);
    r += fmt::format("final state: {}\n", assignments(run.trajectory.state_names, run.trajectory.states.back()));
  }
  r += fmt::format("csv: {}\n", job.csv_name);
  write_file(dir / (job.report_stem + "_simulate.txt"), r);
  o.report = std::move(r);
  o.code = run.exit_time ? kDomainExit : kOk;
  return o;
}

// ---- lyapunov -------------------------------------------------------------

Outcome run_lyapunov(const Job& job, const fs::path& dir, int jobs) {
  Outcome o;
  if (job.candidates.empty()) throw ConfigError("no Lyapunov candidate declared for '" + job.built.system.name() + "'");
  const Run run = run_integration(job);
  std::string r = header(job) + integration_summary(job, run);
  if (run.exit_time) {
    o.code = kDomainExit;
  } else {
    bool all = true;
    for (const auto& c : job.candidates) {
      Rng rng(job.seed);
      const auto rep = lyapunov_certificate(job.built.system, c, job.shell, run.trajectory, rng, jobs);
      all = all && rep.verdict;
      r += fmt::format("\ncandidate: {} over ({})\n", rep.candidate, join(rep.coordinates));
      r += fmt::format("equilibrium: {}\n", assignments(rep.coordinates, rep.equilibrium));
      r += fmt::format("V at equilibrium: {:.17g}\n", rep.value_at_equilibrium);
      r += fmt::format("shell: {} samples, radius [{:g}, {:g}]\n", rep.shell_samples, job.shell.r_min, job.shell.r_max);
      r += fmt::format("margin: {:.6e} at ({})\n", rep.margin, assignments(rep.coordinates, rep.margin_at));
      r += fmt::format("max dV/dt: {:.6e} at t = {:.17g} ({} samples, tolerance {:g})\n", rep.max_dVdt,
                       rep.max_dVdt_time, rep.trajectory_samples, kLyapunovRateTolerance);
      if (rep.hessian_min_eigenvalue) r += fmt::format("hessian min eigenvalue: {:.6e}\n", *rep.hessian_min_eigenvalue);
      else r += "hessian min eigenvalue: unavailable\n";
      r += fmt::format("verdict: {}\n", rep.verdict ? "pass" : "FAIL");
    }
    o.code = all ? kOk : kCheckFailed;
  }
  write_file(dir / (job.report_stem + "_lyapunov.txt"), r);
  o.report = std::move(r);
  return o;
}

// ---- driver ---------------------------------------------------------------

template <class F>
int drive(const RunOptions& opt, std::ostream& out, std::ostream& err, F body) {
  std::vector<Job> jobs;
  fs::path dir;
  try {
    jobs = load_jobs(opt.config, opt.seed);
    dir = out_dir(opt);
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kConfigError;
  }
  const bool sweep = jobs.size() > 1;
  const int inner = sweep ? 1 : opt.jobs;
  const auto outcomes = kernels::map_indexed(jobs.size(), sweep ? opt.jobs : 1, [&](std::size_t i) {
    Outcome o;
    try {
      o = body(jobs[i], dir, inner);
    } catch (const DomainError& e) {
      o.code = kDomainExit;
      o.error = e.what();
    } catch (const std::exception& e) {
      o.code = kConfigError;
      o.error = e.what();
    }
    return o;
  });
  int code = kOk;
  for (std::size_t i = 0; i < outcomes.size(); ++i) {
    if (sweep && i) out << "\n";
    out << outcomes[i].report;
    if (!outcomes[i].error.empty()) err << "error: " << jobs[i].label << ": " << outcomes[i].error << "\n";
    code = std::max(code, outcomes[i].code);
  }
  // A configuration problem outranks check failures in the exit status.
  for (const auto& o : outcomes)
    if (o.code == kConfigError) code = kConfigError;
  return code;
}

json param_json(const ParamValue& v) {
  if (const auto* d = std::get_if<double>(&v)) return *d;
  if (const auto* s = std::get_if<std::string>(&v)) return *s;
  json rows = json::array();
  for (const auto& row : std::get<Matrix>(v)) rows.push_back(row);
  return rows;
}

}  // namespace

int cmd_validate(const RunOptions& opt, std::ostream& out, std::ostream& err) {
  return drive(opt, out, err, [](const Job& j, const fs::path& d, int jobs) { return run_validate(j, d, jobs); });
}

int cmd_simulate(const RunOptions& opt, std::ostream& out, std::ostream& err) {
  return drive(opt, out, err, [](const Job& j, const fs::path& d, int) { return run_simulate(j, d); });
}

int cmd_lyapunov(const RunOptions& opt, std::ostream& out, std::ostream& err) {
  return drive(opt, out, err, [](const Job& j, const fs::path& d, int jobs) { return run_lyapunov(j, d, jobs); });
}

int cmd_list(std::ostream& out) {
  for (const auto& info : scenario_catalog()) {
    out << info.name << (info.fixture ? " (fixture)" : "") << "\n    " << info.summary << "\n";
    for (const auto& p : info.params)
      out << fmt::format("    {:<10} = {:<28} {}\n", p.name, describe(p.default_value), p.doc);
  }
  return kOk;
}

int cmd_export(const std::string& scenario, const fs::path& destination, std::ostream& out, std::ostream& err) {
  try {
    const Scenario s = build_scenario(scenario);
    json doc;
    json params = json::object();
    for (const auto& p : scenario_info(scenario).params) params[p.name] = param_json(s.params.at(p.name));
    doc["system"] = {{"scenario", scenario}, {"parameters", params}};
    doc["seed"] = 0;
    doc["validation"] = {{"samples", 50}};
    json init = json::object();
    const auto names = s.system.manifold().base_names();
    for (std::size_t i = 0; i < names.size(); ++i) init[names[i]] = s.x0[i];
    doc["initial_state"] = init;
    doc["integration"] = {{"method", "rk4"}, {"t0", 0.0}, {"t1", s.t_end}};
    doc["output"] = {{"csv", scenario + ".csv"}, {"report", scenario}};
    if (destination.has_parent_path()) fs::create_directories(destination.parent_path());
    write_file(destination, doc.dump(2) + "\n");
    out << "wrote " << destination.filename().string() << "\n";
    return kOk;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kConfigError;
  }
}

}  // namespace portthermo::cli
