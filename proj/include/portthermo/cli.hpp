#pragma once

// Config-file front end: builds systems from JSON documents and runs the
// validate / simulate / lyapunov / list / export commands.

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "portthermo/dynamics.hpp"
#include "portthermo/scenarios.hpp"
#include "portthermo/stability.hpp"

namespace portthermo::cli {

enum ExitCode : int { kOk = 0, kConfigError = 1, kCheckFailed = 2, kDomainExit = 3 };

class ConfigError : public Error {
 public:
  using Error::Error;
};

struct RunOptions {
  std::filesystem::path config;
  /// Output directory; defaults to the current directory.
  std::optional<std::filesystem::path> out;
  std::optional<std::uint64_t> seed;
  /// Worker threads for sweeps and sampling; ≤ 0 means all available.
  int jobs = 1;
};

/// A system as built from a config block, with whatever defaults its
/// source carries.
struct BuiltSystem {
  PortThermoSystem system;
  std::optional<ComposedSystem> composed;
  std::optional<std::string> scenario;
  std::vector<double> x0;
  std::optional<double> t_end;
  InputSignal input;
  std::map<std::string, double> parameters;
  std::vector<ConservedQuantity> conserved;
  std::vector<LyapunovCandidate> candidates;
};

/// One fully resolved run (a config expands into several under a sweep).
struct Job {
  explicit Job(BuiltSystem system) : built(std::move(system)) {}

  std::string label;
  std::uint64_t seed = 0;
  std::size_t samples = 50;
  ValidationTolerances tolerances;
  BuiltSystem built;
  std::vector<double> x0;
  InputSignal input;
  double t0 = 0.0;
  double t1 = 1.0;
  IntegrationOptions integration;
  std::vector<ConservedQuantity> conserved;
  std::vector<LyapunovCandidate> candidates;
  ShellSpec shell;
  std::string csv_name;
  std::string report_stem;
};

/// Reads and resolves a config file; one job per sweep value (or just one).
std::vector<Job> load_jobs(const std::filesystem::path& config, std::optional<std::uint64_t> seed = {});

int cmd_validate(const RunOptions& options, std::ostream& out, std::ostream& err);
int cmd_simulate(const RunOptions& options, std::ostream& out, std::ostream& err);
int cmd_lyapunov(const RunOptions& options, std::ostream& out, std::ostream& err);
int cmd_list(std::ostream& out);
/// Writes a config reproducing the named built-in scenario.
int cmd_export(const std::string& scenario, const std::filesystem::path& destination, std::ostream& out,
               std::ostream& err);

/// Header plus one row per sample: t, base coordinates, then every channel.
void write_csv(const Trajectory& trajectory, std::ostream& out);

/// Sets the log level from PORTTHERMO_LOG (trace, debug, info, warn, error, off).
void configure_logging();

}  // namespace portthermo::cli
