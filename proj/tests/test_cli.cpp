#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "doctest.h"
#include "portthermo/cli.hpp"

using namespace portthermo;
using namespace portthermo::cli;
namespace fs = std::filesystem;

namespace {

const fs::path kConfigs = fs::path(PORTTHERMO_SOURCE_DIR) / "configs";

struct TempDir {
  fs::path path;
  explicit TempDir(const std::string& tag) {
    path = fs::temp_directory_path() / ("portthermo_test_" + tag + "_" + std::to_string(::getpid()));
    fs::remove_all(path);
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
};

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

void spit(const fs::path& p, const std::string& text) {
  std::ofstream out(p, std::ios::binary);
  out << text;
}

std::vector<std::string> lines(const std::string& text) {
  std::vector<std::string> out;
  std::istringstream in(text);
  for (std::string line; std::getline(in, line);) out.push_back(line);
  return out;
}

int run(int (*cmd)(const RunOptions&, std::ostream&, std::ostream&), const fs::path& config, const fs::path& out,
        std::string* stdout_text = nullptr, int jobs = 1) {
  std::ostringstream o, e;
  const int code = cmd(RunOptions{config, out, 0, jobs}, o, e);
  if (stdout_text) *stdout_text = o.str() + e.str();
  return code;
}

}  // namespace

TEST_CASE("list is deterministic and complete") {
  std::ostringstream a, b;
  CHECK(cmd_list(a) == kOk);
  CHECK(cmd_list(b) == kOk);
  CHECK(a.str() == b.str());
  CHECK(a.str().find("mass_spring") != std::string::npos);
  CHECK(a.str().find("crn") != std::string::npos);
  CHECK(a.str().find("closed_loop_mass_spring") != std::string::npos);
}

TEST_CASE("validate exit codes") {
  TempDir dir("validate");
  CHECK(run(cmd_validate, kConfigs / "mass_spring.json", dir.path) == kOk);
  const auto report = slurp(dir.path / "mass_spring_validate.txt");
  CHECK(report.find("result: pass") != std::string::npos);

  std::string text;
  CHECK(run(cmd_validate, kConfigs / "corrupted_first_law.json", dir.path, &text) == kCheckFailed);
  bool flagged = false;
  for (const auto& line : lines(slurp(dir.path / "corrupted_first_law_validate.txt")))
    if (line.rfind("first_law", 0) == 0 && line.find("FAIL") != std::string::npos) flagged = true;
  CHECK(flagged);

  CHECK(run(cmd_validate, dir.path / "missing.json", dir.path) == kConfigError);
}

TEST_CASE("malformed configs are config errors") {
  TempDir dir("malformed");
  const std::vector<std::string> bad{
      "{",
      R"({"system": {}})",
      R"({"system": {"scenario": "nope"}})",
      R"({"system": {"scenario": "mass_spring", "parameters": {"k": "x"}}})",
      R"({"system": {"scenario": "mass_spring"}, "initial_state": {"S": 0, "zz": 1, "pi_m": 0}})",
      R"({"system": {"scenario": "mass_spring"}, "integration": {"method": "euler"}})",
      R"({"system": {"scenario": "mass_spring"}, "seed": -1})",
      R"({"system": {"inline": {"name": "x", "representation": "energy", "q": ["z"], "generator": "z^2 +", "internal": "0"}}})",
      R"({"system": {"inline": {"name": "x", "representation": "energy", "q": ["z"], "generator": "w^2", "internal": "0"}}})",
  };
  for (std::size_t i = 0; i < bad.size(); ++i) {
    CAPTURE(bad[i]);
    const auto path = dir.path / ("bad" + std::to_string(i) + ".json");
    spit(path, bad[i]);
    std::string text;
    CHECK(run(cmd_validate, path, dir.path, &text) == kConfigError);
    CHECK_FALSE(text.empty());
  }
}

TEST_CASE("simulate writes the CSV") {
  TempDir dir("simulate");
  CHECK(run(cmd_simulate, kConfigs / "crn.json", dir.path) == kOk);
  const auto csv = slurp(dir.path / "crn.csv");
  CHECK(csv.find('\r') == std::string::npos);
  const auto rows = lines(csv);
  CHECK(rows.size() == 10002);
  CHECK(rows[0].rfind("t,E,q1,q2,energy,entropy,", 0) == 0);
  // entropy column nondecreasing
  std::size_t col = 0;
  {
    std::istringstream h(rows[0]);
    std::string name;
    for (std::size_t i = 0; std::getline(h, name, ','); ++i)
      if (name == "entropy") col = i;
  }
  double prev = -1e300;
  for (std::size_t r = 1; r < rows.size(); ++r) {
    std::istringstream in(rows[r]);
    std::string cell;
    for (std::size_t i = 0; i <= col; ++i) std::getline(in, cell, ',');
    const double v = std::stod(cell);
    CHECK(v >= prev - 1e-12);
    prev = v;
  }
}

TEST_CASE("zero span gives a header-only CSV") {
  TempDir dir("zero");
  CHECK(run(cmd_simulate, kConfigs / "zero_span.json", dir.path) == kOk);
  const auto rows = lines(slurp(dir.path / "zero_span.csv"));
  REQUIRE(rows.size() == 1);
  CHECK(rows[0].rfind("t,S,z,pi_m,", 0) == 0);
}

TEST_CASE("orthant exit keeps the partial CSV") {
  TempDir dir("exit");
  CHECK(run(cmd_simulate, kConfigs / "crn_reversed.json", dir.path) == kDomainExit);
  CHECK(lines(slurp(dir.path / "crn_reversed.csv")).size() > 2);
  CHECK(slurp(dir.path / "crn_reversed_simulate.txt").find("domain exit") != std::string::npos);
}

TEST_CASE("lyapunov exit codes") {
  TempDir dir("lyapunov");
  CHECK(run(cmd_lyapunov, kConfigs / "closed_loop.json", dir.path) == kOk);
  CHECK(slurp(dir.path / "closed_loop_lyapunov.txt").find("verdict: pass") != std::string::npos);
  CHECK(run(cmd_lyapunov, kConfigs / "lyapunov_wrong_minimum.json", dir.path) == kCheckFailed);
  CHECK(run(cmd_lyapunov, kConfigs / "ideal_gas.json", dir.path) == kConfigError);
}

TEST_CASE("sweeps run in parallel with identical output") {
  TempDir serial("sweep1");
  TempDir parallel("sweep4");
  CHECK(run(cmd_simulate, kConfigs / "mass_spring_sweep.json", serial.path, nullptr, 1) == kOk);
  CHECK(run(cmd_simulate, kConfigs / "mass_spring_sweep.json", parallel.path, nullptr, 4) == kOk);
  for (int i = 0; i < 6; ++i) {
    const std::string name = "mass_spring_sweep_k" + std::to_string(i) + ".csv";
    REQUIRE(fs::exists(serial.path / name));
    CHECK(slurp(serial.path / name) == slurp(parallel.path / name));
  }
}

TEST_CASE("export round-trips every scenario") {
  TempDir dir("export");
  for (const auto& info : scenario_catalog()) {
    CAPTURE(info.name);
    std::ostringstream o, e;
    const auto file = dir.path / (info.name + ".json");
    REQUIRE(cmd_export(info.name, file, o, e) == kOk);
    const auto jobs = load_jobs(file);
    REQUIRE(jobs.size() == 1);
    const auto& job = jobs[0];
    const auto direct = build_scenario(info.name);
    CHECK(job.x0 == direct.x0);
    Rng a(job.seed), b(0);
    const auto from_file = validate(job.built.system, job.samples, a);
    const auto from_scenario = validate(direct.system, 50, b);
    REQUIRE(from_file.checks.size() == from_scenario.checks.size());
    for (std::size_t i = 0; i < from_file.checks.size(); ++i) {
      CHECK(from_file.checks[i].name == from_scenario.checks[i].name);
      CHECK(from_file.checks[i].worst == from_scenario.checks[i].worst);
    }
  }
  std::ostringstream o, e;
  CHECK(cmd_export("nope", dir.path / "nope.json", o, e) == kConfigError);
}

TEST_CASE("CSV number format") {
  Trajectory t;
  t.state_names = {"x"};
  t.times = {0.1};
  t.states = {{1.0 / 3.0}};
  t.channels = {{"c", {-2.5e-300}}};
  std::ostringstream out;
  write_csv(t, out);
  CHECK(out.str() == "t,x,c\n0.10000000000000001,0.33333333333333331,-2.5e-300\n");
}

TEST_CASE("command line tool") {
  const std::string tool = PORTTHERMO_TOOL;
  auto status = [&](const std::string& args) {
    const int raw = std::system((tool + " " + args + " > /dev/null 2>&1").c_str());
    return WIFEXITED(raw) ? WEXITSTATUS(raw) : -1;
  };
  TempDir dir("tool");
  CHECK(status("list") == 0);
  CHECK(status("validate --config " + (kConfigs / "mass_spring.json").string() + " --out " + dir.path.string()) == 0);
  CHECK(status("validate --config " + (kConfigs / "corrupted_first_law.json").string() + " --out " +
               dir.path.string()) == 2);
  CHECK(status("validate") == 1);
  CHECK(status("frobnicate") == 1);
  CHECK(status("export crn --out " + dir.path.string()) == 0);
  CHECK(fs::exists(dir.path / "crn.json"));
}
