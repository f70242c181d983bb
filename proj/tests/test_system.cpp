#include <cmath>
#include <vector>

#include "doctest.h"
#include "generators.hpp"
#include "portthermo/scenarios.hpp"
#include "portthermo/system.hpp"

using namespace portthermo;

namespace {

bool flagged(const ValidationReport& r, std::string_view name) { return !r.check(name).passed; }

}  // namespace

TEST_CASE("mass-spring outputs and Hamiltonian") {
  const auto sys = build_mass_spring(2.0, 0.5);
  const std::vector<double> base{0.0, 1.0, 0.5};
  const auto pt = lift(sys.manifold(), base);
  const std::vector<double> u{3.0};
  CHECK(power_output(sys, pt, u)[0] == doctest::Approx(1.0));
  CHECK(entropy_output(sys, pt, u)[0] == 0.0);
  const auto flat = pt.flat();
  const double pz = flat[6], ppi = flat[7];
  const double expected = pz * 0.5 / 0.5 - ppi * 2.0 * 1.0 + (ppi - 0.5 / 0.5) * 3.0;
  CHECK(sys.hamiltonian(std::span<const double>(flat), std::span<const double>(u)) == doctest::Approx(expected));
  CHECK(sys.hamiltonian_field(u)(flat) == doctest::Approx(expected));
  CHECK(sys.total_energy(flat) == doctest::Approx(1.25));
}

TEST_CASE("system constructor preconditions") {
  const auto ms = build_mass_spring(1.0, 1.0);
  const ScalarField short_K({"a"}, [](auto x) { return x[0]; });
  CHECK_THROWS_AS(PortThermoSystem("bad", ms.manifold(), short_K), PreconditionError);
  auto names = ms.manifold().phase_names();
  const ScalarField K(names, [](auto x) { return x[6]; });
  names.push_back("u");
  const ScalarField Kc(names, [](auto x) { return x[7]; });
  CHECK_THROWS_AS(PortThermoSystem("dup", ms.manifold(), K, {{"u", Kc}, {"u", Kc}}), PreconditionError);
  CHECK_THROWS_AS(PortThermoSystem("bad", ms.manifold(), K, {{"u", K}}), PreconditionError);
  CHECK_THROWS_AS(PortThermoSystem("kinds", ms.manifold(), K, {}, {SlotKind::Plain}), PreconditionError);
  const std::vector<double> wrong_u{1.0, 2.0};
  const auto flat = lift(ms.manifold(), std::vector<double>{0.0, 0.0, 0.0}).flat();
  CHECK_THROWS_AS(ms.hamiltonian(std::span<const double>(flat), std::span<const double>(wrong_u)), PreconditionError);
}

TEST_CASE("outputs refuse points off the submanifold") {
  const auto sys = build_mass_spring(1.0, 1.0);
  const PhasePoint off({5.0, 0.0, {1.0, 0.0}}, {-1.0, 0.0, {1.0, 0.0}});
  CHECK_THROWS_AS(power_output(sys, off, std::vector<double>{0.0}), PreconditionError);
}

TEST_CASE("corrupted fixtures fail the right checks") {
  Rng rng(0);
  const auto first = validate(build_scenario("corrupted_first_law").system, 50, rng);
  CHECK_FALSE(first.passed());
  CHECK(flagged(first, "first_law"));
  CHECK_FALSE(flagged(first, "euler_internal"));
  CHECK_FALSE(flagged(first, "second_law"));

  const auto second = validate(build_scenario("corrupted_second_law").system, 50, rng);
  CHECK(flagged(second, "second_law"));
  CHECK_FALSE(flagged(second, "first_law"));
  CHECK_FALSE(flagged(second, "restriction"));

  const auto nonhom = validate(build_scenario("corrupted_nonhomogeneous").system, 50, rng);
  CHECK(flagged(nonhom, "euler_internal"));
  CHECK(flagged(nonhom, "homogeneity"));
}

TEST_CASE("parallel validation reproduces the serial report") {
  for (const char* name : {"crn", "closed_loop_mass_spring", "corrupted_second_law"}) {
    const auto sys = build_scenario(name).system;
    Rng a(7);
    Rng b(7);
    const auto serial = validate(sys, 50, a, {.tolerances = {}, .jobs = 1});
    const auto parallel = validate(sys, 50, b, {.tolerances = {}, .jobs = 4});
    REQUIRE(serial.checks.size() == parallel.checks.size());
    for (std::size_t i = 0; i < serial.checks.size(); ++i) {
      CHECK(serial.checks[i].worst == parallel.checks[i].worst);
      CHECK(serial.checks[i].worst_sample == parallel.checks[i].worst_sample);
    }
  }
}

TEST_CASE("validation input checks") {
  const auto sys = build_mass_spring(1.0, 1.0);
  CHECK_THROWS_AS(validate(sys, {}, {}), PreconditionError);
  CHECK_THROWS_AS(validate(sys, {{0.0, 0.0, 0.0}}, {{1.0, 2.0}}), PreconditionError);
  const auto r = validate(sys, {{0.0, 0.3, -0.2}}, {});
  CHECK(r.passed());
  CHECK_THROWS_AS((void)r.check("nonexistent"), PreconditionError);
}

TEST_CASE("equilibrium residual vanishes at CRN equilibria only") {
  const auto sys = build_scenario("crn").system;
  CHECK(equilibrium_residual(sys, std::vector<double>{1.0, 1.25, 1.25}) <= 1e-14);
  CHECK(equilibrium_residual(sys, std::vector<double>{1.0, 2.0, 0.5}) > 0.1);
}

TEST_CASE("property: K^a restricted to lifts vanishes for every scenario") {
  Rng rng(8);
  for (const auto& info : scenario_catalog()) {
    if (info.fixture) continue;
    const auto sys = build_scenario(info.name).system;
    for (const auto& base : sample_base_points(sys.manifold(), 10, rng)) {
      const auto phase = sys.manifold().lift_flat(std::span<const double>(base), gen::nonzero_scale(rng));
      CHECK(std::abs(sys.internal()(phase)) <= 1e-9);
    }
  }
}
