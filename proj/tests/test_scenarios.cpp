#include <cmath>
#include <numbers>
#include <set>
#include <vector>

#include "doctest.h"
#include "generators.hpp"
#include "oracle_values.hpp"
#include "portthermo/expr.hpp"
#include "portthermo/scenarios.hpp"

using namespace portthermo;

TEST_CASE("catalog order and lookup") {
  std::vector<std::string> names;
  for (const auto& info : scenario_catalog()) names.push_back(info.name);
  const std::vector<std::string> want{"ideal_gas",
                                      "ideal_gas_energy",
                                      "mass_spring",
                                      "controller",
                                      "damper",
                                      "controlled_mass_spring",
                                      "damped_mass_spring",
                                      "closed_loop_mass_spring",
                                      "crn",
                                      "heat_exchanger",
                                      "heat_compartments",
                                      "corrupted_first_law",
                                      "corrupted_second_law",
                                      "corrupted_nonhomogeneous"};
  CHECK(names == want);
  CHECK(scenario_info("crn").params.size() == 9);
  CHECK(scenario_info("corrupted_first_law").fixture);
  CHECK_THROWS_AS(scenario_info("nope"), PreconditionError);
  CHECK_THROWS_AS(build_scenario("nope"), PreconditionError);
}

TEST_CASE("parameter overrides are type checked") {
  CHECK_THROWS_AS(build_scenario("mass_spring", {{"q", 1.0}}), PreconditionError);
  CHECK_THROWS_AS(build_scenario("mass_spring", {{"k", std::string("2")}}), PreconditionError);
  CHECK_THROWS_AS(build_scenario("mass_spring", {{"k", -1.0}}), PreconditionError);
  CHECK_THROWS_AS(build_scenario("crn", {{"B", Matrix{{-1}, {0}}}}), PreconditionError);
  CHECK_THROWS_AS(build_scenario("crn", {{"B", Matrix{{-2}, {2}}}}), PreconditionError);
  CHECK_THROWS_AS(build_scenario("crn", {{"weights", Matrix{{0}}}}), PreconditionError);
  CHECK_THROWS_AS(build_scenario("crn", {{"q0", Matrix{{1, 2, 3}}}}), PreconditionError);
  const auto s = build_scenario("mass_spring", {{"k", 4.0}});
  CHECK(std::get<double>(s.params.at("k")) == 4.0);
  CHECK(std::get<double>(s.params.at("m")) == 1.0);
  CHECK(describe(Matrix{{1, 2}, {3, 4}}) == "[[1, 2], [3, 4]]");
}

TEST_CASE("every scenario validates, every fixture does not") {
  for (const auto& info : scenario_catalog()) {
    CAPTURE(info.name);
    const auto s = build_scenario(info.name);
    Rng rng(0);
    CHECK(validate(s.system, 50, rng).passed() == !info.fixture);
    CHECK(s.system.manifold().admissible(s.x0));
  }
}

TEST_CASE("oscillator period") {
  for (double k : {1.0, 4.0}) {
    const auto s = build_scenario("mass_spring", {{"k", k}});
    const double period = 2.0 * std::numbers::pi / std::sqrt(k);
    const auto traj = integrate(s.system, s.x0, {}, 0.0, period);
    CHECK(traj.states.back()[1] == doctest::Approx(1.0).epsilon(1e-9));
    CHECK(std::abs(traj.states.back()[2]) <= 1e-9);
  }
}

TEST_CASE("CRN rates match mass action") {
  const auto s = build_scenario("crn");
  const auto v = reduced_vector_field(s.system, s.x0, {});
  CHECK(v[0] == 0.0);
  CHECK(v[1] == doctest::Approx(oracle::kCrnVelocityA));
  CHECK(v[2] == doctest::Approx(oracle::kCrnVelocityB));
  const auto traj = integrate(s.system, s.x0, {}, 0.0, 1.0);
  CHECK(traj.channel("entropy_production").values.front() == doctest::Approx(oracle::kCrnEntropyRate));
}

TEST_CASE("CRN difference coordinate relaxes at rate 2 kappa") {
  for (double kappa : {0.5, 1.0, 2.0}) {
    const auto s = build_scenario("crn", {{"weights", Matrix{{kappa}}}});
    const auto traj = integrate(s.system, s.x0, {}, 0.0, 2.0);
    for (std::size_t i = 0; i < traj.size(); i += 1000) {
      const double diff = traj.states[i][1] - traj.states[i][2];
      CHECK(diff == doctest::Approx(1.5 * std::exp(-2.0 * kappa * traj.times[i])).epsilon(1e-9));
    }
  }
  const auto s = build_scenario("crn");
  const auto traj = integrate(s.system, s.x0, {}, 0.0, 10.0);
  CHECK(traj.states.back()[1] == doctest::Approx(oracle::kCrnQa10).epsilon(1e-10));
}

TEST_CASE("CRN chemical potential offsets shift the equilibrium") {
  const auto s = build_scenario("crn", {{"theta", Matrix{{0.0, std::log(2.0)}}}});
  const auto traj = integrate(s.system, s.x0, {}, 0.0, 20.0);
  // q_B / q_A -> exp(theta_A - theta_B) = 1/2 with q_A + q_B = 2.5
  CHECK(traj.states.back()[1] == doctest::Approx(2.5 * 2.0 / 3.0).epsilon(1e-8));
}

TEST_CASE("property: random reaction networks are thermodynamically consistent") {
  Rng rng(61);
  for (int trial = 0; trial < 20; ++trial) {
    const std::size_t species = 2 + static_cast<std::size_t>(rng.uniform() * 3);
    const auto net = gen::reaction_network(rng, species, 1 + static_cast<std::size_t>(rng.uniform() * 4));
    CrnSpec spec;
    spec.Z = net.Z;
    spec.B = net.B;
    spec.weights = net.weights;
    const auto sys = build_crn(spec);
    Rng vrng(static_cast<std::uint64_t>(trial));
    CHECK(validate(sys, 30, vrng).passed());
  }
}

TEST_CASE("heat exchanger conducts from hot to cold") {
  const auto s = build_scenario("heat_exchanger");
  const auto v = reduced_vector_field(s.system, s.x0, {});
  CHECK(v[0] < 0.0);
  CHECK(v[1] > 0.0);
  const auto same = reduced_vector_field(s.system, std::vector<double>{0.4, 0.4}, {});
  CHECK(same[0] == 0.0);
  CHECK(same[1] == 0.0);
  const auto traj = integrate(s.system, s.x0, {}, 0.0, 5.0);
  CHECK(traj.states.back()[0] == doctest::Approx(oracle::kHeatS1At5).epsilon(1e-9));
  CHECK(traj.states.back()[1] == doctest::Approx(oracle::kHeatS2At5).epsilon(1e-9));
  const auto report = monitor(s.system, traj);
  CHECK(report.max_energy_drift <= 1e-6);
  CHECK(report.min_entropy_production >= 0.0);
  const auto& E = traj.channel("energy").values;
  CHECK(E.front() == doctest::Approx(oracle::kHeatTotalEnergy));
  const auto late = integrate(s.system, s.x0, {}, 0.0, 40.0);
  CHECK(late.states.back()[0] == doctest::Approx(oracle::kHeatEquilibriumS).epsilon(1e-9));
}

TEST_CASE("heat compartments equalize") {
  const auto s = build_scenario("heat_compartments");
  const auto traj = integrate(s.system, s.x0, {}, 0.0, 30.0);
  CHECK(traj.states.back()[0] == doctest::Approx(1.5).epsilon(1e-8));
  CHECK(traj.states.back()[1] == doctest::Approx(1.5).epsilon(1e-8));
  const auto& S = traj.channel("entropy").values;
  for (std::size_t i = 1; i < S.size(); ++i) CHECK(S[i] >= S[i - 1] - 1e-12);
}

TEST_CASE("closed loop against an independent ODE solution") {
  const auto s = build_scenario("closed_loop_mass_spring");
  const auto traj = integrate(s.system, s.x0, {}, 0.0, 10.0);
  const auto& x = traj.states.back();
  CHECK(x[1] == doctest::Approx(oracle::kLoopZ10).epsilon(1e-9));
  CHECK(x[2] == doctest::Approx(oracle::kLoopPi10).epsilon(1e-8));
  CHECK(x[4] == doctest::Approx(oracle::kLoopQc10).epsilon(1e-9));
  CHECK(x[5] == doctest::Approx(oracle::kLoopSd10).epsilon(1e-9));
  CHECK(traj.channel("energy").values.front() == doctest::Approx(oracle::kLoopInitialEnergy));
}

TEST_CASE("closed loop with q_c* = -2 settles where q_c - z = 0 allows") {
  const auto s = build_scenario("closed_loop_mass_spring", {{"qc_star", std::string("-2")}});
  const auto traj = integrate(s.system, s.x0, {}, 0.0, 60.0);
  CHECK(traj.states.back()[1] == doctest::Approx(oracle::kLoopZLimitQcMinus2).epsilon(1e-6));
}

TEST_CASE("damper absorbs the oscillator energy") {
  const auto s = build_scenario("damped_mass_spring");
  const auto traj = integrate(s.system, s.x0, {}, 0.0, 60.0);
  CHECK(traj.states.back().back() == doctest::Approx(oracle::kDampedSdLimit).epsilon(1e-8));
  CHECK(monitor(s.system, traj, s.tracked()).max_energy_drift <= 1e-6);
}

TEST_CASE("expression helpers") {
  const auto ms = build_mass_spring(1.0, 1.0);
  const auto c = conserved_from_expression(ms, "zpi", "z + a*pi_m", {{"a", 2.0}});
  CHECK(c.side() == Side::Energy);
  CHECK(c.field().names() == std::vector<std::string>{"S", "z", "pi_m"});
  const auto v = candidate_from_expression(ms, "V", "(pi_m - 1)^2 + z^2", {{"z", 0.0}, {"pi_m", 1.0}});
  CHECK(v.V.names() == std::vector<std::string>{"z", "pi_m"});
  CHECK(v.equilibrium == std::vector<double>{0.0, 1.0});
  CHECK_THROWS_AS(candidate_from_expression(ms, "V", "z^2", {}), PreconditionError);
  CHECK_THROWS_AS(candidate_from_expression(ms, "V", "2", {}), PreconditionError);
  CHECK_THROWS_AS(expression_field("w + 1", {"z"}), expr::UnboundVariable);
}

TEST_CASE("tracked channels follow the scenario analyses") {
  const auto s = build_scenario("crn");
  std::set<std::string> names;
  for (const auto& t : s.tracked()) names.insert(t.name);
  CHECK(names.count("total_q") == 1);
  CHECK(names.count("availability") == 1);
}
