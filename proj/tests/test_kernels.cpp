#include <cmath>
#include <stdexcept>
#include <vector>

#include "doctest.h"
#include "generators.hpp"
#include "portthermo/kernels.hpp"

using namespace portthermo;

TEST_CASE("job counts") {
  CHECK(kernels::available_threads() >= 1);
  CHECK(kernels::effective_jobs(0) == kernels::available_threads());
  CHECK(kernels::effective_jobs(-3) == kernels::available_threads());
  CHECK(kernels::effective_jobs(3) == 3);
}

TEST_CASE("property: parallel map equals the serial reference") {
  Rng rng(71);
  for (int trial = 0; trial < 20; ++trial) {
    const auto count = static_cast<std::size_t>(rng.uniform() * 2000);
    const auto data = gen::normal_vector(rng, count);
    auto f = [&](std::size_t i) { return std::sin(data[i]) * std::exp(-data[i] * data[i]) + static_cast<double>(i); };
    const auto serial = kernels::map_indexed(count, 1, f);
    for (int jobs : {2, 4, 0}) CHECK(kernels::map_indexed(count, jobs, f) == serial);
  }
}

TEST_CASE("the lowest failing index is rethrown") {
  auto f = [](std::size_t i) -> int {
    if (i == 17 || i == 400) throw std::runtime_error(std::to_string(i));
    return static_cast<int>(i);
  };
  for (int jobs : {1, 4}) {
    try {
      (void)kernels::map_indexed(1000, jobs, f);
      FAIL("expected an exception");
    } catch (const std::runtime_error& e) {
      CHECK(std::string(e.what()) == "17");
    }
  }
}

TEST_CASE("empty and non-default-constructible results") {
  CHECK(kernels::map_indexed(0, 4, [](std::size_t) { return 1; }).empty());
  struct NoDefault {
    explicit NoDefault(std::size_t v) : value(v) {}
    std::size_t value;
  };
  const auto out = kernels::map_indexed(10, 3, [](std::size_t i) { return NoDefault(i * i); });
  CHECK(out[9].value == 81);
}
