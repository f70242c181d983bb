#pragma once

// Data-parallel map over sample indices. With jobs == 1 the loop runs
// serially and is the reference the parallel path is tested against; with
// jobs > 1 it runs under OpenMP. Results land in index order and the first
// failing index (lowest) is rethrown, so both paths are deterministic.

#include <cstddef>
#include <exception>
#include <optional>
#include <vector>

namespace portthermo::kernels {

/// Number of worker threads available to the parallel path.
int available_threads();

/// Job count to use for a request; 0 or less means available_threads().
int effective_jobs(int requested);

namespace detail {
void run_parallel(std::size_t count, int jobs, void (*body)(std::size_t, void*), void* ctx);
}

template <class F>
auto map_indexed(std::size_t count, int jobs, F f) -> std::vector<decltype(f(std::size_t{}))> {
  using R = decltype(f(std::size_t{}));
  std::vector<std::optional<R>> slots(count);
  std::vector<std::exception_ptr> errors(count);
  struct Ctx {
    F* f;
    std::vector<std::optional<R>>* slots;
    std::vector<std::exception_ptr>* errors;
  } ctx{&f, &slots, &errors};
  auto body = [](std::size_t i, void* raw) {
    auto* c = static_cast<Ctx*>(raw);
    try {
      (*c->slots)[i].emplace((*c->f)(i));
    } catch (...) {
      (*c->errors)[i] = std::current_exception();
    }
  };
  if (effective_jobs(jobs) <= 1) {
    for (std::size_t i = 0; i < count; ++i) body(i, &ctx);
  } else {
    detail::run_parallel(count, effective_jobs(jobs), body, &ctx);
  }
  for (std::size_t i = 0; i < count; ++i)
    if (errors[i]) std::rethrow_exception(errors[i]);
  std::vector<R> out;
  out.reserve(count);
  for (auto& s : slots) out.push_back(std::move(*s));
  return out;
}

}  // namespace portthermo::kernels
