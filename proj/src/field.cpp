#include "portthermo/field.hpp"

#include <algorithm>

namespace portthermo {

ScalarField embed(const ScalarField& f, const std::vector<std::string>& target) {
  std::vector<std::size_t> index;
  index.reserve(f.arity());
  for (const auto& name : f.names()) {
    auto it = std::find(target.begin(), target.end(), name);
    if (it == target.end()) throw PreconditionError("cannot embed field: coordinate '" + name + "' not found");
    index.push_back(static_cast<std::size_t>(it - target.begin()));
  }
  return ScalarField(target, [f, index](auto x) {
    using N = typename decltype(x)::value_type;
    std::vector<N> sub;
    sub.reserve(index.size());
    for (auto i : index) sub.push_back(x[i]);
    return f(std::span<const N>(sub));
  });
}

ScalarField fix_last(const ScalarField& f, double value) {
  if (f.arity() == 0) throw PreconditionError("fix_last on a nullary field");
  std::vector<std::string> names(f.names().begin(), f.names().end() - 1);
  return ScalarField(std::move(names), [f, value](auto x) {
    using N = typename decltype(x)::value_type;
    std::vector<N> full(x.begin(), x.end());
    full.emplace_back(value);
    return f(std::span<const N>(full));
  });
}

}  // namespace portthermo
