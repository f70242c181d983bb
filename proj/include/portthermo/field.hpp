#pragma once

// Scalar fields over named coordinates, evaluable over doubles and over
// nested dual numbers, plus the gradient helpers built on them.

#include <cstddef>
#include <functional>
#include <memory>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "portthermo/ad.hpp"
#include "portthermo/errors.hpp"

namespace portthermo {

using ad::D1;
using ad::D2;
using ad::D3;

/// Deepest number type a ScalarField can be evaluated over. Gradients are
/// available for fields evaluated over double, D1 and D2.
inline constexpr int kMaxFieldDepth = 3;

template <class N>
inline constexpr bool is_field_number_v = ad::depth_v<N> <= kMaxFieldDepth;

/// A deterministic real-valued rule over a fixed list of named
/// coordinates. Construct from a generic callable taking
/// `std::span<const N>` and returning `N`; it is instantiated once per
/// supported number type.
class ScalarField {
 public:
  ScalarField() = default;

  template <class F>
  ScalarField(std::vector<std::string> names, F rule)
      : impl_(std::make_shared<Impl>(Impl{
            std::move(names),
            [rule](std::span<const double> x) -> double { return rule(x); },
            [rule](std::span<const D1> x) -> D1 { return rule(x); },
            [rule](std::span<const D2> x) -> D2 { return rule(x); },
            [rule](std::span<const D3> x) -> D3 { return rule(x); },
        })) {}

  static ScalarField constant(std::vector<std::string> names, double c) {
    return ScalarField(std::move(names), [c](auto x) {
      using N = typename decltype(x)::value_type;
      return N(c);
    });
  }

  [[nodiscard]] bool empty() const { return impl_ == nullptr; }
  [[nodiscard]] std::size_t arity() const { return impl_ ? impl_->names.size() : 0; }
  [[nodiscard]] const std::vector<std::string>& names() const { return impl_->names; }

  template <class N>
  N operator()(std::span<const N> x) const {
    static_assert(is_field_number_v<N>, "field evaluated over too deep a dual type");
    if (!impl_) throw PreconditionError("evaluating an empty scalar field");
    if (x.size() != impl_->names.size())
      throw PreconditionError("scalar field arity mismatch: expected " +
                              std::to_string(impl_->names.size()) + ", got " +
                              std::to_string(x.size()));
    if constexpr (std::is_same_v<N, double>) return impl_->real(x);
    else if constexpr (std::is_same_v<N, D1>) return impl_->d1(x);
    else if constexpr (std::is_same_v<N, D2>) return impl_->d2(x);
    else return impl_->d3(x);
  }

  template <class N>
  N operator()(const std::vector<N>& x) const {
    return (*this)(std::span<const N>(x));
  }

 private:
  struct Impl {
    std::vector<std::string> names;
    std::function<double(std::span<const double>)> real;
    std::function<D1(std::span<const D1>)> d1;
    std::function<D2(std::span<const D2>)> d2;
    std::function<D3(std::span<const D3>)> d3;
  };
  std::shared_ptr<const Impl> impl_;
};

template <class N>
struct ValueGradient {
  N value;
  std::vector<N> gradient;
};

/// Value and gradient of `f` at `x` (over number type N) by forward mode
/// with one seed per active slot. `active` lists the slots to
/// differentiate; empty means all. Inactive slots get a zero partial.
template <class N>
ValueGradient<N> value_gradient(const ScalarField& f, std::span<const N> x,
                                std::span<const std::size_t> active = {}) {
  if constexpr (ad::depth_v<N> + 1 > kMaxFieldDepth) {
    throw PreconditionError("derivative nesting deeper than supported");
  } else {
    using DN = ad::Dual<N>;
    const std::size_t n = x.size();
    std::vector<DN> seeded;
    seeded.reserve(n);
    std::vector<std::size_t> slot_of(n, n);
    if (active.empty()) {
      for (std::size_t i = 0; i < n; ++i) slot_of[i] = i;
    } else {
      for (std::size_t k = 0; k < active.size(); ++k) slot_of.at(active[k]) = k;
    }
    const std::size_t count = active.empty() ? n : active.size();
    for (std::size_t i = 0; i < n; ++i) {
      if (slot_of[i] < n) seeded.push_back(ad::variable(x[i], slot_of[i], count));
      else seeded.emplace_back(x[i]);
    }
    DN r = f(std::span<const DN>(seeded));
    ValueGradient<N> out{std::move(r.v), std::vector<N>(n, N(0.0))};
    if (!r.d.empty()) {
      for (std::size_t i = 0; i < n; ++i)
        if (slot_of[i] < n) out.gradient[i] = r.d[slot_of[i]];
    }
    return out;
  }
}

template <class N>
std::vector<N> gradient_of(const ScalarField& f, std::span<const N> x,
                           std::span<const std::size_t> active = {}) {
  return value_gradient(f, x, active).gradient;
}

/// Single partial derivative ∂f/∂x_slot.
template <class N>
N partial_of(const ScalarField& f, std::span<const N> x, std::size_t slot) {
  const std::size_t one[1] = {slot};
  return value_gradient(f, x, std::span<const std::size_t>(one)).gradient[slot];
}

/// Re-expresses `f` over a larger coordinate list: each of f's names must
/// appear in `target`; the remaining target coordinates are ignored.
ScalarField embed(const ScalarField& f, const std::vector<std::string>& target);

/// Fixes the last coordinate of `f` to `value`, returning a field over the
/// remaining coordinates.
ScalarField fix_last(const ScalarField& f, double value);

}  // namespace portthermo
