#pragma once

// Coordinates on the cotangent bundle T*Q (minus its zero section) of the
// extensive variables q^e = (E, S, q), and Liouville submanifolds given by
// a generating function in energy or entropy representation.

#include <cstddef>
#include <functional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "portthermo/field.hpp"
#include "portthermo/random.hpp"

namespace portthermo {

enum class Representation { Energy, Entropy };

std::string_view to_string(Representation r);

struct ExtensivePoint {
  double E = 0.0;
  double S = 0.0;
  std::vector<double> q;
};

struct CoextensivePoint {
  double pE = 0.0;
  double pS = 0.0;
  std::vector<double> p;

  [[nodiscard]] bool is_zero() const;
};

/// Slot layout of a flat phase vector (E, S, q_1..q_n, p_E, p_S, p_1..p_n).
struct PhaseLayout {
  std::size_t n = 0;

  static constexpr std::size_t E = 0;
  static constexpr std::size_t S = 1;
  [[nodiscard]] constexpr std::size_t size() const { return 2 * n + 4; }
  [[nodiscard]] constexpr std::size_t q(std::size_t i) const { return 2 + i; }
  [[nodiscard]] constexpr std::size_t pE() const { return n + 2; }
  [[nodiscard]] constexpr std::size_t pS() const { return n + 3; }
  [[nodiscard]] constexpr std::size_t p(std::size_t i) const { return n + 4 + i; }
  /// The co-extensive slots p_E, p_S, p_1..p_n.
  [[nodiscard]] std::vector<std::size_t> momentum_slots() const;
};

/// A point of T*Q minus the zero section.
class PhasePoint {
 public:
  PhasePoint(ExtensivePoint x, CoextensivePoint px);

  static PhasePoint from_flat(std::span<const double> flat);

  [[nodiscard]] const ExtensivePoint& x() const { return x_; }
  [[nodiscard]] const CoextensivePoint& px() const { return px_; }
  [[nodiscard]] std::size_t n() const { return x_.q.size(); }
  [[nodiscard]] std::vector<double> flat() const;

 private:
  ExtensivePoint x_;
  CoextensivePoint px_;
};

/// Admissible set of base points plus the box random samples are drawn from.
struct AdmissibleDomain {
  std::function<bool(std::span<const double>)> contains;
  std::string description;
  std::vector<std::pair<double, double>> sample_box;

  static AdmissibleDomain everywhere(std::vector<std::pair<double, double>> box);
  /// Open positive orthant in the listed base slots.
  static AdmissibleDomain positive(std::vector<std::size_t> slots,
                                   std::vector<std::pair<double, double>> box,
                                   std::string description);
};

/// Ordered (name, value) pairs.
struct NamedValues {
  std::vector<std::string> names;
  std::vector<double> values;

  [[nodiscard]] double at(std::string_view name) const;
  [[nodiscard]] std::size_t size() const { return names.size(); }
};

/// A Liouville submanifold given by its generating function: Ē(S, q) in
/// energy representation or S̄(E, q) in entropy representation.
class StateManifold {
 public:
  StateManifold(Representation representation, ScalarField generator, std::string energy_name,
                std::string entropy_name, std::vector<std::string> q_names, AdmissibleDomain domain,
                std::vector<std::string> intensive_labels = {});

  [[nodiscard]] Representation representation() const { return rep_; }
  [[nodiscard]] const ScalarField& generator() const { return generator_; }
  [[nodiscard]] std::size_t n() const { return q_names_.size(); }
  [[nodiscard]] PhaseLayout layout() const { return PhaseLayout{n()}; }
  [[nodiscard]] const std::string& energy_name() const { return energy_name_; }
  [[nodiscard]] const std::string& entropy_name() const { return entropy_name_; }
  [[nodiscard]] const std::vector<std::string>& q_names() const { return q_names_; }
  [[nodiscard]] const AdmissibleDomain& domain() const { return domain_; }
  /// Labels of the intensive ratios (first the temperature-like entry).
  [[nodiscard]] const std::vector<std::string>& intensive_labels() const { return labels_; }

  /// (S, q) for energy representation, (E, q) for entropy representation.
  [[nodiscard]] std::vector<std::string> base_names() const;
  /// E, S, q..., p_E, p_S, p_q...
  [[nodiscard]] std::vector<std::string> phase_names() const;

  [[nodiscard]] bool admissible(std::span<const double> base) const;
  void require_admissible(std::span<const double> base) const;

  /// Base coordinates of an extensive point.
  [[nodiscard]] std::vector<double> base_of(const ExtensivePoint& x) const;

  /// Flat lifted phase vector over number type N. Differentiating this in
  /// `base` and `scale` spans the tangent space of the submanifold.
  template <class N>
  std::vector<N> lift_flat(std::span<const N> base, const N& scale) const;

 private:
  Representation rep_;
  ScalarField generator_;
  std::string energy_name_;
  std::string entropy_name_;
  std::vector<std::string> q_names_;
  AdmissibleDomain domain_;
  std::vector<std::string> labels_;
};

/// Tolerance under which a point counts as lying on the submanifold.
inline constexpr double kMembershipTolerance = 1e-8;

PhasePoint lift(const StateManifold& manifold, std::span<const double> base, double scale = 1.0);
double membership_residual(const StateManifold& manifold, const PhasePoint& pt);
NamedValues intensives(const StateManifold& manifold, const PhasePoint& pt);
PhasePoint rescale(const PhasePoint& pt, double lambda);

/// α = p_E dE + p_S dS + p dq at `phase`, applied to `tangent` (both flat).
double liouville_form(std::span<const double> phase, std::span<const double> tangent);

/// Tangent vectors of the lifted submanifold at lift(base, scale): one per
/// base coordinate plus one along the scale, each in flat phase slots.
std::vector<std::vector<double>> lifted_tangent_basis(const StateManifold& manifold,
                                                      std::span<const double> base, double scale);

/// max |α(v)| over lifted_tangent_basis.
double liouville_residual(const StateManifold& manifold, std::span<const double> base, double scale);

/// Uniform draws from the sample box, rejected until admissible.
std::vector<std::vector<double>> sample_base_points(const StateManifold& manifold, std::size_t count,
                                                    Rng& rng);

// ---- template definitions -------------------------------------------------

template <class N>
std::vector<N> StateManifold::lift_flat(std::span<const N> base, const N& scale) const {
  if (base.size() != n() + 1) throw PreconditionError("base point has wrong dimension");
  {
    std::vector<double> plain;
    plain.reserve(base.size());
    for (const auto& b : base) plain.push_back(ad::primal(b));
    require_admissible(plain);
  }
  if (ad::primal(scale) == 0.0) throw PreconditionError("lift scale must be nonzero");
  const auto vg = value_gradient(generator_, base);
  const PhaseLayout lay = layout();
  std::vector<N> out(lay.size(), N(0.0));
  for (std::size_t i = 0; i < n(); ++i) {
    out[lay.q(i)] = base[1 + i];
    out[lay.p(i)] = scale * vg.gradient[1 + i];
  }
  if (rep_ == Representation::Energy) {
    out[PhaseLayout::E] = vg.value;
    out[PhaseLayout::S] = base[0];
    out[lay.pE()] = -scale;
    out[lay.pS()] = scale * vg.gradient[0];
  } else {
    out[PhaseLayout::E] = base[0];
    out[PhaseLayout::S] = vg.value;
    out[lay.pE()] = scale * vg.gradient[0];
    out[lay.pS()] = -scale;
  }
  return out;
}

}  // namespace portthermo
