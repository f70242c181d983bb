#include "portthermo/core.hpp"

#include <algorithm>
#include <cmath>

namespace portthermo {

std::string_view to_string(Representation r) {
  return r == Representation::Energy ? "energy" : "entropy";
}

bool CoextensivePoint::is_zero() const {
  if (pE != 0.0 || pS != 0.0) return false;
  return std::all_of(p.begin(), p.end(), [](double v) { return v == 0.0; });
}

std::vector<std::size_t> PhaseLayout::momentum_slots() const {
  std::vector<std::size_t> slots;
  slots.reserve(n + 2);
  for (std::size_t i = pE(); i < size(); ++i) slots.push_back(i);
  return slots;
}

PhasePoint::PhasePoint(ExtensivePoint x, CoextensivePoint px) : x_(std::move(x)), px_(std::move(px)) {
  if (x_.q.size() != px_.p.size())
    throw PreconditionError("extensive and co-extensive parts have different dimensions");
  if (px_.is_zero()) throw PreconditionError("co-extensive vector is zero (zero section excluded)");
}

PhasePoint PhasePoint::from_flat(std::span<const double> flat) {
  if (flat.size() < 4 || flat.size() % 2 != 0) throw PreconditionError("flat phase vector has bad size");
  const PhaseLayout lay{(flat.size() - 4) / 2};
  ExtensivePoint x{flat[PhaseLayout::E], flat[PhaseLayout::S], {}};
  CoextensivePoint px{flat[lay.pE()], flat[lay.pS()], {}};
  for (std::size_t i = 0; i < lay.n; ++i) {
    x.q.push_back(flat[lay.q(i)]);
    px.p.push_back(flat[lay.p(i)]);
  }
  return PhasePoint(std::move(x), std::move(px));
}

std::vector<double> PhasePoint::flat() const {
  const PhaseLayout lay{n()};
  std::vector<double> out(lay.size());
  out[PhaseLayout::E] = x_.E;
  out[PhaseLayout::S] = x_.S;
  out[lay.pE()] = px_.pE;
  out[lay.pS()] = px_.pS;
  for (std::size_t i = 0; i < lay.n; ++i) {
    out[lay.q(i)] = x_.q[i];
    out[lay.p(i)] = px_.p[i];
  }
  return out;
}

AdmissibleDomain AdmissibleDomain::everywhere(std::vector<std::pair<double, double>> box) {
  return AdmissibleDomain{[](std::span<const double>) { return true; }, "all of R^n", std::move(box)};
}

AdmissibleDomain AdmissibleDomain::positive(std::vector<std::size_t> slots,
                                            std::vector<std::pair<double, double>> box,
                                            std::string description) {
  return AdmissibleDomain{[slots](std::span<const double> base) {
                            return std::all_of(slots.begin(), slots.end(),
                                               [&](std::size_t s) { return base[s] > 0.0; });
                          },
                          std::move(description), std::move(box)};
}

double NamedValues::at(std::string_view name) const {
  for (std::size_t i = 0; i < names.size(); ++i)
    if (names[i] == name) return values[i];
  throw PreconditionError("no value named '" + std::string(name) + "'");
}

StateManifold::StateManifold(Representation representation, ScalarField generator,
                             std::string energy_name, std::string entropy_name,
                             std::vector<std::string> q_names, AdmissibleDomain domain,
                             std::vector<std::string> intensive_labels)
    : rep_(representation),
      generator_(std::move(generator)),
      energy_name_(std::move(energy_name)),
      entropy_name_(std::move(entropy_name)),
      q_names_(std::move(q_names)),
      domain_(std::move(domain)),
      labels_(std::move(intensive_labels)) {
  if (generator_.arity() != q_names_.size() + 1)
    throw PreconditionError("generator arity must be n + 1");
  if (!domain_.contains) domain_.contains = [](std::span<const double>) { return true; };
  if (!domain_.sample_box.empty() && domain_.sample_box.size() != q_names_.size() + 1)
    throw PreconditionError("sample box must have one interval per base coordinate");
  if (labels_.empty()) {
    const bool energy = rep_ == Representation::Energy;
    labels_.push_back(energy ? "T" : "1/T");
    for (const auto& q : q_names_)
      labels_.push_back("p_" + q + (energy ? "/(-p_" + energy_name_ + ")" : "/(-p_" + entropy_name_ + ")"));
  }
  if (labels_.size() != q_names_.size() + 1)
    throw PreconditionError("need one intensive label per base coordinate");
}

std::vector<std::string> StateManifold::base_names() const {
  std::vector<std::string> names;
  names.reserve(n() + 1);
  names.push_back(rep_ == Representation::Energy ? entropy_name_ : energy_name_);
  names.insert(names.end(), q_names_.begin(), q_names_.end());
  return names;
}

std::vector<std::string> StateManifold::phase_names() const {
  std::vector<std::string> names;
  names.reserve(2 * n() + 4);
  names.push_back(energy_name_);
  names.push_back(entropy_name_);
  names.insert(names.end(), q_names_.begin(), q_names_.end());
  names.push_back("p_" + energy_name_);
  names.push_back("p_" + entropy_name_);
  for (const auto& q : q_names_) names.push_back("p_" + q);
  return names;
}

bool StateManifold::admissible(std::span<const double> base) const {
  if (base.size() != n() + 1) return false;
  if (!std::all_of(base.begin(), base.end(), [](double v) { return std::isfinite(v); })) return false;
  return domain_.contains(base);
}

void StateManifold::require_admissible(std::span<const double> base) const {
  if (!admissible(base)) throw DomainError("base point outside admissible domain (" + domain_.description + ")");
}

std::vector<double> StateManifold::base_of(const ExtensivePoint& x) const {
  if (x.q.size() != n()) throw PreconditionError("extensive point has wrong dimension");
  std::vector<double> base;
  base.reserve(n() + 1);
  base.push_back(rep_ == Representation::Energy ? x.S : x.E);
  base.insert(base.end(), x.q.begin(), x.q.end());
  return base;
}

PhasePoint lift(const StateManifold& manifold, std::span<const double> base, double scale) {
  return PhasePoint::from_flat(manifold.lift_flat(base, scale));
}

namespace {

// Sine of the angle between the lines spanned by a and b.
double line_deviation(std::span<const double> a, std::span<const double> b) {
  double aa = 0.0, bb = 0.0, ab = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    aa += a[i] * a[i];
    bb += b[i] * b[i];
    ab += a[i] * b[i];
  }
  if (aa == 0.0 || bb == 0.0) return 1.0;
  // |a - (a.b̂) b̂| / |a|
  double r2 = 0.0;
  const double c = ab / bb;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double e = a[i] - c * b[i];
    r2 += e * e;
  }
  return std::min(1.0, std::sqrt(r2 / aa));
}

}  // namespace

double membership_residual(const StateManifold& manifold, const PhasePoint& pt) {
  if (pt.n() != manifold.n()) throw PreconditionError("phase point dimension does not match manifold");
  const auto base = manifold.base_of(pt.x());
  const auto ref = manifold.lift_flat(std::span<const double>(base), 1.0);
  const auto flat = pt.flat();
  const PhaseLayout lay = manifold.layout();
  const double constraint = manifold.representation() == Representation::Energy
                                ? std::abs(flat[PhaseLayout::E] - ref[PhaseLayout::E])
                                : std::abs(flat[PhaseLayout::S] - ref[PhaseLayout::S]);
  const std::span<const double> p_pt(flat.data() + lay.pE(), lay.n + 2);
  const std::span<const double> p_ref(ref.data() + lay.pE(), lay.n + 2);
  return std::max(constraint, line_deviation(p_pt, p_ref));
}

NamedValues intensives(const StateManifold& manifold, const PhasePoint& pt) {
  const bool energy = manifold.representation() == Representation::Energy;
  const double denom = energy ? -pt.px().pE : -pt.px().pS;
  if (denom == 0.0)
    throw GaugeError(energy ? "p_E = 0: point not representable in the energy gauge"
                            : "p_S = 0: point not representable in the entropy gauge");
  const double res = membership_residual(manifold, pt);
  if (!(res <= kMembershipTolerance))
    throw PreconditionError("intensives requested at a point off the submanifold (residual " +
                            std::to_string(res) + ")");
  NamedValues out;
  out.names = manifold.intensive_labels();
  out.values.push_back((energy ? pt.px().pS : pt.px().pE) / denom);
  for (double pi : pt.px().p) out.values.push_back(pi / denom);
  return out;
}

PhasePoint rescale(const PhasePoint& pt, double lambda) {
  if (lambda == 0.0) throw PreconditionError("rescale factor must be nonzero");
  CoextensivePoint px = pt.px();
  px.pE *= lambda;
  px.pS *= lambda;
  for (auto& v : px.p) v *= lambda;
  return PhasePoint(pt.x(), std::move(px));
}

double liouville_form(std::span<const double> phase, std::span<const double> tangent) {
  if (phase.size() != tangent.size() || phase.size() < 4 || phase.size() % 2 != 0)
    throw PreconditionError("liouville_form: bad vector sizes");
  const std::size_t half = phase.size() / 2;
  double acc = 0.0;
  for (std::size_t i = 0; i < half; ++i) acc += phase[half + i] * tangent[i];
  return acc;
}

std::vector<std::vector<double>> lifted_tangent_basis(const StateManifold& manifold,
                                                      std::span<const double> base, double scale) {
  const std::size_t k = base.size() + 1;  // base coordinates plus scale
  std::vector<D1> vars;
  vars.reserve(base.size());
  for (std::size_t i = 0; i < base.size(); ++i) vars.push_back(ad::variable(base[i], i, k));
  const D1 s = ad::variable(scale, base.size(), k);
  const auto lifted = manifold.lift_flat(std::span<const D1>(vars), s);
  std::vector<std::vector<double>> basis(k, std::vector<double>(lifted.size(), 0.0));
  for (std::size_t j = 0; j < lifted.size(); ++j)
    for (std::size_t t = 0; t < k; ++t) basis[t][j] = lifted[j].partial(t);
  return basis;
}

double liouville_residual(const StateManifold& manifold, std::span<const double> base, double scale) {
  const auto point = manifold.lift_flat(base, scale);
  double worst = 0.0;
  for (const auto& v : lifted_tangent_basis(manifold, base, scale))
    worst = std::max(worst, std::abs(liouville_form(point, v)));
  return worst;
}

std::vector<std::vector<double>> sample_base_points(const StateManifold& manifold, std::size_t count,
                                                    Rng& rng) {
  const auto& box = manifold.domain().sample_box;
  if (box.size() != manifold.n() + 1) throw PreconditionError("manifold has no sample box");
  std::vector<std::vector<double>> out;
  out.reserve(count);
  std::size_t attempts = 0;
  while (out.size() < count) {
    if (++attempts > 1000 * (count + 1)) throw DomainError("sample box misses the admissible domain");
    std::vector<double> b;
    b.reserve(box.size());
    for (const auto& [lo, hi] : box) b.push_back(rng.uniform(lo, hi));
    if (manifold.admissible(b)) out.push_back(std::move(b));
  }
  return out;
}

}  // namespace portthermo
