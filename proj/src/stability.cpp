#include "portthermo/stability.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <limits>

#include "portthermo/calculus.hpp"
#include "portthermo/kernels.hpp"

namespace portthermo {

std::string_view to_string(Side s) { return s == Side::Energy ? "energy" : "entropy"; }

ConservedQuantity::ConservedQuantity(std::string name, ScalarField field, Side side)
    : name_(std::move(name)), field_(std::move(field)), side_(side) {
  if (field_.empty()) throw PreconditionError("conserved quantity '" + name_ + "' has no field");
}

ScalarField ConservedQuantity::phase_field(const std::vector<std::string>& phase_names) const {
  if (phase_names.size() != 2 * (field_.arity() - 1) + 4)
    throw PreconditionError("phase names do not match the conserved quantity's dimension");
  return ScalarField(phase_names, [self = *this](auto x) { return self.on_phase(x); });
}

ConservedQuantity ConservedQuantity::negated() const {
  ScalarField neg(field_.names(), [f = field_](auto x) { return -f(x); });
  return ConservedQuantity("-" + name_, std::move(neg), side_);
}

ConservationCheck ConservedQuantity::verify(const PortThermoSystem& sys, std::size_t samples, Rng& rng) const {
  const auto& M = sys.manifold();
  if (field_.arity() != M.n() + 1) throw PreconditionError("conserved quantity dimension does not match system");
  ConservationCheck check;
  const ScalarField C = phase_field(M.phase_names());
  const auto bases = sample_base_points(M, samples, rng);
  const PhaseLayout lay = sys.layout();
  const std::size_t law_slot = side_ == Side::Energy ? lay.pE() : lay.pS();
  for (const auto& b : bases) {
    const auto phase = M.lift_flat(std::span<const double>(b), 1.0);
    check.bracket = std::max(check.bracket, std::abs(poisson_bracket(C, sys.internal(), phase)));
    // Same extensive point, random co-extensive vector.
    auto off = phase;
    for (auto s : lay.momentum_slots()) off[s] = rng.normal();
    try {
      check.off_manifold_law =
          std::max(check.off_manifold_law, std::abs(partial_of(sys.internal(), std::span<const double>(off), law_slot)));
    } catch (const DomainError&) {
    }
  }
  check.samples = bases.size();
  check.strong_law_holds = check.off_manifold_law <= 1e-9;
  return check;
}

PointTransformation::PointTransformation(ConservedQuantity generator) : generator_(std::move(generator)) {}

PointTransformation::PointTransformation(ConservedQuantity generator, const PortThermoSystem& sys,
                                         std::size_t samples, std::uint64_t seed, double tolerance)
    : generator_(std::move(generator)) {
  Rng rng(seed);
  ConservationCheck c = generator_.verify(sys, samples, rng);
  if (!(c.bracket <= tolerance))
    throw ConstructionError("'" + generator_.name() + "' is not conserved by '" + sys.name() +
                            "' (worst bracket " + std::to_string(c.bracket) + ")");
  check_ = c;
}

PointTransformation PointTransformation::unverified(ConservedQuantity generator) {
  return PointTransformation(std::move(generator));
}

PointTransformation PointTransformation::inverse() const {
  PointTransformation inv(generator_.negated());
  inv.check_ = check_;
  inv.inverse_ = !inverse_;
  return inv;
}

PhasePoint apply_transform(const PointTransformation& T, const PhasePoint& pt) {
  const auto flat = pt.flat();
  const auto out = T.apply_flat(std::span<const double>(flat));
  return PhasePoint::from_flat(out);
}

double verify_canonical(const PhaseMap& map, std::span<const double> phase,
                        const std::vector<std::vector<double>>& tangents) {
  const std::size_t dim = phase.size();
  if (dim < 4 || dim % 2 != 0) throw PreconditionError("flat phase vector has bad size");
  std::vector<D1> seeded;
  seeded.reserve(dim);
  for (std::size_t i = 0; i < dim; ++i) seeded.push_back(ad::variable(phase[i], i, dim));
  const auto image = map(std::span<const D1>(seeded));
  if (image.size() != dim) throw PreconditionError("phase map changes dimension");
  std::vector<double> image_point(dim);
  for (std::size_t i = 0; i < dim; ++i) image_point[i] = image[i].v;
  double worst = 0.0;
  for (const auto& v : tangents) {
    if (v.size() != dim) throw PreconditionError("tangent has wrong dimension");
    std::vector<double> pushed(dim, 0.0);
    for (std::size_t i = 0; i < dim; ++i)
      for (std::size_t k = 0; k < dim; ++k) pushed[i] += image[i].partial(k) * v[k];
    worst = std::max(worst, std::abs(liouville_form(image_point, pushed) - liouville_form(phase, v)));
  }
  return worst;
}

double verify_canonical(const PointTransformation& T, const PhasePoint& pt,
                        const std::vector<std::vector<double>>& tangents) {
  const auto flat = pt.flat();
  return verify_canonical([&T](std::span<const D1> x) { return T.apply_flat(x); }, flat, tangents);
}

PortThermoSystem transform_system(const PortThermoSystem& sys, const PointTransformation& T) {
  if (!T.verified()) throw ConstructionError("transform_system needs a verified conserved quantity");
  const auto& M = sys.manifold();
  const Side side = T.generator().side();
  if ((side == Side::Energy) != (M.representation() == Representation::Energy))
    throw ConstructionError("transformation side does not match the system's representation");
  if (T.generator().field().arity() != M.n() + 1)
    throw ConstructionError("conserved quantity dimension does not match system");

  ScalarField generator(M.base_names(), [g = M.generator(), c = T.generator().field()](auto b) {
    return g(b) + c(b);
  });
  StateManifold shaped(M.representation(), std::move(generator), M.energy_name(), M.entropy_name(), M.q_names(),
                       M.domain(), M.intensive_labels());
  const auto names = shaped.phase_names();
  const PointTransformation inv = T.inverse();

  ScalarField internal(names, [k = sys.internal(), inv](auto x) {
    using N = typename decltype(x)::value_type;
    const auto back = inv.apply_flat(x);
    return k(std::span<const N>(back));
  });
  std::vector<ControlHamiltonian> controls;
  auto control_names = names;
  control_names.push_back("u");
  for (const auto& c : sys.controls()) {
    ScalarField f(control_names, [k = c.field, inv](auto xu) {
      using N = typename decltype(xu)::value_type;
      auto back = inv.apply_flat(xu.first(xu.size() - 1));
      back.push_back(xu.back());
      return k(std::span<const N>(back));
    });
    controls.push_back(ControlHamiltonian{c.label, std::move(f), c.linear_in_u});
  }
  return PortThermoSystem(sys.name() + "_shaped", std::move(shaped), std::move(internal), std::move(controls),
                          sys.q_kinds());
}

double availability(const ScalarField& entropy, std::span<const double> setpoint, std::span<const double> at) {
  if (setpoint.size() != entropy.arity() || at.size() != entropy.arity())
    throw PreconditionError("availability: point dimension does not match the entropy function");
  const auto vg = value_gradient(entropy, setpoint);
  double a = vg.value - entropy(at);
  for (std::size_t i = 0; i < at.size(); ++i) a += vg.gradient[i] * (at[i] - setpoint[i]);
  return a;
}

ScalarField availability_field(const ScalarField& entropy, std::vector<double> setpoint) {
  if (setpoint.size() != entropy.arity())
    throw PreconditionError("availability: setpoint dimension does not match the entropy function");
  const auto vg = value_gradient(entropy, std::span<const double>(setpoint));
  return ScalarField(entropy.names(), [entropy, setpoint, s0 = vg.value, g = vg.gradient](auto x) {
    using N = typename decltype(x)::value_type;
    N a = s0 - entropy(x);
    for (std::size_t i = 0; i < setpoint.size(); ++i) a = a + g[i] * (x[i] - setpoint[i]);
    return a;
  });
}

std::vector<std::vector<double>> hessian(const ScalarField& f, std::span<const double> x, double h) {
  const std::size_t n = x.size();
  std::vector<std::vector<double>> H(n, std::vector<double>(n, 0.0));
  std::vector<double> xp(x.begin(), x.end()), xm(x.begin(), x.end());
  for (std::size_t i = 0; i < n; ++i) {
    xp[i] = x[i] + h;
    xm[i] = x[i] - h;
    const auto gp = gradient_of(f, std::span<const double>(xp));
    const auto gm = gradient_of(f, std::span<const double>(xm));
    for (std::size_t j = 0; j < n; ++j) H[i][j] = (gp[j] - gm[j]) / (2 * h);
    xp[i] = xm[i] = x[i];
  }
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < i; ++j) H[i][j] = H[j][i] = 0.5 * (H[i][j] + H[j][i]);
  return H;
}

double hessian_min_eigenvalue(const ScalarField& f, std::span<const double> x, double h) {
  const auto H = hessian(f, x, h);
  const auto n = static_cast<Eigen::Index>(H.size());
  Eigen::MatrixXd m(n, n);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < n; ++j) m(i, j) = H[i][j];
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(m, Eigen::EigenvaluesOnly);
  return solver.eigenvalues().minCoeff();
}

LyapunovReport lyapunov_certificate(const PortThermoSystem& sys, const LyapunovCandidate& candidate,
                                    const ShellSpec& shell, const Trajectory& trajectory, Rng& rng, int jobs) {
  const auto base_names = sys.manifold().base_names();
  const auto& V = candidate.V;
  if (V.empty()) throw PreconditionError("Lyapunov candidate '" + candidate.name + "' has no field");
  if (candidate.equilibrium.size() != V.arity())
    throw PreconditionError("equilibrium does not match the candidate's coordinates");
  if (shell.count == 0 || !(shell.r_max > 0.0) || shell.r_min < 0.0 || shell.r_min > shell.r_max)
    throw PreconditionError("empty sample shell");
  if (trajectory.empty()) throw PreconditionError("Lyapunov certificate needs a nonempty trajectory");
  if (trajectory.state_names != base_names)
    throw PreconditionError("trajectory does not belong to system '" + sys.name() + "'");
  std::vector<std::size_t> index;
  for (const auto& name : V.names()) {
    auto it = std::find(base_names.begin(), base_names.end(), name);
    if (it == base_names.end())
      throw PreconditionError("candidate coordinate '" + name + "' is not a base coordinate");
    index.push_back(static_cast<std::size_t>(it - base_names.begin()));
  }

  LyapunovReport r;
  r.candidate = candidate.name;
  r.coordinates = V.names();
  r.equilibrium = candidate.equilibrium;
  r.value_at_equilibrium = V(std::span<const double>(candidate.equilibrium));

  // Shell points: isotropic direction, radius uniform in volume.
  const std::size_t k = V.arity();
  const double dk = static_cast<double>(k);
  const double lo = std::pow(shell.r_min, dk), hi = std::pow(shell.r_max, dk);
  std::vector<std::vector<double>> points;
  const auto& reference = trajectory.states.back();
  std::size_t attempts = 0;
  while (points.size() < shell.count && attempts < 100 * shell.count) {
    ++attempts;
    std::vector<double> dir(k);
    double norm = 0.0;
    for (auto& d : dir) {
      d = rng.normal();
      norm += d * d;
    }
    norm = std::sqrt(norm);
    if (norm == 0.0) continue;
    const double radius = std::pow(lo + rng.uniform() * (hi - lo), 1.0 / dk);
    std::vector<double> p(k);
    for (std::size_t i = 0; i < k; ++i) p[i] = candidate.equilibrium[i] + radius * dir[i] / norm;
    std::vector<double> full(reference);
    for (std::size_t i = 0; i < k; ++i) full[index[i]] = p[i];
    if (sys.manifold().admissible(full)) points.push_back(std::move(p));
  }
  if (points.empty()) throw PreconditionError("sample shell misses the admissible domain");
  r.shell_samples = points.size();
  const auto values = kernels::map_indexed(points.size(), jobs, [&](std::size_t i) {
    return V(std::span<const double>(points[i])) - r.value_at_equilibrium;
  });
  const auto worst = std::min_element(values.begin(), values.end());
  r.margin = *worst;
  r.margin_at = points[static_cast<std::size_t>(worst - values.begin())];

  const auto rates = kernels::map_indexed(trajectory.size(), jobs, [&](std::size_t i) {
    const auto& state = trajectory.states[i];
    const auto v = reduced_vector_field(sys, state, trajectory.inputs[i]);
    std::vector<double> sub;
    for (auto j : index) sub.push_back(state[j]);
    const auto g = gradient_of(V, std::span<const double>(sub));
    double rate = 0.0;
    for (std::size_t j = 0; j < k; ++j) rate += g[j] * v[index[j]];
    return rate;
  });
  r.trajectory_samples = rates.size();
  const auto top = std::max_element(rates.begin(), rates.end());
  r.max_dVdt = *top;
  r.max_dVdt_time = trajectory.times[static_cast<std::size_t>(top - rates.begin())];

  try {
    r.hessian_min_eigenvalue = hessian_min_eigenvalue(V, candidate.equilibrium);
  } catch (const Error&) {
    r.hessian_min_eigenvalue.reset();
  }
  r.verdict = r.margin > 0.0 && r.max_dVdt <= kLyapunovRateTolerance;
  return r;
}

}  // namespace portthermo
