#include "ringcap/profiles.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace ringcap {

namespace {

void check_p(double p0) {
  if (!(p0 >= 1.0) || !std::isfinite(p0)) throw std::invalid_argument("energy exponent p0 must be >= 1");
}

}  // namespace

double edge_energy(const DiscreteSpace& space, const std::vector<double>& u, double p0) {
  check_p(p0);
  double total = 0.0;
  for (const auto& e : space.edges()) {
    const double g = std::abs(u[e.a] - u[e.b]) / e.length;
    if (g == 0.0) continue;
    const double m = 0.5 * (space.node_mass(e.a) + space.node_mass(e.b));
    total += m * std::pow(g, p0);
  }
  return total;
}

PotentialField make_field(const DiscreteSpace& space, std::vector<double> u, double p0) {
  check_p(p0);
  if (u.size() != space.size()) throw std::invalid_argument("make_field: one value per node required");
  PotentialField f;
  f.p = p0;
  f.u = std::move(u);
  f.edge_gradient.resize(space.edges().size());
  f.lip.assign(space.size(), 0.0);
  const auto edges = space.edges();
  for (std::size_t k = 0; k < edges.size(); ++k) {
    const auto& e = edges[k];
    const double g = std::abs(f.u[e.a] - f.u[e.b]) / e.length;
    f.edge_gradient[k] = g;
    f.lip[e.a] = std::max(f.lip[e.a], g);
    f.lip[e.b] = std::max(f.lip[e.b], g);
  }
  f.energy_edge = edge_energy(space, f.u, p0);
  for (NodeId i = 0; i < space.size(); ++i)
    if (f.lip[i] > 0.0) f.energy_node += std::pow(f.lip[i], p0) * space.node_mass(i);
  f.energy_analytic = std::numeric_limits<double>::quiet_NaN();
  return f;
}

EnergyReport p_energy(const DiscreteSpace& space, const PotentialField& field, double p0) {
  EnergyReport r;
  if (field.p == p0) {
    r.edge = field.energy_edge;
    r.node = field.energy_node;
  } else {
    const auto g = make_field(space, field.u, p0);
    r.edge = g.energy_edge;
    r.node = g.energy_node;
  }
  r.analytic = std::numeric_limits<double>::quiet_NaN();
  if (!field.analytic_gradient.empty()) {
    r.analytic = 0.0;
    for (NodeId i = 0; i < space.size(); ++i)
      if (field.analytic_gradient[i] > 0.0)
        r.analytic += std::pow(field.analytic_gradient[i], p0) * space.node_mass(i);
  }
  return r;
}

RadialProfile::RadialProfile(ProfileKind kind, double r, double R, double exponent)
    : kind_(kind), r_(r), R_(R), a_(exponent) {
  if (!(r > 0.0) || !(R > r)) throw std::invalid_argument("RadialProfile: need 0 < r < R");
  if (kind_ == ProfileKind::power) {
    if (a_ == 0.0) throw std::invalid_argument("RadialProfile: power exponent must be nonzero");
    denom_ = std::pow(r_, a_) - std::pow(R_, a_);
  } else {
    denom_ = std::log(R_ / r_);
  }
}

double RadialProfile::value(double t) const {
  if (t <= r_) return 1.0;
  if (t >= R_) return 0.0;
  const double v = kind_ == ProfileKind::power ? (std::pow(t, a_) - std::pow(R_, a_)) / denom_
                                               : std::log(R_ / t) / denom_;
  return std::clamp(v, 0.0, 1.0);
}

double RadialProfile::derivative(double t) const {
  if (t <= r_ || t >= R_) return 0.0;
  if (kind_ == ProfileKind::power) return a_ * std::pow(t, a_ - 1.0) / denom_;
  return -1.0 / (t * denom_);
}

RadialProfile power_profile(double r, double R, double p0, double Qi) {
  if (!(p0 > 1.0)) throw std::invalid_argument("power_profile: p0 must be > 1");
  if (std::abs(p0 - Qi) <= 1e-9) throw std::invalid_argument("power_profile: p0 == Qi, use log_profile");
  return RadialProfile(ProfileKind::power, r, R, (p0 - Qi) / (p0 - 1.0));
}

RadialProfile log_profile(double r, double R) { return RadialProfile(ProfileKind::log, r, R, 0.0); }

PotentialField radialize(const DiscreteSpace& space, NodeId x0, const RadialProfile& profile, double p0) {
  const auto d = space.distances_from(x0);
  std::vector<double> u(space.size());
  for (NodeId i = 0; i < space.size(); ++i) u[i] = profile.value(d[i]);
  auto field = make_field(space, std::move(u), p0);
  field.analytic_gradient.resize(space.size());
  field.energy_analytic = 0.0;
  for (NodeId i = 0; i < space.size(); ++i) {
    const double g = std::abs(profile.derivative(d[i]));
    field.analytic_gradient[i] = g;
    if (g > 0.0) field.energy_analytic += std::pow(g, p0) * space.node_mass(i);
  }
  return field;
}

ShellEnergy dyadic_shell_energy(const DiscreteSpace& space, NodeId x0, const PotentialField& field,
                                double p0, double r, double R) {
  if (!(r > 0.0) || !(R > r)) throw std::invalid_argument("dyadic_shell_energy: need 0 < r < R");
  const auto lip = field.p == p0 ? field.lip : make_field(space, field.u, p0).lip;
  ShellEnergy out;
  out.k0 = static_cast<int>(std::floor(std::log2(R / r) + 1e-12));
  out.shells.resize(static_cast<std::size_t>(out.k0) + 1);
  for (int k = 0; k <= out.k0; ++k) {
    auto& s = out.shells[static_cast<std::size_t>(k)];
    s.k = k;
    s.inner = std::ldexp(r, k);
    s.outer = std::min(std::ldexp(r, k + 1), R);
  }
  const auto d = space.distances_from(x0);
  for (NodeId i = 0; i < space.size(); ++i) {
    if (!(d[i] > r) || !(d[i] < R)) continue;
    const double e = lip[i] > 0.0 ? std::pow(lip[i], p0) * space.node_mass(i) : 0.0;
    out.annulus_energy += e;
    int k = static_cast<int>(std::floor(std::log2(d[i] / r)));
    while (d[i] > std::ldexp(r, k + 1)) ++k;
    // d exactly on 2^k r belongs to the shell below
    while (k > 0 && d[i] <= std::ldexp(r, k)) --k;
    k = std::clamp(k, 0, out.k0);
    out.shells[static_cast<std::size_t>(k)].energy += e;
  }
  return out;
}

}  // namespace ringcap
