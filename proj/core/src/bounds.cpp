#include "ringcap/bounds.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace ringcap {

std::string_view to_string(Regime regime) {
  switch (regime) {
    case Regime::below: return "below";
    case Regime::critical: return "critical";
    case Regime::above: return "above";
  }
  return "?";
}

Regime classify_regime(double p0, double Qx0, double tol) {
  if (!(p0 > 1.0)) throw std::invalid_argument("regime: p0 must be > 1");
  if (std::abs(p0 - Qx0) <= tol) return Regime::critical;
  return p0 < Qx0 ? Regime::below : Regime::above;
}

namespace {

void check(const BoundInputs& in) {
  if (!(in.r > 0.0) || !(in.r < in.R)) throw std::invalid_argument("bounds: need 0 < r < R");
  if (!(in.mass_inner > 0.0)) throw std::invalid_argument("bounds: mu(B(x0,r)) must be > 0");
  if (!(in.p0 > 1.0)) throw std::invalid_argument("bounds: p0 must be > 1");
}

struct Evaluated {
  double lower = 0.0;
  double upper = 0.0;
  std::vector<std::pair<std::string, double>> constants;
};

Evaluated evaluate(const BoundInputs& in) {
  check(in);
  const double p = in.p0, q = in.Qx0, r = in.r, R = in.R;
  const double shrink = 1.0 - r / R;
  Evaluated ev;
  switch (classify_regime(p, q, in.critical_tol)) {
    case Regime::below: {
      const double c1 = std::pow(1.0 - std::pow(2.0, -(q - p) / (p - 1.0)), p - 1.0);
      const double c4 = 1.0;
      ev.lower = c1 * std::pow(shrink, p * (p - 1.0)) * in.mass_inner / std::pow(r, p);
      ev.upper = c4 * in.mass_inner / std::pow(r, p);
      // shape factor of the upper bound proof, reported only
      const double shape = std::pow(std::abs(1.0 - std::pow(R / r, (p - q) / (p - 1.0))), -p);
      ev.constants = {{"C1", c1}, {"C4", c4}, {"upper_shape_factor", shape}};
      break;
    }
    case Regime::critical: {
      const double c = in.mass_inner / std::pow(r, q);
      const double lg = std::log(R / r);
      ev.lower = c * std::pow(shrink, q * (q - 1.0)) * std::pow(lg, 1.0 - q);
      ev.upper = c * std::pow(lg, 1.0 - q);
      ev.constants = {{"C2", c}, {"C5", c}};
      break;
    }
    case Regime::above: {
      const double a = (p - q) / (p - 1.0);
      const double c3 = in.mass_inner / std::pow(r, q) * std::pow(std::pow(2.0, a) - 1.0, p - 1.0);
      const double c6 = 1.0 / (std::pow(2.0, a) - 1.0);
      const double span = std::pow(std::abs(std::pow(2.0 * R, a) - std::pow(r, a)), 1.0 - p);
      ev.lower = c3 * std::pow(shrink, p * (p - 1.0)) * span;
      ev.upper = c6 * span;
      ev.constants = {{"C3", c3}, {"C6", c6}};
      break;
    }
  }
  return ev;
}

}  // namespace

double lower_bound(const BoundInputs& in) { return evaluate(in).lower; }
double upper_bound(const BoundInputs& in) { return evaluate(in).upper; }

RegimeEstimate estimate_ring(const BoundInputs& in) {
  auto ev = evaluate(in);
  RegimeEstimate est;
  est.regime = classify_regime(in.p0, in.Qx0, in.critical_tol);
  est.lower = ev.lower;
  est.upper = ev.upper;
  est.constants = std::move(ev.constants);
  est.inputs = in;
  return est;
}

double riesz_potential(const DiscreteSpace& space, const PotentialField& field, NodeId x, NodeId x0,
                       double r, double p0) {
  if (field.u.size() != space.size()) throw std::invalid_argument("riesz_potential: field size mismatch");
  const auto support = ball(space, x0, r);
  if (support.empty()) throw std::invalid_argument("riesz_potential: empty ball");
  const auto lip = field.p == p0 ? field.lip : make_field(space, field.u, p0).lip;

  // open-ball masses about x from sorted distances
  const auto dx = space.distances_from(x);
  std::vector<NodeId> order(space.size());
  std::iota(order.begin(), order.end(), NodeId{0});
  std::sort(order.begin(), order.end(), [&](NodeId a, NodeId b) { return dx[a] < dx[b]; });
  std::vector<double> sorted_d(order.size()), prefix(order.size() + 1, 0.0);
  for (std::size_t k = 0; k < order.size(); ++k) {
    sorted_d[k] = dx[order[k]];
    prefix[k + 1] = prefix[k] + space.node_mass(order[k]);
  }
  auto open_mass = [&](double d) {
    const auto k = static_cast<std::size_t>(std::lower_bound(sorted_d.begin(), sorted_d.end(), d) - sorted_d.begin());
    return prefix[k];
  };

  double sum = 0.0;
  for (NodeId y : support) {
    if (y == x || lip[y] == 0.0) continue;
    const double d = dx[y];
    sum += std::pow(lip[y], p0) * d / open_mass(d) * space.node_mass(y);
  }
  return std::pow(std::pow(r, p0 - 1.0) * sum, 1.0 / p0);
}

SingletonLimit singleton_capacity_limit(const DiscreteSpace& space, NodeId x0, double p0, double R,
                                        const std::vector<double>& radii, const SolverOptions& options) {
  if (radii.size() < 2) throw std::invalid_argument("singleton_capacity_limit: need at least two radii");
  for (std::size_t k = 1; k < radii.size(); ++k)
    if (!(radii[k] < radii[k - 1])) throw std::invalid_argument("singleton_capacity_limit: radii must strictly decrease");
  const double h = space.params().resolution;
  if (radii.back() < 5.0 * h * (1.0 - 1e-12))
    throw std::invalid_argument("singleton_capacity_limit: radii must be at least 5h");

  SingletonLimit out;
  out.radii = radii;
  for (double r : radii) {
    const auto res = relative_capacity(space, x0, r, R, p0, options);
    out.capacities.push_back(res.value);
    out.converged.push_back(res.converged);
  }
  for (std::size_t k = 1; k < out.capacities.size(); ++k) {
    if (out.capacities[k] > out.capacities[k - 1]) out.non_increasing = false;
    if (!(out.capacities[k] < out.capacities[k - 1])) out.strictly_decreasing = false;
  }
  const std::size_t n = out.capacities.size();
  out.limit = out.capacities[n - 1];
  out.last_relative_change = std::abs(out.capacities[n - 2] - out.capacities[n - 1]) / out.capacities[n - 1];
  if (out.last_relative_change < 0.05)
    out.trend = "stabilizing";
  else if (out.strictly_decreasing && out.capacities.back() < 0.5 * out.capacities.front())
    out.trend = "vanishing";
  else
    out.trend = "undetermined";
  return out;
}

}  // namespace ringcap
