#include "ringcap/green.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <queue>
#include <stdexcept>

#include "ringcap/numeric.hpp"

namespace ringcap {

namespace {

// Nodes of `domain` reachable from `start` without leaving `domain`.
std::vector<char> component_within(const DiscreteSpace& space, const std::vector<char>& inside, NodeId start) {
  std::vector<char> seen(space.size(), 0);
  std::queue<NodeId> queue;
  seen[start] = 1;
  queue.push(start);
  while (!queue.empty()) {
    const NodeId v = queue.front();
    queue.pop();
    for (NodeId w : space.neighbors(v))
      if (inside[w] && !seen[w]) {
        seen[w] = 1;
        queue.push(w);
      }
  }
  return seen;
}

}  // namespace

SingularFunction build_green(const DiscreteSpace& space, const NodeSet& domain, NodeId x0, double p0,
                             std::optional<double> rho, const SolverOptions& options) {
  const double h = space.params().resolution;
  const double radius = rho.value_or(3.0 * h);
  if (radius < 2.0 * h * (1.0 - 1e-12)) throw std::invalid_argument("build_green: rho must be at least 2h");
  const auto inside = to_mask(space, domain);
  if (x0 >= space.size() || !inside[x0]) throw std::invalid_argument("build_green: x0 must lie in Omega");
  const auto inner = closed_ball(space, x0, radius);
  if (!is_subset(inner, domain)) throw std::invalid_argument("build_green: closed B(x0, rho) must lie in Omega");
  const auto comp = component_within(space, inside, x0);
  for (NodeId i : domain)
    if (!comp[i]) throw std::invalid_argument("build_green: Omega is disconnected");

  Condenser cond{inner, domain, RingForm{x0, radius, 0.0}};
  const auto solved = solve_condenser(space, cond, p0, options);
  SingularFunction g;
  g.center = x0;
  g.domain = domain;
  g.p0 = p0;
  g.rho = radius;
  g.cap_rho = solved.value;
  g.converged = solved.converged;
  g.iterations = solved.iterations;
  if (!(solved.value > 0.0)) throw std::runtime_error("build_green: zero condenser capacity");
  const double scale = std::pow(solved.value, 1.0 / (1.0 - p0));
  g.G.resize(space.size());
  for (NodeId i = 0; i < space.size(); ++i) g.G[i] = scale * solved.field.u[i];
  g.max_G = scale;
  for (const auto& e : space.edges())
    g.max_edge_jump = std::max(g.max_edge_jump, std::abs(g.G[e.a] - g.G[e.b]) / (e.length * g.max_G));
  return g;
}

LevelReport check_level_sets(const DiscreteSpace& space, const SingularFunction& green,
                             const std::vector<LevelPair>& levels, bool fractions, double band,
                             const SolverOptions& options) {
  LevelReport rep;
  rep.min_ratio = std::numeric_limits<double>::infinity();
  rep.max_ratio = 0.0;
  for (const auto& lv : levels) {
    LevelRow row;
    row.levels = fractions ? LevelPair{lv.alpha * green.max_G, lv.beta * green.max_G} : lv;
    const double a = row.levels.alpha, b = row.levels.beta;
    if (!(a >= 0.0) || !(a < b) || b > green.max_G * (1.0 + 1e-12))
      throw std::invalid_argument("check_level_sets: need 0 <= alpha < beta <= max G");
    NodeSet upper, lower;
    for (NodeId i = 0; i < space.size(); ++i) {
      if (green.G[i] >= b * (1.0 - 1e-12)) upper.push_back(i);
      if (green.G[i] > a) lower.push_back(i);
    }
    if (upper.empty() || lower.size() <= upper.size()) {
      row.skipped = true;
      rep.rows.push_back(row);
      continue;
    }
    const auto solved = solve_condenser(space, Condenser{upper, lower, std::nullopt}, green.p0, options);
    row.capacity = solved.value;
    row.converged = solved.converged;
    row.ratio = solved.value * std::pow(b - a, green.p0 - 1.0);
    rep.min_ratio = std::min(rep.min_ratio, row.ratio);
    rep.max_ratio = std::max(rep.max_ratio, row.ratio);
    rep.rows.push_back(row);
  }
  const bool any = rep.max_ratio > 0.0;
  rep.pass = any && rep.max_ratio <= band * rep.min_ratio;
  if (!any) rep.min_ratio = 0.0;
  return rep;
}

BlowupReport blowup_trend(const std::vector<std::reference_wrapper<const DiscreteSpace>>& spaces,
                          const std::vector<double>& center, double omega_radius, double p0, double Qx0,
                          double critical_scale, const SolverOptions& options) {
  if (spaces.size() < 3) throw std::invalid_argument("blowup_trend: need at least 3 refinement levels");
  BlowupReport rep;
  const Regime regime = classify_regime(p0, Qx0);
  rep.regime = std::string(to_string(regime));
  for (const auto& ref : spaces) {
    const DiscreteSpace& space = ref.get();
    const NodeId x0 = space.nearest_node(center);
    const auto green = build_green(space, ball(space, x0, omega_radius), x0, p0, std::nullopt, options);
    rep.h.push_back(space.params().resolution);
    rep.max_G.push_back(green.max_G);
  }
  rep.strictly_increasing = true;
  for (std::size_t k = 1; k < rep.max_G.size(); ++k)
    if (!(rep.max_G[k] > rep.max_G[k - 1])) rep.strictly_increasing = false;
  const std::size_t n = rep.max_G.size();
  rep.last_relative_change = std::abs(rep.max_G[n - 1] - rep.max_G[n - 2]) / rep.max_G[n - 1];

  std::vector<double> inv_h(n), y(n);
  for (std::size_t k = 0; k < n; ++k) inv_h[k] = 1.0 / rep.h[k];
  if (regime == Regime::critical) {
    for (std::size_t k = 0; k < n; ++k) y[k] = critical_scale * rep.max_G[k];
    std::vector<double> log_inv_h(n);
    for (std::size_t k = 0; k < n; ++k) log_inv_h[k] = std::log(inv_h[k]);
    rep.growth_slope = fit_line(log_inv_h, y).slope;
  } else {
    rep.growth_slope = fit_loglog(inv_h, rep.max_G).slope;
  }
  rep.pass = regime == Regime::above ? rep.last_relative_change <= 0.10 : rep.strictly_increasing;
  return rep;
}

MaximumPrincipleReport maximum_principle_check(const DiscreteSpace& space, const SingularFunction& green,
                                               double tol) {
  MaximumPrincipleReport rep;
  const auto inside = to_mask(space, green.domain);
  const auto core = to_mask(space, closed_ball(space, green.center, green.rho));
  const auto comp = component_within(space, inside, green.center);
  const double slack = tol * std::max(1.0, green.max_G);
  for (NodeId i = 0; i < space.size(); ++i) {
    const double g = green.G[i];
    if (g < -slack) ++rep.negative_nodes;
    if (!inside[i]) {
      if (g != 0.0) ++rep.nonzero_outside;
      continue;
    }
    if (comp[i] && !(g > 0.0)) ++rep.nonpositive_in_component;
    if (core[i]) continue;
    ++rep.interior_checked;
    double top = -std::numeric_limits<double>::infinity();
    for (NodeId j : space.neighbors(i)) top = std::max(top, green.G[j]);
    if (space.degree(i) > 0 && g > top + slack) ++rep.strict_local_maxima;
  }
  rep.pass = rep.strict_local_maxima == 0 && rep.negative_nodes == 0 && rep.nonzero_outside == 0 &&
             rep.nonpositive_in_component == 0;
  return rep;
}

}  // namespace ringcap
