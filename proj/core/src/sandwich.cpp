#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <stdexcept>

#include "ringcap/bounds.hpp"
#include "ringcap/solver.hpp"

namespace ringcap {

DimensionInputs default_dimensions(const DiscreteSpace& space) {
  const double q = std::log2(std::max(1.0, space.params().doubling_constant));
  return {q, q};
}

SandwichReport verify_sandwich(const DiscreteSpace& space, NodeId x0, double r, double R, double p0,
                               DimensionInputs dims, const SolverOptions& options) {
  SandwichReport rep;
  const auto solved = relative_capacity(space, x0, r, R, p0, options);
  rep.solver_value = solved.value;
  rep.converged = solved.converged;

  const Regime regime = classify_regime(p0, dims.Qx0);
  rep.regime = std::string(to_string(regime));
  RadialProfile profile = log_profile(r, R);
  if (regime == Regime::below && std::abs(p0 - dims.Q) > 1e-9) {
    profile = power_profile(r, R, p0, dims.Q);
    rep.profile = "power_Q";
  } else if (regime == Regime::above) {
    profile = power_profile(r, R, p0, dims.Qx0);
    rep.profile = "power_Qx0";
  } else {
    // critical, or below with Q = p0 (only reachable when Q < Q(x0) is supplied)
    rep.profile = "log";
  }
  rep.profile_energy = radialize(space, x0, profile, p0).energy_edge;

  BoundInputs in;
  in.r = r;
  in.R = R;
  in.p0 = p0;
  in.Q = dims.Q;
  in.Qx0 = dims.Qx0;
  in.mass_inner = mass(space, ball(space, x0, r));
  const auto est = estimate_ring(in);
  rep.lower = est.lower;
  rep.upper = est.upper;
  rep.solver_over_lower = rep.lower > 0.0 ? rep.solver_value / rep.lower : std::numeric_limits<double>::infinity();
  rep.profile_over_upper = rep.upper > 0.0 ? rep.profile_energy / rep.upper : std::numeric_limits<double>::infinity();
  rep.solver_below_profile = rep.solver_value <= rep.profile_energy * (1.0 + options.tol);
  return rep;
}

MonotonicityReport monotonicity_suite(const DiscreteSpace& space, double p0, std::uint64_t seed, std::size_t pairs,
                                      const SolverOptions& options) {
  const double h = space.params().resolution;
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<NodeId> pick(0, static_cast<NodeId>(space.size() - 1));
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  const double slack = std::max(10.0 * options.tol, 1e-9);

  MonotonicityReport rep;
  while (rep.cases.size() < pairs) {
    MonotonicityCase c;
    c.center = pick(rng);
    const auto d = space.distances_from(c.center);
    const double reach = *std::max_element(d.begin(), d.end());
    if (reach < 8.0 * h) continue;
    c.R = 4.0 * h + unit(rng) * (0.5 * reach - 4.0 * h);
    c.r = h + unit(rng) * (0.5 * c.R - h);
    c.r_big = c.r + unit(rng) * 0.5 * (c.R - c.r);
    c.R_big = c.R + unit(rng) * (reach - c.R);
    const auto e_small = Condenser::ring_about(space, c.center, c.r, c.R);
    const auto e_big = Condenser::ring_about(space, c.center, c.r_big, c.R);
    const auto o_big = Condenser::ring_about(space, c.center, c.r, c.R_big);
    c.cap = solve_condenser(space, e_small, p0, options).value;
    c.cap_bigger_inner = solve_condenser(space, e_big, p0, options).value;
    c.cap_bigger_domain = solve_condenser(space, o_big, p0, options).value;
    c.inner_ok = c.cap <= c.cap_bigger_inner * (1.0 + slack);
    c.domain_ok = c.cap_bigger_domain <= c.cap * (1.0 + slack);
    if (!c.inner_ok || !c.domain_ok) ++rep.failures;
    rep.cases.push_back(c);
  }
  return rep;
}

}  // namespace ringcap
