#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>

#include "oracles.hpp"
#include "ringcap/profiles.hpp"
#include "ringcap/solver.hpp"

using namespace ringcap;
using doctest::Approx;

namespace {

NodeId at(const DiscreteSpace& s, std::vector<double> x) { return s.nearest_node(x); }

std::vector<int> ring_constraints(const DiscreteSpace& s, NodeId o, double r, double R) {
  const auto d = s.distances_from(o);
  std::vector<int> fixed(s.size());
  for (NodeId i = 0; i < s.size(); ++i) fixed[i] = d[i] <= r ? 1 : d[i] < R ? -1 : 0;
  return fixed;
}

// 1-D p-series: minimizing sum c_k |d_k|^p subject to sum d_k = 1.
double series_p(const std::vector<double>& c, double p) {
  double s = 0.0;
  for (double v : c) s += std::pow(v, -1.0 / (p - 1.0));
  return std::pow(s, -(p - 1.0));
}

// Conductances of the chain from the last node of E to the first node off Omega, x > 0 side.
std::vector<double> right_chain(const DiscreteSpace& s, NodeId o, double r, double R, double p) {
  const auto fixed = ring_constraints(s, o, r, R);
  const double x0 = s.coords(o)[0];
  std::vector<double> c;
  for (const auto& e : s.edges()) {
    const double xa = s.coords(e.a)[0] - x0, xb = s.coords(e.b)[0] - x0;
    if (xa < 0 || xb < 0) continue;
    if (fixed[e.a] == -1 || fixed[e.b] == -1 || (fixed[e.a] == 1) != (fixed[e.b] == 1))
      if (!(fixed[e.a] == 0 && fixed[e.b] == 0))
        c.push_back(0.5 * (s.node_mass(e.a) + s.node_mass(e.b)) / std::pow(e.length, p));
  }
  return c;
}

}  // namespace

TEST_CASE("p0 = 2 matches a direct sparse solve") {
  for (double alpha : {0.0, 1.0}) {
    const auto s = build_euclidean_grid(2, 1.0, 0.04, alpha);
    const NodeId o = at(s, {0.0, 0.0});
    SolverOptions opt;
    opt.tol = 1e-12;
    const auto res = relative_capacity(s, o, 0.2, 0.7, 2.0, opt);
    std::vector<double> u;
    const double ref = oracle::dirichlet_energy_p2(s, ring_constraints(s, o, 0.2, 0.7), &u);
    CHECK(res.converged);
    CHECK(res.value == Approx(ref).epsilon(1e-8));
    double worst = 0.0;
    for (NodeId i = 0; i < s.size(); ++i) worst = std::max(worst, std::abs(res.field.u[i] - u[i]));
    CHECK(worst <= 1e-5);
  }
}

TEST_CASE("1-D capacity equals the series formula") {
  const auto s = build_euclidean_grid(1, 1.0, 0.05, 0.0);
  const NodeId o = at(s, {0.0});
  for (double p : {1.5, 2.0, 3.0, 4.0}) {
    SolverOptions opt;
    opt.tol = 1e-11;
    const auto res = relative_capacity(s, o, 0.2, 0.8, p, opt);
    const double expect = 2.0 * series_p(right_chain(s, o, 0.2, 0.8, p), p);
    CHECK(res.value == Approx(expect).epsilon(p < 2 ? 1e-5 : 1e-8));
  }
  const auto res = relative_capacity(s, o, 0.2, 0.8, 2.0);
  CHECK(2.0 * oracle::series_conductance(right_chain(s, o, 0.2, 0.8, 2.0)) == Approx(res.value).epsilon(1e-8));
}

TEST_CASE("1-D unit example: R = 1, small r") {
  const auto s = build_euclidean_grid(1, 1.1, 0.01, 0.0);
  const auto res = relative_capacity(s, at(s, {0.0}), 0.005, 1.0, 2.0);
  CHECK(res.value == Approx(2.0).epsilon(0.02));
}

TEST_CASE("solver invariants") {
  const auto s = build_euclidean_grid(2, 1.0, 0.05, 0.0);
  const NodeId o = at(s, {0.0, 0.0});
  for (double p : {1.5, 2.0, 3.0, 4.0}) {
    const auto res = relative_capacity(s, o, 0.15, 0.75, p);
    CAPTURE(p);
    CHECK(res.converged);
    CHECK(res.energy_monotone);
    for (std::size_t k = 1; k < res.energy_history.size(); ++k)
      CHECK(res.energy_history[k] <= res.energy_history[k - 1] * (1 + 1e-12));
    CHECK(res.range_violation <= 1e-6);
    CHECK(res.value == Approx(p_energy(s, res.field, p).edge).epsilon(1e-12));
    CHECK(res.unreachable_nodes == 0);
    const auto d = s.distances_from(o);
    for (NodeId i = 0; i < s.size(); ++i) {
      if (d[i] <= 0.15) CHECK(res.field.u[i] == 1.0);
      if (d[i] >= 0.75) CHECK(res.field.u[i] == 0.0);
    }
    // the profile is admissible, so it cannot beat the minimizer
    const auto prof = radialize(s, o, log_profile(0.15, 0.75), p);
    CHECK(res.value <= prof.energy_edge * (1 + 1e-9));
  }
}

TEST_CASE("monotone in E and Omega") {
  const auto s = build_euclidean_grid(2, 1.0, 0.05, 1.0);
  const NodeId o = at(s, {0.0, 0.0});
  for (double p : {2.0, 3.0}) {
    const double base = relative_capacity(s, o, 0.2, 0.6, p).value;
    CHECK(relative_capacity(s, o, 0.3, 0.6, p).value >= base);
    CHECK(relative_capacity(s, o, 0.2, 0.8, p).value <= base);
    CHECK(monotonicity_suite(s, p, 11, 8).pass());
  }
}

TEST_CASE("capacity scales linearly with the measure") {
  const auto s = build_euclidean_grid(2, 1.0, 0.05, 0.0);
  const NodeId o = at(s, {0.0, 0.0});
  for (double p : {2.0, 3.0}) {
    const double base = relative_capacity(s, o, 0.2, 0.7, p).value;
    std::vector<double> m(s.masses().begin(), s.masses().end());
    for (double& v : m) v *= 4.0;
    CHECK(relative_capacity(s.with_masses(m), o, 0.2, 0.7, p).value == 4.0 * base);
  }
}

TEST_CASE("free nodes with no path to the boundary are set to zero") {
  // chain 0-1-2-3 plus node 4 with no edges, inside Omega
  const DiscreteSpace s("chain", 1, {0.0, 1.0, 2.0, 3.0, 1.5}, {1.0, 1.0, 1.0, 1.0, 1.0},
                        {{0, 1, 1.0}, {1, 2, 1.0}, {2, 3, 1.0}}, metric::Euclidean{},
                        SpaceParams{2.0, 1.0, 1.0, 1.0});
  const auto res = relative_capacity(s, 0, 0.5, 2.5, 2.0);
  CHECK(res.unreachable_nodes == 1);
  CHECK(res.field.u[4] == 0.0);
  CHECK(res.value == Approx(1.0 / 3.0));  // three unit conductances in series
}

TEST_CASE("one-layer rings blow up as h shrinks") {
  std::vector<double> caps;
  for (double h : {0.04, 0.02}) {
    const auto s = build_euclidean_grid(2, 1.0, h, 0.0);
    caps.push_back(relative_capacity(s, at(s, {0.0, 0.0}), 0.4, 0.4 + 1.5 * h, 2.0).value);
  }
  CHECK(caps[1] / caps[0] == Approx(2.0).epsilon(0.15));
}

TEST_CASE("general condensers") {
  const auto s = build_euclidean_grid(2, 1.0, 0.1, 0.0);
  const NodeId o = at(s, {0.0, 0.0});
  Condenser c;
  c.inner = {o};
  c.domain = ball(s, o, 0.75);
  const auto res = solve_condenser(s, c, 2.0);
  CHECK(res.converged);
  CHECK(res.value > 0.0);

  // Omega \ E a single node
  Condenser tight;
  tight.domain = ball(s, o, 0.15);  // o and its 4 neighbours
  tight.inner = set_difference(tight.domain, {o});
  const auto one = solve_condenser(s, tight, 2.0);
  CHECK(one.free_nodes == 1);
  CHECK(one.value > 0.0);
}

TEST_CASE("preconditions") {
  const auto s = build_euclidean_grid(2, 1.0, 0.1, 0.0);
  const NodeId o = at(s, {0.0, 0.0});
  CHECK_THROWS_AS(relative_capacity(s, o, 0.2, 0.6, 1.0), std::invalid_argument);
  CHECK_THROWS_AS(relative_capacity(s, o, 0.6, 0.6, 2.0), std::invalid_argument);
  SolverOptions bad;
  bad.tol = 0.0;
  CHECK_THROWS(relative_capacity(s, o, 0.2, 0.6, 2.0, bad));
  Condenser c;
  c.domain = ball(s, o, 0.5);
  CHECK_THROWS(solve_condenser(s, c, 2.0));  // empty E
  c.inner = c.domain;
  CHECK_THROWS(solve_condenser(s, c, 2.0));  // Omega \ E empty
  c.inner = {static_cast<NodeId>(s.size() + 3)};
  CHECK_THROWS(solve_condenser(s, c, 2.0));
}
