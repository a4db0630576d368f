#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <numbers>
#include <sstream>

#include "ringcap/space.hpp"

using namespace ringcap;
using doctest::Approx;

namespace {

NodeId at(const DiscreteSpace& s, std::vector<double> x) { return s.nearest_node(x); }

}  // namespace

TEST_CASE("euclidean grid: counts and masses") {
  const auto s = build_euclidean_grid(2, 1.0, 0.1, 0.0);
  CHECK(s.size() == 441);
  CHECK(s.node_mass(at(s, {0.0, 0.0})) == Approx(0.01));
  CHECK(s.node_mass(at(s, {1.0, 0.0})) == Approx(0.005));   // truncated boundary cell
  CHECK(s.node_mass(at(s, {1.0, 1.0})) == Approx(0.0025));  // corner
  CHECK(s.total_mass() == Approx(4.0));
  CHECK(s.edges().size() == 2 * 20 * 21);
  for (const auto& e : s.edges()) CHECK(e.length == Approx(0.1));
}

TEST_CASE("euclidean grid: preconditions") {
  CHECK_THROWS(build_euclidean_grid(2, 1.0, 0.5, 0.0));  // half_extent < 10 h
  CHECK_THROWS(build_euclidean_grid(1, 1.0, 1.0, 0.0));
  CHECK_THROWS(build_euclidean_grid(5, 1.0, 0.1, 0.0));
  CHECK_THROWS(build_euclidean_grid(2, 1.0, 0.1, -2.0));  // alpha <= -n
  CHECK_NOTHROW(build_euclidean_grid(2, 1.0, 0.1, -1.5));
}

TEST_CASE("1-D grid distances and balls") {
  const auto s = build_euclidean_grid(1, 10.0, 1.0, 0.0);
  CHECK(s.size() == 21);
  const NodeId m1 = at(s, {-1.0}), p1 = at(s, {1.0}), o = at(s, {0.0});
  CHECK(s.distance(m1, p1) == Approx(2.0));
  const auto b = ball(s, o, 1.5);
  CHECK(b.size() == 3);
  CHECK(ball(s, o, 0.0).empty());
  CHECK(ball(s, o, 100.0).size() == s.size());
  CHECK(ball(s, o, 1.0).size() == 1);         // open
  CHECK(closed_ball(s, o, 1.0).size() == 3);  // closed
}

TEST_CASE("weighted grid: node mass follows |x|^alpha h^n") {
  const double h = 0.02;
  const auto s = build_euclidean_grid(2, 2.0, h, 1.0);
  CHECK(s.node_mass(at(s, {1.0, 0.0})) == Approx(1.0 * h * h).epsilon(1e-9));
  CHECK(s.node_mass(at(s, {0.6, -0.8})) == Approx(1.0 * h * h).epsilon(1e-9));
  const double origin = s.node_mass(at(s, {0.0, 0.0}));
  CHECK(origin > 0.0);
  CHECK(origin < h * h * h);
}

TEST_CASE("mass is additive and matches sums") {
  const auto s = build_euclidean_grid(2, 1.0, 0.1, 1.0);
  const NodeId o = at(s, {0.0, 0.0});
  const auto inner = closed_ball(s, o, 0.3);
  const auto outer = ball(s, o, 0.7);
  const auto ring = set_difference(outer, inner);
  CHECK(mass(s, {}) == 0.0);
  CHECK(mass(s, {o}) == s.node_mass(o));
  CHECK(mass(s, ring) + mass(s, inner) == Approx(mass(s, outer)).epsilon(1e-14));
  NodeSet all(s.size());
  for (NodeId i = 0; i < s.size(); ++i) all[i] = i;
  CHECK(mass(s, all) == Approx(s.total_mass()));
  CHECK(is_subset(inner, outer));
  CHECK_FALSE(is_subset(outer, inner));
  CHECK(set_union(inner, ring) == outer);
}

TEST_CASE("euclidean ball volume and refinement consistency") {
  for (int n : {2, 3}) {
    const double r = 0.5;
    const double h = r / 20.0;
    const auto s = build_euclidean_grid(n, 1.0, h, 0.0);
    const double unit = n == 2 ? std::numbers::pi : 4.0 * std::numbers::pi / 3.0;
    const double m = mass(s, ball(s, at(s, std::vector<double>(n, 0.0)), r)) / std::pow(r, n);
    CHECK(std::abs(m / unit - 1.0) < 0.10);
    const auto fine = build_euclidean_grid(n, 1.0, h / 2.0, 0.0);
    const double mf = mass(fine, ball(fine, at(fine, std::vector<double>(n, 0.0)), r)) / std::pow(r, n);
    CHECK(std::abs(mf / m - 1.0) < 0.05);
  }
}

TEST_CASE("korányi gauge") {
  CHECK(koranyi_norm(0, 0, 0) == 0.0);
  CHECK(koranyi_norm(1, 0, 0) == Approx(1.0));
  CHECK(koranyi_norm(0, 0, 0.25) == Approx(1.0));
  CHECK(koranyi_norm(3, 4, 0) == Approx(5.0));
  // homogeneous under dilation (x,y,t) -> (s x, s y, s^2 t)
  CHECK(koranyi_norm(0.6, 0.2, 0.3) * 2.0 == Approx(koranyi_norm(1.2, 0.4, 1.2)));
}

TEST_CASE("heisenberg grid") {
  const double h = 0.1;
  const auto s = build_heisenberg_grid(1.0, h);
  const NodeId o = at(s, {0.0, 0.0, 0.0});
  CHECK(s.distance(o, o) == 0.0);
  CHECK(s.distance(o, at(s, {1.0, 0.0, 0.0})) == Approx(1.0));
  for (const auto& e : s.edges()) CHECK(s.distance(e.a, e.b) == Approx(h).epsilon(1e-12));
  for (NodeId i = 0; i < s.size(); i += 97) CHECK(s.node_mass(i) == Approx(std::pow(h, 4)));
  CHECK(s.params().doubling_constant == 16.0);
  CHECK(verify_metric(s, 400, 3).pass());
  CHECK_THROWS(build_heisenberg_grid(0.1, 0.1));

  HeisenbergOptions clip;
  clip.clip_to_gauge_ball = true;
  const auto c = build_heisenberg_grid(1.0, h, clip);
  const NodeId oc = at(c, {0.0, 0.0, 0.0});
  CHECK(c.size() < s.size());
  for (NodeId i = 0; i < c.size(); ++i) CHECK(c.distance(oc, i) <= 1.0 + 1e-9);
}

TEST_CASE("heisenberg ball volume doubling tends to 16") {
  HeisenbergOptions clip;
  clip.clip_to_gauge_ball = true;
  const auto s = build_heisenberg_grid(21.0, 1.0, clip);
  const NodeId o = at(s, {0.0, 0.0, 0.0});
  const double ratio = mass(s, ball(s, o, 20.0)) / mass(s, ball(s, o, 10.0));
  CHECK(ratio == Approx(16.0).epsilon(0.1));
}

TEST_CASE("double cone membership and measure") {
  const auto s = build_double_cone(2, 1.0, 0.01);
  const NodeId apex = at(s, {0.0, 0.0});
  CHECK(s.distance(apex, apex) == 0.0);
  CHECK(s.coords(apex)[0] == 0.0);
  const NodeId top = at(s, {0.0, 1.0});
  CHECK(s.coords(top)[1] == Approx(1.0));
  // nearest node to (1, 0) is still inside the cone, so it cannot be (1, 0)
  for (NodeId i = 0; i < s.size(); ++i) CHECK(std::abs(s.coords(i)[0]) <= std::abs(s.coords(i)[1]) + 1e-12);
  CHECK(mass(s, ball(s, apex, 1.0)) == Approx(std::numbers::pi / 2.0).epsilon(0.03));
  CHECK(verify_metric(s, 300, 5).pass());
}

TEST_CASE("glued balls: path metric through the segment") {
  const double L = 1.0;
  const auto s = build_glued_balls(2, 0.1, L);
  const NodeId ca = at(s, {-1.0 - L / 2, 0.0}), cb = at(s, {1.0 + L / 2, 0.0});
  CHECK(s.distance(ca, cb) == Approx(2.0 + L));
  CHECK(verify_metric(s, 400, 9).pass());
  CHECK_THROWS(build_glued_balls(2, 0.1, 0.05));
  // segment nodes carry 1-D mass h
  CHECK(s.node_mass(at(s, {0.0, 0.0})) == Approx(0.1));
}

TEST_CASE("metric verification is clean on every generator") {
  CHECK(verify_metric(build_euclidean_grid(3, 1.0, 0.1, 0.0), 500, 1).max_triangle_violation <= 1e-12);
  CHECK(verify_metric(build_euclidean_grid(2, 1.0, 0.1, 1.0), 500, 2).pass());
  CHECK(verify_metric(build_double_cone(3, 1.0, 0.1), 500, 3).pass());
  CHECK(verify_metric(build_glued_balls(3, 0.1, 1.0), 500, 4).pass());
}

TEST_CASE("flat file round trip is bit exact") {
  const auto s = build_euclidean_grid(2, 1.0, 0.1, 1.0);
  std::stringstream io;
  write_space(io, s);
  const auto t = read_space(io, MetricKind::euclidean, s.params());
  REQUIRE(t.size() == s.size());
  REQUIRE(t.edges().size() == s.edges().size());
  for (NodeId i = 0; i < s.size(); ++i) {
    CHECK(t.node_mass(i) == s.node_mass(i));
    for (std::size_t k = 0; k < 2; ++k) CHECK(t.coords(i)[k] == s.coords(i)[k]);
  }
  for (std::size_t e = 0; e < s.edges().size(); ++e) CHECK(t.edges()[e].length == s.edges()[e].length);

  std::stringstream again;
  write_space(again, t);
  std::stringstream first;
  write_space(first, s);
  CHECK(again.str() == first.str());

  std::stringstream bad("3 0\n0 0 1\n");
  CHECK_THROWS(read_space(bad, MetricKind::euclidean, s.params()));
}

TEST_CASE("graph path metric for imported spaces") {
  const auto s = build_glued_balls(2, 0.1, 1.0);
  std::stringstream io;
  write_space(io, s);
  const auto t = read_space(io, MetricKind::graph_path, s.params());
  const NodeId a = 0, b = static_cast<NodeId>(s.size() - 1);
  CHECK(t.distance(a, b) >= s.distance(a, b) - 1e-12);
  CHECK(verify_metric(t, 100, 1).pass());
}

TEST_CASE("with_masses rescales and validates") {
  const auto s = build_euclidean_grid(2, 1.0, 0.1, 0.0);
  std::vector<double> m(s.masses().begin(), s.masses().end());
  for (double& v : m) v *= 2.5;
  const auto t = s.with_masses(m);
  CHECK(t.total_mass() == Approx(2.5 * s.total_mass()));
  m[0] = 0.0;
  CHECK_THROWS(s.with_masses(m));
}
