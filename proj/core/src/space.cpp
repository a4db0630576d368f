#include "ringcap/space.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <limits>
#include <numeric>
#include <ostream>
#include <queue>
#include <random>
#include <sstream>
#include <stdexcept>

#include "ringcap/numeric.hpp"

namespace ringcap {

namespace {

constexpr double kEdgeTolerance = 1e-12;

double euclidean(std::span<const double> x, std::span<const double> y) {
  double s = 0.0;
  for (std::size_t k = 0; k < x.size(); ++k) {
    const double d = x[k] - y[k];
    s += d * d;
  }
  return std::sqrt(s);
}

double koranyi(std::span<const double> g, std::span<const double> g2) {
  const double dx = g2[0] - g[0];
  const double dy = g2[1] - g[1];
  const double dt = g2[2] - g[2] + 0.5 * (g[1] * g2[0] - g[0] * g2[1]);
  return koranyi_norm(dx, dy, dt);
}

double glued(const metric::GluedBalls& m, NodeId i, std::span<const double> x, NodeId j,
             std::span<const double> y) {
  using P = metric::GluedBalls;
  const auto pi = (*m.part)[i];
  const auto pj = (*m.part)[j];
  if (pi == pj) return euclidean(x, y);
  const std::span<const double> a{m.attach_a};
  const std::span<const double> b{m.attach_b};
  auto via = [&](std::span<const double> p, std::span<const double> q, std::span<const double> s) {
    return euclidean(p, s) + euclidean(s, q);
  };
  if ((pi == P::ball_a && pj == P::segment) || (pi == P::segment && pj == P::ball_a)) return via(x, y, a);
  if ((pi == P::ball_b && pj == P::segment) || (pi == P::segment && pj == P::ball_b)) return via(x, y, b);
  // one point in each ball
  const auto& pa = pi == P::ball_a ? x : y;
  const auto& pb = pi == P::ball_a ? y : x;
  return euclidean(pa, a) + m.segment_length + euclidean(b, pb);
}

// Per-axis length of the cell [c - h/2, c + h/2] clipped to [-extent, extent].
double clipped_cell(double c, double h, double extent) {
  const double lo = std::max(c - 0.5 * h, -extent);
  const double hi = std::min(c + 0.5 * h, extent);
  return std::max(hi - lo, 0.0);
}

struct Lattice {
  int n = 0;
  long m = 0;  // indices run over [-m, m]
  std::size_t count = 0;
  std::vector<std::size_t> stride;

  Lattice(int dim, long half) : n(dim), m(half), stride(static_cast<std::size_t>(dim)) {
    const auto side = static_cast<std::size_t>(2 * half + 1);
    std::size_t s = 1;
    for (int k = n - 1; k >= 0; --k) {
      stride[static_cast<std::size_t>(k)] = s;
      s *= side;
    }
    count = s;
  }

  void unpack(std::size_t index, std::vector<long>& out) const {
    const auto side = static_cast<std::size_t>(2 * m + 1);
    for (int k = n - 1; k >= 0; --k) {
      out[static_cast<std::size_t>(k)] = static_cast<long>(index % side) - m;
      index /= side;
    }
  }
};

// All nonzero offsets in {-1,0,1}^n with lexicographically positive sign
// (each undirected neighbor pair appears once).
std::vector<std::vector<int>> forward_offsets(int n, bool diagonal) {
  std::vector<std::vector<int>> out;
  if (!diagonal) {
    for (int k = 0; k < n; ++k) {
      std::vector<int> o(static_cast<std::size_t>(n), 0);
      o[static_cast<std::size_t>(k)] = 1;
      out.push_back(o);
    }
    return out;
  }
  std::vector<int> o(static_cast<std::size_t>(n), -1);
  while (true) {
    auto first = std::find_if(o.begin(), o.end(), [](int v) { return v != 0; });
    if (first != o.end() && *first > 0) out.push_back(o);
    int k = n - 1;
    while (k >= 0 && o[static_cast<std::size_t>(k)] == 1) o[static_cast<std::size_t>(k--)] = -1;
    if (k < 0) break;
    ++o[static_cast<std::size_t>(k)];
  }
  return out;
}

// Builds nodes of a cubic lattice filtered by `keep`, axis (or diagonal) edges
// between kept nodes.
template <class Keep, class Mass>
void lattice_nodes(const Lattice& lat, double h, bool diagonal, Keep keep, Mass mass_of,
                   std::vector<double>& coords, std::vector<double>& masses,
                   std::vector<Edge>& edges) {
  const int n = lat.n;
  std::vector<std::int64_t> id(lat.count, -1);
  std::vector<long> idx(static_cast<std::size_t>(n));
  std::vector<double> x(static_cast<std::size_t>(n));
  for (std::size_t li = 0; li < lat.count; ++li) {
    lat.unpack(li, idx);
    for (int k = 0; k < n; ++k) x[static_cast<std::size_t>(k)] = static_cast<double>(idx[static_cast<std::size_t>(k)]) * h;
    if (!keep(x)) continue;
    id[li] = static_cast<std::int64_t>(masses.size());
    coords.insert(coords.end(), x.begin(), x.end());
    masses.push_back(mass_of(x));
  }
  const auto offsets = forward_offsets(n, diagonal);
  for (std::size_t li = 0; li < lat.count; ++li) {
    if (id[li] < 0) continue;
    lat.unpack(li, idx);
    for (const auto& off : offsets) {
      bool inside = true;
      std::ptrdiff_t delta = 0;
      int norm2 = 0;
      for (int k = 0; k < n; ++k) {
        const long v = idx[static_cast<std::size_t>(k)] + off[static_cast<std::size_t>(k)];
        if (v < -lat.m || v > lat.m) {
          inside = false;
          break;
        }
        delta += static_cast<std::ptrdiff_t>(off[static_cast<std::size_t>(k)]) *
                 static_cast<std::ptrdiff_t>(lat.stride[static_cast<std::size_t>(k)]);
        norm2 += off[static_cast<std::size_t>(k)] * off[static_cast<std::size_t>(k)];
      }
      if (!inside) continue;
      const auto other = id[static_cast<std::size_t>(static_cast<std::ptrdiff_t>(li) + delta)];
      if (other < 0) continue;
      edges.push_back({static_cast<NodeId>(id[li]), static_cast<NodeId>(other),
                       h * std::sqrt(static_cast<double>(norm2))});
    }
  }
}

void require(bool cond, const char* message) {
  if (!cond) throw std::invalid_argument(message);
}

long lattice_half(double extent, double h) {
  return static_cast<long>(std::floor(extent / h + 1e-9));
}

}  // namespace

void SpaceParams::validate() const {
  require(doubling_constant >= 1.0, "SpaceParams: C_K must be >= 1");
  require(doubling_radius > 0.0, "SpaceParams: R_K must be > 0");
  require(poincare_dilation >= 1.0, "SpaceParams: tau_K must be >= 1");
  require(resolution > 0.0, "SpaceParams: h must be > 0");
}

double koranyi_norm(double x, double y, double t) {
  const double z2 = x * x + y * y;
  return std::sqrt(std::sqrt(z2 * z2 + 16.0 * t * t));
}

DiscreteSpace::DiscreteSpace(std::string kind, std::size_t coord_dim, std::vector<double> coords,
                             std::vector<double> masses, std::vector<Edge> edges, Metric metric,
                             SpaceParams params)
    : kind_(std::move(kind)),
      coord_dim_(coord_dim),
      coords_(std::move(coords)),
      masses_(std::move(masses)),
      edges_(std::move(edges)),
      metric_(std::move(metric)),
      params_(params) {
  params_.validate();
  require(!masses_.empty(), "DiscreteSpace: no nodes");
  require(coords_.size() == masses_.size() * coord_dim_, "DiscreteSpace: coordinate count mismatch");
  require(masses_.size() < std::numeric_limits<NodeId>::max(), "DiscreteSpace: too many nodes");
  for (double m : masses_) {
    if (!(m > 0.0) || !std::isfinite(m)) throw std::invalid_argument("DiscreteSpace: node masses must be positive and finite");
    total_mass_ += m;
  }
  for (const auto& e : edges_) {
    require(e.a < masses_.size() && e.b < masses_.size() && e.a != e.b, "DiscreteSpace: bad edge endpoints");
    require(e.length > 0.0 && std::isfinite(e.length), "DiscreteSpace: edge length must be positive");
  }
  if (const auto* g = std::get_if<metric::GluedBalls>(&metric_))
    require(g->part && g->part->size() == masses_.size(), "DiscreteSpace: glued metric labels mismatch");
  build_adjacency();
  if (!std::holds_alternative<metric::GraphPath>(metric_)) {
    for (const auto& e : edges_) {
      const double d = distance(e.a, e.b);
      if (std::abs(d - e.length) > kEdgeTolerance * std::max(d, e.length))
        throw std::invalid_argument("DiscreteSpace: edge length disagrees with the metric");
    }
  }
}

void DiscreteSpace::build_adjacency() {
  const std::size_t n = masses_.size();
  adj_offsets_.assign(n + 1, 0);
  for (const auto& e : edges_) {
    ++adj_offsets_[e.a + 1];
    ++adj_offsets_[e.b + 1];
  }
  std::partial_sum(adj_offsets_.begin(), adj_offsets_.end(), adj_offsets_.begin());
  adj_nodes_.resize(2 * edges_.size());
  adj_edges_.resize(2 * edges_.size());
  std::vector<std::size_t> fill(adj_offsets_.begin(), adj_offsets_.end() - 1);
  for (std::uint32_t k = 0; k < edges_.size(); ++k) {
    const auto& e = edges_[k];
    adj_nodes_[fill[e.a]] = e.b;
    adj_edges_[fill[e.a]++] = k;
    adj_nodes_[fill[e.b]] = e.a;
    adj_edges_[fill[e.b]++] = k;
  }
}

double DiscreteSpace::distance(NodeId i, NodeId j) const {
  if (i == j) return 0.0;
  return std::visit(
      [&](const auto& m) -> double {
        using M = std::decay_t<decltype(m)>;
        if constexpr (std::is_same_v<M, metric::Euclidean>) {
          return euclidean(coords(i), coords(j));
        } else if constexpr (std::is_same_v<M, metric::Koranyi>) {
          return koranyi(coords(i), coords(j));
        } else if constexpr (std::is_same_v<M, metric::GluedBalls>) {
          return glued(m, i, coords(i), j, coords(j));
        } else {
          return graph_distances(i)[j];
        }
      },
      metric_);
}

std::vector<double> DiscreteSpace::distances_from(NodeId source) const {
  if (std::holds_alternative<metric::GraphPath>(metric_)) return graph_distances(source);
  std::vector<double> d(size());
  for (NodeId j = 0; j < size(); ++j) d[j] = distance(source, j);
  return d;
}

std::vector<double> DiscreteSpace::graph_distances(NodeId source) const {
  std::vector<double> dist(size(), std::numeric_limits<double>::infinity());
  using Item = std::pair<double, NodeId>;
  std::priority_queue<Item, std::vector<Item>, std::greater<>> queue;
  dist[source] = 0.0;
  queue.push({0.0, source});
  while (!queue.empty()) {
    auto [d, v] = queue.top();
    queue.pop();
    if (d > dist[v]) continue;
    const auto nb = neighbors(v);
    const auto inc = incident_edges(v);
    for (std::size_t k = 0; k < nb.size(); ++k) {
      const double cand = d + edges_[inc[k]].length;
      if (cand < dist[nb[k]]) {
        dist[nb[k]] = cand;
        queue.push({cand, nb[k]});
      }
    }
  }
  return dist;
}

NodeId DiscreteSpace::nearest_node(std::span<const double> point) const {
  require(point.size() == coord_dim_, "nearest_node: dimension mismatch");
  NodeId best = 0;
  double best_d = std::numeric_limits<double>::infinity();
  for (NodeId i = 0; i < size(); ++i) {
    const double d = euclidean(coords(i), point);
    if (d < best_d) {
      best_d = d;
      best = i;
    }
  }
  return best;
}

DiscreteSpace DiscreteSpace::with_masses(std::vector<double> masses) const {
  return DiscreteSpace(kind_, coord_dim_, coords_, std::move(masses), edges_, metric_, params_);
}

DiscreteSpace DiscreteSpace::with_params(SpaceParams params) const {
  return DiscreteSpace(kind_, coord_dim_, coords_, masses_, edges_, metric_, params);
}

DiscreteSpace build_euclidean_grid(int n, double half_extent, double h, double alpha,
                                   GridOptions options) {
  require(n >= 1 && n <= 4, "build_euclidean_grid: n must be in {1,2,3,4}");
  require(h > 0.0, "build_euclidean_grid: h must be > 0");
  require(half_extent >= 10.0 * h * (1.0 - 1e-12), "build_euclidean_grid: half_extent must be >= 10h");
  require(alpha > -static_cast<double>(n), "build_euclidean_grid: weight |x|^alpha needs alpha > -n");

  const Lattice lat(n, lattice_half(half_extent, h));
  // Quadrant-midpoint average of |x|^alpha over the origin cell.
  const double origin_weight = std::pow(0.25 * h * std::sqrt(static_cast<double>(n)), alpha);
  std::vector<double> coords, masses;
  std::vector<Edge> edges;
  lattice_nodes(
      lat, h, options.diagonal_edges, [](const std::vector<double>&) { return true; },
      [&](const std::vector<double>& x) {
        double vol = 1.0, r2 = 0.0;
        for (double c : x) {
          vol *= clipped_cell(c, h, half_extent);
          r2 += c * c;
        }
        const double w = alpha == 0.0 ? 1.0 : (r2 == 0.0 ? origin_weight : std::pow(std::sqrt(r2), alpha));
        return w * vol;
      },
      coords, masses, edges);

  SpaceParams params;
  params.doubling_constant = std::pow(2.0, n + std::max(alpha, 0.0));
  params.doubling_radius = half_extent;
  params.resolution = h;
  return DiscreteSpace("euclidean", static_cast<std::size_t>(n), std::move(coords), std::move(masses),
                       std::move(edges), metric::Euclidean{}, params);
}

DiscreteSpace build_heisenberg_grid(double half_extent, double h, HeisenbergOptions options) {
  require(h > 0.0 && h < half_extent, "build_heisenberg_grid: need 0 < h < half_extent");
  const double t_extent = options.t_half_extent.value_or(
      options.clip_to_gauge_ball ? 0.25 * half_extent * half_extent * (1.0 + 1e-9) : half_extent * half_extent);
  require(t_extent > 0.0, "build_heisenberg_grid: t extent must be > 0");

  // Node (a, b, k) sits at (a h, b h, k h^2 / 2) with k + a b even; this coset
  // is closed under right translation by (±h,0,0) and (0,±h,0).
  const long am = lattice_half(half_extent, h);
  const long km = static_cast<long>(std::floor(2.0 * t_extent / (h * h) + 1e-9));
  const auto side_a = static_cast<std::size_t>(2 * am + 1);
  const auto side_k = static_cast<std::size_t>(2 * km + 1);
  auto flat = [&](long a, long b, long k) {
    return (static_cast<std::size_t>(a + am) * side_a + static_cast<std::size_t>(b + am)) * side_k +
           static_cast<std::size_t>(k + km);
  };
  std::vector<std::int32_t> id(side_a * side_a * side_k, -1);
  std::vector<double> coords, masses;
  const double cell = h * h * h * h;
  const double clip = half_extent * (1.0 + 1e-12);
  for (long a = -am; a <= am; ++a)
    for (long b = -am; b <= am; ++b)
      for (long k = -km; k <= km; ++k) {
        if (((k + a * b) % 2 + 2) % 2 != 0) continue;
        const double x = static_cast<double>(a) * h;
        const double y = static_cast<double>(b) * h;
        const double t = 0.5 * static_cast<double>(k) * h * h;
        if (options.clip_to_gauge_ball && koranyi_norm(x, y, t) > clip) continue;
        id[flat(a, b, k)] = static_cast<std::int32_t>(masses.size());
        coords.insert(coords.end(), {x, y, t});
        masses.push_back(cell);
      }
  std::vector<Edge> edges;
  edges.reserve(2 * masses.size());
  for (long a = -am; a <= am; ++a)
    for (long b = -am; b <= am; ++b)
      for (long k = -km; k <= km; ++k) {
        const auto self = id[flat(a, b, k)];
        if (self < 0) continue;
        // g∘(h,0,0) = (a+1, b, k-b);  g∘(0,h,0) = (a, b+1, k+a)
        if (a + 1 <= am && k - b >= -km && k - b <= km) {
          const auto o = id[flat(a + 1, b, k - b)];
          if (o >= 0) edges.push_back({static_cast<NodeId>(self), static_cast<NodeId>(o), h});
        }
        if (b + 1 <= am && k + a >= -km && k + a <= km) {
          const auto o = id[flat(a, b + 1, k + a)];
          if (o >= 0) edges.push_back({static_cast<NodeId>(self), static_cast<NodeId>(o), h});
        }
      }
  SpaceParams params;
  params.doubling_constant = 16.0;
  params.doubling_radius = half_extent;
  params.resolution = h;
  return DiscreteSpace("heisenberg", 3, std::move(coords), std::move(masses), std::move(edges),
                       metric::Koranyi{}, params);
}

DiscreteSpace build_double_cone(int n, double half_extent, double h) {
  require(n >= 2 && n <= 4, "build_double_cone: n must be in {2,3,4}");
  require(h > 0.0 && half_extent >= 10.0 * h * (1.0 - 1e-12), "build_double_cone: need h > 0 and half_extent >= 10h");
  const Lattice lat(n, lattice_half(half_extent, h));
  const double slack = 1e-9 * h * h;
  std::vector<double> coords, masses;
  std::vector<Edge> edges;
  lattice_nodes(
      lat, h, false,
      [&](const std::vector<double>& x) {
        double lateral = 0.0;
        for (int k = 0; k + 1 < n; ++k) lateral += x[static_cast<std::size_t>(k)] * x[static_cast<std::size_t>(k)];
        const double axial = x.back() * x.back();
        return lateral <= axial + slack;
      },
      [&](const std::vector<double>& x) {
        double vol = 1.0;
        for (double c : x) vol *= clipped_cell(c, h, half_extent);
        return vol;
      },
      coords, masses, edges);
  SpaceParams params;
  params.doubling_constant = std::pow(2.0, n);
  params.doubling_radius = half_extent;
  params.resolution = h;
  return DiscreteSpace("double_cone", static_cast<std::size_t>(n), std::move(coords), std::move(masses),
                       std::move(edges), metric::Euclidean{}, params);
}

DiscreteSpace build_glued_balls(int n, double h, double segment_length) {
  require(n >= 2 && n <= 4, "build_glued_balls: n must be in {2,3,4}");
  require(h > 0.0 && h <= 0.1, "build_glued_balls: need 0 < h <= 0.1");
  require(segment_length >= h * (1.0 - 1e-12), "build_glued_balls: segment_length must be >= h");
  const double cells = 1.0 / h;
  require(std::abs(cells - std::round(cells)) < 1e-9 * cells, "build_glued_balls: 1/h must be an integer");

  const auto dim = static_cast<std::size_t>(n);
  const double half_gap = 0.5 * segment_length;
  std::vector<double> center_a(dim, 0.0), center_b(dim, 0.0), attach_a(dim, 0.0), attach_b(dim, 0.0);
  center_a[0] = -1.0 - half_gap;
  center_b[0] = 1.0 + half_gap;
  attach_a[0] = -half_gap;
  attach_b[0] = half_gap;

  std::vector<double> unit_coords, unit_masses;
  std::vector<Edge> unit_edges;
  const Lattice lat(n, lattice_half(1.0, h));
  lattice_nodes(
      lat, h, false,
      [&](const std::vector<double>& x) {
        double r2 = 0.0;
        for (double c : x) r2 += c * c;
        return r2 <= 1.0 + 1e-9;
      },
      [&](const std::vector<double>&) { return std::pow(h, n); }, unit_coords, unit_masses, unit_edges);

  const std::size_t ball_nodes = unit_masses.size();
  std::vector<double> coords;
  std::vector<double> masses;
  std::vector<Edge> edges;
  auto parts = std::make_shared<std::vector<std::uint8_t>>();
  NodeId tip_a = 0, tip_b = 0;
  for (int piece = 0; piece < 2; ++piece) {
    const auto& center = piece == 0 ? center_a : center_b;
    const auto base = static_cast<NodeId>(masses.size());
    for (std::size_t i = 0; i < ball_nodes; ++i) {
      bool is_tip = true;
      for (std::size_t k = 0; k < dim; ++k) {
        const double u = unit_coords[i * dim + k];
        coords.push_back(center[k] + u);
        const double want = k == 0 ? (piece == 0 ? 1.0 : -1.0) : 0.0;
        if (std::abs(u - want) > 1e-9) is_tip = false;
      }
      if (is_tip) (piece == 0 ? tip_a : tip_b) = base + static_cast<NodeId>(i);
      masses.push_back(unit_masses[i]);
      parts->push_back(piece == 0 ? metric::GluedBalls::ball_a : metric::GluedBalls::ball_b);
    }
    for (const auto& e : unit_edges) edges.push_back({base + e.a, base + e.b, e.length});
  }
  // Straighten the attachment coordinates onto the exact tips.
  for (std::size_t k = 0; k < dim; ++k) {
    coords[tip_a * dim + k] = attach_a[k];
    coords[tip_b * dim + k] = attach_b[k];
  }

  const auto steps = std::max<long>(1, std::lround(std::ceil(segment_length / h - 1e-9)));
  const double spacing = segment_length / static_cast<double>(steps);
  NodeId prev = tip_a;
  for (long s = 1; s < steps; ++s) {
    const auto node = static_cast<NodeId>(masses.size());
    for (std::size_t k = 0; k < dim; ++k)
      coords.push_back(k == 0 ? attach_a[0] + spacing * static_cast<double>(s) : 0.0);
    masses.push_back(spacing);
    parts->push_back(metric::GluedBalls::segment);
    edges.push_back({prev, node, spacing});
    prev = node;
  }
  edges.push_back({prev, tip_b, steps == 1 ? segment_length : spacing});

  metric::GluedBalls m;
  m.part = std::move(parts);
  m.attach_a = attach_a;
  m.attach_b = attach_b;
  m.segment_length = segment_length;
  SpaceParams params;
  params.doubling_constant = std::pow(2.0, n);
  params.doubling_radius = 1.0;
  params.resolution = h;
  return DiscreteSpace("glued_balls", dim, std::move(coords), std::move(masses), std::move(edges), m, params);
}

NodeSet ball(const DiscreteSpace& space, NodeId center, double r) {
  require(r >= 0.0, "ball: radius must be >= 0");
  const auto d = space.distances_from(center);
  NodeSet out;
  for (NodeId i = 0; i < d.size(); ++i)
    if (d[i] < r) out.push_back(i);
  return out;
}

NodeSet closed_ball(const DiscreteSpace& space, NodeId center, double r) {
  require(r >= 0.0, "closed_ball: radius must be >= 0");
  const auto d = space.distances_from(center);
  NodeSet out;
  for (NodeId i = 0; i < d.size(); ++i)
    if (d[i] <= r) out.push_back(i);
  return out;
}

double mass(const DiscreteSpace& space, const NodeSet& nodes) {
  double total = 0.0;
  for (NodeId i : nodes) total += space.node_mass(i);
  return total;
}

NodeSet set_union(const NodeSet& a, const NodeSet& b) {
  NodeSet out;
  std::set_union(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(out));
  return out;
}

NodeSet set_difference(const NodeSet& a, const NodeSet& b) {
  NodeSet out;
  std::set_difference(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(out));
  return out;
}

bool is_subset(const NodeSet& inner, const NodeSet& outer) {
  return std::includes(outer.begin(), outer.end(), inner.begin(), inner.end());
}

std::vector<char> to_mask(const DiscreteSpace& space, const NodeSet& nodes) {
  std::vector<char> mask(space.size(), 0);
  for (NodeId i : nodes) {
    require(i < space.size(), "to_mask: node id out of range");
    mask[i] = 1;
  }
  return mask;
}

bool MetricReport::pass(double tolerance) const {
  return identity_ok && max_relative_triangle_violation <= tolerance && max_asymmetry <= tolerance &&
         max_edge_length_error <= tolerance;
}

MetricReport verify_metric(const DiscreteSpace& space, std::size_t samples, std::uint64_t seed) {
  MetricReport report;
  report.samples = samples;
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<NodeId> pick(0, static_cast<NodeId>(space.size() - 1));
  for (std::size_t s = 0; s < samples; ++s) {
    const NodeId x = pick(rng), y = pick(rng), z = pick(rng);
    const double dxz = space.distance(x, z);
    const double viol = dxz - space.distance(x, y) - space.distance(y, z);
    if (viol > report.max_triangle_violation) report.max_triangle_violation = viol;
    if (dxz > 0.0) report.max_relative_triangle_violation = std::max(report.max_relative_triangle_violation, viol / dxz);
    const double dxy = space.distance(x, y), dyx = space.distance(y, x);
    if (dxy > 0.0) report.max_asymmetry = std::max(report.max_asymmetry, std::abs(dxy - dyx) / dxy);
    if (space.distance(x, x) != 0.0) report.identity_ok = false;
    if (x != y && !(dxy > 0.0)) report.identity_ok = false;
  }
  for (const auto& e : space.edges()) {
    const double d = space.distance(e.a, e.b);
    report.max_edge_length_error = std::max(report.max_edge_length_error, std::abs(d - e.length) / e.length);
  }
  return report;
}

void write_space(std::ostream& out, const DiscreteSpace& space) {
  out << space.size() << ' ' << space.edges().size() << '\n';
  for (NodeId i = 0; i < space.size(); ++i) {
    out << i;
    for (double c : space.coords(i)) out << ' ' << format_double(c);
    out << ' ' << format_double(space.node_mass(i)) << '\n';
  }
  for (const auto& e : space.edges()) out << e.a << ' ' << e.b << ' ' << format_double(e.length) << '\n';
}

DiscreteSpace read_space(std::istream& in, MetricKind metric_kind, SpaceParams params) {
  std::string line;
  auto next_line = [&]() {
    while (std::getline(in, line))
      if (line.find_first_not_of(" \t\r") != std::string::npos) return true;
    return false;
  };
  if (!next_line()) throw std::runtime_error("read_space: missing header");
  std::size_t node_count = 0, edge_count = 0;
  {
    std::istringstream hs(line);
    if (!(hs >> node_count >> edge_count)) throw std::runtime_error("read_space: malformed header");
  }
  std::vector<double> coords, masses;
  std::size_t dim = 0;
  for (std::size_t i = 0; i < node_count; ++i) {
    if (!next_line()) throw std::runtime_error("read_space: truncated node block");
    std::istringstream ls(line);
    std::size_t id = 0;
    if (!(ls >> id) || id != i) throw std::runtime_error("read_space: node ids must be 0..N-1 in order");
    std::vector<double> values;
    std::string tok;
    while (ls >> tok) values.push_back(std::stod(tok));
    if (values.empty()) throw std::runtime_error("read_space: node line without mass");
    if (i == 0) dim = values.size() - 1;
    if (values.size() != dim + 1) throw std::runtime_error("read_space: inconsistent coordinate count");
    coords.insert(coords.end(), values.begin(), values.end() - 1);
    masses.push_back(values.back());
  }
  std::vector<Edge> edges;
  for (std::size_t k = 0; k < edge_count; ++k) {
    if (!next_line()) throw std::runtime_error("read_space: truncated edge block");
    std::istringstream ls(line);
    Edge e;
    std::string len;
    if (!(ls >> e.a >> e.b >> len)) throw std::runtime_error("read_space: malformed edge line");
    e.length = std::stod(len);
    edges.push_back(e);
  }
  Metric m;
  switch (metric_kind) {
    case MetricKind::euclidean: m = metric::Euclidean{}; break;
    case MetricKind::koranyi: m = metric::Koranyi{}; break;
    case MetricKind::graph_path: m = metric::GraphPath{}; break;
  }
  return DiscreteSpace("imported", dim, std::move(coords), std::move(masses), std::move(edges), m, params);
}

}  // namespace ringcap
