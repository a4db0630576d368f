#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <variant>
#include <vector>

namespace ringcap {

using NodeId = std::uint32_t;

/// Sorted, duplicate-free list of node ids.
using NodeSet = std::vector<NodeId>;

struct Edge {
  NodeId a = 0;
  NodeId b = 0;
  double length = 0.0;
};

/// Local parameters of the compact set a discretization was built for.
struct SpaceParams {
  double doubling_constant = 1.0;  // C_K
  double doubling_radius = 1.0;    // R_K, radius scale up to which doubling holds
  double poincare_dilation = 1.0;  // tau_K, carried as metadata only
  double resolution = 1.0;         // grid spacing h

  void validate() const;
};

namespace metric {

struct Euclidean {};

/// Korányi gauge on the first Heisenberg group. Coordinates are (x, y, t) with
/// group law (z,t)∘(z',t') = (z+z', t+t' - Im(z conj(z'))/2).
struct Koranyi {};

/// Two closed unit balls joined by a straight segment. Points of different
/// pieces are connected only through the attachment points.
struct GluedBalls {
  enum Part : std::uint8_t { ball_a = 0, ball_b = 1, segment = 2 };
  std::shared_ptr<const std::vector<std::uint8_t>> part;
  std::vector<double> attach_a;
  std::vector<double> attach_b;
  double segment_length = 0.0;
};

/// Shortest path along the edges. Used for imported spaces.
struct GraphPath {};

}  // namespace metric

using Metric = std::variant<metric::Euclidean, metric::Koranyi, metric::GluedBalls, metric::GraphPath>;

enum class MetricKind { euclidean, koranyi, graph_path };

/// Finite metric measure space: points, a metric, positive node masses and a
/// neighbor graph whose edge lengths agree with the metric.
///
/// Immutable after construction, so concurrent readers need no locking.
class DiscreteSpace {
 public:
  DiscreteSpace(std::string kind, std::size_t coord_dim, std::vector<double> coords,
                std::vector<double> masses, std::vector<Edge> edges, Metric metric,
                SpaceParams params);

  const std::string& kind() const noexcept { return kind_; }
  std::size_t size() const noexcept { return masses_.size(); }
  std::size_t coord_dim() const noexcept { return coord_dim_; }
  const SpaceParams& params() const noexcept { return params_; }
  const Metric& metric() const noexcept { return metric_; }

  std::span<const double> coords(NodeId i) const {
    return {coords_.data() + static_cast<std::size_t>(i) * coord_dim_, coord_dim_};
  }
  double node_mass(NodeId i) const { return masses_[i]; }
  std::span<const double> masses() const noexcept { return masses_; }
  double total_mass() const noexcept { return total_mass_; }

  std::span<const Edge> edges() const noexcept { return edges_; }
  std::span<const NodeId> neighbors(NodeId i) const {
    return {adj_nodes_.data() + adj_offsets_[i], adj_offsets_[i + 1] - adj_offsets_[i]};
  }
  std::span<const std::uint32_t> incident_edges(NodeId i) const {
    return {adj_edges_.data() + adj_offsets_[i], adj_offsets_[i + 1] - adj_offsets_[i]};
  }
  std::size_t degree(NodeId i) const { return adj_offsets_[i + 1] - adj_offsets_[i]; }

  double distance(NodeId i, NodeId j) const;
  std::vector<double> distances_from(NodeId source) const;

  /// Node whose coordinates are closest (Euclidean in coordinate space) to `point`.
  NodeId nearest_node(std::span<const double> point) const;

  DiscreteSpace with_masses(std::vector<double> masses) const;
  DiscreteSpace with_params(SpaceParams params) const;

 private:
  void build_adjacency();
  std::vector<double> graph_distances(NodeId source) const;

  std::string kind_;
  std::size_t coord_dim_;
  std::vector<double> coords_;
  std::vector<double> masses_;
  std::vector<Edge> edges_;
  Metric metric_;
  SpaceParams params_;
  double total_mass_ = 0.0;
  std::vector<std::size_t> adj_offsets_;
  std::vector<NodeId> adj_nodes_;
  std::vector<std::uint32_t> adj_edges_;
};

struct GridOptions {
  bool diagonal_edges = false;
};

/// Uniform grid on [-half_extent, half_extent]^n with weight |x|^alpha.
DiscreteSpace build_euclidean_grid(int n, double half_extent, double h, double alpha,
                                   GridOptions options = {});

struct HeisenbergOptions {
  /// Half extent in t. Defaults to half_extent^2, or half_extent^2 / 4 when clipping.
  std::optional<double> t_half_extent;
  /// Keep only nodes with gauge norm <= half_extent.
  bool clip_to_gauge_ball = false;
};

/// Lattice subgroup of H^1 with x,y spacing h. Each node is joined to its
/// right translates by (±h,0,0) and (0,±h,0), so every edge is horizontal
/// with gauge length exactly h.
DiscreteSpace build_heisenberg_grid(double half_extent, double h, HeisenbergOptions options = {});

/// Grid nodes with x_1^2 + ... + x_{n-1}^2 <= x_n^2, restricted Euclidean metric.
DiscreteSpace build_double_cone(int n, double half_extent, double h);

/// Two unit-ball grids joined by a chain of nodes of the given length.
DiscreteSpace build_glued_balls(int n, double h, double segment_length);

/// Korányi norm of (x, y, t).
double koranyi_norm(double x, double y, double t);

/// Open ball {y : d(y, center) < r}.
NodeSet ball(const DiscreteSpace& space, NodeId center, double r);
/// Closed ball {y : d(y, center) <= r}.
NodeSet closed_ball(const DiscreteSpace& space, NodeId center, double r);
double mass(const DiscreteSpace& space, const NodeSet& nodes);

NodeSet set_union(const NodeSet& a, const NodeSet& b);
NodeSet set_difference(const NodeSet& a, const NodeSet& b);
bool is_subset(const NodeSet& inner, const NodeSet& outer);
std::vector<char> to_mask(const DiscreteSpace& space, const NodeSet& nodes);

struct MetricReport {
  std::size_t samples = 0;
  double max_triangle_violation = 0.0;           // absolute
  double max_relative_triangle_violation = 0.0;  // relative to d(x,z)
  double max_asymmetry = 0.0;
  double max_edge_length_error = 0.0;  // relative
  bool identity_ok = true;
  bool pass(double tolerance = 1e-9) const;
};

MetricReport verify_metric(const DiscreteSpace& space, std::size_t samples, std::uint64_t seed);

/// Flat text form: "N E", then `id x1 .. xk mass` per node, then `i j length`
/// per edge, all decimals with 17 significant digits.
void write_space(std::ostream& out, const DiscreteSpace& space);
DiscreteSpace read_space(std::istream& in, MetricKind metric, SpaceParams params);

}  // namespace ringcap
