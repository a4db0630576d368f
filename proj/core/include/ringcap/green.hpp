#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "ringcap/bounds.hpp"
#include "ringcap/solver.hpp"
#include "ringcap/space.hpp"

namespace ringcap {

/// Discrete singular function G = cap_rho^(1/(1-p0)) u, where u is the
/// capacitary potential of (closed B(x0, rho), Omega).
struct SingularFunction {
  std::vector<double> G;
  NodeId center = 0;
  NodeSet domain;
  double p0 = 2.0;
  double rho = 0.0;
  double cap_rho = 0.0;
  double max_G = 0.0;
  bool converged = false;
  int iterations = 0;
  /// Largest |G_a - G_b| / (len * max_G) over edges: a crude continuity gauge.
  double max_edge_jump = 0.0;
};

/// rho defaults to 3h. Requires rho >= 2h, the closed rho-ball inside Omega,
/// and Omega connected in the neighbor graph.
SingularFunction build_green(const DiscreteSpace& space, const NodeSet& domain, NodeId x0, double p0,
                             std::optional<double> rho = std::nullopt, const SolverOptions& options = {});

struct LevelPair {
  double alpha = 0.0;
  double beta = 0.0;
};

struct LevelRow {
  LevelPair levels;  // absolute
  bool skipped = false;
  double capacity = 0.0;
  double ratio = 0.0;  // capacity * (beta - alpha)^(p0 - 1)
  bool converged = false;
};

struct LevelReport {
  std::vector<LevelRow> rows;
  double min_ratio = 0.0;
  double max_ratio = 0.0;
  bool pass = false;  // max_ratio / min_ratio <= band
};

/// Capacity of ({G >= beta}, {G > alpha}) per pair. With `fractions` the
/// levels are read as multiples of max G.
LevelReport check_level_sets(const DiscreteSpace& space, const SingularFunction& green,
                             const std::vector<LevelPair>& levels, bool fractions = false, double band = 4.0,
                             const SolverOptions& options = {});

struct BlowupReport {
  std::string regime;
  std::vector<double> h;
  std::vector<double> max_G;
  bool strictly_increasing = false;
  /// critical: slope of log(exp(c max_G)) vs log(1/h) with c = cap scale set by
  /// `critical_scale`; below: slope of log max_G vs log(1/h).
  double growth_slope = 0.0;
  double last_relative_change = 0.0;
  bool pass = false;
};

/// Omega = B(x0, omega_radius) with x0 the node nearest `center` in each
/// space. Unbounded growth is expected for p0 <= Qx0 and stabilization
/// within 10% over the two finest levels otherwise.
BlowupReport blowup_trend(const std::vector<std::reference_wrapper<const DiscreteSpace>>& spaces,
                          const std::vector<double>& center, double omega_radius, double p0, double Qx0,
                          double critical_scale = 1.0, const SolverOptions& options = {});

struct MaximumPrincipleReport {
  bool pass = false;
  std::size_t interior_checked = 0;
  std::size_t strict_local_maxima = 0;
  std::size_t negative_nodes = 0;
  std::size_t nonzero_outside = 0;
  std::size_t nonpositive_in_component = 0;
};

MaximumPrincipleReport maximum_principle_check(const DiscreteSpace& space, const SingularFunction& green,
                                               double tol = 1e-9);

}  // namespace ringcap
