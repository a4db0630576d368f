#pragma once

#include <string>
#include <vector>

#include "ringcap/space.hpp"

namespace ringcap {

/// Open-ball masses about a fixed center for arbitrary radii (one distance
/// sweep, then binary searches).
class BallMassProfile {
 public:
  BallMassProfile(const DiscreteSpace& space, NodeId center);
  double open(double r) const;    // mu(B(x, r))
  double closed(double r) const;  // mu(closed B(x, r))
  NodeId center() const noexcept { return center_; }

 private:
  NodeId center_;
  std::vector<double> sorted_;
  std::vector<double> prefix_;
};

/// `count` log-spaced radii on [5h, r_max].
std::vector<double> sample_radii(const DiscreteSpace& space, double r_max, std::size_t count);

struct DoublingEstimate {
  double C_K = 1.0;
  NodeId worst_node = 0;
  double worst_radius = 0.0;
  std::vector<double> radii;  // r with 5h <= r and 2r <= R_K
};

/// max over x in K and sampled r of mu(B(x,2r)) / mu(B(x,r)).
DoublingEstimate doubling_constant(const DiscreteSpace& space, const NodeSet& K, double R_K,
                                   std::size_t radii_count = 8);

double local_dimension(double C_K);

struct PointwiseFit {
  NodeId node = 0;
  double Qx = 0.0;
  double intercept = 0.0;
  double fit_residual = 0.0;  // max relative deviation of mass from the power law
  std::vector<double> radii;
  std::vector<double> masses;
};

/// Slope of log mu(B(x,r)) against log r.
PointwiseFit pointwise_dimension(const DiscreteSpace& space, NodeId x, const std::vector<double>& radii);

struct VolumeBoundsCheck {
  bool pass = false;
  double c1 = 0.0;  // min of ratio / (r/R_K)^Q
  double c2 = 0.0;  // max of ratio / (r/R_K)^Qx
  std::vector<double> radii;
  std::vector<double> ratios;  // mu(B(x,r)) / mu(B(x,R_K))
};

/// Normalized ball masses against c1 (r/R_K)^Q from below and c2 (r/R_K)^Qx
/// from above. Both comparison constants equal 1 at r = R_K, so the check
/// passes when c1 >= 1/(1+slack) and c2 <= 1+slack.
VolumeBoundsCheck check_volume_bounds(const DiscreteSpace& space, NodeId x, double R_K, double Q, double Qx,
                                      std::size_t radii_count = 10, double slack = 0.2);

struct AhlforsRatio {
  double m = 0.0;
  double M = 0.0;
  double spread() const { return m > 0.0 ? M / m : 0.0; }
};

/// min/max of mu(B(x,r)) / r^Q_cand over sample nodes and radii.
AhlforsRatio ahlfors_regularity(const DiscreteSpace& space, double Q_cand, const NodeSet& samples,
                                const std::vector<double>& radii);

struct DimensionReport {
  double C_K = 1.0;
  double Q = 0.0;
  std::vector<PointwiseFit> Qx;
  std::vector<double> radii_used;
  double fit_residual = 0.0;
  double lower_C = 0.0;
  double upper_C = 0.0;
  bool volume_bounds_pass = false;

  std::string to_key_value() const;
  /// Header plus one row per (node, radius) sample.
  std::string to_csv() const;
};

/// Doubling over K, pointwise fits at `nodes` on radii [5h, R_K].
DimensionReport analyze_dimensions(const DiscreteSpace& space, const NodeSet& K, const NodeSet& nodes,
                                   double R_K, std::size_t radii_count = 8);

}  // namespace ringcap
