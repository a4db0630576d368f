#pragma once

#include <vector>

#include "ringcap/space.hpp"

namespace ringcap {

/// Node potential u with its discrete upper-gradient surrogates.
///
/// `edge_gradient[e]` is |u_a - u_b| / length(e); `lip[i]` is the largest of
/// those over the edges incident to i. The edge-form energy weights each edge
/// by the average of its endpoint masses; the node-form energy weights
/// lip(i)^p by the node mass. When the field came from a radial profile,
/// `analytic_gradient[i]` holds |h'(d(x0, i))| and `energy_analytic` its
/// p-energy; otherwise both are empty/NaN.
struct PotentialField {
  double p = 2.0;
  std::vector<double> u;
  std::vector<double> edge_gradient;
  std::vector<double> lip;
  std::vector<double> analytic_gradient;
  double energy_edge = 0.0;
  double energy_node = 0.0;
  double energy_analytic = 0.0;
};

PotentialField make_field(const DiscreteSpace& space, std::vector<double> u, double p0);

struct EnergyReport {
  double edge = 0.0;
  double node = 0.0;
  double analytic = 0.0;  // NaN when no analytic gradient is attached
};

/// Edge-form energy sum_e ((m_a + m_b)/2) |u_a - u_b|^p / len^p, summed in edge order.
double edge_energy(const DiscreteSpace& space, const std::vector<double>& u, double p0);

EnergyReport p_energy(const DiscreteSpace& space, const PotentialField& field, double p0);

enum class ProfileKind { power, log };

/// Radial test function: 1 on [0, r], 0 on [R, inf), and in between either
/// (t^a - R^a)/(r^a - R^a) with a = (p0 - Qi)/(p0 - 1), or log(R/t)/log(R/r).
class RadialProfile {
 public:
  RadialProfile(ProfileKind kind, double r, double R, double exponent);

  ProfileKind kind() const noexcept { return kind_; }
  double inner() const noexcept { return r_; }
  double outer() const noexcept { return R_; }
  /// a = (p0 - Qi)/(p0 - 1) for power profiles, 0 for the log profile.
  double exponent() const noexcept { return a_; }

  double value(double t) const;
  double derivative(double t) const;

 private:
  ProfileKind kind_;
  double r_, R_, a_;
  double denom_;
};

RadialProfile power_profile(double r, double R, double p0, double Qi);
RadialProfile log_profile(double r, double R);

PotentialField radialize(const DiscreteSpace& space, NodeId x0, const RadialProfile& profile, double p0);

struct ShellRow {
  int k = 0;
  double inner = 0.0;  // shell is inner < d <= outer, clipped to d < R
  double outer = 0.0;
  double energy = 0.0;
};

struct ShellEnergy {
  int k0 = 0;  // floor(log2(R/r))
  std::vector<ShellRow> shells;
  double annulus_energy = 0.0;  // node form over r < d < R
};

/// Splits the node-form energy over B(x0,R) \ closed B(x0,r) into dyadic
/// shells 2^k r < d <= 2^(k+1) r, k = 0..k0.
ShellEnergy dyadic_shell_energy(const DiscreteSpace& space, NodeId x0, const PotentialField& field,
                                double p0, double r, double R);

}  // namespace ringcap
