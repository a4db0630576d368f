#pragma once

#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "ringcap/profiles.hpp"
#include "ringcap/solver.hpp"
#include "ringcap/space.hpp"

namespace ringcap {

enum class Regime { below, critical, above };

std::string_view to_string(Regime regime);

/// Compares p0 with Q(x0); |p0 - Q(x0)| <= tol counts as critical.
Regime classify_regime(double p0, double Qx0, double tol = 1e-9);

struct BoundInputs {
  double r = 0.0;
  double R = 0.0;
  double p0 = 2.0;
  double Qx0 = 0.0;
  double Q = 0.0;           // echoed only
  double mass_inner = 0.0;  // mu(B(x0, r))
  double critical_tol = 1e-9;
};

/// Both closed-form ring bounds with every leading constant C set to 1.
struct RegimeEstimate {
  Regime regime = Regime::below;
  double lower = 0.0;
  double upper = 0.0;
  std::vector<std::pair<std::string, double>> constants;  // evaluation order
  BoundInputs inputs;
};

double lower_bound(const BoundInputs& in);
double upper_bound(const BoundInputs& in);
RegimeEstimate estimate_ring(const BoundInputs& in);

/// (r^(p0-1) sum_{y in B(x0,r), y != x} Lip u(y)^p0 d(x,y) / mu(B(x,d(x,y))) m_y)^(1/p0)
double riesz_potential(const DiscreteSpace& space, const PotentialField& field, NodeId x, NodeId x0,
                       double r, double p0);

struct SingletonLimit {
  std::vector<double> radii;
  std::vector<double> capacities;
  std::vector<bool> converged;
  bool non_increasing = true;
  bool strictly_decreasing = true;
  double limit = 0.0;          // last solved value
  double last_relative_change = 0.0;
  std::string trend;           // "vanishing" | "stabilizing" | "undetermined"
};

/// Solves the ring capacities cap(B(x0,r_k), B(x0,R)) for a strictly
/// decreasing radius sequence.
SingletonLimit singleton_capacity_limit(const DiscreteSpace& space, NodeId x0, double p0, double R,
                                        const std::vector<double>& radii, const SolverOptions& options = {});

}  // namespace ringcap
