#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "ringcap/condenser.hpp"
#include "ringcap/profiles.hpp"
#include "ringcap/space.hpp"

namespace ringcap {

struct SolverOptions {
  double tol = 1e-8;
  int max_iter = 100;
  std::size_t max_cg_iter = 200000;
  /// Lower bound on the ratio of a reweighted conductance to the largest one (p0 > 2).
  double weight_floor = 1e-12;
  /// Upper bound on the ratio of a reweighted conductance to the smallest one (p0 < 2).
  double weight_cap = 1e8;
};

struct CapacityResult {
  double value = 0.0;
  PotentialField field;
  int iterations = 0;
  double residual = 0.0;
  bool converged = false;

  std::vector<double> energy_history;  // entry 0 is the starting field
  bool energy_monotone = true;
  std::size_t cg_iterations = 0;
  std::size_t free_nodes = 0;
  std::size_t unreachable_nodes = 0;  // free nodes with no path to a constraint, set to 0
  double range_violation = 0.0;       // max(0, -min u, max u - 1)
};

/// Minimizes sum_e c_e |u_a - u_b|^p0 with c_e = ((m_a + m_b)/2) / len^p0 over
/// fields equal to 1 on E and 0 off Ω.
///
/// Each iteration solves a graph Laplacian with conductances c_e |Δu|^(p0-2)
/// by Jacobi-preconditioned CG and then runs an exact line search on the
/// (convex) energy along the resulting direction, so the energy never
/// increases. Stops once the relative energy decrease and the relative
/// stationarity residual are both below tol. For p0 < 2 the residual target
/// is raised to at least 100 eps^(p0-1), the roundoff level of nearly flat edges.
CapacityResult solve_condenser(const DiscreteSpace& space, const Condenser& condenser, double p0,
                               const SolverOptions& options = {});

CapacityResult relative_capacity(const DiscreteSpace& space, NodeId x0, double r, double R, double p0,
                                 const SolverOptions& options = {});

/// Explicit pointwise and global dimensions used to pick bound branches.
struct DimensionInputs {
  double Q = 0.0;
  double Qx0 = 0.0;
};

/// Dimensions implied by the space's doubling constant (Q = Qx0 = log2 C_K).
DimensionInputs default_dimensions(const DiscreteSpace& space);

struct SandwichReport {
  double solver_value = 0.0;
  double profile_energy = 0.0;
  double lower = 0.0;
  double upper = 0.0;
  double solver_over_lower = 0.0;
  double profile_over_upper = 0.0;
  bool solver_below_profile = false;
  bool converged = false;
  std::string regime;
  std::string profile;
};

SandwichReport verify_sandwich(const DiscreteSpace& space, NodeId x0, double r, double R, double p0,
                               DimensionInputs dims, const SolverOptions& options = {});

struct MonotonicityCase {
  NodeId center = 0;
  double r = 0.0, r_big = 0.0, R = 0.0, R_big = 0.0;
  double cap = 0.0, cap_bigger_inner = 0.0, cap_bigger_domain = 0.0;
  bool inner_ok = false, domain_ok = false;
};

struct MonotonicityReport {
  std::vector<MonotonicityCase> cases;
  std::size_t failures = 0;
  bool pass() const { return failures == 0; }
};

/// Random nested pairs: E ⊂ E' must not lower capacity, Ω ⊂ Ω' must not raise it.
MonotonicityReport monotonicity_suite(const DiscreteSpace& space, double p0, std::uint64_t seed,
                                      std::size_t pairs = 50, const SolverOptions& options = {});

}  // namespace ringcap
