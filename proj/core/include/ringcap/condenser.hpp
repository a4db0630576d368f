#pragma once

#include <optional>

#include "ringcap/space.hpp"

namespace ringcap {

struct RingForm {
  NodeId center = 0;
  double r = 0.0;
  double R = 0.0;
};

/// Pair (E, Ω) of node sets with E ⊂ Ω. Admissible potentials are 1 on E and
/// 0 on every node outside Ω.
struct Condenser {
  NodeSet inner;
  NodeSet domain;
  std::optional<RingForm> ring;

  /// E = closed ball of radius r, Ω = open ball of radius R, both about x0.
  static Condenser ring_about(const DiscreteSpace& space, NodeId x0, double r, double R);

  /// Throws std::invalid_argument unless E is nonempty, E ⊂ Ω and Ω \ E is nonempty.
  void validate(const DiscreteSpace& space) const;
};

}  // namespace ringcap
