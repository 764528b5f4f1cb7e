#pragma once

#include "flame/numkit/types.hpp"

namespace flame::env {

struct Coverage {
  /// Fraction of rollouts ending within the radius of each goal.
  Vector fractions;
  /// Goals whose fraction reaches the threshold passed to goals_covered().
  int goals_covered(double min_fraction) const;
  bool none() const { return (fractions.array() == 0.0).all(); }
};

/// terminal_states: one row per rollout. Requires at least min_rollouts rows.
Coverage mode_coverage(const Matrix& terminal_states, const Matrix& goals, double radius, Index min_rollouts = 100);

}  // namespace flame::env
