#pragma once

#include <ostream>
#include <vector>

#include "flame/numkit/rng.hpp"

namespace flame::env {

struct StepResult {
  Vector state;
  double reward = 0.0;
  /// True terminal state: no bootstrapping past it.
  bool terminated = false;
  /// Episode cut by the horizon; the next state is still bootstrapped.
  bool truncated = false;
};

/// Episodic task with box-bounded continuous actions.
class Environment {
 public:
  virtual ~Environment() = default;

  virtual Index state_dim() const = 0;
  virtual Index action_dim() const = 0;
  virtual Vector action_low() const = 0;
  virtual Vector action_high() const = 0;

  virtual Vector reset(nk::Rng& rng) = 0;
  /// Actions outside the box are clipped before use.
  virtual StepResult step(const Vector& action) = 0;
};

struct RolloutStep {
  int step = 0;
  Vector state;
  Vector action;
  double reward = 0.0;
  bool done = false;
};

/// CSV rows: step, s_0..s_{m-1}, a_0..a_{d-1}, r, done (with a header line).
void write_rollout_csv(std::ostream& out, const std::vector<RolloutStep>& steps);

Vector clip_to_box(const Vector& a, const Vector& lo, const Vector& hi);

}  // namespace flame::env
