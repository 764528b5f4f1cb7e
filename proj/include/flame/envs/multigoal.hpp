#pragma once

#include "flame/envs/environment.hpp"

namespace flame::env {

struct MultiGoalConfig {
  double reward_sigma = 1.0;
  int horizon = 30;
  /// Start states are uniform on [-w, w]^2.
  double start_half_width = 0.5;
  double goal_radius = 0.5;
  /// End the episode once the agent is within goal_radius of a goal.
  bool terminate_at_goal = false;
};

/// Point mass with velocity control s' = s + clip(a, -1, 1) and reward
/// sum_i exp(-||s' - g_i||^2 / sigma^2) over goals g_i in {(+-5, +-5)}.
class MultiGoalEnv final : public Environment {
 public:
  explicit MultiGoalEnv(MultiGoalConfig config = {});

  Index state_dim() const override { return 2; }
  Index action_dim() const override { return 2; }
  Vector action_low() const override { return Vector::Constant(2, -1.0); }
  Vector action_high() const override { return Vector::Constant(2, 1.0); }

  Vector reset(nk::Rng& rng) override;
  StepResult step(const Vector& action) override;

  double reward(const Vector& s) const;
  static Matrix goals();
  const MultiGoalConfig& config() const { return config_; }
  const Vector& state() const { return state_; }
  int elapsed() const { return elapsed_; }

 private:
  MultiGoalConfig config_;
  Vector state_ = Vector::Zero(2);
  int elapsed_ = 0;
  bool done_ = true;
};

}  // namespace flame::env
