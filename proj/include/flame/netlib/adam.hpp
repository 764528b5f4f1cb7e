#pragma once

#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "flame/numkit/tape.hpp"

namespace flame::net {

/// Learning rate interpolated linearly from `start` to `end` over
/// `total_steps`, then held at `end`. total_steps == 0 means constant `start`.
struct LinearSchedule {
  double start = 3e-4;
  double end = 3e-4;
  std::int64_t total_steps = 0;

  double at(std::int64_t step) const;
};

struct AdamConfig {
  LinearSchedule lr{};
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

class NonFiniteGradient : public std::runtime_error {
 public:
  explicit NonFiniteGradient(const std::string& param)
      : std::runtime_error("non-finite gradient in parameter '" + param + "'"), param_(param) {}
  const std::string& parameter() const { return param_; }

 private:
  std::string param_;
};

/// Adam over a fixed parameter list. Moment buffers are created on the first
/// step and must keep matching shapes afterwards.
class Adam {
 public:
  Adam() = default;
  explicit Adam(AdamConfig config) : config_(config) {}

  /// Applies one update using each parameter's grad. All gradients are checked
  /// before anything is modified; throws NonFiniteGradient naming the culprit.
  void step(std::span<nk::Parameter> params);

  double current_lr() const { return config_.lr.at(steps_); }
  std::int64_t steps() const { return steps_; }
  const AdamConfig& config() const { return config_; }
  AdamConfig& config() { return config_; }

  // Exposed for checkpointing.
  std::vector<Matrix>& first_moments() { return m_; }
  std::vector<Matrix>& second_moments() { return v_; }
  const std::vector<Matrix>& first_moments() const { return m_; }
  const std::vector<Matrix>& second_moments() const { return v_; }
  void set_steps(std::int64_t steps) { steps_ = steps; }

 private:
  AdamConfig config_{};
  std::int64_t steps_ = 0;
  std::vector<Matrix> m_;
  std::vector<Matrix> v_;
};

void zero_grad(std::span<const nk::Parameter> params);

/// target <- (1 - tau) * target + tau * online, tau in (0, 1].
void polyak_update(std::span<nk::Parameter> target, std::span<const nk::Parameter> online, double tau);

}  // namespace flame::net
