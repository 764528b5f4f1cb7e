#pragma once

#include <functional>

#include "flame/envs/environment.hpp"

namespace flame::env {

/// One-step task on a in [-1, 1] with a single fixed (zero) state and reward
/// Q(a) = exp(-(a - 0.5)^2 / 0.02) + exp(-(a + 0.5)^2 / 0.02).
class SoftBandit final : public Environment {
 public:
  static double q(double a);
  /// Q for each row of an (n x 1) action matrix.
  static Vector q(const Matrix& a);

  Index state_dim() const override { return 1; }
  Index action_dim() const override { return 1; }
  Vector action_low() const override { return Vector::Constant(1, -1.0); }
  Vector action_high() const override { return Vector::Constant(1, 1.0); }
  Vector reset(nk::Rng& rng) override;
  StepResult step(const Vector& action) override;
};

/// exp(Q(a) / alpha) / Z tabulated on a uniform grid over [-1, 1].
struct BanditOracle {
  Vector grid;
  Vector density;
  /// Trapezoidal cumulative distribution at the grid points.
  Vector cdf;

  double mass() const { return cdf(cdf.size() - 1); }
  double entropy() const;
  /// Probability mass on [lo, hi] (grid-aligned trapezoid).
  double mass_between(double lo, double hi) const;
};

/// q_values are evaluated at the grid points; grid_n >= 1000.
BanditOracle boltzmann_oracle(const std::function<double(double)>& q, double alpha, Index grid_n);
BanditOracle soft_bandit_oracle(double alpha, Index grid_n = 20001);

/// 1-Wasserstein distance between an empirical sample (clipped to the grid
/// range) and the oracle: integral of |F_n - F| over [-1, 1].
double wasserstein1(const Vector& samples, const BanditOracle& oracle);

}  // namespace flame::env
