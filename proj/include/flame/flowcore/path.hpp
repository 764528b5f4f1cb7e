#pragma once

#include <vector>

#include "flame/numkit/rng.hpp"

namespace flame::flow {

/// Lower bound for sampled times; t = 0 is excluded from training.
inline constexpr double kTimeEpsilon = 1e-3;
/// Upper margin for times at which the reverse kernel is evaluated.
inline constexpr double kTimeEpsilonHigh = 1e-3;

struct OtPoint {
  Matrix a_t;
  Matrix u_cond;
};

/// a_t = t a1 + (1 - t) a0 and u_cond = a1 - a0, with one time per row.
OtPoint ot_interpolate(const Matrix& a0, const Matrix& a1, const Matrix& t);
OtPoint ot_interpolate(const Matrix& a0, const Matrix& a1, double t);

/// Time grid 0 = t_0 < ... < t_N = 1.
class IntegrationSchedule {
 public:
  static IntegrationSchedule uniform(int n_steps);
  /// Uniform grid whose step is closest to dt (at least one step).
  static IntegrationSchedule with_step(double dt);
  explicit IntegrationSchedule(std::vector<double> grid);

  int n_steps() const { return static_cast<int>(grid_.size()) - 1; }
  double time(int k) const { return grid_[static_cast<std::size_t>(k)]; }
  double dt(int k) const { return grid_[static_cast<std::size_t>(k) + 1] - grid_[static_cast<std::size_t>(k)]; }
  const std::vector<double>& grid() const { return grid_; }

 private:
  std::vector<double> grid_;
};

/// n x 1 column of times uniform on [lo, hi].
Matrix sample_times(Index n, nk::Rng& rng, double lo = kTimeEpsilon, double hi = 1.0);

struct TimePair {
  Matrix zeta;
  Matrix t;
};

/// Ordered pairs with zeta < t per row: two uniforms on [kTimeEpsilon, 1],
/// sorted, with zeta capped at 1 - kTimeEpsilonHigh.
TimePair sample_time_pairs(Index n, nk::Rng& rng);

}  // namespace flame::flow
