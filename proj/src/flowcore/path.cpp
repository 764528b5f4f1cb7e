#include "flame/flowcore/path.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace flame::flow {

OtPoint ot_interpolate(const Matrix& a0, const Matrix& a1, const Matrix& t) {
  if (a0.rows() != a1.rows() || a0.cols() != a1.cols()) throw std::invalid_argument("ot_interpolate: shape mismatch");
  if (t.rows() != a0.rows() || t.cols() != 1) throw std::invalid_argument("ot_interpolate: t must be (n x 1)");
  OtPoint out;
  out.a_t = (a1.array().colwise() * t.col(0).array() + a0.array().colwise() * (1.0 - t.col(0).array())).matrix();
  out.u_cond = a1 - a0;
  return out;
}

OtPoint ot_interpolate(const Matrix& a0, const Matrix& a1, double t) {
  return ot_interpolate(a0, a1, Matrix::Constant(a0.rows(), 1, t));
}

IntegrationSchedule IntegrationSchedule::uniform(int n_steps) {
  if (n_steps < 1) throw std::invalid_argument("IntegrationSchedule: need at least one step");
  std::vector<double> grid(static_cast<std::size_t>(n_steps) + 1);
  for (int k = 0; k <= n_steps; ++k) grid[static_cast<std::size_t>(k)] = static_cast<double>(k) / n_steps;
  return IntegrationSchedule(std::move(grid));
}

IntegrationSchedule IntegrationSchedule::with_step(double dt) {
  if (!(dt > 0.0 && dt <= 1.0)) throw std::invalid_argument("IntegrationSchedule: step must lie in (0, 1]");
  return uniform(std::max(1, static_cast<int>(std::lround(1.0 / dt))));
}

IntegrationSchedule::IntegrationSchedule(std::vector<double> grid) : grid_(std::move(grid)) {
  if (grid_.size() < 2) throw std::invalid_argument("IntegrationSchedule: empty schedule");
  if (grid_.front() != 0.0 || grid_.back() != 1.0) throw std::invalid_argument("IntegrationSchedule: grid must span [0, 1]");
  for (std::size_t k = 1; k < grid_.size(); ++k) {
    if (!(grid_[k] > grid_[k - 1])) {
      throw std::invalid_argument("IntegrationSchedule: grid not strictly increasing at index " + std::to_string(k));
    }
  }
}

Matrix sample_times(Index n, nk::Rng& rng, double lo, double hi) { return rng.uniform(n, 1, lo, hi); }

TimePair sample_time_pairs(Index n, nk::Rng& rng) {
  TimePair p{Matrix(n, 1), Matrix(n, 1)};
  for (Index i = 0; i < n; ++i) {
    double u, v;
    do {
      u = rng.uniform(kTimeEpsilon, 1.0);
      v = rng.uniform(kTimeEpsilon, 1.0);
    } while (u == v);
    p.zeta(i, 0) = std::min({u, v, 1.0 - kTimeEpsilonHigh});
    p.t(i, 0) = std::max(u, v);
    if (!(p.zeta(i, 0) < p.t(i, 0))) p.t(i, 0) = 1.0;
  }
  return p;
}

}  // namespace flame::flow
