#include "flame/envs/coverage.hpp"

#include <stdexcept>
#include <string>

namespace flame::env {

int Coverage::goals_covered(double min_fraction) const {
  return static_cast<int>((fractions.array() >= min_fraction).count());
}

Coverage mode_coverage(const Matrix& terminal_states, const Matrix& goals, double radius, Index min_rollouts) {
  if (terminal_states.rows() < min_rollouts) {
    throw std::invalid_argument("mode_coverage: need at least " + std::to_string(min_rollouts) + " rollouts, got " +
                                std::to_string(terminal_states.rows()));
  }
  if (terminal_states.cols() != goals.cols()) throw std::invalid_argument("mode_coverage: dimension mismatch");
  Coverage c{Vector::Zero(goals.rows())};
  for (Index i = 0; i < terminal_states.rows(); ++i) {
    for (Index g = 0; g < goals.rows(); ++g) {
      if ((terminal_states.row(i) - goals.row(g)).norm() <= radius) {
        c.fractions(g) += 1.0;
        break;
      }
    }
  }
  c.fractions /= static_cast<double>(terminal_states.rows());
  return c;
}

}  // namespace flame::env
