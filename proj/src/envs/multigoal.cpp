#include "flame/envs/multigoal.hpp"

#include <cmath>
#include <iomanip>
#include <stdexcept>

namespace flame::env {

Vector clip_to_box(const Vector& a, const Vector& lo, const Vector& hi) { return a.cwiseMax(lo).cwiseMin(hi); }

void write_rollout_csv(std::ostream& out, const std::vector<RolloutStep>& steps) {
  const Index m = steps.empty() ? 0 : steps.front().state.size();
  const Index d = steps.empty() ? 0 : steps.front().action.size();
  out << "step";
  for (Index i = 0; i < m; ++i) out << ",s" << i;
  for (Index i = 0; i < d; ++i) out << ",a" << i;
  out << ",r,done\n";
  out << std::setprecision(10);
  for (const auto& st : steps) {
    out << st.step;
    for (Index i = 0; i < m; ++i) out << ',' << st.state(i);
    for (Index i = 0; i < d; ++i) out << ',' << st.action(i);
    out << ',' << st.reward << ',' << (st.done ? 1 : 0) << '\n';
  }
}

MultiGoalEnv::MultiGoalEnv(MultiGoalConfig config) : config_(config) {
  if (!(config_.reward_sigma > 0.0)) throw std::invalid_argument("MultiGoalEnv: reward_sigma must be positive");
  if (config_.horizon < 1) throw std::invalid_argument("MultiGoalEnv: horizon must be >= 1");
  if (config_.start_half_width < 0.0) throw std::invalid_argument("MultiGoalEnv: start_half_width must be >= 0");
}

Matrix MultiGoalEnv::goals() {
  Matrix g(4, 2);
  g << 5, 5, 5, -5, -5, 5, -5, -5;
  return g;
}

double MultiGoalEnv::reward(const Vector& s) const {
  const Matrix g = goals();
  double r = 0.0;
  const double inv = 1.0 / (config_.reward_sigma * config_.reward_sigma);
  for (Index i = 0; i < g.rows(); ++i) r += std::exp(-(s - g.row(i).transpose()).squaredNorm() * inv);
  return r;
}

Vector MultiGoalEnv::reset(nk::Rng& rng) {
  const double w = config_.start_half_width;
  state_ = Vector(2);
  state_(0) = rng.uniform(-w, w);
  state_(1) = rng.uniform(-w, w);
  elapsed_ = 0;
  done_ = false;
  return state_;
}

StepResult MultiGoalEnv::step(const Vector& action) {
  if (done_) throw std::logic_error("MultiGoalEnv::step called on a finished episode; call reset()");
  if (action.size() != 2) throw std::invalid_argument("MultiGoalEnv::step: action must have 2 entries");
  state_ += clip_to_box(action, action_low(), action_high());
  ++elapsed_;
  StepResult res;
  res.state = state_;
  res.reward = reward(state_);
  if (config_.terminate_at_goal) {
    const Matrix g = goals();
    for (Index i = 0; i < g.rows(); ++i) {
      if ((state_ - g.row(i).transpose()).norm() <= config_.goal_radius) res.terminated = true;
    }
  }
  res.truncated = !res.terminated && elapsed_ >= config_.horizon;
  done_ = res.terminated || res.truncated;
  return res;
}

}  // namespace flame::env
