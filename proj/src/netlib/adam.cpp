#include "flame/netlib/adam.hpp"

#include <algorithm>
#include <cmath>

namespace flame::net {

double LinearSchedule::at(std::int64_t step) const {
  if (total_steps <= 0) return start;
  const double frac = std::clamp(static_cast<double>(step) / static_cast<double>(total_steps), 0.0, 1.0);
  return start + (end - start) * frac;
}

void Adam::step(std::span<nk::Parameter> params) {
  if (m_.empty()) {
    for (const auto& p : params) {
      m_.push_back(Matrix::Zero(p.value.rows(), p.value.cols()));
      v_.push_back(Matrix::Zero(p.value.rows(), p.value.cols()));
    }
  }
  if (m_.size() != params.size()) throw std::invalid_argument("Adam::step: parameter list changed size");
  for (std::size_t i = 0; i < params.size(); ++i) {
    const auto& p = params[i];
    if (m_[i].rows() != p.value.rows() || m_[i].cols() != p.value.cols()) {
      throw std::invalid_argument("Adam::step: shape of '" + p.name + "' changed");
    }
    if (p.grad.size() != 0 && (p.grad.rows() != p.value.rows() || p.grad.cols() != p.value.cols())) {
      throw std::invalid_argument("Adam::step: gradient shape mismatch for '" + p.name + "'");
    }
    if (p.grad.size() != 0 && !p.grad.allFinite()) throw NonFiniteGradient(p.name);
  }

  const double lr = current_lr();
  ++steps_;
  const double b1 = config_.beta1;
  const double b2 = config_.beta2;
  const double c1 = 1.0 - std::pow(b1, static_cast<double>(steps_));
  const double c2 = 1.0 - std::pow(b2, static_cast<double>(steps_));
  for (std::size_t i = 0; i < params.size(); ++i) {
    auto& p = params[i];
    if (p.grad.size() == 0) {
      m_[i] *= b1;
      v_[i] *= b2;
      continue;
    }
    m_[i] = b1 * m_[i] + (1.0 - b1) * p.grad;
    v_[i] = b2 * v_[i] + (1.0 - b2) * p.grad.cwiseAbs2();
    p.value.array() -= lr * (m_[i].array() / c1) / ((v_[i].array() / c2).sqrt() + config_.eps);
  }
}

void zero_grad(std::span<const nk::Parameter> params) {
  for (const auto& p : params) p.zero_grad();
}

void polyak_update(std::span<nk::Parameter> target, std::span<const nk::Parameter> online, double tau) {
  if (!(tau > 0.0 && tau <= 1.0)) throw std::invalid_argument("polyak_update: tau must lie in (0, 1]");
  if (target.size() != online.size()) throw std::invalid_argument("polyak_update: parameter count mismatch");
  for (std::size_t i = 0; i < target.size(); ++i) {
    if (target[i].value.rows() != online[i].value.rows() || target[i].value.cols() != online[i].value.cols()) {
      throw std::invalid_argument("polyak_update: shape mismatch for '" + target[i].name + "'");
    }
    if (tau == 1.0) {
      target[i].value = online[i].value;
    } else {
      target[i].value = (1.0 - tau) * target[i].value + tau * online[i].value;
    }
  }
}

}  // namespace flame::net
