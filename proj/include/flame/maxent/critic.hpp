#pragma once

#include <string>
#include <vector>

#include "flame/maxent/replay.hpp"
#include "flame/netlib/adam.hpp"
#include "flame/netlib/mlp.hpp"

namespace flame::maxent {

struct CriticSpec {
  Index state_dim = 0;
  Index action_dim = 1;
  int hidden_layers = 3;
  Index hidden_width = 256;
  net::Activation activation = net::Activation::Mish;
};

/// Q(s, a) as an MLP over concat(s, a) with a scalar output.
class QNetwork {
 public:
  QNetwork() = default;
  QNetwork(const CriticSpec& spec, nk::Rng& rng, const std::string& name);

  /// n x 1 tensor of Q values.
  nk::Tensor forward(nk::Tape& tape, const Matrix& s, const Matrix& a) const;
  Vector eval(const Matrix& s, const Matrix& a) const;

  std::vector<nk::Parameter>& parameters() { return mlp_.parameters(); }
  const std::vector<nk::Parameter>& parameters() const { return mlp_.parameters(); }

 private:
  Matrix join(const Matrix& s, const Matrix& a) const;

  CriticSpec spec_;
  net::Mlp mlp_;
};

/// Twin critics with slow target copies.
class SoftCriticPair {
 public:
  SoftCriticPair() = default;
  SoftCriticPair(const CriticSpec& spec, nk::Rng& rng);

  Vector min_q(const Matrix& s, const Matrix& a) const;
  Vector min_target_q(const Matrix& s, const Matrix& a) const;
  void update_targets(double tau);

  QNetwork& q(int k) { return online_[static_cast<std::size_t>(k)]; }
  const QNetwork& q(int k) const { return online_[static_cast<std::size_t>(k)]; }
  QNetwork& target(int k) { return target_[static_cast<std::size_t>(k)]; }
  const QNetwork& target(int k) const { return target_[static_cast<std::size_t>(k)]; }

 private:
  std::vector<QNetwork> online_;
  std::vector<QNetwork> target_;
};

/// y = r + gamma (1 - done) (min_j Q_target_j(s', a') - alpha log pi(a'|s')).
/// Throws std::domain_error on a non-finite entry, naming its row and inputs.
Vector soft_td_target(const Batch& batch, const Vector& q_next_min, const Vector& logp_next, double alpha,
                      double gamma);

/// Sum over both critics of the mean squared TD error against y.
nk::Tensor critic_loss(const SoftCriticPair& critics, nk::Tape& tape, const Batch& batch, const Vector& target);

struct TemperatureConfig {
  double init = 0.2;
  double lr = 3e-4;
  /// Target entropy H_0.
  double target_entropy = -1.0;
  bool learnable = true;
};

/// alpha = exp(log_alpha), tuned by Adam on J = -log_alpha * mean(logp + H_0).
class Temperature {
 public:
  Temperature() = default;
  explicit Temperature(const TemperatureConfig& config);

  double alpha() const;
  double log_alpha() const { return log_alpha_[0].value(0, 0); }
  /// One step from a batch of log-likelihoods; no-op when not learnable.
  void update(const Vector& logp);
  const TemperatureConfig& config() const { return config_; }

  std::vector<nk::Parameter>& parameters() { return log_alpha_; }
  net::Adam& optimizer() { return opt_; }
  const net::Adam& optimizer() const { return opt_; }

 private:
  TemperatureConfig config_;
  std::vector<nk::Parameter> log_alpha_;
  net::Adam opt_;
};

/// dJ/dlog_alpha for J = -log_alpha * mean(logp + H_0).
double temperature_gradient(const Vector& logp, double target_entropy);

}  // namespace flame::maxent
