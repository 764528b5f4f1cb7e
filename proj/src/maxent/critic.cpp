#include "flame/maxent/critic.hpp"

#include <cmath>
#include <sstream>
#include <stdexcept>

#include "flame/numkit/ops.hpp"

namespace flame::maxent {

QNetwork::QNetwork(const CriticSpec& spec, nk::Rng& rng, const std::string& name) : spec_(spec) {
  net::MlpSpec m;
  m.input_dim = spec.state_dim + spec.action_dim;
  m.output_dim = 1;
  m.hidden_layers = spec.hidden_layers;
  m.hidden_width = spec.hidden_width;
  m.activation = spec.activation;
  mlp_ = net::Mlp(m, rng, name);
}

Matrix QNetwork::join(const Matrix& s, const Matrix& a) const {
  if (s.rows() != a.rows() || s.cols() != spec_.state_dim || a.cols() != spec_.action_dim) {
    throw std::invalid_argument("QNetwork: expected (n x state_dim) states and (n x action_dim) actions");
  }
  Matrix x(s.rows(), s.cols() + a.cols());
  x << s, a;
  return x;
}

nk::Tensor QNetwork::forward(nk::Tape& tape, const Matrix& s, const Matrix& a) const {
  return mlp_.forward(tape, tape.constant(join(s, a)));
}

Vector QNetwork::eval(const Matrix& s, const Matrix& a) const { return mlp_.eval(join(s, a)).col(0); }

SoftCriticPair::SoftCriticPair(const CriticSpec& spec, nk::Rng& rng) {
  for (int k = 0; k < 2; ++k) online_.emplace_back(spec, rng, "critic" + std::to_string(k + 1));
  // Targets start as exact copies, renamed so checkpoints keep them apart.
  for (int k = 0; k < 2; ++k) {
    QNetwork copy = online_[static_cast<std::size_t>(k)];
    for (auto& p : copy.parameters()) p.name = "target_" + p.name;
    target_.push_back(std::move(copy));
  }
}

Vector SoftCriticPair::min_q(const Matrix& s, const Matrix& a) const {
  return online_[0].eval(s, a).cwiseMin(online_[1].eval(s, a));
}

Vector SoftCriticPair::min_target_q(const Matrix& s, const Matrix& a) const {
  return target_[0].eval(s, a).cwiseMin(target_[1].eval(s, a));
}

void SoftCriticPair::update_targets(double tau) {
  for (std::size_t k = 0; k < 2; ++k) net::polyak_update(target_[k].parameters(), online_[k].parameters(), tau);
}

Vector soft_td_target(const Batch& batch, const Vector& q_next_min, const Vector& logp_next, double alpha,
                      double gamma) {
  const Index n = batch.size();
  if (q_next_min.size() != n || logp_next.size() != n) throw std::invalid_argument("soft_td_target: size mismatch");
  Vector y(n);
  for (Index i = 0; i < n; ++i) {
    const double bootstrap = q_next_min(i) - alpha * logp_next(i);
    y(i) = batch.r(i) + gamma * (1.0 - batch.done(i)) * bootstrap;
    if (!std::isfinite(y(i))) {
      std::ostringstream msg;
      msg << "soft_td_target: non-finite target at row " << i << " (r = " << batch.r(i) << ", Q' = " << q_next_min(i)
          << ", logp' = " << logp_next(i) << ", alpha = " << alpha << ")";
      throw std::domain_error(msg.str());
    }
  }
  return y;
}

nk::Tensor critic_loss(const SoftCriticPair& critics, nk::Tape& tape, const Batch& batch, const Vector& target) {
  const Matrix y = target;
  const double inv_n = 1.0 / static_cast<double>(batch.size());
  auto l1 = nk::sum(nk::square(critics.q(0).forward(tape, batch.s, batch.a) - tape.constant(y)));
  auto l2 = nk::sum(nk::square(critics.q(1).forward(tape, batch.s, batch.a) - tape.constant(y)));
  return (l1 + l2) * inv_n;
}

Temperature::Temperature(const TemperatureConfig& config)
    : config_(config), opt_(net::AdamConfig{.lr = {config.lr, config.lr, 0}}) {
  if (!(config.init >= 0.0)) throw std::invalid_argument("Temperature: initial alpha must be >= 0");
  // alpha = 0 is represented exactly and never tuned.
  if (config.init == 0.0) config_.learnable = false;
  const double la = config.init > 0.0 ? std::log(config.init) : -INFINITY;
  log_alpha_.emplace_back("log_alpha", Matrix::Constant(1, 1, la));
}

double Temperature::alpha() const { return std::exp(log_alpha()); }

double temperature_gradient(const Vector& logp, double target_entropy) { return -(logp.mean() + target_entropy); }

void Temperature::update(const Vector& logp) {
  if (!config_.learnable) return;
  log_alpha_[0].grad = Matrix::Constant(1, 1, temperature_gradient(logp, config_.target_entropy));
  opt_.step(log_alpha_);
}

}  // namespace flame::maxent
