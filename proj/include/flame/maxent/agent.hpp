#pragma once

#include <array>
#include <optional>
#include <string>

#include "flame/flowcore/likelihood.hpp"
#include "flame/maxent/actor_loss.hpp"
#include "flame/maxent/critic.hpp"
#include "flame/netlib/checkpoint.hpp"
#include "flame/netlib/vector_field_net.hpp"

namespace flame::maxent {

/// R: instantaneous field, multi-step generation. M: MeanFlow field, one-step
/// generation with a separate N_est-step likelihood.
enum class Variant { R, M };

const char* to_string(Variant v);
Variant variant_from_string(const std::string& name);

struct FlameConfig {
  Variant variant = Variant::R;
  Index k = 300;
  /// Integration steps used for a' in the critic target (R only).
  int n_gen_train = 20;
  int n_gen_eval = 1;
  /// Likelihood steps for M.
  int n_est = 5;

  double alpha_init = 0.2;
  bool learn_alpha = true;
  /// Defaults to -action_dim.
  std::optional<double> target_entropy;
  /// false drops the -alpha log pi term from the TD target and uses argmax weights.
  bool entropy_bonus = true;

  double gamma = 0.99;
  double tau = 0.005;
  Index batch_size = 256;
  std::size_t buffer_capacity = 1000000;
  ProposalKind proposal = ProposalKind::UniformBox;

  net::LinearSchedule actor_lr{3e-4, 3e-5, 0};
  double critic_lr = 3e-4;
  double alpha_lr = 3e-4;

  int actor_layers = 3;
  Index actor_width = 256;
  int critic_layers = 3;
  Index critic_width = 256;
  net::Activation activation = net::Activation::Mish;
  net::TimeEmbedding embedding{};

  /// Exact trace up to this action dimension, Hutchinson above it.
  Index max_exact_trace_dim = 16;
  int hutchinson_probes = 1;

  void validate() const;
};

struct TrainMetrics {
  double critic_loss = 0.0;
  double actor_loss = 0.0;
  double alpha = 0.0;
  /// -mean log pi(a'|s') on the batch.
  double entropy = 0.0;
  double mean_q = 0.0;
  double effective_sample_size = 0.0;
};

struct ActResult {
  /// Clipped to the action box.
  Matrix a;
  Matrix a0;
};

class FlameAgent {
 public:
  FlameAgent(Index state_dim, ActionBox box, FlameConfig config, std::uint64_t seed);

  /// One action per state row from fresh base noise.
  ActResult act(const Matrix& s, nk::Rng& rng, bool evaluation) const;
  /// a' and log pi(a'|s') as used in the critic target.
  flow::LogProbResult sample_with_log_prob(const Matrix& s, nk::Rng& rng) const;

  /// Critic, actor, temperature and target updates on one batch.
  TrainMetrics train_step(const Batch& batch, nk::Rng& rng);

  /// Replaces the learned critic as the candidate scorer; critic and target
  /// updates are then skipped.
  void set_q_override(QScorer score) { q_override_ = std::move(score); }

  const net::VectorFieldNet& actor() const { return actor_; }
  const SoftCriticPair& critics() const { return critics_; }
  const Temperature& temperature() const { return temperature_; }
  const FlameConfig& config() const { return config_; }
  const ActionBox& box() const { return box_; }
  flow::IntegrationSchedule eval_schedule() const;
  flow::IntegrationSchedule train_schedule() const;
  flow::DivergenceMode divergence_mode() const;
  std::int64_t updates() const { return updates_; }

  void save(net::Checkpoint& ckpt) const;
  void load(const net::Checkpoint& ckpt);

 private:
  double weight_alpha() const;

  Index state_dim_;
  ActionBox box_;
  FlameConfig config_;
  net::VectorFieldNet actor_;
  net::VectorFieldNet actor_old_;
  SoftCriticPair critics_;
  Temperature temperature_;
  net::Adam actor_opt_;
  std::array<net::Adam, 2> critic_opt_;
  std::optional<QScorer> q_override_;
  std::int64_t updates_ = 0;
};

}  // namespace flame::maxent
