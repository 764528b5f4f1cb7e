#include "flame/maxent/agent.hpp"

#include <stdexcept>

#include "flame/flowcore/integrate.hpp"

namespace flame::maxent {

const char* to_string(Variant v) { return v == Variant::R ? "R" : "M"; }

Variant variant_from_string(const std::string& name) {
  if (name == "R" || name == "r") return Variant::R;
  if (name == "M" || name == "m") return Variant::M;
  throw std::invalid_argument("unknown variant '" + name + "' (expected R or M)");
}

void FlameConfig::validate() const {
  if (k < 1) throw std::invalid_argument("FlameConfig: K must be >= 1");
  if (n_gen_train < 1 || n_gen_eval < 1 || n_est < 1) throw std::invalid_argument("FlameConfig: step counts must be >= 1");
  if (alpha_init < 0.0) throw std::invalid_argument("FlameConfig: alpha_init must be >= 0");
  if (!(gamma >= 0.0 && gamma < 1.0)) throw std::invalid_argument("FlameConfig: gamma must lie in [0, 1)");
  if (!(tau > 0.0 && tau <= 1.0)) throw std::invalid_argument("FlameConfig: tau must lie in (0, 1]");
  if (batch_size < 1) throw std::invalid_argument("FlameConfig: batch_size must be >= 1");
  if (buffer_capacity < 1) throw std::invalid_argument("FlameConfig: buffer_capacity must be >= 1");
  if (hutchinson_probes < 1) throw std::invalid_argument("FlameConfig: hutchinson_probes must be >= 1");
  embedding.validate();
}

namespace {

net::VectorFieldSpec actor_spec(const FlameConfig& c, Index state_dim, Index action_dim) {
  net::VectorFieldSpec spec;
  spec.action_dim = action_dim;
  spec.state_dim = state_dim;
  spec.mode = c.variant == Variant::R ? net::FieldMode::Instantaneous : net::FieldMode::MeanFlow;
  spec.hidden_layers = c.actor_layers;
  spec.hidden_width = c.actor_width;
  spec.activation = c.activation;
  spec.embedding = c.embedding;
  return spec;
}

void save_adam(net::Checkpoint& ckpt, const std::string& prefix, const net::Adam& opt) {
  ckpt.put_scalar(prefix + ".steps", static_cast<double>(opt.steps()));
  for (std::size_t i = 0; i < opt.first_moments().size(); ++i) {
    ckpt.put(prefix + ".m" + std::to_string(i), opt.first_moments()[i]);
    ckpt.put(prefix + ".v" + std::to_string(i), opt.second_moments()[i]);
  }
}

void load_adam(const net::Checkpoint& ckpt, const std::string& prefix, net::Adam& opt) {
  opt.set_steps(static_cast<std::int64_t>(ckpt.get_scalar(prefix + ".steps")));
  opt.first_moments().clear();
  opt.second_moments().clear();
  for (std::size_t i = 0; ckpt.contains(prefix + ".m" + std::to_string(i)); ++i) {
    opt.first_moments().push_back(ckpt.get(prefix + ".m" + std::to_string(i)));
    opt.second_moments().push_back(ckpt.get(prefix + ".v" + std::to_string(i)));
  }
}

void save_params(net::Checkpoint& ckpt, const std::string& prefix, const std::vector<nk::Parameter>& params) {
  for (const auto& p : params) ckpt.put(prefix + p.name, p.value);
}

void load_params(const net::Checkpoint& ckpt, const std::string& prefix, std::vector<nk::Parameter>& params) {
  for (auto& p : params) {
    const Matrix& v = ckpt.get(prefix + p.name);
    if (v.rows() != p.value.rows() || v.cols() != p.value.cols()) {
      throw std::runtime_error("checkpoint: shape mismatch for '" + p.name + "'");
    }
    p.value = v;
  }
}

}  // namespace

FlameAgent::FlameAgent(Index state_dim, ActionBox box, FlameConfig config, std::uint64_t seed)
    : state_dim_(state_dim), box_(std::move(box)), config_(std::move(config)) {
  box_.validate();
  config_.validate();
  if (!config_.target_entropy) config_.target_entropy = -static_cast<double>(box_.dim());
  nk::Rng init(seed, 0x1417);
  actor_ = net::VectorFieldNet(actor_spec(config_, state_dim_, box_.dim()), init, "actor");
  actor_old_ = actor_;
  for (auto& p : actor_old_.parameters()) p.name = "old_" + p.name;
  CriticSpec cs{state_dim_, box_.dim(), config_.critic_layers, config_.critic_width, config_.activation};
  critics_ = SoftCriticPair(cs, init);
  const bool learnable = config_.learn_alpha && config_.entropy_bonus && config_.alpha_init > 0.0;
  temperature_ = Temperature(
      TemperatureConfig{config_.entropy_bonus ? config_.alpha_init : 0.0, config_.alpha_lr, *config_.target_entropy,
                        learnable});
  actor_opt_ = net::Adam(net::AdamConfig{config_.actor_lr});
  for (auto& opt : critic_opt_) opt = net::Adam(net::AdamConfig{net::LinearSchedule{config_.critic_lr, config_.critic_lr, 0}});
}

flow::IntegrationSchedule FlameAgent::eval_schedule() const {
  return flow::IntegrationSchedule::uniform(config_.n_gen_eval);
}

flow::IntegrationSchedule FlameAgent::train_schedule() const {
  return flow::IntegrationSchedule::uniform(config_.variant == Variant::R ? config_.n_gen_train : 1);
}

flow::DivergenceMode FlameAgent::divergence_mode() const {
  if (box_.dim() <= config_.max_exact_trace_dim) return flow::DivergenceMode::exact();
  return flow::DivergenceMode::hutchinson(config_.hutchinson_probes);
}

ActResult FlameAgent::act(const Matrix& s, nk::Rng& rng, bool evaluation) const {
  Matrix a0 = rng.normal(s.rows(), box_.dim());
  const Matrix a1 = flow::generate(actor_, a0, s, evaluation ? eval_schedule() : train_schedule());
  return {box_.clip(a1), std::move(a0)};
}

flow::LogProbResult FlameAgent::sample_with_log_prob(const Matrix& s, nk::Rng& rng) const {
  const Matrix a0 = rng.normal(s.rows(), box_.dim());
  if (config_.variant == Variant::R) {
    return flow::log_prob_augmented(actor_, a0, s, train_schedule(), divergence_mode(), &rng);
  }
  // One-step action; its likelihood comes from the N_est-step co-integration
  // of the same base noise.
  auto lp = flow::log_prob_augmented(actor_, a0, s, flow::IntegrationSchedule::uniform(config_.n_est),
                                     divergence_mode(), &rng);
  lp.a1 = flow::generate(actor_, a0, s, train_schedule());
  return lp;
}

double FlameAgent::weight_alpha() const { return config_.entropy_bonus ? temperature_.alpha() : 0.0; }

TrainMetrics FlameAgent::train_step(const Batch& batch, nk::Rng& rng) {
  TrainMetrics m;
  const auto next = sample_with_log_prob(batch.s_next, rng);
  m.entropy = -next.log_prob.mean();

  if (!q_override_) {
    const Vector q_next = critics_.min_target_q(batch.s_next, box_.clip(next.a1));
    const Vector y = soft_td_target(batch, q_next, next.log_prob, weight_alpha(), config_.gamma);
    for (int j = 0; j < 2; ++j) net::zero_grad(critics_.q(j).parameters());
    nk::Tape tape;
    const auto loss = critic_loss(critics_, tape, batch, y);
    tape.backward(loss);
    m.critic_loss = loss.value()(0, 0);
    for (int j = 0; j < 2; ++j) critic_opt_[static_cast<std::size_t>(j)].step(critics_.q(j).parameters());
  }

  const QScorer score = q_override_ ? *q_override_
                                    : QScorer([this](const Matrix& s, const Matrix& a) { return critics_.min_q(s, a); });
  ActorLossConfig ac{config_.k, weight_alpha(), box_};
  Proposal proposal{config_.proposal, &actor_old_, train_schedule()};
  net::zero_grad(actor_.parameters());
  {
    nk::Tape tape;
    const auto al = config_.variant == Variant::R ? qrfm_loss(actor_, tape, batch.s, score, ac, proposal, rng)
                                                  : qrmf_loss(actor_, tape, batch.s, score, ac, proposal, rng);
    tape.backward(al.loss);
    m.actor_loss = al.loss.value()(0, 0);
    m.mean_q = al.mean_q;
    m.effective_sample_size = al.effective_sample_size;
  }
  actor_opt_.step(actor_.parameters());

  temperature_.update(next.log_prob);
  m.alpha = weight_alpha();

  if (!q_override_) critics_.update_targets(config_.tau);
  if (config_.proposal == ProposalKind::LastPolicy) {
    net::polyak_update(actor_old_.parameters(), actor_.parameters(), config_.tau);
  }
  ++updates_;
  return m;
}

void FlameAgent::save(net::Checkpoint& ckpt) const {
  ckpt.set_meta("variant", to_string(config_.variant));
  ckpt.put_scalar("agent.updates", static_cast<double>(updates_));
  save_params(ckpt, "", actor_.parameters());
  save_params(ckpt, "", actor_old_.parameters());
  for (int j = 0; j < 2; ++j) {
    save_params(ckpt, "", critics_.q(j).parameters());
    save_params(ckpt, "", critics_.target(j).parameters());
    save_adam(ckpt, "opt.critic" + std::to_string(j + 1), critic_opt_[static_cast<std::size_t>(j)]);
  }
  ckpt.put_scalar("temperature.log_alpha", temperature_.log_alpha());
  save_adam(ckpt, "opt.temperature", temperature_.optimizer());
  save_adam(ckpt, "opt.actor", actor_opt_);
}

void FlameAgent::load(const net::Checkpoint& ckpt) {
  if (ckpt.has_meta("variant") && ckpt.meta("variant") != to_string(config_.variant)) {
    throw std::runtime_error("checkpoint: variant " + ckpt.meta("variant") + " does not match configured " +
                             to_string(config_.variant));
  }
  updates_ = static_cast<std::int64_t>(ckpt.get_scalar("agent.updates"));
  load_params(ckpt, "", actor_.parameters());
  load_params(ckpt, "", actor_old_.parameters());
  for (int j = 0; j < 2; ++j) {
    load_params(ckpt, "", critics_.q(j).parameters());
    load_params(ckpt, "", critics_.target(j).parameters());
    load_adam(ckpt, "opt.critic" + std::to_string(j + 1), critic_opt_[static_cast<std::size_t>(j)]);
  }
  temperature_.parameters()[0].value(0, 0) = ckpt.get_scalar("temperature.log_alpha");
  load_adam(ckpt, "opt.temperature", temperature_.optimizer());
  load_adam(ckpt, "opt.actor", actor_opt_);
}

}  // namespace flame::maxent
