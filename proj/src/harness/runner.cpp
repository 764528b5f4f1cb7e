#include "flame/harness/runner.hpp"

#include <cmath>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include "flame/envs/bandit.hpp"
#include "flame/envs/gmm.hpp"
#include "flame/flowcore/integrate.hpp"
#include "flame/flowcore/losses.hpp"

namespace flame::harness {

std::filesystem::path resolve_output_dir(const std::string& dir) {
  std::filesystem::path p(dir);
  if (p.is_relative()) {
    if (const char* root = std::getenv("FLAME_OUTPUT_ROOT"); root != nullptr && *root != '\0') {
      return std::filesystem::path(root) / p;
    }
  }
  return p;
}

void put_actor_spec(net::Checkpoint& ckpt, const net::VectorFieldSpec& spec) {
  ckpt.set_meta("actor.action_dim", std::to_string(spec.action_dim));
  ckpt.set_meta("actor.state_dim", std::to_string(spec.state_dim));
  ckpt.set_meta("actor.mode", net::to_string(spec.mode));
  ckpt.set_meta("actor.hidden_layers", std::to_string(spec.hidden_layers));
  ckpt.set_meta("actor.hidden_width", std::to_string(spec.hidden_width));
  ckpt.set_meta("actor.activation", net::to_string(spec.activation));
  ckpt.set_meta("actor.embed_dim", std::to_string(spec.embedding.dim));
  std::ostringstream f;
  f.precision(17);
  f << spec.embedding.max_frequency << ' ' << spec.embedding.base;
  ckpt.set_meta("actor.embed_freq", f.str());
}

net::VectorFieldNet load_actor(const net::Checkpoint& ckpt) {
  net::VectorFieldSpec spec;
  spec.action_dim = std::stol(ckpt.meta("actor.action_dim"));
  spec.state_dim = std::stol(ckpt.meta("actor.state_dim"));
  const std::string mode = ckpt.meta("actor.mode");
  spec.mode = mode == net::to_string(net::FieldMode::MeanFlow) ? net::FieldMode::MeanFlow
                                                                : net::FieldMode::Instantaneous;
  spec.hidden_layers = std::stoi(ckpt.meta("actor.hidden_layers"));
  spec.hidden_width = std::stol(ckpt.meta("actor.hidden_width"));
  spec.activation = net::activation_from_string(ckpt.meta("actor.activation"));
  spec.embedding.dim = std::stoi(ckpt.meta("actor.embed_dim"));
  std::istringstream f(ckpt.meta("actor.embed_freq"));
  f >> spec.embedding.max_frequency >> spec.embedding.base;
  nk::Rng unused(0);
  net::VectorFieldNet actor(spec, unused, "actor");
  for (auto& p : actor.parameters()) {
    const Matrix& v = ckpt.get(p.name);
    if (v.rows() != p.value.rows() || v.cols() != p.value.cols()) {
      throw std::runtime_error("checkpoint: shape mismatch for '" + p.name + "'");
    }
    p.value = v;
  }
  return actor;
}

MultiGoalEval evaluate_multigoal(const maxent::FlameAgent& agent, const env::MultiGoalConfig& env_config,
                                 Index rollouts, nk::Rng& rng) {
  std::vector<env::MultiGoalEnv> envs(static_cast<std::size_t>(rollouts), env::MultiGoalEnv(env_config));
  Matrix s(rollouts, 2);
  for (Index i = 0; i < rollouts; ++i) s.row(i) = envs[static_cast<std::size_t>(i)].reset(rng).transpose();
  std::vector<bool> active(static_cast<std::size_t>(rollouts), true);
  Vector returns = Vector::Zero(rollouts);
  for (int step = 0; step < env_config.horizon; ++step) {
    const Matrix a = agent.act(s, rng, true).a;
    bool any = false;
    for (Index i = 0; i < rollouts; ++i) {
      const auto u = static_cast<std::size_t>(i);
      if (!active[u]) continue;
      const auto res = envs[u].step(a.row(i).transpose());
      returns(i) += res.reward;
      s.row(i) = res.state.transpose();
      active[u] = !(res.terminated || res.truncated);
      any = any || active[u];
    }
    if (!any) break;
  }
  MultiGoalEval out;
  out.mean_return = returns.mean();
  out.terminal_states = s;
  out.coverage = env::mode_coverage(s, env::MultiGoalEnv::goals(), env_config.goal_radius, 100);
  return out;
}

Vector sample_bandit_actions(const maxent::FlameAgent& agent, Index n, nk::Rng& rng) {
  return agent.act(Matrix::Zero(n, 1), rng, true).a.col(0);
}

double gmm_loglik_mse(const net::VelocityField& field, int n_est, Index n, nk::Rng& rng,
                      const flow::DivergenceMode& mode) {
  const env::Gmm2d gmm;
  const Matrix a0 = rng.normal(n, 2);
  const auto lp = flow::log_prob_augmented(field, a0, Matrix(n, 0), flow::IntegrationSchedule::uniform(n_est), mode,
                                           &rng);
  return (lp.log_prob - gmm.log_density(lp.a1)).squaredNorm() / static_cast<double>(n);
}

double gmm_reference_loglik_mse(int n_est, Index n, nk::Rng& rng) {
  const env::Gmm2d gmm;
  const auto schedule = flow::IntegrationSchedule::uniform(n_est);
  Matrix a = rng.normal(n, 2);
  Vector logp = -0.5 * a.rowwise().squaredNorm().array() - std::log(2.0 * M_PI);
  for (int k = 0; k < schedule.n_steps(); ++k) {
    const auto pv = gmm.path_velocity(a, schedule.time(k));
    a += schedule.dt(k) * pv.u;
    logp -= schedule.dt(k) * pv.divergence;
  }
  return (logp - gmm.log_density(a)).squaredNorm() / static_cast<double>(n);
}

namespace {

class NumericFailure : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << text;
}

void check_row(const MetricsRow& row) {
  if (const auto bad = row.first_non_finite(); !bad.empty()) {
    throw NumericFailure("non-finite " + bad + " at step " + std::to_string(row.step));
  }
}

std::string rng_state_string(const nk::Rng& rng) {
  const auto st = rng.state();
  std::ostringstream out;
  out << std::hex << st.s[0] << ':' << st.s[1] << ':' << st.s[2] << ':' << st.s[3] << ':' << st.key;
  return out.str();
}

struct RunState {
  const RunConfig& cfg;
  std::filesystem::path dir;
  MetricsWriter metrics;
  RunResult result;
  RunHooks hooks;

  void emit(const MetricsRow& row) {
    check_row(row);
    metrics.append(row);
    result.last_row = row;
    if (hooks.on_eval) hooks.on_eval(row);
  }
};

net::VectorFieldSpec gmm_field_spec(const RunConfig& cfg) {
  const auto f = cfg.effective_flame();
  net::VectorFieldSpec spec;
  spec.action_dim = 2;
  spec.state_dim = 0;
  spec.mode = cfg.algorithm == Algorithm::FlameM ? net::FieldMode::MeanFlow : net::FieldMode::Instantaneous;
  spec.hidden_layers = f.actor_layers;
  spec.hidden_width = f.actor_width;
  spec.activation = f.activation;
  spec.embedding = f.embedding;
  // Supervised fitting starts from a random output layer.
  spec.zero_init_output = false;
  return spec;
}

void run_gmm(RunState& st, net::Checkpoint& ckpt) {
  const RunConfig& cfg = st.cfg;
  const auto f = cfg.effective_flame();
  const env::Gmm2d gmm;
  nk::Rng init(cfg.seed, 0x1417);
  net::VectorFieldNet field(gmm_field_spec(cfg), init, "actor");
  net::AdamConfig ac{f.actor_lr};
  ac.lr.total_steps = cfg.actor_lr_anneal_steps >= 0 ? cfg.actor_lr_anneal_steps : cfg.total_env_steps;
  net::Adam opt(ac);
  nk::Rng data(cfg.seed, 1);
  nk::Rng noise(cfg.seed, 3);
  double running = 0.0;
  std::int64_t since_eval = 0;
  for (std::int64_t it = 1; it <= cfg.total_env_steps; ++it) {
    const Matrix a1 = gmm.sample(f.batch_size, data);
    net::zero_grad(field.parameters());
    nk::Tape tape;
    const Matrix s(f.batch_size, 0);
    const auto loss = field.mode() == net::FieldMode::MeanFlow ? flow::meanflow_loss(field, tape, s, a1, noise)
                                                               : flow::cfm_loss(field, tape, s, a1, noise);
    tape.backward(loss);
    opt.step(field.parameters());
    running += loss.value()(0, 0);
    ++since_eval;
    st.result.train_steps = it;
    st.result.env_steps = it;
    if (it % cfg.eval_every == 0 || it == cfg.total_env_steps) {
      MetricsRow row;
      row.step = it;
      row.actor_loss = running / static_cast<double>(since_eval);
      nk::Rng eval(cfg.seed, 1000 + static_cast<std::uint64_t>(it));
      for (std::size_t j = 0; j < kNestColumns.size(); ++j) {
        row.loglik_mse[j] = gmm_loglik_mse(field, kNestColumns[j], cfg.gmm_eval_samples, eval);
      }
      st.emit(row);
      running = 0.0;
      since_eval = 0;
    }
  }
  put_actor_spec(ckpt, field.spec());
  for (const auto& p : field.parameters()) ckpt.put(p.name, p.value);
  ckpt.put_scalar("opt.actor.steps", static_cast<double>(opt.steps()));
  ckpt.set_meta("rng.data", rng_state_string(data));
  ckpt.set_meta("rng.noise", rng_state_string(noise));
}

std::unique_ptr<env::Environment> make_env(const RunConfig& cfg) {
  if (cfg.task == Task::MultiGoal) return std::make_unique<env::MultiGoalEnv>(cfg.multigoal);
  return std::make_unique<env::SoftBandit>();
}

void run_rl(RunState& st, net::Checkpoint& ckpt, std::optional<maxent::FlameAgent>& agent_slot) {
  const RunConfig& cfg = st.cfg;
  auto env = make_env(cfg);
  const Index m = env->state_dim();
  const Index d = env->action_dim();
  maxent::ActionBox box{env->action_low(), env->action_high()};
  agent_slot.emplace(m, box, cfg.effective_flame(), cfg.seed);
  maxent::FlameAgent& agent = *agent_slot;
  if (cfg.task == Task::Bandit && cfg.bandit_q == "analytic") {
    agent.set_q_override([](const Matrix&, const Matrix& a) { return env::SoftBandit::q(a); });
  }
  const auto& f = agent.config();
  maxent::ReplayBuffer buffer(f.buffer_capacity, m, d);

  nk::Rng env_rng(cfg.seed, 1);
  nk::Rng act_rng(cfg.seed, 2);
  nk::Rng train_rng(cfg.seed, 3);

  Vector s = env->reset(env_rng);
  double episode_return = 0.0;
  std::ofstream episodes(st.dir / kEpisodesFile, std::ios::trunc);
  episodes << "step,return\n";
  episodes.precision(10);
  maxent::TrainMetrics last{};
  bool trained = false;
  std::optional<env::BanditOracle> oracle;

  for (std::int64_t step = 1; step <= cfg.total_env_steps; ++step) {
    Vector a, a0;
    if (step <= cfg.warmup_steps) {
      a = box.sample_uniform(1, act_rng).transpose();
      a0 = Vector::Zero(d);
    } else {
      const auto act = agent.act(s.transpose(), act_rng, false);
      a = act.a.row(0).transpose();
      a0 = act.a0.row(0).transpose();
    }
    const auto res = env->step(a);
    buffer.push({s, a, a0, res.reward, res.state, res.terminated});
    episode_return += res.reward;
    if (res.terminated || res.truncated) {
      episodes << step << ',' << episode_return << '\n';
      s = env->reset(env_rng);
      episode_return = 0.0;
    } else {
      s = res.state;
    }
    st.result.env_steps = step;

    // Catch up to floor(step * utd) updates once training may start.
    if (step >= cfg.warmup_steps && static_cast<Index>(buffer.size()) >= f.batch_size) {
      const auto target = static_cast<std::int64_t>(std::floor(static_cast<double>(step) * cfg.utd_ratio + 1e-9));
      while (st.result.train_steps < target) {
        last = agent.train_step(buffer.sample(f.batch_size, train_rng), train_rng);
        trained = true;
        ++st.result.train_steps;
      }
    }

    if (step % cfg.eval_every == 0 || step == cfg.total_env_steps) {
      MetricsRow row;
      row.step = step;
      if (trained) {
        row.actor_loss = last.actor_loss;
        if (!(cfg.task == Task::Bandit && cfg.bandit_q == "analytic")) row.critic_loss = last.critic_loss;
        row.entropy_estimate = last.entropy;
      }
      row.alpha = agent.temperature().alpha();
      nk::Rng eval(cfg.seed, 1000 + static_cast<std::uint64_t>(step));
      if (cfg.task == Task::MultiGoal) {
        const auto ev = evaluate_multigoal(agent, cfg.multigoal, cfg.eval_rollouts, eval);
        row.episode_return = ev.mean_return;
        for (int g = 0; g < 4; ++g) row.coverage[static_cast<std::size_t>(g)] = ev.coverage.fractions(g);
        st.result.coverage = ev.coverage;
        if (step == cfg.total_env_steps) {
          std::ofstream out(st.dir / kTerminalStatesFile);
          out << "x,y\n";
          out.precision(10);
          for (Index i = 0; i < ev.terminal_states.rows(); ++i)
            out << ev.terminal_states(i, 0) << ',' << ev.terminal_states(i, 1) << '\n';
        }
      } else {
        const double alpha = agent.temperature().alpha();
        if (!oracle || alpha != f.alpha_init) oracle = env::soft_bandit_oracle(alpha > 0.0 ? alpha : f.alpha_init);
        const Vector acts = sample_bandit_actions(agent, cfg.bandit_eval_samples, eval);
        row.episode_return = env::SoftBandit::q(Matrix(acts)).mean();
        row.w1 = env::wasserstein1(acts, *oracle);
      }
      st.emit(row);
    }
  }
  ckpt.set_meta("rng.env", rng_state_string(env_rng));
  ckpt.set_meta("rng.act", rng_state_string(act_rng));
  ckpt.set_meta("rng.train", rng_state_string(train_rng));
}

}  // namespace

RunResult run(const RunConfig& config, const RunHooks& hooks) {
  config.validate();
  const auto dir = resolve_output_dir(config.output_dir);
  std::filesystem::create_directories(dir);
  for (const char* stale : {kDoneMarker, kFailedMarker, kTerminalStatesFile, kEpisodesFile}) std::filesystem::remove(dir / stale);
  write_text(dir / kConfigFile, serialize_run_config(config));

  RunState st{config, dir, MetricsWriter(dir / kMetricsFile), {}, hooks};
  st.result.run_dir = dir;
  net::Checkpoint ckpt;
  ckpt.set_meta("config_hash", config_hash(config));
  ckpt.set_meta("task", to_string(config.task));
  ckpt.set_meta("algorithm", to_string(config.algorithm));
  std::optional<maxent::FlameAgent> agent;

  const auto save_agent = [&](net::Checkpoint& c) {
    if (!agent) return;
    put_actor_spec(c, agent->actor().spec());
    agent->save(c);
  };
  try {
    if (config.task == Task::Gmm) {
      run_gmm(st, ckpt);
    } else {
      run_rl(st, ckpt, agent);
      save_agent(ckpt);
    }
  } catch (const std::exception& e) {
    st.result.status = 1;
    st.result.message = e.what();
    net::Checkpoint dump = ckpt;
    try {
      save_agent(dump);
    } catch (const std::exception&) {
    }
    dump.set_meta("status", "failed");
    dump.set_meta("env_steps", std::to_string(st.result.env_steps));
    dump.set_meta("train_steps", std::to_string(st.result.train_steps));
    dump.save(dir / kCheckpointFile);
    std::ostringstream msg;
    msg << "error: " << e.what() << "\nenv_steps: " << st.result.env_steps
        << "\ntrain_steps: " << st.result.train_steps << '\n';
    if (st.result.last_row) msg << "last_metrics: " << format_metrics_row(*st.result.last_row) << '\n';
    write_text(dir / kFailedMarker, msg.str());
    return st.result;
  }
  ckpt.set_meta("status", "completed");
  ckpt.set_meta("env_steps", std::to_string(st.result.env_steps));
  ckpt.set_meta("train_steps", std::to_string(st.result.train_steps));
  ckpt.set_meta("seed", std::to_string(config.seed));
  ckpt.save(dir / kCheckpointFile);
  std::ostringstream done;
  done << "config_hash " << config_hash(config) << "\nenv_steps " << st.result.env_steps << "\ntrain_steps "
       << st.result.train_steps << "\nmetrics_rows " << st.metrics.rows() << '\n';
  write_text(dir / kDoneMarker, done.str());
  return st.result;
}

}  // namespace flame::harness
