#pragma once

#include <functional>
#include <optional>

#include "flame/envs/coverage.hpp"
#include "flame/envs/multigoal.hpp"
#include "flame/flowcore/likelihood.hpp"
#include "flame/harness/metrics.hpp"
#include "flame/harness/run_config.hpp"
#include "flame/netlib/checkpoint.hpp"

namespace flame::harness {

/// Names of the files a finished run directory contains.
inline constexpr const char* kConfigFile = "config.txt";
inline constexpr const char* kMetricsFile = "metrics.csv";
inline constexpr const char* kCheckpointFile = "checkpoint.ckpt";
inline constexpr const char* kDoneMarker = "COMPLETED";
inline constexpr const char* kFailedMarker = "FAILED";
inline constexpr const char* kTerminalStatesFile = "terminal_states.csv";
/// Training episode returns (RL tasks only).
inline constexpr const char* kEpisodesFile = "episodes.csv";

/// Relative output directories are placed under $FLAME_OUTPUT_ROOT when set.
std::filesystem::path resolve_output_dir(const std::string& dir);

struct RunHooks {
  std::function<void(const MetricsRow&)> on_eval;
};

struct RunResult {
  int status = 0;
  std::string message;
  std::filesystem::path run_dir;
  std::int64_t env_steps = 0;
  std::int64_t train_steps = 0;
  std::optional<MetricsRow> last_row;
  std::optional<env::Coverage> coverage;
};

/// Trains and evaluates one configuration, writing config copy, metrics CSV,
/// final checkpoint and a completion marker into the run directory. Numeric
/// failures stop the run, save the last state and write a FAILED marker.
RunResult run(const RunConfig& config, const RunHooks& hooks = {});

/// Actor spec stored next to the weights so checkpoints are self-describing.
void put_actor_spec(net::Checkpoint& ckpt, const net::VectorFieldSpec& spec);
net::VectorFieldNet load_actor(const net::Checkpoint& ckpt);

struct MultiGoalEval {
  double mean_return = 0.0;
  env::Coverage coverage;
  Matrix terminal_states;
};

/// Runs `rollouts` evaluation episodes in lockstep with the evaluation schedule.
MultiGoalEval evaluate_multigoal(const maxent::FlameAgent& agent, const env::MultiGoalConfig& env_config,
                                 Index rollouts, nk::Rng& rng);

/// n policy actions for the bandit's fixed state, using the evaluation schedule.
Vector sample_bandit_actions(const maxent::FlameAgent& agent, Index n, nk::Rng& rng);

/// Mean squared error between log_prob_augmented on an N_est grid and the GMM
/// log density, over n flow samples.
double gmm_loglik_mse(const net::VelocityField& field, int n_est, Index n, nk::Rng& rng,
                      const flow::DivergenceMode& mode = flow::DivergenceMode::exact());

/// Same estimator driven by the exact marginal velocity of the GMM path, i.e.
/// the Euler discretisation error alone.
double gmm_reference_loglik_mse(int n_est, Index n, nk::Rng& rng);

}  // namespace flame::harness
