#pragma once

#include <cstdint>
#include <filesystem>
#include <stdexcept>
#include <string>
#include <vector>

#include "flame/envs/multigoal.hpp"
#include "flame/maxent/agent.hpp"

namespace flame::harness {

enum class Task { Gmm, MultiGoal, Bandit };
enum class Algorithm { FlameR, FlameM, FlameNoEnt, CfmOnly };

const char* to_string(Task t);
const char* to_string(Algorithm a);
Task task_from_string(const std::string& s);
Algorithm algorithm_from_string(const std::string& s);

/// Thrown for malformed config text; line() is 1-based, 0 when not tied to a line.
class ConfigError : public std::runtime_error {
 public:
  ConfigError(const std::string& what, int line)
      : std::runtime_error(line > 0 ? "line " + std::to_string(line) + ": " + what : what), line_(line) {}
  int line() const { return line_; }

 private:
  int line_;
};

struct RunConfig {
  Task task = Task::MultiGoal;
  Algorithm algorithm = Algorithm::FlameR;
  std::uint64_t seed = 0;
  /// Environment steps (RL tasks) or gradient iterations (gmm).
  std::int64_t total_env_steps = 50000;
  std::int64_t eval_every = 5000;
  /// Uniform-random actions before the policy takes over.
  std::int64_t warmup_steps = 5000;
  double utd_ratio = 0.2;
  /// -1 anneals the actor lr over the whole run, 0 keeps it constant.
  std::int64_t actor_lr_anneal_steps = -1;
  std::string output_dir = "runs/default";

  maxent::FlameConfig flame{};

  env::MultiGoalConfig multigoal{};
  /// Parallel evaluation rollouts for returns and goal coverage.
  Index eval_rollouts = 200;
  double coverage_threshold = 0.1;

  /// "analytic" scores candidates with the closed-form Q; "critic" learns it.
  std::string bandit_q = "analytic";
  Index bandit_eval_samples = 10000;

  Index gmm_eval_samples = 4096;

  /// Field values after algorithm/task presets (variant, entropy, etc.).
  maxent::FlameConfig effective_flame() const;
  void validate() const;
};

/// Parses "key = value" lines; '#' starts a comment. Unknown keys, duplicate
/// keys and malformed values raise ConfigError with the line number.
RunConfig parse_run_config(const std::string& text, const RunConfig& base = {});
RunConfig load_run_config(const std::filesystem::path& path, const RunConfig& base = {});
/// Applies one key=value override on top of cfg.
void set_config_value(RunConfig& cfg, const std::string& key, const std::string& value);
std::vector<std::string> config_keys();
/// Every key in a fixed order with round-trippable values.
std::string serialize_run_config(const RunConfig& cfg);
/// FNV-1a 64 of the serialized text, as hex.
std::string config_hash(const RunConfig& cfg);

}  // namespace flame::harness
