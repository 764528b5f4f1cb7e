#include "flame/harness/run_config.hpp"

#include <cinttypes>
#include <cstdio>
#include <fstream>
#include <functional>
#include <set>
#include <sstream>

namespace flame::harness {

const char* to_string(Task t) {
  switch (t) {
    case Task::Gmm: return "gmm";
    case Task::MultiGoal: return "multigoal";
    case Task::Bandit: return "bandit";
  }
  return "?";
}

const char* to_string(Algorithm a) {
  switch (a) {
    case Algorithm::FlameR: return "flame_r";
    case Algorithm::FlameM: return "flame_m";
    case Algorithm::FlameNoEnt: return "flame_noent";
    case Algorithm::CfmOnly: return "cfm_only";
  }
  return "?";
}

Task task_from_string(const std::string& s) {
  if (s == "gmm") return Task::Gmm;
  if (s == "multigoal") return Task::MultiGoal;
  if (s == "bandit") return Task::Bandit;
  throw std::invalid_argument("unknown task '" + s + "' (expected gmm, multigoal or bandit)");
}

Algorithm algorithm_from_string(const std::string& s) {
  if (s == "flame_r") return Algorithm::FlameR;
  if (s == "flame_m") return Algorithm::FlameM;
  if (s == "flame_noent") return Algorithm::FlameNoEnt;
  if (s == "cfm_only") return Algorithm::CfmOnly;
  throw std::invalid_argument("unknown algorithm '" + s + "' (expected flame_r, flame_m, flame_noent or cfm_only)");
}

maxent::FlameConfig RunConfig::effective_flame() const {
  maxent::FlameConfig f = flame;
  switch (algorithm) {
    case Algorithm::FlameR:
    case Algorithm::CfmOnly:
      f.variant = maxent::Variant::R;
      break;
    case Algorithm::FlameM:
      f.variant = maxent::Variant::M;
      break;
    case Algorithm::FlameNoEnt:
      f.variant = maxent::Variant::R;
      f.entropy_bonus = false;
      break;
  }
  if (task == Task::Bandit && bandit_q == "analytic") f.learn_alpha = false;
  if (actor_lr_anneal_steps >= 0) {
    f.actor_lr.total_steps = actor_lr_anneal_steps;
  } else {
    f.actor_lr.total_steps = static_cast<std::int64_t>(static_cast<double>(total_env_steps) * utd_ratio);
  }
  return f;
}

void RunConfig::validate() const {
  if (total_env_steps < 0) throw ConfigError("total_env_steps must be >= 0", 0);
  if (eval_every < 1) throw ConfigError("eval_every must be >= 1", 0);
  if (warmup_steps < 0) throw ConfigError("warmup_steps must be >= 0", 0);
  if (!(utd_ratio > 0.0)) throw ConfigError("utd_ratio must be positive", 0);
  if (eval_rollouts < 100) throw ConfigError("eval_rollouts must be >= 100", 0);
  if (bandit_q != "analytic" && bandit_q != "critic") throw ConfigError("bandit_q must be analytic or critic", 0);
  if (bandit_eval_samples < 1 || gmm_eval_samples < 1) throw ConfigError("sample counts must be positive", 0);
  if (task == Task::Gmm && algorithm == Algorithm::FlameNoEnt) {
    throw ConfigError("gmm is a supervised task; use flame_r, flame_m or cfm_only", 0);
  }
  if (task != Task::Gmm && algorithm == Algorithm::CfmOnly) {
    throw ConfigError("cfm_only trains on samples and only applies to the gmm task", 0);
  }
  try {
    effective_flame().validate();
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what(), 0);
  }
}

namespace {

std::string fmt_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  // Shortest form that still round-trips.
  for (int p = 1; p <= 17; ++p) {
    char shorter[40];
    std::snprintf(shorter, sizeof shorter, "%.*g", p, v);
    if (std::strtod(shorter, nullptr) == v) return shorter;
  }
  return buf;
}

double parse_double(const std::string& v) {
  std::size_t pos = 0;
  const double x = std::stod(v, &pos);
  if (pos != v.size()) throw std::invalid_argument("trailing characters");
  return x;
}

std::int64_t parse_int(const std::string& v) {
  std::size_t pos = 0;
  const long long x = std::stoll(v, &pos);
  if (pos != v.size()) throw std::invalid_argument("trailing characters");
  return x;
}

std::uint64_t parse_uint(const std::string& v) {
  if (!v.empty() && v[0] == '-') throw std::invalid_argument("negative value");
  std::size_t pos = 0;
  const unsigned long long x = std::stoull(v, &pos);
  if (pos != v.size()) throw std::invalid_argument("trailing characters");
  return x;
}

bool parse_bool(const std::string& v) {
  if (v == "true" || v == "1") return true;
  if (v == "false" || v == "0") return false;
  throw std::invalid_argument("expected true or false");
}

std::string fmt_bool(bool b) { return b ? "true" : "false"; }

struct Field {
  const char* key;
  std::function<void(RunConfig&, const std::string&)> set;
  std::function<std::string(const RunConfig&)> get;
};

#define FLAME_DOUBLE(name, expr)                                                       \
  Field {                                                                              \
    name, [](RunConfig& c, const std::string& v) { expr = parse_double(v); },          \
        [](const RunConfig& c) { return fmt_double(expr); }                            \
  }
#define FLAME_INT(name, expr)                                                          \
  Field {                                                                              \
    name, [](RunConfig& c, const std::string& v) { expr = parse_int(v); },             \
        [](const RunConfig& c) { return std::to_string(expr); }                        \
  }
#define FLAME_BOOL(name, expr)                                                         \
  Field {                                                                              \
    name, [](RunConfig& c, const std::string& v) { expr = parse_bool(v); },            \
        [](const RunConfig& c) { return fmt_bool(expr); }                              \
  }

const std::vector<Field>& fields() {
  static const std::vector<Field> table{
      {"task", [](RunConfig& c, const std::string& v) { c.task = task_from_string(v); },
       [](const RunConfig& c) { return std::string(to_string(c.task)); }},
      {"algorithm", [](RunConfig& c, const std::string& v) { c.algorithm = algorithm_from_string(v); },
       [](const RunConfig& c) { return std::string(to_string(c.algorithm)); }},
      {"seed", [](RunConfig& c, const std::string& v) { c.seed = parse_uint(v); },
       [](const RunConfig& c) { return std::to_string(c.seed); }},
      FLAME_INT("total_env_steps", c.total_env_steps),
      FLAME_INT("eval_every", c.eval_every),
      FLAME_INT("warmup_steps", c.warmup_steps),
      FLAME_DOUBLE("utd_ratio", c.utd_ratio),
      {"output_dir", [](RunConfig& c, const std::string& v) { c.output_dir = v; },
       [](const RunConfig& c) { return c.output_dir; }},

      FLAME_INT("k", c.flame.k),
      FLAME_INT("n_gen_train", c.flame.n_gen_train),
      FLAME_INT("n_gen_eval", c.flame.n_gen_eval),
      FLAME_INT("n_est", c.flame.n_est),
      FLAME_DOUBLE("alpha_init", c.flame.alpha_init),
      FLAME_BOOL("learn_alpha", c.flame.learn_alpha),
      {"target_entropy",
       [](RunConfig& c, const std::string& v) {
         if (v == "auto") c.flame.target_entropy.reset();
         else c.flame.target_entropy = parse_double(v);
       },
       [](const RunConfig& c) {
         return c.flame.target_entropy ? fmt_double(*c.flame.target_entropy) : std::string("auto");
       }},
      FLAME_DOUBLE("gamma", c.flame.gamma),
      FLAME_DOUBLE("tau", c.flame.tau),
      FLAME_INT("batch_size", c.flame.batch_size),
      {"buffer_capacity", [](RunConfig& c, const std::string& v) { c.flame.buffer_capacity = parse_uint(v); },
       [](const RunConfig& c) { return std::to_string(c.flame.buffer_capacity); }},
      {"proposal", [](RunConfig& c, const std::string& v) { c.flame.proposal = maxent::proposal_from_string(v); },
       [](const RunConfig& c) { return std::string(maxent::to_string(c.flame.proposal)); }},
      FLAME_DOUBLE("actor_lr", c.flame.actor_lr.start),
      FLAME_DOUBLE("actor_lr_end", c.flame.actor_lr.end),
      FLAME_INT("actor_lr_anneal_steps", c.actor_lr_anneal_steps),
      FLAME_DOUBLE("critic_lr", c.flame.critic_lr),
      FLAME_DOUBLE("alpha_lr", c.flame.alpha_lr),
      FLAME_INT("actor_layers", c.flame.actor_layers),
      FLAME_INT("actor_width", c.flame.actor_width),
      FLAME_INT("critic_layers", c.flame.critic_layers),
      FLAME_INT("critic_width", c.flame.critic_width),
      {"activation", [](RunConfig& c, const std::string& v) { c.flame.activation = net::activation_from_string(v); },
       [](const RunConfig& c) { return std::string(net::to_string(c.flame.activation)); }},
      FLAME_INT("time_embed_dim", c.flame.embedding.dim),
      FLAME_DOUBLE("time_embed_max_freq", c.flame.embedding.max_frequency),
      FLAME_INT("max_exact_trace_dim", c.flame.max_exact_trace_dim),
      FLAME_INT("hutchinson_probes", c.flame.hutchinson_probes),

      FLAME_INT("multigoal_horizon", c.multigoal.horizon),
      FLAME_DOUBLE("multigoal_reward_sigma", c.multigoal.reward_sigma),
      FLAME_DOUBLE("multigoal_goal_radius", c.multigoal.goal_radius),
      FLAME_DOUBLE("multigoal_start_half_width", c.multigoal.start_half_width),
      FLAME_BOOL("multigoal_terminate_at_goal", c.multigoal.terminate_at_goal),
      FLAME_INT("eval_rollouts", c.eval_rollouts),
      FLAME_DOUBLE("coverage_threshold", c.coverage_threshold),

      {"bandit_q", [](RunConfig& c, const std::string& v) { c.bandit_q = v; },
       [](const RunConfig& c) { return c.bandit_q; }},
      FLAME_INT("bandit_eval_samples", c.bandit_eval_samples),
      FLAME_INT("gmm_eval_samples", c.gmm_eval_samples),
  };
  return table;
}

#undef FLAME_DOUBLE
#undef FLAME_INT
#undef FLAME_BOOL

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

const Field* find_field(const std::string& key) {
  for (const auto& f : fields())
    if (key == f.key) return &f;
  return nullptr;
}

}  // namespace

void set_config_value(RunConfig& cfg, const std::string& key, const std::string& value) {
  const Field* f = find_field(key);
  if (f == nullptr) throw ConfigError("unknown key '" + key + "'", 0);
  try {
    f->set(cfg, value);
  } catch (const std::exception& e) {
    throw ConfigError("bad value '" + value + "' for '" + key + "': " + e.what(), 0);
  }
}

std::vector<std::string> config_keys() {
  std::vector<std::string> keys;
  for (const auto& f : fields()) keys.emplace_back(f.key);
  return keys;
}

RunConfig parse_run_config(const std::string& text, const RunConfig& base) {
  RunConfig cfg = base;
  std::istringstream in(text);
  std::string line;
  std::set<std::string> seen;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.resize(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw ConfigError("expected 'key = value', got '" + line + "'", lineno);
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (key.empty()) throw ConfigError("missing key", lineno);
    if (!seen.insert(key).second) throw ConfigError("duplicate key '" + key + "'", lineno);
    try {
      set_config_value(cfg, key, value);
    } catch (const ConfigError& e) {
      throw ConfigError(e.what(), lineno);
    }
  }
  return cfg;
}

RunConfig load_run_config(const std::filesystem::path& path, const RunConfig& base) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file " + path.string(), 0);
  std::stringstream ss;
  ss << in.rdbuf();
  try {
    return parse_run_config(ss.str(), base);
  } catch (const ConfigError& e) {
    throw ConfigError(path.string() + ": " + e.what(), e.line());
  }
}

std::string serialize_run_config(const RunConfig& cfg) {
  std::string out;
  for (const auto& f : fields()) out += std::string(f.key) + " = " + f.get(cfg) + "\n";
  return out;
}

std::string config_hash(const RunConfig& cfg) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char ch : serialize_run_config(cfg)) {
    h ^= ch;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016" PRIx64, h);
  return buf;
}

}  // namespace flame::harness
