#include "flame/harness/sweep.hpp"

#include <fstream>
#include <stdexcept>

namespace flame::harness {

std::vector<LoglikPoint> sweep_loglik_mse(const net::VelocityField& field, const std::vector<int>& n_est_list,
                                          Index n_samples, std::uint64_t seed) {
  if (n_samples < 1) throw std::invalid_argument("sweep_loglik_mse: n_samples must be positive");
  std::vector<LoglikPoint> out;
  for (int n : n_est_list) {
    if (n < 1) throw std::invalid_argument("sweep_loglik_mse: N_est must be >= 1");
    nk::Rng rng(seed, 77);
    out.push_back({n, gmm_loglik_mse(field, n, n_samples, rng)});
  }
  return out;
}

std::vector<LoglikPoint> sweep_loglik_mse(const std::filesystem::path& checkpoint, const std::vector<int>& n_est_list,
                                          Index n_samples, std::uint64_t seed) {
  const auto actor = load_actor(net::Checkpoint::load(checkpoint));
  if (actor.action_dim() != 2 || actor.state_dim() != 0) {
    throw std::invalid_argument("sweep_loglik_mse: checkpoint is not an unconditional 2-D flow");
  }
  return sweep_loglik_mse(actor, n_est_list, n_samples, seed);
}

void write_loglik_csv(const std::filesystem::path& path, const std::vector<LoglikPoint>& points) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << "n_est,mse\n";
  for (const auto& p : points) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%d,%.10g\n", p.n_est, p.mse);
    out << buf;
  }
}

SweepAxis sweep_axis_from_string(const std::string& s) {
  if (s == "n_gen") return SweepAxis::NGen;
  if (s == "n_est") return SweepAxis::NEst;
  if (s == "k") return SweepAxis::K;
  if (s == "proposal") return SweepAxis::Proposal;
  throw std::invalid_argument("unknown sweep axis '" + s + "' (expected n_gen, n_est, k or proposal)");
}

const char* to_string(SweepAxis axis) {
  switch (axis) {
    case SweepAxis::NGen: return "n_gen";
    case SweepAxis::NEst: return "n_est";
    case SweepAxis::K: return "k";
    case SweepAxis::Proposal: return "proposal";
  }
  return "?";
}

namespace {

const char* axis_key(SweepAxis axis) {
  switch (axis) {
    case SweepAxis::NGen: return "n_gen_train";
    case SweepAxis::NEst: return "n_est";
    case SweepAxis::K: return "k";
    case SweepAxis::Proposal: return "proposal";
  }
  return "?";
}

}  // namespace

std::vector<SweepPoint> sweep_sensitivity(SweepAxis axis, const std::vector<std::string>& values,
                                          const RunConfig& base, const RunHooks& hooks) {
  if (values.empty()) throw std::invalid_argument("sweep_sensitivity: no values");
  // Validate every value before spending time on runs.
  std::vector<RunConfig> configs;
  for (const auto& v : values) {
    RunConfig cfg = base;
    set_config_value(cfg, axis_key(axis), v);
    cfg.output_dir = (std::filesystem::path(base.output_dir) / (std::string(to_string(axis)) + "_" + v)).string();
    cfg.validate();
    configs.push_back(cfg);
  }
  std::vector<SweepPoint> out;
  for (std::size_t i = 0; i < values.size(); ++i) out.push_back({values[i], run(configs[i], hooks)});

  const auto dir = resolve_output_dir(base.output_dir);
  std::filesystem::create_directories(dir);
  std::ofstream csv(dir / "sweep.csv", std::ios::trunc);
  // Values may be words (proposal), so they live in comments keyed by point
  // index and the table itself stays numeric.
  csv << kMetricsSchema << "\n# sweep axis " << to_string(axis) << '\n';
  for (std::size_t i = 0; i < out.size(); ++i) csv << "# point " << i << ' ' << out[i].value << '\n';
  csv << "point,status";
  for (const auto& c : metrics_columns()) csv << ',' << c;
  csv << '\n';
  for (std::size_t i = 0; i < out.size(); ++i) {
    const auto& p = out[i];
    csv << i << ',' << p.result.status << ',';
    if (p.result.last_row) {
      csv << format_metrics_row(*p.result.last_row);
    } else {
      csv << std::string(metrics_columns().size() - 1, ',');
    }
    csv << '\n';
  }
  return out;
}

}  // namespace flame::harness
