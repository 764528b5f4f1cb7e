#pragma once

#include <string>
#include <vector>

#include "flame/harness/runner.hpp"

namespace flame::harness {

struct LoglikPoint {
  int n_est = 1;
  double mse = 0.0;
};

/// For each N_est: MSE between log_prob_augmented and the GMM log density over
/// n_samples draws. Every N_est uses the same seed, so base noise is shared.
std::vector<LoglikPoint> sweep_loglik_mse(const net::VelocityField& field, const std::vector<int>& n_est_list,
                                          Index n_samples, std::uint64_t seed);
std::vector<LoglikPoint> sweep_loglik_mse(const std::filesystem::path& checkpoint, const std::vector<int>& n_est_list,
                                          Index n_samples, std::uint64_t seed);
/// Columns n_est,mse.
void write_loglik_csv(const std::filesystem::path& path, const std::vector<LoglikPoint>& points);

enum class SweepAxis { NGen, NEst, K, Proposal };
SweepAxis sweep_axis_from_string(const std::string& s);
const char* to_string(SweepAxis axis);

struct SweepPoint {
  std::string value;
  RunResult result;
};

/// One run per value into <base.output_dir>/<axis>_<value>, sharing the base
/// seed, plus <base.output_dir>/sweep.csv with the final metrics of each run.
std::vector<SweepPoint> sweep_sensitivity(SweepAxis axis, const std::vector<std::string>& values,
                                          const RunConfig& base, const RunHooks& hooks = {});

}  // namespace flame::harness
