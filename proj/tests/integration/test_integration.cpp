// Slow end-to-end checks: each case trains real configurations.
#include <doctest.h>

#include <cmath>
#include <filesystem>

#include "flame/harness/runner.hpp"
#include "flame/harness/sweep.hpp"

#ifndef FLAME_SOURCE_DIR
#define FLAME_SOURCE_DIR "."
#endif

using namespace flame;
using namespace flame::harness;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("flame_integration_" + name);
  fs::remove_all(p);
  return p;
}

RunConfig shipped(const std::string& name, const fs::path& out) {
  auto cfg = load_run_config(fs::path(FLAME_SOURCE_DIR) / "configs" / name);
  cfg.output_dir = out.string();
  return cfg;
}

double mean_return_in(const CsvTable& episodes, double lo, double hi) {
  const Vector step = episodes.column("step"), ret = episodes.column("return");
  double sum = 0.0;
  int n = 0;
  for (Index i = 0; i < step.size(); ++i) {
    if (step(i) > lo && step(i) <= hi) {
      sum += ret(i);
      ++n;
    }
  }
  REQUIRE(n > 0);
  return sum / n;
}

double final_w1(const SweepPoint& p) {
  REQUIRE(p.result.status == 0);
  REQUIRE(p.result.last_row.has_value());
  return p.result.last_row->w1.value();
}

}  // namespace

TEST_CASE("MultiGoal smoke run: episode reward rises over 10k steps") {
  for (std::uint64_t seed = 0; seed < 3; ++seed) {
    CAPTURE(seed);
    auto cfg = shipped("multigoal.conf", scratch("smoke_" + std::to_string(seed)));
    cfg.seed = seed;
    cfg.total_env_steps = 10000;
    cfg.eval_every = 10000;
    const auto res = run(cfg);
    REQUIRE(res.status == 0);
    const auto episodes = read_csv(res.run_dir / kEpisodesFile);
    const double first = mean_return_in(episodes, 0, 1000);
    const double last = mean_return_in(episodes, 9000, 10000);
    CAPTURE(first);
    CAPTURE(last);
    CHECK(last > first);
  }
}

TEST_CASE("log-likelihood sweep on a trained GMM flow") {
  auto cfg = shipped("gmm.conf", scratch("gmm"));
  cfg.total_env_steps = 2000;
  cfg.eval_every = 2000;
  cfg.gmm_eval_samples = 256;
  const auto res = run(cfg);
  REQUIRE(res.status == 0);
  const auto ckpt = res.run_dir / kCheckpointFile;

  const auto single = sweep_loglik_mse(ckpt, {1}, 512, 3);
  REQUIRE(single.size() == 1);
  CHECK(single[0].n_est == 1);

  const auto points = sweep_loglik_mse(ckpt, {1, 2, 5, 10, 20}, 2048, 3);
  REQUIRE(points.size() == 5);
  for (const auto& p : points) CHECK(p.mse >= 0.0);
  CHECK(points[0].mse > points[2].mse);
  CHECK(points[2].mse >= points[4].mse);
}

TEST_CASE("bandit K sweep: a single candidate fails to match the soft target") {
  auto base = shipped("bandit.conf", scratch("k_sweep"));
  const auto points = sweep_sensitivity(SweepAxis::K, {"1", "50", "300"}, base);
  REQUIRE(points.size() == 3);
  const double w1_k1 = final_w1(points[0]), w1_k300 = final_w1(points[2]);
  CAPTURE(w1_k1);
  CAPTURE(final_w1(points[1]));
  CAPTURE(w1_k300);
  CHECK(w1_k1 > w1_k300);
}

TEST_CASE("bandit proposal sweep: uniform and last-policy proposals agree") {
  auto base = shipped("bandit.conf", scratch("proposal_sweep"));
  const auto points = sweep_sensitivity(SweepAxis::Proposal, {"uniform", "last_policy"}, base);
  REQUIRE(points.size() == 2);
  const double a = points[0].result.last_row->episode_return.value();
  const double b = points[1].result.last_row->episode_return.value();
  CAPTURE(a);
  CAPTURE(b);
  CAPTURE(final_w1(points[0]));
  CAPTURE(final_w1(points[1]));
  CHECK(std::abs(a - b) < 0.1 * std::max(std::abs(a), std::abs(b)));
}
