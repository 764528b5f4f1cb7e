#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "flame/harness/plot.hpp"
#include "flame/harness/run_config.hpp"
#include "flame/harness/runner.hpp"
#include "flame/harness/sweep.hpp"

using namespace flame;
using namespace flame::harness;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("flame_harness_" + name);
  fs::remove_all(p);
  return p;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// Small enough to train in about a second.
RunConfig tiny_multigoal(const fs::path& out) {
  RunConfig cfg;
  cfg.task = Task::MultiGoal;
  cfg.total_env_steps = 400;
  cfg.warmup_steps = 100;
  cfg.eval_every = 200;
  cfg.eval_rollouts = 100;
  cfg.flame.k = 16;
  cfg.flame.batch_size = 16;
  cfg.flame.n_gen_train = 4;
  cfg.flame.n_gen_eval = 2;
  cfg.flame.actor_width = 16;
  cfg.flame.critic_width = 16;
  cfg.flame.buffer_capacity = 1000;
  cfg.output_dir = out.string();
  return cfg;
}

std::size_t count(const std::string& s, const std::string& needle) {
  std::size_t n = 0;
  for (auto pos = s.find(needle); pos != std::string::npos; pos = s.find(needle, pos + 1)) ++n;
  return n;
}

}  // namespace

TEST_CASE("config text round trips through serialize and parse") {
  RunConfig cfg;
  cfg.task = Task::Bandit;
  cfg.algorithm = Algorithm::FlameM;
  cfg.seed = 42;
  cfg.utd_ratio = 0.3;
  cfg.flame.k = 77;
  cfg.flame.alpha_init = 0.1234567890123;
  cfg.flame.target_entropy = -1.5;
  cfg.flame.proposal = maxent::ProposalKind::LastPolicy;
  cfg.output_dir = "somewhere/else";
  const std::string text = serialize_run_config(cfg);
  const RunConfig back = parse_run_config(text);
  CHECK(serialize_run_config(back) == text);
  CHECK(config_hash(back) == config_hash(cfg));
  CHECK(back.flame.alpha_init == cfg.flame.alpha_init);
  CHECK(back.flame.target_entropy.value() == -1.5);

  RunConfig other = cfg;
  other.seed = 43;
  CHECK(config_hash(other) != config_hash(cfg));
}

TEST_CASE("config errors carry line numbers") {
  auto line_of = [](const std::string& text) {
    try {
      parse_run_config(text);
    } catch (const ConfigError& e) {
      return e.line();
    }
    return -1;
  };
  CHECK(line_of("seed = 1\n# comment\nbogus_key = 3\n") == 3);
  CHECK(line_of("seed = 1\nseed = 2\n") == 2);
  CHECK(line_of("k = many\n") == 1);
  CHECK(line_of("task = chess\n") == 1);
  CHECK(line_of("no equals sign\n") == 1);
  CHECK(parse_run_config("  # only comments\n\nseed = 9  # trailing\n").seed == 9);
}

TEST_CASE("algorithm presets") {
  RunConfig cfg;
  cfg.total_env_steps = 1000;
  cfg.utd_ratio = 0.5;
  cfg.algorithm = Algorithm::FlameNoEnt;
  auto f = cfg.effective_flame();
  CHECK(f.variant == maxent::Variant::R);
  CHECK_FALSE(f.entropy_bonus);
  CHECK(f.actor_lr.total_steps == 500);
  cfg.algorithm = Algorithm::FlameM;
  CHECK(cfg.effective_flame().variant == maxent::Variant::M);

  cfg.task = Task::Gmm;
  cfg.algorithm = Algorithm::FlameNoEnt;
  CHECK_THROWS_AS(cfg.validate(), ConfigError);
  cfg.task = Task::Bandit;
  cfg.algorithm = Algorithm::CfmOnly;
  CHECK_THROWS_AS(cfg.validate(), ConfigError);
}

TEST_CASE("metrics rows round trip through the CSV reader") {
  const fs::path dir = scratch("metrics");
  fs::create_directories(dir);
  {
    MetricsWriter w(dir / "m.csv");
    MetricsRow a;
    a.step = 10;
    a.episode_return = 1.5;
    a.coverage[2] = 0.25;
    w.append(a);
    MetricsRow b;
    b.step = 20;
    b.loglik_mse[4] = 1e-7;
    w.append(b);
    CHECK(w.rows() == 2);
  }
  const auto text = slurp(dir / "m.csv");
  CHECK(text.rfind(kMetricsSchema, 0) == 0);
  const auto t = read_csv(dir / "m.csv");
  CHECK(t.columns == metrics_columns());
  REQUIRE(t.rows.size() == 2);
  CHECK(t.column("step")(1) == 20);
  CHECK(t.column("episode_return")(0) == 1.5);
  CHECK(std::isnan(t.column("episode_return")(1)));
  CHECK(t.column("cov_g3")(0) == 0.25);
  CHECK(t.column("loglik_mse_nest20")(1) == 1e-7);

  std::istringstream ragged("a,b\n1,2\n3\n");
  CHECK_THROWS(read_csv(ragged));
  std::istringstream words("a,b\n1,x\n");
  CHECK_THROWS(read_csv(words));

  MetricsRow bad;
  bad.alpha = std::nan("");
  CHECK(bad.first_non_finite() == "alpha");
}

TEST_CASE("zero-step run writes a header-only metrics file and completes") {
  const fs::path out = scratch("zero");
  auto cfg = tiny_multigoal(out);
  cfg.total_env_steps = 0;
  const auto res = run(cfg);
  CHECK(res.status == 0);
  CHECK(res.env_steps == 0);
  CHECK(res.train_steps == 0);
  CHECK(fs::exists(out / kDoneMarker));
  CHECK(read_csv(out / kMetricsFile).rows.empty());
}

TEST_CASE("short MultiGoal run: artifacts, update accounting, determinism") {
  const fs::path a = scratch("mg_a"), b = scratch("mg_b");
  const auto cfg = tiny_multigoal(a);
  const auto res = run(cfg);
  REQUIRE(res.status == 0);
  for (const char* f : {kConfigFile, kMetricsFile, kCheckpointFile, kDoneMarker, kTerminalStatesFile, kEpisodesFile})
    CHECK(fs::exists(a / f));
  CHECK_FALSE(fs::exists(a / kFailedMarker));
  CHECK(res.env_steps == 400);
  CHECK(std::llabs(res.train_steps - static_cast<std::int64_t>(400 * cfg.utd_ratio)) <= 1);
  CHECK(load_run_config(a / kConfigFile).seed == cfg.seed);

  const auto table = read_csv(a / kMetricsFile);
  REQUIRE(table.rows.size() == 2);
  CHECK(table.column("step")(1) == 400);
  REQUIRE(res.coverage.has_value());
  CHECK(res.coverage->fractions.size() == 4);

  auto again = cfg;
  again.output_dir = b.string();
  REQUIRE(run(again).status == 0);
  CHECK(slurp(a / kMetricsFile) == slurp(b / kMetricsFile));
  CHECK(slurp(a / kTerminalStatesFile) == slurp(b / kTerminalStatesFile));

  // The checkpoint restores the actor it was written from.
  const auto ckpt = net::Checkpoint::load(a / kCheckpointFile);
  const auto actor = load_actor(ckpt);
  CHECK(actor.action_dim() == 2);
}

TEST_CASE("bandit and gmm runs report their metrics") {
  const fs::path bd = scratch("bandit"), gd = scratch("gmm");
  auto cfg = tiny_multigoal(bd);
  cfg.task = Task::Bandit;
  cfg.bandit_eval_samples = 500;
  auto res = run(cfg);
  REQUIRE(res.status == 0);
  const auto bt = read_csv(bd / kMetricsFile);
  REQUIRE_FALSE(bt.rows.empty());
  CHECK(bt.column("w1")(0) >= 0.0);
  CHECK(bt.column("w1")(0) <= 2.0);

  cfg.task = Task::Gmm;
  cfg.output_dir = gd.string();
  cfg.total_env_steps = 20;
  cfg.eval_every = 10;
  cfg.gmm_eval_samples = 128;
  res = run(cfg);
  REQUIRE(res.status == 0);
  const auto gt = read_csv(gd / kMetricsFile);
  REQUIRE(gt.rows.size() == 2);
  for (int n : kNestColumns) CHECK(gt.column("loglik_mse_nest" + std::to_string(n))(1) > 0.0);
}

TEST_CASE("relative output directories honour FLAME_OUTPUT_ROOT") {
  const fs::path root = scratch("root");
  setenv("FLAME_OUTPUT_ROOT", root.c_str(), 1);
  CHECK(resolve_output_dir("runs/x") == root / "runs/x");
  CHECK(resolve_output_dir("/abs/y") == fs::path("/abs/y"));
  unsetenv("FLAME_OUTPUT_ROOT");
  CHECK(resolve_output_dir("runs/x") == fs::path("runs/x"));
}

TEST_CASE("sensitivity sweep over a single value") {
  const fs::path out = scratch("sweep");
  auto base = tiny_multigoal(out);
  base.total_env_steps = 200;
  const auto points = sweep_sensitivity(SweepAxis::NEst, {"3"}, base);
  REQUIRE(points.size() == 1);
  CHECK(points[0].result.status == 0);
  const auto table = read_csv(out / "sweep.csv");
  CHECK(table.rows.size() == 1);
  CHECK(table.column("point")(0) == 0);
  CHECK(table.column("status")(0) == 0);
  CHECK(slurp(out / "sweep.csv").find("# point 0 3\n") != std::string::npos);
  CHECK(load_run_config(points[0].result.run_dir / kConfigFile).flame.n_est == 3);
  CHECK_THROWS(sweep_axis_from_string("depth"));
}

TEST_CASE("plots are deterministic with one vertex per finite row") {
  std::istringstream in("step,episode_return,alpha\n0,1,0.2\n100,2,\n200,4,0.1\n");
  const auto table = read_csv(in);
  PlotOptions opts;
  opts.series = {"episode_return", "alpha"};
  const auto svg = render_plot(table, PlotKind::LearningCurve, opts);
  CHECK(svg == render_plot(table, PlotKind::LearningCurve, opts));
  CHECK(count(svg, "class=\"series\"") == 2);
  // Three points for the return, two for alpha (one missing cell).
  const auto first = svg.find("points=\"");
  const auto second = svg.find("points=\"", first + 1);
  const auto pts = [&](std::size_t at) {
    const auto begin = at + 8;
    return count(svg.substr(begin, svg.find('"', begin) - begin), ",");
  };
  CHECK(pts(first) == 3);
  CHECK(pts(second) == 2);

  std::istringstream empty_in("step,episode_return\n");
  const auto empty_svg = render_plot(read_csv(empty_in), PlotKind::LearningCurve);
  CHECK(empty_svg.find("<svg") == 0);
  CHECK(count(empty_svg, "class=\"series\"") == 0);
  CHECK(count(empty_svg, "<rect") >= 2);
  CHECK(count(empty_svg, "<text") > 0);

  std::istringstream mse_in("n_est,mse\n1,10\n5,0.2\n20,0.02\n");
  CHECK(count(render_plot(read_csv(mse_in), PlotKind::MseVsNest), "class=\"series\"") == 1);
  CHECK_THROWS(plot_kind_from_string("pie"));
}
