#include <CLI11.hpp>

#ifdef __GLIBC__
#include <malloc.h>
#endif

#include <cstdio>
#include <iostream>
#include <sstream>

#include "flame/envs/bandit.hpp"
#include "flame/harness/plot.hpp"
#include "flame/harness/runner.hpp"
#include "flame/harness/sweep.hpp"

using namespace flame;
using namespace flame::harness;

namespace {

struct CommonRunArgs {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::string out;
  std::vector<std::string> overrides;
  bool quiet = false;

  void attach(CLI::App* app) {
    app->add_option("-c,--config", config, "key=value config file");
    app->add_option("--seed", seed, "overrides the config seed");
    app->add_option("-o,--out", out, "output directory (relative paths go under $FLAME_OUTPUT_ROOT)");
    app->add_option("--set", overrides, "extra key=value overrides, applied after the file")->take_all();
    app->add_flag("-q,--quiet", quiet, "no per-evaluation progress lines");
  }

  // defaults < file < --set < dedicated flags
  RunConfig resolve() const {
    RunConfig cfg;
    if (!config.empty()) cfg = load_run_config(config);
    for (const auto& kv : overrides) {
      const auto eq = kv.find('=');
      if (eq == std::string::npos) throw ConfigError("--set expects key=value, got '" + kv + "'", 0);
      set_config_value(cfg, kv.substr(0, eq), kv.substr(eq + 1));
    }
    if (seed) cfg.seed = *seed;
    if (!out.empty()) cfg.output_dir = out;
    cfg.validate();
    return cfg;
  }

  RunHooks hooks() const {
    RunHooks h;
    if (!quiet) h.on_eval = [](const MetricsRow& row) { std::cerr << format_metrics_row(row) << '\n'; };
    return h;
  }
};

std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ','))
    if (!item.empty()) out.push_back(item);
  return out;
}

int report(const RunResult& r) {
  if (r.status != 0) {
    std::cerr << "run failed: " << r.message << " (see " << (r.run_dir / kFailedMarker).string() << ")\n";
    return 1;
  }
  std::cout << "run complete: " << r.run_dir.string() << " (" << r.env_steps << " env steps, " << r.train_steps
            << " updates)\n";
  if (r.coverage) {
    std::cout << "goal coverage:";
    for (Index g = 0; g < r.coverage->fractions.size(); ++g) std::cout << ' ' << r.coverage->fractions(g);
    std::cout << '\n';
  }
  return 0;
}

int cmd_eval(const std::string& run_dir, Index samples, std::uint64_t seed) {
  const std::filesystem::path dir = resolve_output_dir(run_dir);
  RunConfig cfg = load_run_config(dir / kConfigFile);
  const auto ckpt = net::Checkpoint::load(dir / kCheckpointFile);
  if (cfg.task == Task::Gmm) {
    std::vector<int> list(kNestColumns.begin(), kNestColumns.end());
    for (const auto& p : sweep_loglik_mse(load_actor(ckpt), list, samples > 0 ? samples : cfg.gmm_eval_samples, seed))
      std::printf("n_est=%d mse=%.6g\n", p.n_est, p.mse);
    return 0;
  }
  const bool multigoal = cfg.task == Task::MultiGoal;
  maxent::ActionBox box = multigoal ? maxent::ActionBox::symmetric(2, 1.0) : maxent::ActionBox::symmetric(1, 1.0);
  maxent::FlameAgent agent(multigoal ? 2 : 1, box, cfg.effective_flame(), cfg.seed);
  agent.load(ckpt);
  nk::Rng rng(seed, 5);
  if (multigoal) {
    const auto ev = evaluate_multigoal(agent, cfg.multigoal, samples > 0 ? samples : cfg.eval_rollouts, rng);
    std::printf("mean_return=%.6g coverage=%.3f,%.3f,%.3f,%.3f goals_covered=%d\n", ev.mean_return,
                ev.coverage.fractions(0), ev.coverage.fractions(1), ev.coverage.fractions(2), ev.coverage.fractions(3),
                ev.coverage.goals_covered(cfg.coverage_threshold));
  } else {
    const Vector acts = sample_bandit_actions(agent, samples > 0 ? samples : cfg.bandit_eval_samples, rng);
    const double alpha = agent.temperature().alpha() > 0.0 ? agent.temperature().alpha() : cfg.flame.alpha_init;
    std::printf("w1=%.6g alpha=%.6g\n", env::wasserstein1(acts, env::soft_bandit_oracle(alpha)), alpha);
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
#ifdef __GLIBC__
  // Keep large temporaries on the heap instead of mmap/munmap per allocation.
  mallopt(M_MMAP_THRESHOLD, 1 << 30);
  mallopt(M_TRIM_THRESHOLD, 1 << 30);
#endif
  CLI::App app{"flame: max-entropy RL with flow-matching policies"};
  app.require_subcommand(1);

  CommonRunArgs train_args;
  auto* train = app.add_subcommand("train", "train one configuration");
  train_args.attach(train);

  std::string eval_run;
  Index eval_samples = 0;
  std::uint64_t eval_seed = 0;
  auto* eval = app.add_subcommand("eval", "re-evaluate a finished run directory");
  eval->add_option("run", eval_run, "run directory")->required();
  eval->add_option("-n,--samples", eval_samples, "rollouts or samples (default from the run config)");
  eval->add_option("--seed", eval_seed, "evaluation seed");

  CommonRunArgs sweep_args;
  std::string axis, values, checkpoint, sweep_out;
  Index sweep_samples = 4096;
  auto* sweep = app.add_subcommand("sweep", "sensitivity sweep, or log-likelihood MSE vs N_est for a checkpoint");
  sweep_args.attach(sweep);
  sweep->add_option("--axis", axis, "n_gen, n_est, k or proposal")->required();
  sweep->add_option("--values", values, "comma-separated values")->required();
  sweep->add_option("--checkpoint", checkpoint, "gmm checkpoint: run the log-likelihood sweep instead of training");
  sweep->add_option("--samples", sweep_samples, "flow samples for the log-likelihood sweep");
  sweep->add_option("--csv", sweep_out, "output CSV for the log-likelihood sweep (default stdout)");

  std::string plot_csv, plot_kind, plot_out, plot_title;
  std::vector<std::string> plot_series;
  auto* plot = app.add_subcommand("plot", "render a CSV as SVG");
  plot->add_option("csv", plot_csv, "input CSV")->required();
  plot->add_option("--kind", plot_kind, "learning-curve, mse-vs-nest or goal-scatter")->required();
  plot->add_option("-o,--out", plot_out, "output SVG")->required();
  plot->add_option("--series", plot_series, "learning-curve columns")->take_all();
  plot->add_option("--title", plot_title, "plot title");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*train) return report(run(train_args.resolve(), train_args.hooks()));
    if (*eval) return cmd_eval(eval_run, eval_samples, eval_seed);
    if (*sweep) {
      const auto vals = split_list(values);
      if (!checkpoint.empty()) {
        if (axis != "n_est") throw std::invalid_argument("--checkpoint sweeps only support --axis n_est");
        std::vector<int> list;
        for (const auto& v : vals) list.push_back(std::stoi(v));
        const auto pts = sweep_loglik_mse(checkpoint, list, sweep_samples, sweep_args.seed.value_or(0));
        if (sweep_out.empty()) {
          std::printf("n_est,mse\n");
          for (const auto& p : pts) std::printf("%d,%.10g\n", p.n_est, p.mse);
        } else {
          write_loglik_csv(sweep_out, pts);
        }
        return 0;
      }
      const auto points = sweep_sensitivity(sweep_axis_from_string(axis), vals, sweep_args.resolve(), sweep_args.hooks());
      int status = 0;
      for (const auto& p : points) {
        std::cout << axis << '=' << p.value << ": " << (p.result.status == 0 ? "ok" : "failed: " + p.result.message)
                  << '\n';
        status |= p.result.status;
      }
      return status;
    }
    if (*plot) {
      PlotOptions opts{plot_series, plot_title};
      emit_plot(plot_csv, plot_kind_from_string(plot_kind), plot_out, opts);
      return 0;
    }
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
