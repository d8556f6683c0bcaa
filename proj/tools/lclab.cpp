// Experiment driver: runs single experiments, sweeps, data-swap grids,
// checkpoint re-scoring, and the gradient-check harness.
//
// Exit codes: 0 success, 1 usage or configuration error, 2 IO error,
// 3 sweep completed with failed cells.
//
// Override precedence: config file < LCLAB_* environment variables
// (LCLAB_SEED, LCLAB_LOSS) < command-line flags.

#include <cctype>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <ctime>
#include <fcntl.h>
#include <filesystem>
#include <fstream>
#include <limits>
#include <optional>
#include <sstream>
#include <string>
#include <sys/wait.h>
#include <unistd.h>
#include <vector>

#include "CLI11.hpp"

#include "lcl/error.hpp"
#include "lcl/experiment_io.hpp"
#include "lcl/metrics.hpp"
#include "lcl/trainer.hpp"

namespace fs = std::filesystem;
using namespace lcl;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitConfig = 1;
constexpr int kExitIo = 2;
constexpr int kExitPartial = 3;

std::string fmt17(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return std::string(buf);
}

std::string timestamp_now() {
  const std::time_t now = std::time(nullptr);
  char buf[32];
  std::tm tm_utc{};
  gmtime_r(&now, &tm_utc);
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm_utc);
  return std::string(buf);
}

struct Overrides {
  std::optional<std::uint64_t> seed;
  std::optional<std::string> loss;
  std::optional<int> target;
};

std::uint64_t parse_seed_text(const std::string& text, const char* origin) {
  char* end = nullptr;
  const unsigned long long v = std::strtoull(text.c_str(), &end, 10);
  if (end == text.c_str() || *end != '\0') {
    throw ConfigError(std::string(origin) + " must be a non-negative integer, got '" + text + "'");
  }
  return static_cast<std::uint64_t>(v);
}

ExperimentConfig load_with_overrides(const std::string& config_path, const Overrides& ov) {
  ExperimentConfig config = load_config(config_path);
  if (const char* env = std::getenv("LCLAB_SEED")) {
    config.seed = parse_seed_text(env, "LCLAB_SEED");
  }
  if (const char* env = std::getenv("LCLAB_LOSS")) config.loss = loss_from_token(env);
  if (ov.seed) config.seed = *ov.seed;
  if (ov.loss) config.loss = loss_from_token(*ov.loss);
  if (ov.target) config.target_id = *ov.target;
  config.validate();
  return config;
}

int cmd_run(const std::string& config_path, const std::string& out_dir, const Overrides& ov,
            bool force) {
  const ExperimentConfig config = load_with_overrides(config_path, ov);
  const std::string id = run_id(config);
  fs::create_directories(fs::path(out_dir) / "checkpoints");

  const fs::path manifest_path = fs::path(out_dir) / "manifest.json";
  const fs::path metrics_path = fs::path(out_dir) / "metrics.csv";
  if (!force && fs::exists(manifest_path) && fs::exists(metrics_path)) {
    try {
      if (read_manifest(manifest_path.string()).id == id) {
        std::printf("run %s already complete in %s; use --force to redo\n", id.c_str(),
                    out_dir.c_str());
        return kExitOk;
      }
    } catch (const Error&) {
      // stale or foreign manifest: fall through and rerun
    }
  }

  RunManifest manifest{id, kToolVersion, timestamp_now(), config_to_json(config)};
  write_manifest(manifest, manifest_path.string());
  {
    std::ofstream cfg(fs::path(out_dir) / "config.json");
    if (!cfg) throw IoError("cannot write effective config in '" + out_dir + "'");
    cfg << config_to_json(config).dump(2) << "\n";
  }

  // The sink only sees parameter values and the iteration's normalizer;
  // structure is constant over a run, so checkpoints are written from
  // snapshots once the handles exist.
  struct Snapshot {
    int iteration;
    Eigen::VectorXd params;
    Normalizer norm;
  };
  std::vector<Snapshot> snapshots;
  const LearningRun run = run_learning_loop(
      config, [&](const IterationReport& r, const ParamStore& store, const Normalizer& norm) {
        snapshots.push_back({r.iteration, store.values(), norm});
        std::printf("iter %2d  tracking_mse %.6g  fwd_pred_mse %.6g  pred_task_err %.6g%s\n",
                    r.iteration, r.tracking_mse, r.fwd_pred_mse, r.pred_task_err,
                    r.diverged ? "  [diverged]" : "");
        std::fflush(stdout);
      });

  for (const Snapshot& s : snapshots) {
    ParamStore snap = run.store;
    snap.values() = s.params;
    char name[32];
    std::snprintf(name, sizeof name, "ckpt_%04d.json", s.iteration);
    write_checkpoint(snap, run.f, run.g, s.norm, config, s.iteration,
                     (fs::path(out_dir) / "checkpoints" / name).string());
  }
  write_metrics_csv(run.reports, config, id, metrics_path.string());
  write_dataset_csv(run.data, (fs::path(out_dir) / "dataset.csv").string());
  std::printf("run %s: %zu iteration rows in %s\n", id.c_str(), run.reports.size(),
              out_dir.c_str());
  return kExitOk;
}

struct SweepCell {
  std::string loss;
  std::uint64_t seed = 0;
  int target = 0;
  fs::path dir;
  pid_t pid = -1;
  int exit_code = -1;
};

void spawn_cell(SweepCell& cell, const std::string& argv0, const std::string& config_path,
                bool force) {
  const pid_t pid = fork();
  if (pid < 0) throw IoError("fork failed for sweep cell");
  if (pid == 0) {
    const fs::path log_path = cell.dir / "run.log";
    const int fd = ::open(log_path.c_str(), O_WRONLY | O_CREAT | O_TRUNC, 0644);
    if (fd >= 0) {
      ::dup2(fd, STDOUT_FILENO);
      ::dup2(fd, STDERR_FILENO);
      ::close(fd);
    }
    std::vector<std::string> args = {argv0,
                                     "run",
                                     "--config",
                                     config_path,
                                     "--out",
                                     cell.dir.string(),
                                     "--seed",
                                     std::to_string(cell.seed),
                                     "--loss",
                                     cell.loss,
                                     "--target",
                                     std::to_string(cell.target)};
    if (force) args.push_back("--force");
    std::vector<char*> argv;
    argv.reserve(args.size() + 1);
    for (std::string& a : args) argv.push_back(a.data());
    argv.push_back(nullptr);
    ::execv("/proc/self/exe", argv.data());
    std::perror("execv");
    _exit(127);
  }
  cell.pid = pid;
}

int cmd_sweep(const std::string& argv0, const std::string& config_path, const std::string& out_dir,
              std::vector<std::string> losses, std::vector<std::uint64_t> seeds,
              std::vector<int> targets, int parallel, bool force) {
  const ExperimentConfig base = load_with_overrides(config_path, Overrides{});
  if (losses.empty()) losses = {"joint", "task", "inverse", "distal"};
  if (seeds.empty()) seeds = {base.seed};
  if (targets.empty()) targets = {base.target_id};
  for (const std::string& l : losses) loss_from_token(l);
  if (parallel < 1) throw ConfigError("--parallel must be at least 1");
  fs::create_directories(out_dir);

  std::vector<SweepCell> cells;
  for (const std::string& loss : losses) {
    for (const std::uint64_t seed : seeds) {
      for (const int target : targets) {
        SweepCell cell;
        cell.loss = loss;
        cell.seed = seed;
        cell.target = target;
        cell.dir = fs::path(out_dir) /
                   (loss + "_s" + std::to_string(seed) + "_t" + std::to_string(target));
        fs::create_directories(cell.dir);
        cells.push_back(std::move(cell));
      }
    }
  }

  std::size_t next = 0;
  int running = 0;
  while (next < cells.size() || running > 0) {
    while (next < cells.size() && running < parallel) {
      spawn_cell(cells[next], argv0, config_path, force);
      ++next;
      ++running;
    }
    int status = 0;
    const pid_t done = ::waitpid(-1, &status, 0);
    if (done < 0) throw IoError("waitpid failed during sweep");
    for (SweepCell& cell : cells) {
      if (cell.pid == done) {
        cell.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : 128;
        --running;
        std::printf("cell %s: %s\n", cell.dir.filename().c_str(),
                    cell.exit_code == 0 ? "ok" : "FAILED");
        std::fflush(stdout);
        break;
      }
    }
  }

  // Aggregate per loss over (seed, target) cells, in spawn order so the
  // output is independent of completion order and of --parallel.
  std::ostringstream agg;
  agg << "loss_kind,iteration,runs,tracking_mse_mean,tracking_mse_std,"
         "fwd_pred_mse_mean,fwd_pred_mse_std,pred_task_err_mean,pred_task_err_std,"
         "force_track_mse_mean,force_track_mse_std\n";
  int failed = 0;
  for (const SweepCell& cell : cells) {
    if (cell.exit_code != 0) ++failed;
  }
  for (const std::string& loss : losses) {
    std::vector<std::vector<IterationReport>> runs;
    for (const SweepCell& cell : cells) {
      if (cell.loss != loss || cell.exit_code != 0) continue;
      runs.push_back(read_metrics_csv((cell.dir / "metrics.csv").string()));
    }
    if (runs.empty()) continue;
    const AggregateCurves curves = aggregate_stats(runs);
    const bool with_force = curves.force_track_mse.mean.size() == curves.iterations;
    for (int i = 0; i < curves.iterations; ++i) {
      agg << loss << ',' << i << ',' << runs.size() << ','
          << fmt17(curves.tracking_mse.mean[i]) << ',' << fmt17(curves.tracking_mse.stddev[i])
          << ',' << fmt17(curves.fwd_pred_mse.mean[i]) << ','
          << fmt17(curves.fwd_pred_mse.stddev[i]) << ',' << fmt17(curves.pred_task_err.mean[i])
          << ',' << fmt17(curves.pred_task_err.stddev[i]) << ','
          << (with_force ? fmt17(curves.force_track_mse.mean[i]) : std::string()) << ','
          << (with_force ? fmt17(curves.force_track_mse.stddev[i]) : std::string()) << "\n";
    }
  }
  {
    std::ofstream out(fs::path(out_dir) / "aggregate.csv");
    if (!out) throw IoError("cannot write aggregate CSV in '" + out_dir + "'");
    out << agg.str();
  }
  std::printf("sweep: %zu cells, %d failed; aggregate in %s/aggregate.csv\n", cells.size(),
              failed, out_dir.c_str());
  return failed == 0 ? kExitOk : kExitPartial;
}

int cmd_dataswap(const std::string& a_dir, const std::string& b_dir,
                 const std::string& config_path, const std::string& out_dir,
                 const Overrides& ov) {
  const auto dataset_path = [](const std::string& dir) {
    const fs::path p(dir);
    return fs::is_directory(p) ? (p / "dataset.csv").string() : dir;
  };
  const Dataset data_a = read_dataset_csv(dataset_path(a_dir));
  const Dataset data_b = read_dataset_csv(dataset_path(b_dir));
  const ExperimentConfig config = load_with_overrides(config_path, ov);

  const DataSwapResult grid = data_swap_experiment(data_a, data_b, config);
  fs::create_directories(out_dir);
  std::ostringstream out;
  out << "loss_kind,tracking_mse_data_a,tracking_mse_data_b\n";
  const char* rows[2] = {"joint", "task"};
  for (int r = 0; r < 2; ++r) {
    out << rows[r] << ',' << fmt17(grid.tracking(r, 0)) << ',' << fmt17(grid.tracking(r, 1))
        << "\n";
    std::printf("%-6s  on A %.6g  on B %.6g\n", rows[r], grid.tracking(r, 0),
                grid.tracking(r, 1));
  }
  std::ofstream file(fs::path(out_dir) / "swap.csv");
  if (!file) throw IoError("cannot write swap CSV in '" + out_dir + "'");
  file << out.str();
  return kExitOk;
}

int cmd_eval(const std::string& ckpt_path, const std::string& out_dir) {
  const Checkpoint ck = read_checkpoint(ckpt_path);
  const PlantSpec plant = ck.config.make_plant();
  const TrajectorySpec traj =
      make_target(plant, ck.config.space, ck.config.target_id, ck.config.duration);
  const TaskSetup setup = make_task_setup(plant, traj);
  const RolloutResult eval =
      rollout(ck.store, ck.g, setup, ck.config.effective_horizon(plant), ck.norm,
              ck.config.gains);

  IterationReport row;
  row.iteration = ck.iteration;
  row.loss_kind = ck.config.loss;
  row.diverged = eval.diverged;
  if (eval.data.empty()) {
    row.tracking_mse = row.fwd_pred_mse = row.pred_task_err =
        std::numeric_limits<double>::quiet_NaN();
    if (setup.contact()) row.force_track_mse = std::numeric_limits<double>::quiet_NaN();
  } else {
    const std::vector<ReferencePoint> refs = reference_points(setup, eval.data);
    row.tracking_mse = tracking_mse(eval.data, refs, setup);
    row.fwd_pred_mse = forward_pred_mse(ck.store, ck.f, ck.norm, eval.data);
    row.pred_task_err = predicted_task_error(ck.store, ck.f, ck.g, ck.norm, eval.data);
    if (setup.contact()) row.force_track_mse = force_tracking_mse(eval.data, refs, setup);
  }
  fs::create_directories(out_dir);
  write_metrics_csv({row}, ck.config, run_id(ck.config),
                    (fs::path(out_dir) / "eval.csv").string());
  std::printf("iter %d  tracking_mse %.6g  fwd_pred_mse %.6g  pred_task_err %.6g%s\n",
              row.iteration, row.tracking_mse, row.fwd_pred_mse, row.pred_task_err,
              row.diverged ? "  [diverged]" : "");
  return kExitOk;
}

int cmd_gradcheck() {
  const std::vector<GradCheckCase> cases = gradcheck_experiment_losses();
  bool all_pass = true;
  for (const GradCheckCase& c : cases) {
    std::printf("%-20s max_rel_err %.3e  %s\n", c.name.c_str(), c.report.max_rel_err,
                c.report.pass ? "pass" : "FAIL");
    all_pass = all_pass && c.report.pass;
  }
  return all_pass ? kExitOk : kExitConfig;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"learning-control laboratory experiment driver"};
  app.require_subcommand(1);

  std::string config_path, out_dir, ckpt_path, a_dir, b_dir;
  std::string seed_text, loss_text;
  int target = -1;
  bool force = false;
  int parallel = 1;
  std::vector<std::string> losses;
  std::vector<std::uint64_t> seeds;
  std::vector<int> targets;

  CLI::App* run = app.add_subcommand("run", "run one experiment into a directory");
  run->add_option("--config", config_path, "config file (JSON)")->required();
  run->add_option("--out", out_dir, "output directory")->required();
  run->add_option("--seed", seed_text, "override the config seed");
  run->add_option("--loss", loss_text, "override the controller objective");
  run->add_option("--target", target, "override the task target id");
  run->add_flag("--force", force, "rerun even if this run id is already complete");

  CLI::App* sweep = app.add_subcommand("sweep", "run a loss/seed/target grid");
  sweep->add_option("--config", config_path, "config file (JSON)")->required();
  sweep->add_option("--out", out_dir, "output directory")->required();
  sweep->add_option("--losses", losses, "objectives to sweep (default: all four)");
  sweep->add_option("--seeds", seeds, "seeds to sweep (default: config seed)");
  sweep->add_option("--targets", targets, "target ids to sweep (default: config target)");
  sweep->add_option("--parallel", parallel, "worker processes");
  sweep->add_flag("--force", force, "rerun completed cells");

  CLI::App* swap = app.add_subcommand("dataswap", "retrain joint/task on two datasets");
  swap->add_option("--a", a_dir, "run directory or dataset CSV (column A)")->required();
  swap->add_option("--b", b_dir, "run directory or dataset CSV (column B)")->required();
  swap->add_option("--config", config_path, "config file (JSON)")->required();
  swap->add_option("--out", out_dir, "output directory")->required();
  swap->add_option("--seed", seed_text, "override the config seed");

  CLI::App* eval = app.add_subcommand("eval", "re-score a checkpoint with a fresh rollout");
  eval->add_option("--checkpoint", ckpt_path, "checkpoint JSON")->required();
  eval->add_option("--out", out_dir, "output directory")->required();

  app.add_subcommand("gradcheck", "finite-difference check of every experiment loss");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitConfig;
  }

  Overrides ov;
  if (!seed_text.empty()) {
    try {
      ov.seed = parse_seed_text(seed_text, "--seed");
    } catch (const ConfigError& e) {
      std::fprintf(stderr, "error: %s\n", e.what());
      return kExitConfig;
    }
  }
  if (!loss_text.empty()) ov.loss = loss_text;
  if (target >= 0) ov.target = target;

  try {
    if (app.got_subcommand("run")) return cmd_run(config_path, out_dir, ov, force);
    if (app.got_subcommand("sweep")) {
      return cmd_sweep(argv[0], config_path, out_dir, losses, seeds, targets, parallel, force);
    }
    if (app.got_subcommand("dataswap")) return cmd_dataswap(a_dir, b_dir, config_path, out_dir, ov);
    if (app.got_subcommand("eval")) return cmd_eval(ckpt_path, out_dir);
    if (app.got_subcommand("gradcheck")) return cmd_gradcheck();
  } catch (const ConfigError& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return kExitConfig;
  } catch (const IoError& e) {
    std::fprintf(stderr, "io error: %s\n", e.what());
    return kExitIo;
  } catch (const fs::filesystem_error& e) {
    std::fprintf(stderr, "io error: %s\n", e.what());
    return kExitIo;
  } catch (const Error& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitConfig;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitConfig;
  }
  return kExitConfig;
}
