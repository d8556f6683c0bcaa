// Acceptance gate: every headline claim of the laboratory, one pass/fail
// line each, exit nonzero if any fails. Ordering-style claims run at desk
// scale with fixed seeds; numeric claims compare against closed forms that
// are written out independently of the library code under test.

#include <chrono>
#include <cinttypes>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <limits>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include <unistd.h>

#include "lcl/error.hpp"
#include "lcl/experiment_io.hpp"
#include "lcl/losses.hpp"
#include "lcl/metrics.hpp"
#include "lcl/plants.hpp"
#include "lcl/rng.hpp"
#include "lcl/trainer.hpp"

namespace fs = std::filesystem;
using namespace lcl;

namespace {

int g_failures = 0;

double now_seconds() {
  return std::chrono::duration<double>(
             std::chrono::steady_clock::now().time_since_epoch())
      .count();
}

void report(int number, const char* title, bool pass, const std::string& detail,
            double seconds) {
  std::printf("[%s] %2d %-28s %s (%.1f s)\n", pass ? "PASS" : "FAIL", number, title,
              detail.c_str(), seconds);
  std::fflush(stdout);
  if (!pass) ++g_failures;
}

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3g", v);
  return std::string(buf);
}

// 1-D affine fixture: one ensemble member [s,u] -> [mean, logvar], controller
// [s,s*] -> u, both without hidden layers, identity normalization. The
// parameter layout is one weight row per output then the biases, so the six
// forward values are [W_ms, W_mu, W_vs, W_vu, b_m, b_v] and the controller
// three are [v_s, v_star, c].
struct AffineFixture {
  ParamStore store;
  EnsembleForwardModel f;
  ControllerModel g;
  Normalizer norm = Normalizer::identity(1, 1);
  LossBatch batch;
  double w_mu = 0.0;  // df/du
  double s = 0.0, s_star = 0.0, s_obs = 0.0;
  double s_pred = 0.0;

  AffineFixture(Rng& rng) {
    f = init_ensemble(store, "f", 1, 1, {}, 1, Activation::kTanh, 1);
    g = init_controller(store, "g", 1, Eigen::VectorXi::Zero(1), 1, {}, Activation::kTanh, 2,
                        Eigen::VectorXd::Constant(1, 1e6));
    Eigen::VectorXd fp(6);
    for (int i = 0; i < 6; ++i) fp[i] = rng.uniform(-1.0, 1.0);
    store.segment_values(f.segments[0]) = fp;
    Eigen::VectorXd gp(3);
    for (int i = 0; i < 3; ++i) gp[i] = rng.uniform(-1.0, 1.0);
    store.segment_values(g.segment) = gp;

    s = rng.uniform(-1.0, 1.0);
    s_star = rng.uniform(-1.0, 1.0);
    s_obs = rng.uniform(-1.0, 1.0);
    batch.s = Eigen::MatrixXd::Constant(1, 1, s);
    batch.s_desired = Eigen::MatrixXd::Constant(1, 1, s_star);
    batch.s_observed = Eigen::MatrixXd::Constant(1, 1, s_obs);
    batch.tau_run = Eigen::MatrixXd::Constant(1, 1, rng.uniform(-1.0, 1.0));

    w_mu = fp[1];
    const double u = gp[0] * s + gp[1] * s_star + gp[2];
    s_pred = s + fp[0] * s + fp[1] * u + fp[4];
  }

  // d(loss)/d[v_s, v_star, c] for a loss with d(loss)/d(s_pred) = factor.
  Eigen::Vector3d controller_grad_closed_form(double factor) const {
    return factor * w_mu * Eigen::Vector3d(s, s_star, 1.0);
  }
};

void criterion_1_gradient_oracle() {
  const double t0 = now_seconds();
  Rng rng(0xacce5501);
  double worst = 0.0;
  Tape tape;
  for (int trial = 0; trial < 1000; ++trial) {
    AffineFixture fx(rng);
    const FreezeGuard guard(fx.store, {fx.f.segments[0]});
    const Eigen::Index off = fx.store.segment(fx.g.segment).offset;

    tape.reset();
    const Eigen::VectorXd task_grad = backward(task_loss(tape, fx.store, fx.f, fx.g, fx.norm,
                                                         fx.batch),
                                               fx.store);
    const Eigen::Vector3d task_oracle =
        fx.controller_grad_closed_form(2.0 * (fx.s_pred - fx.s_star));
    tape.reset();
    const Eigen::VectorXd joint_grad = backward(joint_loss(tape, fx.store, fx.f, fx.g, fx.norm,
                                                           fx.batch),
                                                fx.store);
    const Eigen::Vector3d joint_oracle =
        fx.controller_grad_closed_form(2.0 * (2.0 * fx.s_pred - fx.s_star - fx.s_obs));

    worst = std::max(worst, (task_grad.segment(off, 3) - task_oracle).lpNorm<Eigen::Infinity>());
    worst = std::max(worst,
                     (joint_grad.segment(off, 3) - joint_oracle).lpNorm<Eigen::Infinity>());
    worst = std::max(worst, task_grad.head(6).lpNorm<Eigen::Infinity>());  // frozen model
    worst = std::max(worst, joint_grad.head(6).lpNorm<Eigen::Infinity>());
  }
  const double dt = now_seconds() - t0;
  report(1, "gradient closed forms", worst <= 1e-9 && dt < 5.0,
         "max |analytic - closed form| " + fmt(worst) + " over 1000 affine fixtures", dt);
}

void criterion_2_equilibrium() {
  const double t0 = now_seconds();
  Rng rng(0xacce5502);
  double worst_pos = 0.0, worst_val = 0.0;
  Tape tape;
  for (int trial = 0; trial < 50; ++trial) {
    AffineFixture fx(rng);
    // Pin the prediction to s + c: zero weights, unit action gain.
    Eigen::VectorXd fp(6);
    fp << 0, 1, 0, 0, 0, 0;
    fx.store.segment_values(fx.f.segments[0]) = fp;
    Eigen::VectorXd gp(3);
    gp << 0, 0, 0;
    fx.store.segment_values(fx.g.segment) = gp;
    const FreezeGuard guard(fx.store, {fx.f.segments[0]});
    const Eigen::Index off = fx.store.segment(fx.g.segment).offset;

    // The objective is convex in the bias; bisect on the sign of its taped
    // derivative until the bracket collapses.
    const double lo_target = std::min(fx.s_star, fx.s_obs) - 1.0;
    const double hi_target = std::max(fx.s_star, fx.s_obs) + 1.0;
    double lo = lo_target - fx.s, hi = hi_target - fx.s;
    for (int it = 0; it < 200 && hi - lo > 1e-16; ++it) {
      const double mid = 0.5 * (lo + hi);
      fx.store.values()[off + 2] = mid;
      tape.reset();
      const Eigen::VectorXd grad =
          backward(joint_loss(tape, fx.store, fx.f, fx.g, fx.norm, fx.batch), fx.store);
      (grad[off + 2] > 0.0 ? hi : lo) = mid;
    }
    fx.store.values()[off + 2] = 0.5 * (lo + hi);
    tape.reset();
    const double value =
        joint_loss(tape, fx.store, fx.f, fx.g, fx.norm, fx.batch).value();

    const double midpoint = 0.5 * (fx.s_star + fx.s_obs);
    const double s_at_min = fx.s + fx.store.values()[off + 2];
    const double gap = fx.s_obs - fx.s_star;
    worst_pos = std::max(worst_pos, std::abs(s_at_min - midpoint));
    worst_val = std::max(worst_val, std::abs(value - 0.5 * gap * gap));
  }
  report(2, "joint-loss equilibrium", worst_pos <= 1e-6 && worst_val <= 1e-12,
         "minimizer off midpoint by " + fmt(worst_pos) + ", residual off by " + fmt(worst_val),
         now_seconds() - t0);
}

void criterion_3_finite_differences() {
  const double t0 = now_seconds();
  const std::vector<GradCheckCase> cases = gradcheck_experiment_losses();
  bool pass = cases.size() == 15;
  double worst = 0.0;
  for (const GradCheckCase& c : cases) {
    pass = pass && c.report.pass;
    worst = std::max(worst, c.report.max_rel_err);
  }
  const double dt = now_seconds() - t0;
  report(3, "finite-difference suite", pass && dt < 60.0,
         "15 loss configurations, max rel err " + fmt(worst), dt);
}

struct CellOutcome {
  double final_tracking = std::numeric_limits<double>::quiet_NaN();
  double best_tracking = std::numeric_limits<double>::quiet_NaN();
  double final_force = std::numeric_limits<double>::quiet_NaN();
  double final_pred_err = std::numeric_limits<double>::quiet_NaN();
  double final_fwd_mse = std::numeric_limits<double>::quiet_NaN();
  bool clean = false;  // final row free of divergence flags
};

CellOutcome summarize(const std::vector<IterationReport>& rows) {
  CellOutcome out;
  const IterationReport& last = rows.back();
  out.final_tracking = last.tracking_mse;
  out.final_pred_err = last.pred_task_err;
  out.final_fwd_mse = last.fwd_pred_mse;
  if (last.force_track_mse) out.final_force = *last.force_track_mse;
  out.clean = !last.diverged;
  double best = std::numeric_limits<double>::infinity();
  for (const IterationReport& r : rows) {
    if (std::isfinite(r.tracking_mse)) best = std::min(best, r.tracking_mse);
  }
  out.best_tracking = best;
  return out;
}

// Mean of final values; NaNs count as +inf for the favored losses and are
// dropped for baselines, so missing data can only hurt the claim under test.
double mean_final(const std::vector<CellOutcome>& cells, double CellOutcome::*field,
                  bool nan_is_inf) {
  double sum = 0.0;
  int n = 0;
  for (const CellOutcome& c : cells) {
    const double v = c.*field;
    if (std::isfinite(v)) {
      sum += v;
      ++n;
    } else if (nan_is_inf) {
      return std::numeric_limits<double>::infinity();
    }
  }
  return n > 0 ? sum / n : std::numeric_limits<double>::infinity();
}

ExperimentConfig pendulum_config(LossKind loss, std::uint64_t seed, int target) {
  ExperimentConfig c;
  c.loss = loss;
  c.seed = seed;
  c.target_id = target;
  return c;
}

// Shared across criteria 4 and 8: the pendulum grid plus the datasets the
// joint and task cells collected at target 0.
struct PendulumGrid {
  std::map<LossKind, std::vector<CellOutcome>> outcomes;
  std::map<std::uint64_t, Dataset> joint_data, task_data;
  double seconds = 0.0;
};

PendulumGrid run_pendulum_grid() {
  PendulumGrid grid;
  const double t0 = now_seconds();
  for (const LossKind loss : {LossKind::kJoint, LossKind::kTask, LossKind::kInverseSupervised,
                              LossKind::kDistalTeacher}) {
    for (std::uint64_t seed = 1; seed <= 5; ++seed) {
      for (int target = 0; target < 5; ++target) {
        LearningRun run = run_learning_loop(pendulum_config(loss, seed, target));
        grid.outcomes[loss].push_back(summarize(run.reports));
        if (target == 0 && loss == LossKind::kJoint) {
          grid.joint_data.emplace(seed, std::move(run.data));
        } else if (target == 0 && loss == LossKind::kTask) {
          grid.task_data.emplace(seed, std::move(run.data));
        }
      }
    }
  }
  grid.seconds = now_seconds() - t0;
  return grid;
}

void criterion_4_pendulum_loop(const PendulumGrid& grid) {
  const std::vector<CellOutcome>& joint = grid.outcomes.at(LossKind::kJoint);
  int reached = 0;
  for (const CellOutcome& c : joint) {
    if (c.best_tracking <= 0.05) ++reached;
  }
  const double joint_mean = mean_final(joint, &CellOutcome::final_tracking, true);
  const double task_mean =
      mean_final(grid.outcomes.at(LossKind::kTask), &CellOutcome::final_tracking, false);
  const double inv_mean = mean_final(grid.outcomes.at(LossKind::kInverseSupervised),
                                     &CellOutcome::final_tracking, false);
  const double distal_mean = mean_final(grid.outcomes.at(LossKind::kDistalTeacher),
                                        &CellOutcome::final_tracking, false);
  const bool pass = reached >= 20 && joint_mean <= task_mean && joint_mean <= inv_mean &&
                    joint_mean <= distal_mean && grid.seconds <= 900.0;
  report(4, "pendulum learning loop", pass,
         std::to_string(reached) + "/25 cells reached 0.05; joint mean " + fmt(joint_mean) +
             " vs task " + fmt(task_mean) + ", inverse " + fmt(inv_mean) + ", distal " +
             fmt(distal_mean),
         grid.seconds);
}

void criterion_5_arm_redundancy() {
  const double t0 = now_seconds();
  std::vector<CellOutcome> joint, inverse;
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    for (const LossKind loss : {LossKind::kJoint, LossKind::kInverseSupervised}) {
      ExperimentConfig c;
      c.plant = PlantKind::kArm;
      c.arm_links = 3;
      c.space = TaskSpace::kEndEffector;
      c.loss = loss;
      c.seed = seed;
      const LearningRun run = run_learning_loop(c);
      (loss == LossKind::kJoint ? joint : inverse).push_back(summarize(run.reports));
    }
  }
  const double joint_mean = mean_final(joint, &CellOutcome::final_tracking, true);
  const double inv_mean = mean_final(inverse, &CellOutcome::final_tracking, false);
  const double dt = now_seconds() - t0;
  const bool pass = 2.0 * joint_mean <= inv_mean && dt <= 1200.0;
  report(5, "arm task-space redundancy", pass,
         "end-effector mse: joint " + fmt(joint_mean) + " vs inverse " + fmt(inv_mean) +
             " (need 2x)",
         dt);
}

struct HopperRuns {
  std::vector<CellOutcome> joint, task;
  double seconds = 0.0;
};

HopperRuns run_hopper_pair() {
  HopperRuns out;
  const double t0 = now_seconds();
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    for (const LossKind loss : {LossKind::kJoint, LossKind::kTask}) {
      ExperimentConfig c;
      c.plant = PlantKind::kHopper;
      c.space = TaskSpace::kHopperHeight;
      c.duration = 3.0;
      c.loss = loss;
      c.seed = seed;
      const LearningRun run = run_learning_loop(c);
      (loss == LossKind::kJoint ? out.joint : out.task).push_back(summarize(run.reports));
    }
  }
  out.seconds = now_seconds() - t0;
  return out;
}

void criterion_6_hopper_force(const HopperRuns& runs) {
  const double joint_force = mean_final(runs.joint, &CellOutcome::final_force, true);
  const double task_force = mean_final(runs.task, &CellOutcome::final_force, false);
  int clean = 0;
  for (const CellOutcome& c : runs.joint) {
    if (c.clean) ++clean;
  }
  const bool pass = joint_force < task_force && clean >= 4;
  report(6, "hopper force ordering", pass,
         "force mse: joint " + fmt(joint_force) + " < task " + fmt(task_force) + "; " +
             std::to_string(clean) + "/5 joint runs clean",
         runs.seconds);
}

void criterion_7_model_bias(const HopperRuns& runs) {
  int dissociated = 0;
  for (std::size_t i = 0; i < runs.joint.size(); ++i) {
    const CellOutcome& j = runs.joint[i];
    const CellOutcome& t = runs.task[i];
    if (std::isfinite(j.final_pred_err) && std::isfinite(t.final_pred_err) &&
        t.final_pred_err < j.final_pred_err && t.final_fwd_mse > j.final_fwd_mse) {
      ++dissociated;
    }
  }
  report(7, "model-bias dissociation", dissociated >= 4,
         std::to_string(dissociated) +
             "/5 seeds: task loss predicts its target better yet models the plant worse",
         0.0);
}

void criterion_8_data_swap(const PendulumGrid& grid) {
  const double t0 = now_seconds();
  int favors_joint_data = 0;
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    const DataSwapResult r = data_swap_experiment(grid.joint_data.at(seed),
                                                  grid.task_data.at(seed),
                                                  pendulum_config(LossKind::kJoint, seed, 0));
    const bool joint_row = r.tracking(0, 0) < r.tracking(0, 1);
    const bool task_row = r.tracking(1, 0) < r.tracking(1, 1);
    if (joint_row && task_row) ++favors_joint_data;
  }
  report(8, "data-swap ordering", favors_joint_data >= 4,
         std::to_string(favors_joint_data) +
             "/5 seeds: both objectives track better on joint-collected data",
         now_seconds() - t0);
}

std::string read_file(const fs::path& p) {
  std::ifstream in(p);
  std::ostringstream out;
  out << in.rdbuf();
  return out.str();
}

// Metric columns only: the run id and every value column, wall time dropped.
std::string metric_columns(const fs::path& csv) {
  std::istringstream in(read_file(csv));
  std::ostringstream out;
  std::string line;
  while (std::getline(in, line)) {
    const std::size_t cut = line.rfind(',');
    out << line.substr(0, cut) << "\n";
  }
  return out.str();
}

void criterion_9_determinism() {
  const double t0 = now_seconds();
  char exe[4096];
  const ssize_t len = ::readlink("/proc/self/exe", exe, sizeof exe - 1);
  bool pass = len > 0;
  std::string detail = "could not locate the experiment driver";
  if (pass) {
    exe[len] = '\0';
    const fs::path lclab = fs::path(exe).parent_path().parent_path() / "tools" / "lclab";
    const fs::path work = fs::path(exe).parent_path() / "acceptance_work";
    fs::remove_all(work);
    fs::create_directories(work);
    const fs::path cfg = work / "small.json";
    {
      std::ofstream out(cfg);
      out << R"({"plant": {"kind": "pendulum"}, "loss": "joint",
                 "loop": {"iterations": 2, "babble_steps": 80}, "seed": 11})";
    }
    const auto shell = [&](const std::string& cmd) { return std::system(cmd.c_str()) == 0; };
    pass = shell(lclab.string() + " run --config " + cfg.string() + " --out " +
                 (work / "r1").string() + " > /dev/null") &&
           shell(lclab.string() + " run --config " + cfg.string() + " --out " +
                 (work / "r2").string() + " --force > /dev/null") &&
           shell(lclab.string() + " sweep --config " + cfg.string() + " --out " +
                 (work / "sw1").string() +
                 " --losses joint inverse --seeds 11 12 --parallel 1 > /dev/null") &&
           shell(lclab.string() + " sweep --config " + cfg.string() + " --out " +
                 (work / "sw3").string() +
                 " --losses joint inverse --seeds 11 12 --parallel 3 > /dev/null");
    if (!pass) {
      detail = "driver invocation failed";
    } else {
      const bool runs_match =
          metric_columns(work / "r1" / "metrics.csv") ==
          metric_columns(work / "r2" / "metrics.csv");
      const bool sweeps_match = read_file(work / "sw1" / "aggregate.csv") ==
                                read_file(work / "sw3" / "aggregate.csv");
      pass = runs_match && sweeps_match;
      detail = std::string("repeat run metric columns ") +
               (runs_match ? "identical" : "DIFFER") + "; parallel 1 vs 3 aggregates " +
               (sweeps_match ? "identical" : "DIFFER");
    }
  }
  report(9, "determinism", pass, detail, now_seconds() - t0);
}

// Independent closed-form double-pendulum dynamics: point masses at the link
// tips, relative joint angles, links measured from the +x axis, gravity -y.
PlantState oracle_arm2_step(const PlantState& st, const Eigen::Vector2d& tau,
                            const PlantSpec& spec) {
  const double m1 = spec.mass[0], m2 = spec.mass[1];
  const double l1 = spec.length[0], l2 = spec.length[1];
  const double q1 = st.q[0], q2 = st.q[1];
  const double w1 = st.qd[0], w2 = st.qd[1];

  const double m11 = (m1 + m2) * l1 * l1 + m2 * l2 * l2 + 2.0 * m2 * l1 * l2 * std::cos(q2);
  const double m12 = m2 * l2 * l2 + m2 * l1 * l2 * std::cos(q2);
  const double m22 = m2 * l2 * l2;
  const double c1 = -m2 * l1 * l2 * std::sin(q2) * (2.0 * w1 * w2 + w2 * w2);
  const double c2 = m2 * l1 * l2 * std::sin(q2) * w1 * w1;
  const double g1 = spec.gravity * ((m1 + m2) * l1 * std::cos(q1) + m2 * l2 * std::cos(q1 + q2));
  const double g2 = spec.gravity * m2 * l2 * std::cos(q1 + q2);

  const double r1 = tau[0] - c1 - g1 - spec.damping[0] * w1;
  const double r2 = tau[1] - c2 - g2 - spec.damping[1] * w2;
  const double det = m11 * m22 - m12 * m12;
  const double a1 = (m22 * r1 - m12 * r2) / det;
  const double a2 = (m11 * r2 - m12 * r1) / det;

  PlantState next;
  next.qd = st.qd + spec.dt * Eigen::Vector2d(a1, a2);
  next.q = st.q + spec.dt * next.qd;
  return next;
}

void criterion_10_plant_oracles() {
  const double t0 = now_seconds();
  const PlantSpec arm = default_arm(2);
  Rng rng(0xacce5510);
  double worst = 0.0;
  for (int trial = 0; trial < 1000; ++trial) {
    PlantState st;
    st.q = Eigen::Vector2d(rng.uniform(-M_PI, M_PI), rng.uniform(-M_PI, M_PI));
    st.qd = Eigen::Vector2d(rng.uniform(-5.0, 5.0), rng.uniform(-5.0, 5.0));
    const Eigen::Vector2d tau(rng.uniform(-arm.torque_limit[0], arm.torque_limit[0]),
                              rng.uniform(-arm.torque_limit[1], arm.torque_limit[1]));
    const PlantState got = plant_step(st, tau, arm);
    const PlantState want = oracle_arm2_step(st, tau, arm);
    worst = std::max(worst, (got.q - want.q).lpNorm<Eigen::Infinity>());
    worst = std::max(worst, (got.qd - want.qd).lpNorm<Eigen::Infinity>());
  }

  const PlantSpec hopper = default_hopper();
  int force_mismatches = 0;
  for (int trial = 0; trial < 1000; ++trial) {
    PlantState st;
    st.q = Eigen::VectorXd::Constant(1, rng.uniform(-0.2, 0.2));
    st.qd = Eigen::VectorXd::Constant(1, rng.uniform(-3.0, 3.0));
    const double x = st.q[0], xd = st.qd[0];
    const double expected =
        x >= 0.0 ? 0.0
                 : std::max(0.0, hopper.contact_stiffness * (-x) - hopper.contact_damping * xd);
    if (observe(st, hopper)[1] != expected) ++force_mismatches;
  }
  const bool pass = worst <= 1e-10 && force_mismatches == 0;
  report(10, "plant closed forms", pass,
         "arm step error " + fmt(worst) + "; " + std::to_string(force_mismatches) +
             " contact force mismatches",
         now_seconds() - t0);
}

}  // namespace

int main() {
  criterion_1_gradient_oracle();
  criterion_2_equilibrium();
  criterion_3_finite_differences();
  const PendulumGrid grid = run_pendulum_grid();
  criterion_4_pendulum_loop(grid);
  criterion_5_arm_redundancy();
  const HopperRuns hopper = run_hopper_pair();
  criterion_6_hopper_force(hopper);
  criterion_7_model_bias(hopper);
  criterion_8_data_swap(grid);
  criterion_9_determinism();
  criterion_10_plant_oracles();

  if (g_failures == 0) {
    std::printf("acceptance: all 10 criteria pass\n");
    return 0;
  }
  std::printf("acceptance: %d criteria FAILED\n", g_failures);
  return 1;
}
