#include "lcl/trainer.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <limits>
#include <numeric>
#include <utility>

#include "lcl/error.hpp"
#include "lcl/rng.hpp"
#include "lcl/value.hpp"

namespace lcl {

namespace {

// Hard explosion bound: states are physically a few units; anything near this
// is a numerical runaway even if still finite.
constexpr double kStateBound = 1e6;
constexpr double kBabbleSmoothing = 0.8;  // first-order low-pass pole

bool bounded(const Eigen::VectorXd& v) {
  return v.allFinite() && v.lpNorm<Eigen::Infinity>() <= kStateBound;
}

void shuffle_indices(std::vector<Eigen::Index>& idx, Rng& rng) {
  for (Eigen::Index i = static_cast<Eigen::Index>(idx.size()) - 1; i > 0; --i) {
    const int j = rng.uniform_index(static_cast<int>(i) + 1);
    std::swap(idx[static_cast<std::size_t>(i)], idx[static_cast<std::size_t>(j)]);
  }
}

// Every segment id except the listed one; freezing these pins the rest of the
// store while one segment trains.
std::vector<int> all_but(const ParamStore& store, int keep) {
  std::vector<int> out;
  out.reserve(static_cast<std::size_t>(store.segment_count()));
  for (int id = 0; id < store.segment_count(); ++id) {
    if (id != keep) out.push_back(id);
  }
  return out;
}

Normalizer fit_normalizer(const Dataset& data) {
  const Eigen::Index n = data.size();
  const Eigen::Index sdim = data.transitions[0].s.size();
  const Eigen::Index adim = data.transitions[0].tau_run.size();
  Eigen::MatrixXd states(sdim, n), actions(adim, n), deltas(sdim, n);
  for (Eigen::Index c = 0; c < n; ++c) {
    const Transition& t = data.transitions[static_cast<std::size_t>(c)];
    states.col(c) = t.s;
    actions.col(c) = t.tau_run;
    deltas.col(c) = t.s_next - t.s;
  }
  return Normalizer::fit(states, actions, deltas);
}

}  // namespace

Dataset motor_babble(const TaskSetup& setup, int steps, std::uint64_t seed,
                     const PdGains& gains) {
  if (steps < 1) throw Error("motor babbling needs at least one step");
  const PlantSpec& plant = setup.plant;
  const double h = plant.control_period();
  const int last_tick = static_cast<int>(std::floor(setup.traj.duration / h + 1e-9));

  Rng rng(mix_seed(seed, 0xba11ad00ull));
  PlantState state{setup.traj.start_q, Eigen::VectorXd::Zero(plant.dof())};
  Eigen::VectorXd tau = Eigen::VectorXd::Zero(plant.dof());
  Dataset data;
  for (int k = 0; k < steps; ++k) {
    Eigen::VectorXd draw(plant.dof());
    for (int d = 0; d < plant.dof(); ++d) {
      draw[d] = rng.uniform(-plant.torque_limit[d], plant.torque_limit[d]);
    }
    tau = kBabbleSmoothing * tau + (1.0 - kBabbleSmoothing) * draw;

    const bool synthetic = (k + 1) > last_tick;
    Eigen::VectorXd desired;
    if (synthetic) {
      desired = Eigen::VectorXd::Zero(setup.task_dims.size());
    } else {
      desired = task_desired(setup, state, k * h, gains);
    }

    const Eigen::VectorXd obs = task_obs(setup, state);
    PlantState next = state;
    bool blew_up = false;
    try {
      for (int s = 0; s < plant.substeps; ++s) next = plant_step(next, tau, plant);
    } catch (const NumericError&) {
      blew_up = true;
    }
    const Eigen::VectorXd obs_next = blew_up ? Eigen::VectorXd() : task_obs(setup, next);
    if (blew_up || !bounded(obs_next)) {
      std::fprintf(stderr, "motor babbling truncated at step %d: state bound exceeded\n", k);
      break;
    }

    Transition t;
    t.s = obs;
    t.tau_run = tau;
    t.s_next = obs_next;
    t.s_desired = std::move(desired);
    t.t_index = k;
    data.append(std::move(t), Provenance{0, LossKind::kJoint, DataSource::kBabble, synthetic});
    state = std::move(next);
  }
  return data;
}

RolloutResult rollout(const ParamStore& store, const ControllerModel& g, const TaskSetup& setup,
                      int horizon, const Normalizer& norm, const PdGains& gains) {
  if (horizon < 0) throw Error("rollout horizon must be non-negative");
  const PlantSpec& plant = setup.plant;
  const double h = plant.control_period();

  RolloutResult out;
  PlantState state{setup.traj.start_q, Eigen::VectorXd::Zero(plant.dof())};
  for (int k = 0; k < horizon; ++k) {
    const Eigen::VectorXd obs = task_obs(setup, state);
    const Eigen::VectorXd desired = task_desired(setup, state, k * h, gains);
    PlantState next = state;
    Eigen::VectorXd tau;
    bool blew_up = false;
    try {
      tau = clamp_torque(controller_apply(store, g, norm, obs, desired), plant.torque_limit);
      for (int s = 0; s < plant.substeps; ++s) next = plant_step(next, tau, plant);
    } catch (const NumericError&) {
      blew_up = true;
    }
    const Eigen::VectorXd obs_next = blew_up ? Eigen::VectorXd() : task_obs(setup, next);
    if (blew_up || !bounded(obs_next)) {
      out.diverged = true;
      break;
    }

    Transition t;
    t.s = obs;
    t.tau_run = std::move(tau);
    t.s_next = obs_next;
    t.s_desired = desired;
    t.t_index = k;
    out.data.append(std::move(t), Provenance{0, LossKind::kJoint, DataSource::kRollout, false});
    state = std::move(next);
  }
  return out;
}

namespace {

void check_optimizer(const OptimSettings& opt) {
  if (opt.epochs < 0) throw Error("epoch count must be non-negative");
  if (opt.batch < 1) throw Error("batch size must be positive");
  if (!(opt.lr > 0.0)) throw Error("learning rate must be positive");
}

}  // namespace

TrainResult train_forward_model(ParamStore& store, const EnsembleForwardModel& f,
                                const Dataset& data, const OptimSettings& opt,
                                const Normalizer& norm, std::uint64_t seed) {
  if (data.empty()) throw Error("forward-model training needs a non-empty dataset");
  check_optimizer(opt);
  TrainResult out;
  if (opt.epochs == 0) return out;

  const Eigen::Index n = data.size();
  Tape tape;
  double loss_total = 0.0;
  for (int m = 0; m < f.members(); ++m) {
    const int seg = f.segments[static_cast<std::size_t>(m)];
    const FreezeGuard guard(store, all_but(store, seg));
    Rng rng(mix_seed(seed, 0xf0d70000ull + static_cast<std::uint64_t>(m)));

    // One bootstrap draw per member per call; epochs reshuffle the same rows.
    std::vector<Eigen::Index> rows(static_cast<std::size_t>(n));
    for (Eigen::Index& r : rows) r = rng.uniform_index(static_cast<int>(n));

    AdamState adam;
    AdamConfig acfg;
    acfg.lr = opt.lr;
    double last_epoch = 0.0;
    for (int e = 0; e < opt.epochs; ++e) {
      shuffle_indices(rows, rng);
      const Eigen::VectorXd snapshot = store.segment_values(seg);
      double acc = 0.0;
      int batches = 0;
      try {
        for (Eigen::Index b = 0; b < n; b += opt.batch) {
          const Eigen::Index hi = std::min<Eigen::Index>(n, b + opt.batch);
          const std::vector<Eigen::Index> part(rows.begin() + b, rows.begin() + hi);
          tape.reset();
          const Value loss = forward_sup_loss(tape, store, f, m, norm, to_batch(data, part));
          const Eigen::VectorXd grad = backward(loss, store);
          adam_step(store, grad, adam, acfg);
          acc += loss.value();
          ++batches;
        }
      } catch (const NumericError&) {
        store.segment_values(seg) = snapshot;
        out.aborted = true;
        break;
      }
      last_epoch = acc / batches;
    }
    loss_total += last_epoch;
  }
  out.final_loss = loss_total / f.members();
  return out;
}

TrainResult train_controller(ParamStore& store, const ControllerModel& g,
                             const EnsembleForwardModel& f, const Dataset& data, LossKind kind,
                             const OptimSettings& opt, const Normalizer& norm,
                             std::uint64_t seed) {
  if (data.empty()) throw Error("controller training needs a non-empty dataset");
  check_optimizer(opt);
  TrainResult out;
  if (opt.epochs == 0) return out;

  const Eigen::Index n = data.size();
  const FreezeGuard guard(store, all_but(store, g.segment));
  Rng rng(mix_seed(seed, 0xc0117011ull));
  AdamState adam;
  AdamConfig acfg;
  acfg.lr = opt.lr;

  std::vector<Eigen::Index> rows(static_cast<std::size_t>(n));
  std::iota(rows.begin(), rows.end(), Eigen::Index{0});

  Tape tape;
  for (int e = 0; e < opt.epochs; ++e) {
    shuffle_indices(rows, rng);
    const Eigen::VectorXd snapshot = store.segment_values(g.segment);
    double acc = 0.0;
    int batches = 0;
    try {
      for (Eigen::Index b = 0; b < n; b += opt.batch) {
        const Eigen::Index hi = std::min<Eigen::Index>(n, b + opt.batch);
        const std::vector<Eigen::Index> part(rows.begin() + b, rows.begin() + hi);
        const ControllerGrad r = controller_grad(tape, kind, store, f, g, norm, to_batch(data, part));
        adam_step(store, r.grad, adam, acfg);
        acc += r.loss;
        ++batches;
      }
    } catch (const NumericError&) {
      store.segment_values(g.segment) = snapshot;
      out.aborted = true;
      return out;
    }
    out.final_loss = acc / batches;
  }
  return out;
}

PlantSpec ExperimentConfig::make_plant() const {
  switch (plant) {
    case PlantKind::kPendulum: return default_pendulum();
    case PlantKind::kArm: return default_arm(arm_links);
    case PlantKind::kHopper: return default_hopper();
  }
  throw Error("unreachable plant kind");
}

int ExperimentConfig::effective_horizon(const PlantSpec& spec) const {
  if (horizon > 0) return horizon;
  return static_cast<int>(std::ceil(duration / spec.control_period() - 1e-9));
}

void ExperimentConfig::validate() const {
  if (iterations < 0) throw ConfigError("iterations must be non-negative");
  if (babble_steps < 1) throw ConfigError("babbling needs at least one step");
  if (!(duration > 0.0)) throw ConfigError("duration must be positive");
  if (horizon < 0) throw ConfigError("horizon must be non-negative");
  if (ensemble_members < 1) throw ConfigError("the ensemble needs at least one member");
  if (pretrain_epochs < 0) throw ConfigError("pretrain epochs must be non-negative");
  if (target_id < 0) throw ConfigError("target ids are non-negative");
  for (const OptimSettings* opt : {&f_opt, &g_opt}) {
    if (opt->epochs < 0 || opt->batch < 1 || !(opt->lr > 0.0)) {
      throw ConfigError("optimizer settings need positive batch and rate, non-negative epochs");
    }
  }
  const bool ok = (plant == PlantKind::kPendulum && space == TaskSpace::kJoint) ||
                  (plant == PlantKind::kArm &&
                   (space == TaskSpace::kJoint || space == TaskSpace::kEndEffector)) ||
                  (plant == PlantKind::kHopper && space == TaskSpace::kHopperHeight);
  if (!ok) throw ConfigError("task space does not fit the plant");
}

namespace {

IterationReport evaluate_row(int iteration, LossKind kind, const RolloutResult& eval,
                             const TrainResult& fr, const TrainResult& cr, const TaskSetup& setup,
                             const ParamStore& store, const EnsembleForwardModel& f,
                             const ControllerModel& g, const Normalizer& norm) {
  IterationReport row;
  row.iteration = iteration;
  row.loss_kind = kind;
  row.ctrl_loss_final = cr.final_loss;
  row.fwd_loss_final = fr.final_loss;
  row.diverged = eval.diverged || fr.aborted || cr.aborted;
  if (eval.data.empty()) {
    const double nan = std::numeric_limits<double>::quiet_NaN();
    row.tracking_mse = nan;
    row.fwd_pred_mse = nan;
    row.pred_task_err = nan;
    if (setup.contact()) row.force_track_mse = nan;
    return row;
  }
  const std::vector<ReferencePoint> refs = reference_points(setup, eval.data);
  row.tracking_mse = tracking_mse(eval.data, refs, setup);
  row.fwd_pred_mse = forward_pred_mse(store, f, norm, eval.data);
  row.pred_task_err = predicted_task_error(store, f, g, norm, eval.data);
  if (setup.contact()) row.force_track_mse = force_tracking_mse(eval.data, refs, setup);
  return row;
}

double seconds_since(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

}  // namespace

LearningRun run_learning_loop(const ExperimentConfig& config, const IterationSink& sink) {
  config.validate();
  const PlantSpec plant = config.make_plant();
  const TrajectorySpec traj = make_target(plant, config.space, config.target_id, config.duration);
  const TaskSetup setup = make_task_setup(plant, traj);
  const int horizon = config.effective_horizon(plant);

  auto tick = std::chrono::steady_clock::now();
  Dataset data = motor_babble(setup, config.babble_steps, mix_seed(config.seed, 0xbab5ull),
                              config.gains);
  if (data.empty()) throw Error("motor babbling produced no usable data");
  for (Provenance& p : data.provenance) p.loss = config.loss;

  Normalizer norm = fit_normalizer(data);
  ParamStore store;
  const EnsembleForwardModel f =
      init_ensemble(store, "f", setup.obs_dim(), plant.dof(), config.f_hidden,
                    config.ensemble_members, config.activation, mix_seed(config.seed, 0xf17ull));
  const ControllerModel g =
      init_controller(store, "g", setup.obs_dim(), setup.task_dims, plant.dof(), config.g_hidden,
                      config.activation, mix_seed(config.seed, 0x617ull), plant.torque_limit);

  TrainResult fr = train_forward_model(
      store, f, data, OptimSettings{config.f_opt.lr, config.pretrain_epochs, config.f_opt.batch},
      norm, mix_seed(config.seed, 0xf4e0ull));
  TrainResult cr = train_controller(
      store, g, f, data, LossKind::kInverseSupervised,
      OptimSettings{config.g_opt.lr, config.pretrain_epochs, config.g_opt.batch}, norm,
      mix_seed(config.seed, 0x64e0ull));

  std::vector<IterationReport> reports;
  RolloutResult eval = rollout(store, g, setup, horizon, norm, config.gains);
  IterationReport row = evaluate_row(0, config.loss, eval, fr, cr, setup, store, f, g, norm);
  row.wall_time_s = seconds_since(tick);
  reports.push_back(row);
  if (sink) sink(row, store, norm);

  for (int i = 1; i <= config.iterations; ++i) {
    tick = std::chrono::steady_clock::now();
    if (!eval.data.empty()) {
      Dataset rolled = eval.data;
      for (Provenance& p : rolled.provenance) {
        p.iteration = i - 1;
        p.loss = config.loss;
      }
      data.append(rolled);
    }
    // Input statistics track the whole pool: on-policy rollouts can leave the
    // babbling envelope, and a stale normalizer starves the model of scale.
    norm = fit_normalizer(data);
    fr = train_forward_model(store, f, data, config.f_opt, norm,
                             mix_seed(config.seed, 0xf0000ull + static_cast<std::uint64_t>(i)));
    cr = train_controller(store, g, f, data, config.loss, config.g_opt, norm,
                          mix_seed(config.seed, 0xc0000ull + static_cast<std::uint64_t>(i)));
    eval = rollout(store, g, setup, horizon, norm, config.gains);
    row = evaluate_row(i, config.loss, eval, fr, cr, setup, store, f, g, norm);
    row.wall_time_s = seconds_since(tick);
    reports.push_back(row);
    if (sink) sink(row, store, norm);
  }
  return LearningRun{std::move(reports), std::move(data), std::move(store), f, g, norm};
}

DataSwapResult data_swap_experiment(const Dataset& data_a, const Dataset& data_b,
                                    const ExperimentConfig& config) {
  config.validate();
  if (data_a.empty() || data_b.empty()) throw Error("data swap needs two non-empty datasets");
  const PlantSpec plant = config.make_plant();
  const TrajectorySpec traj = make_target(plant, config.space, config.target_id, config.duration);
  const TaskSetup setup = make_task_setup(plant, traj);
  const int horizon = config.effective_horizon(plant);
  const LossKind kinds[2] = {LossKind::kJoint, LossKind::kTask};

  DataSwapResult out;
  for (int li = 0; li < 2; ++li) {
    for (int ci = 0; ci < 2; ++ci) {
      const Dataset& data = ci == 0 ? data_a : data_b;
      // Seeds depend on the objective row only, so a repeated dataset yields
      // a bit-identical column and the columns stay paired.
      const std::uint64_t base = mix_seed(config.seed, 0xd5a0ull + static_cast<std::uint64_t>(li));
      const Normalizer norm = fit_normalizer(data);
      ParamStore store;
      const EnsembleForwardModel f =
          init_ensemble(store, "f", setup.obs_dim(), plant.dof(), config.f_hidden,
                        config.ensemble_members, config.activation, mix_seed(base, 1));
      const ControllerModel g =
          init_controller(store, "g", setup.obs_dim(), setup.task_dims, plant.dof(),
                          config.g_hidden, config.activation, mix_seed(base, 2),
                          plant.torque_limit);

      train_forward_model(
          store, f, data,
          OptimSettings{config.f_opt.lr, config.pretrain_epochs, config.f_opt.batch}, norm,
          mix_seed(base, 3));
      train_controller(store, g, f, data, LossKind::kInverseSupervised,
                       OptimSettings{config.g_opt.lr, config.pretrain_epochs, config.g_opt.batch},
                       norm, mix_seed(base, 4));
      for (int it = 1; it <= config.iterations; ++it) {
        train_forward_model(store, f, data, config.f_opt, norm,
                            mix_seed(base, 0x100ull + static_cast<std::uint64_t>(it)));
        train_controller(store, g, f, data, kinds[li], config.g_opt, norm,
                         mix_seed(base, 0x200ull + static_cast<std::uint64_t>(it)));
      }

      const RolloutResult r = rollout(store, g, setup, horizon, norm, config.gains);
      if (r.data.empty()) {
        out.tracking(li, ci) = std::numeric_limits<double>::quiet_NaN();
      } else {
        out.tracking(li, ci) =
            tracking_mse(r.data, reference_points(setup, r.data), setup);
      }
    }
  }
  return out;
}

}  // namespace lcl
