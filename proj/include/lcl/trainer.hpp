#pragma once

#include <cstdint>
#include <functional>
#include <vector>

#include <Eigen/Core>

#include "lcl/adam.hpp"
#include "lcl/controller.hpp"
#include "lcl/dataset.hpp"
#include "lcl/ensemble.hpp"
#include "lcl/metrics.hpp"
#include "lcl/mlp.hpp"

namespace lcl {

// Random exploration: a first-order low-pass-filtered uniform torque inside
// the actuation limits, integrated from the task's start configuration.
// Desired states are filled from the task reference so the rows stay usable
// for controller objectives; rows past the reference duration get a zero
// placeholder and a synthetic_desired flag. A state norm above 1e6 truncates
// collection, keeping the prefix.
Dataset motor_babble(const TaskSetup& setup, int steps, std::uint64_t seed,
                     const PdGains& gains = {});

struct RolloutResult {
  Dataset data;
  bool diverged = false;
};

// Closed loop at the control rate: sample the reference one period ahead,
// form the desired next state, query the controller, clamp to the torque
// limits, hold over the integrator substeps. A non-finite or exploding state
// truncates the rollout and sets diverged; the prefix is kept.
RolloutResult rollout(const ParamStore& store, const ControllerModel& g, const TaskSetup& setup,
                      int horizon, const Normalizer& norm, const PdGains& gains = {});

struct OptimSettings {
  double lr = 1e-3;
  int epochs = 0;
  int batch = 64;
};

struct TrainResult {
  double final_loss = 0.0;  // mean minibatch objective of the last epoch
  bool aborted = false;     // an epoch blew up and was rolled back
};

// Minibatch Adam on the per-member Gaussian objective, each member on its own
// bootstrap resample of the dataset. Only the member being trained is
// unfrozen, so cross-member momentum cannot leak. A non-finite loss aborts
// the member's current epoch, restores its pre-epoch parameters and stops
// that member's training.
TrainResult train_forward_model(ParamStore& store, const EnsembleForwardModel& f,
                                const Dataset& data, const OptimSettings& opt,
                                const Normalizer& norm, std::uint64_t seed);

// Minibatch Adam on the chosen controller objective with the forward model
// frozen throughout; forward parameters are bit-identical before and after.
TrainResult train_controller(ParamStore& store, const ControllerModel& g,
                             const EnsembleForwardModel& f, const Dataset& data, LossKind kind,
                             const OptimSettings& opt, const Normalizer& norm,
                             std::uint64_t seed);

// Everything one experiment needs; plants are built from defaults for the
// chosen kind. horizon 0 derives the step count from the task duration.
struct ExperimentConfig {
  PlantKind plant = PlantKind::kPendulum;
  int arm_links = 3;
  TaskSpace space = TaskSpace::kJoint;
  int target_id = 0;
  double duration = 1.5;
  LossKind loss = LossKind::kJoint;
  int iterations = 10;
  int horizon = 0;
  int babble_steps = 500;
  std::vector<int> f_hidden{16};
  std::vector<int> g_hidden{16};
  int ensemble_members = 3;
  Activation activation = Activation::kTanh;
  int pretrain_epochs = 40;
  OptimSettings f_opt{1e-3, 12, 64};
  OptimSettings g_opt{3e-3, 15, 64};
  std::uint64_t seed = 1;
  PdGains gains;

  PlantSpec make_plant() const;
  int effective_horizon(const PlantSpec& spec) const;
  void validate() const;
};

struct LearningRun {
  std::vector<IterationReport> reports;
  Dataset data;
  ParamStore store;
  EnsembleForwardModel f;
  ControllerModel g;
  Normalizer norm;
};

// Called after each report row is finalized; used for checkpointing. The
// normalizer is the one the row's models were trained with (it is refit on
// the grown dataset every iteration).
using IterationSink =
    std::function<void(const IterationReport&, const ParamStore&, const Normalizer&)>;

// The full learning loop: babble, fit the normalizer, init and pretrain both
// models (the controller on the inverse supervised objective, the only one
// meaningful before the forward model is trusted), then alternate
// {append rollout, train f, train g, evaluate}. Each iteration ends with a
// fresh rollout under the just-trained controller; its metrics form the
// iteration's report row and the same transitions are the data appended at
// the start of the next iteration, so every logged row is on-policy and no
// rollout is simulated twice. Row 0 reports the pretrained controller.
// Divergence or a training blow-up flags the row and the loop continues.
LearningRun run_learning_loop(const ExperimentConfig& config, const IterationSink& sink = {});

// Retrains fresh models from scratch on already-collected datasets, one cell
// per (controller objective, dataset), with no new data collection beyond
// one evaluation rollout per cell. Rows: joint, task objective; columns:
// dataset A, dataset B.
struct DataSwapResult {
  Eigen::Matrix2d tracking;
};

DataSwapResult data_swap_experiment(const Dataset& data_a, const Dataset& data_b,
                                    const ExperimentConfig& config);

}  // namespace lcl
