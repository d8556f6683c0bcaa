#pragma once

#include <cstdint>
#include <vector>

#include <Eigen/Core>

#include "lcl/losses.hpp"
#include "lcl/plants.hpp"
#include "lcl/tasks.hpp"

namespace lcl {

// One logged control-rate step. s and s_next are model observations in
// physical units; s_desired is the desired next state over the task dims
// only, ordered like TaskSetup::task_dims.
struct Transition {
  Eigen::VectorXd s;
  Eigen::VectorXd tau_run;
  Eigen::VectorXd s_next;
  Eigen::VectorXd s_desired;
  int t_index = 0;
};

enum class DataSource : std::uint8_t { kBabble, kRollout };

// Where a transition came from. synthetic_desired marks rows whose desired
// state is a zero placeholder (babbling past the reference's duration);
// they carry no tracking intent and only the forward model should trust them.
struct Provenance {
  int iteration = 0;
  LossKind loss = LossKind::kJoint;
  DataSource source = DataSource::kBabble;
  bool synthetic_desired = false;
};

// Append-only pool of transitions with per-row provenance. Rows present
// before an append are never reordered or rewritten.
struct Dataset {
  std::vector<Transition> transitions;
  std::vector<Provenance> provenance;

  Eigen::Index size() const { return static_cast<Eigen::Index>(transitions.size()); }
  bool empty() const { return transitions.empty(); }
  void append(Transition t, Provenance p);
  void append(const Dataset& other);
};

// Column-per-sample pack of the whole dataset (s_observed = s_next).
LossBatch to_batch(const Dataset& data);
// Same, restricted to the given rows; used for minibatches and bootstraps.
LossBatch to_batch(const Dataset& data, const std::vector<Eigen::Index>& rows);

// What the models see for one plant/reference pair. The observation is the
// plant's own for joint-space and hopper tasks; end-effector tasks append the
// planar tip position and velocity so the task dims exist in the model state:
// [q, q', x_ee, x_ee']. task_dims selects the channels compared against
// s_desired; pos_dims is the headline tracking subset, aligned with the
// reference's position vector, vel_dims likewise.
struct TaskSetup {
  PlantSpec plant;
  TrajectorySpec traj;
  ReferenceTrajectory ref;
  Eigen::VectorXi task_dims;
  Eigen::VectorXi pos_dims;
  Eigen::VectorXi vel_dims;
  int force_dim = -1;  // hopper reaction-force channel, -1 elsewhere

  int obs_dim() const;
  bool contact() const { return force_dim >= 0; }
};

TaskSetup make_task_setup(const PlantSpec& spec, const TrajectorySpec& traj);

// Model observation for the setup's task space.
Eigen::VectorXd task_obs(const TaskSetup& setup, const PlantState& state);

// Desired next state over the task dims for the step starting at t_now:
// PD-corrected reference integrated one control period ahead. The hopper's
// force channel is the profile's reference force at the next tick
// (feedforward only; there is no force feedback term).
Eigen::VectorXd task_desired(const TaskSetup& setup, const PlantState& state, double t_now,
                             const PdGains& gains);

}  // namespace lcl
