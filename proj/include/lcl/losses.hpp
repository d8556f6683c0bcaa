#pragma once

#include <cstdint>
#include <string>

#include <Eigen/Core>

#include "lcl/controller.hpp"
#include "lcl/ensemble.hpp"
#include "lcl/normalizer.hpp"
#include "lcl/param_store.hpp"
#include "lcl/value.hpp"

namespace lcl {

enum class LossKind : std::uint8_t { kJoint, kTask, kInverseSupervised, kDistalTeacher };

const char* loss_kind_name(LossKind kind);
LossKind loss_kind_from_name(const std::string& name);

// One batch of logged transitions; columns are samples. s, s_observed, and
// tau_run are in physical units and full model-state/action space; s_desired
// lives in the controller's task subspace. For controller losses the action
// is recomputed as g(s, s_desired) with the current parameters while
// s_observed stays the logged outcome of tau_run; the growing mismatch
// between the two after updates is inherent to objectives that mix both.
struct LossBatch {
  Eigen::MatrixXd s;
  Eigen::MatrixXd s_desired;
  Eigen::MatrixXd s_observed;
  Eigen::MatrixXd tau_run;

  Eigen::Index size() const { return s.cols(); }
};

// How objectives read task coordinates out of a prediction. The default
// trusts the prediction's task dims directly. The planar-arm variant instead
// runs exact forward kinematics over the leading joint dims (tip point and
// tip velocity of the chain), so task error is charged in kinematically
// correct coordinates and the controller gradient cannot exploit model error
// in the predicted task channels. Observed states keep using their task dims:
// those are measurements, not model output.
struct TaskMap {
  Eigen::VectorXd link_lengths;  // empty selects task dims as-is

  static TaskMap planar_arm(const Eigen::VectorXd& lengths) { return TaskMap{lengths}; }
  bool planar() const { return link_lengths.size() > 0; }
};

// Per-member Gaussian NLL of the normalized state delta for the logged
// (s, tau_run, s_observed) triples, averaged over the batch. Only the chosen
// member's segment enters the graph, so the gradient cannot reach the
// controller. With the log-variance pinned at zero this reduces to half the
// squared prediction error plus a constant floor.
Value forward_sup_loss(Tape& tape, const ParamStore& store, const EnsembleForwardModel& f,
                       int member, const Normalizer& norm, const LossBatch& batch);

// Mean squared distance, per normalized task dimension, between the ensemble
// prediction for the recomputed action and the desired next state:
//   mean_b || f(s_b, g(s_b, s*_b)) - s*_b ||^2  restricted to task dims.
// The forward-model segments must be frozen; the gradient reaches the
// controller through the model.
Value task_loss(Tape& tape, const ParamStore& store, const EnsembleForwardModel& f,
                const ControllerModel& g, const Normalizer& norm, const LossBatch& batch,
                const TaskMap& map = {});

// Mean squared distance between the controller's action for the observed
// next state and the action that actually produced it:
//   mean_b || g(s_b, s_observed_b|task) - tau_run_b ||^2 in normalized units.
// The desired state never enters; the forward model is not involved.
Value inverse_sup_loss(Tape& tape, const ParamStore& store, const ControllerModel& g,
                       const Normalizer& norm, const LossBatch& batch);

// Task term plus model-consistency term on the same prediction:
//   mean_b [ ||s_p - s*||^2_task + ||s_p - s_observed||^2_full ].
// Minimizing over an unconstrained prediction settles at the midpoint
// (s* + s_observed)/2 on task dims, leaving half the squared gap as residual.
Value joint_loss(Tape& tape, const ParamStore& store, const EnsembleForwardModel& f,
                 const ControllerModel& g, const Normalizer& norm, const LossBatch& batch,
                 const TaskMap& map = {});

// Difference of the two squared distances on task dims:
//   mean_b [ ||s_p - s*||^2 - ||s_p - s_observed||^2 ].
// The prediction cancels in the gradient, which becomes
// 2 (ds_p/dbeta)^T (s_observed - s*): the model is used only as a locally
// linear map from actions to states, and the model's own error is subtracted.
Value distal_teacher_loss(Tape& tape, const ParamStore& store, const EnsembleForwardModel& f,
                          const ControllerModel& g, const Normalizer& norm,
                          const LossBatch& batch, const TaskMap& map = {});

struct ControllerGrad {
  double loss = 0.0;
  Eigen::VectorXd grad;  // full store layout; forward-model entries exactly zero
};

// Builds the selected controller objective with the forward-model segments
// frozen for the duration of the call and returns value plus gradient.
ControllerGrad controller_grad(Tape& tape, LossKind kind, ParamStore& store,
                               const EnsembleForwardModel& f, const ControllerModel& g,
                               const Normalizer& norm, const LossBatch& batch,
                               const TaskMap& map = {});

// Plain-double twin of the controller objectives, sharing every arithmetic
// step with the graph path so the two agree bitwise. No freezing demanded:
// nothing differentiates here.
double controller_loss_value(LossKind kind, const ParamStore& store,
                             const EnsembleForwardModel& f, const ControllerModel& g,
                             const Normalizer& norm, const LossBatch& batch,
                             const TaskMap& map = {});

}  // namespace lcl
