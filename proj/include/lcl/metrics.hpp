#pragma once

#include <optional>
#include <vector>

#include <Eigen/Core>

#include "lcl/dataset.hpp"
#include "lcl/ensemble.hpp"

namespace lcl {

// Per-iteration diagnostics row. Tracking and prediction errors are in raw
// physical units; pred_task_err is the task objective itself (normalized
// units) so the diagnostic and the training signal can never disagree.
// force_track_mse is meaningful only for contact plants. All error fields
// are non-negative and finite unless diverged is set.
struct IterationReport {
  int iteration = 0;
  LossKind loss_kind = LossKind::kJoint;
  double tracking_mse = 0.0;
  double fwd_pred_mse = 0.0;
  double pred_task_err = 0.0;
  std::optional<double> force_track_mse;
  double ctrl_loss_final = 0.0;
  double fwd_loss_final = 0.0;
  bool diverged = false;
  double wall_time_s = 0.0;
};

// Reference points aligned with a rollout's rows: refs[i] samples the
// reference at the end time of transition i, which is what the realized
// s_next should have hit.
std::vector<ReferencePoint> reference_points(const TaskSetup& setup, const Dataset& rollout);

// Headline tracking error: mean over rows and position dims of the squared
// gap between the realized next observation and the reference position.
double tracking_mse(const Dataset& rollout, const std::vector<ReferencePoint>& refs,
                    const TaskSetup& setup);
// Same over velocity dims; a secondary diagnostic, not reported in the CSV.
double tracking_mse_velocity(const Dataset& rollout, const std::vector<ReferencePoint>& refs,
                             const TaskSetup& setup);

// Mean over rows and state dims of the squared one-step ensemble prediction
// error against the logged next observation, using the logged actions.
double forward_pred_mse(const ParamStore& store, const EnsembleForwardModel& f,
                        const Normalizer& norm, const Dataset& data);

// The task objective evaluated on the rollout with the current models: how
// well the model believes the controller tracks. Shares every arithmetic
// step with the training-side task objective.
double predicted_task_error(const ParamStore& store, const EnsembleForwardModel& f,
                            const ControllerModel& g, const Normalizer& norm,
                            const Dataset& data);

// Mean squared gap between the measured reaction force and the profile's
// reference force, in N^2.
double force_tracking_mse(const Dataset& rollout, const std::vector<ReferencePoint>& refs,
                          const TaskSetup& setup);

// Per-iteration mean and sample standard deviation (n-1) across runs for one
// metric column. A single run reports zero deviation.
struct MetricCurve {
  Eigen::VectorXd mean;
  Eigen::VectorXd stddev;
};

struct AggregateCurves {
  MetricCurve tracking_mse;
  MetricCurve fwd_pred_mse;
  MetricCurve pred_task_err;
  MetricCurve force_track_mse;  // zero-length when any run lacks force data
  int iterations = 0;           // rows per curve after truncation
  bool truncated = false;       // set when runs disagreed on iteration count
};

// Aggregates runs of the same experiment cell. Ragged runs are truncated to
// the shortest; rows flagged diverged still enter the statistics (the CSV
// carries the flag, the curves stay honest about what was measured).
AggregateCurves aggregate_stats(const std::vector<std::vector<IterationReport>>& runs);

}  // namespace lcl
