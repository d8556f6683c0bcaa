#include "lcl/metrics.hpp"

#include <algorithm>
#include <cmath>

#include "lcl/error.hpp"

namespace lcl {

std::vector<ReferencePoint> reference_points(const TaskSetup& setup, const Dataset& rollout) {
  const double h = setup.plant.control_period();
  std::vector<ReferencePoint> refs;
  refs.reserve(rollout.transitions.size());
  for (const Transition& t : rollout.transitions) {
    refs.push_back(setup.ref.at((t.t_index + 1) * h));
  }
  return refs;
}

namespace {

void check_alignment(const Dataset& rollout, const std::vector<ReferencePoint>& refs) {
  if (rollout.empty()) throw Error("metrics need at least one transition");
  if (refs.size() != rollout.transitions.size()) {
    throw Error("rollout and reference lengths disagree");
  }
}

double dim_subset_mse(const Dataset& rollout, const std::vector<ReferencePoint>& refs,
                      const Eigen::VectorXi& dims, bool velocity) {
  check_alignment(rollout, refs);
  double acc = 0.0;
  for (std::size_t i = 0; i < rollout.transitions.size(); ++i) {
    const Transition& t = rollout.transitions[i];
    const Eigen::VectorXd& target = velocity ? refs[i].vel : refs[i].pos;
    for (int j = 0; j < dims.size(); ++j) {
      const double d = t.s_next[dims[j]] - target[j];
      acc += d * d;
    }
  }
  return acc / (static_cast<double>(rollout.size()) * static_cast<double>(dims.size()));
}

}  // namespace

double tracking_mse(const Dataset& rollout, const std::vector<ReferencePoint>& refs,
                    const TaskSetup& setup) {
  return dim_subset_mse(rollout, refs, setup.pos_dims, false);
}

double tracking_mse_velocity(const Dataset& rollout, const std::vector<ReferencePoint>& refs,
                             const TaskSetup& setup) {
  return dim_subset_mse(rollout, refs, setup.vel_dims, true);
}

double forward_pred_mse(const ParamStore& store, const EnsembleForwardModel& f,
                        const Normalizer& norm, const Dataset& data) {
  if (data.empty()) throw Error("metrics need at least one transition");
  double acc = 0.0;
  for (const Transition& t : data.transitions) {
    const Eigen::VectorXd pred = ensemble_predict(store, f, norm, t.s, t.tau_run);
    acc += (pred - t.s_next).squaredNorm();
  }
  return acc / (static_cast<double>(data.size()) * static_cast<double>(f.state_dim));
}

double predicted_task_error(const ParamStore& store, const EnsembleForwardModel& f,
                            const ControllerModel& g, const Normalizer& norm,
                            const Dataset& data) {
  return controller_loss_value(LossKind::kTask, store, f, g, norm, to_batch(data));
}

double force_tracking_mse(const Dataset& rollout, const std::vector<ReferencePoint>& refs,
                          const TaskSetup& setup) {
  if (!setup.contact()) throw Error("force tracking requires a contact plant");
  check_alignment(rollout, refs);
  double acc = 0.0;
  for (std::size_t i = 0; i < rollout.transitions.size(); ++i) {
    const double d = rollout.transitions[i].s_next[setup.force_dim] - refs[i].force;
    acc += d * d;
  }
  return acc / static_cast<double>(rollout.size());
}

namespace {

MetricCurve curve(const std::vector<std::vector<IterationReport>>& runs, int iterations,
                  double (*pick)(const IterationReport&)) {
  MetricCurve out;
  out.mean.resize(iterations);
  out.stddev.resize(iterations);
  const double n = static_cast<double>(runs.size());
  for (int i = 0; i < iterations; ++i) {
    double mean = 0.0;
    for (const auto& run : runs) mean += pick(run[static_cast<std::size_t>(i)]);
    mean /= n;
    double ss = 0.0;
    for (const auto& run : runs) {
      const double d = pick(run[static_cast<std::size_t>(i)]) - mean;
      ss += d * d;
    }
    out.mean[i] = mean;
    out.stddev[i] = runs.size() > 1 ? std::sqrt(ss / (n - 1.0)) : 0.0;
  }
  return out;
}

}  // namespace

AggregateCurves aggregate_stats(const std::vector<std::vector<IterationReport>>& runs) {
  if (runs.empty()) throw Error("aggregate_stats needs at least one run");

  std::size_t shortest = runs.front().size();
  bool ragged = false;
  for (const auto& run : runs) {
    if (run.size() != runs.front().size()) ragged = true;
    shortest = std::min(shortest, run.size());
  }

  AggregateCurves agg;
  agg.iterations = static_cast<int>(shortest);
  agg.truncated = ragged;
  agg.tracking_mse = curve(runs, agg.iterations, [](const IterationReport& r) { return r.tracking_mse; });
  agg.fwd_pred_mse = curve(runs, agg.iterations, [](const IterationReport& r) { return r.fwd_pred_mse; });
  agg.pred_task_err = curve(runs, agg.iterations, [](const IterationReport& r) { return r.pred_task_err; });

  bool all_force = true;
  for (const auto& run : runs) {
    for (std::size_t i = 0; i < shortest; ++i) {
      all_force = all_force && run[i].force_track_mse.has_value();
    }
  }
  if (all_force) {
    agg.force_track_mse = curve(
        runs, agg.iterations, [](const IterationReport& r) { return *r.force_track_mse; });
  }
  return agg;
}

}  // namespace lcl
