#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "lcl/mlp.hpp"
#include "lcl/normalizer.hpp"
#include "lcl/param_store.hpp"
#include "lcl/scalar.hpp"

namespace lcl {

// Inverse-model controller: maps [norm(s), norm(s_star)] to raw torques.
// s_star lives in the task subspace; its channels are normalized with the
// state statistics of the dimensions listed in task_dims. Output is in
// physical torque units, clamped only when driving the plant.
struct ControllerModel {
  LayerSpec spec;
  int segment = -1;
  int state_dim = 0;
  Eigen::VectorXi task_dims;
  Eigen::VectorXd torque_limit;

  int goal_dim() const { return static_cast<int>(task_dims.size()); }
  int action_dim() const { return spec.output_dim(); }
};

ControllerModel init_controller(ParamStore& store, const std::string& segment_name, int state_dim,
                                const Eigen::VectorXi& task_dims, int action_dim,
                                const std::vector<int>& hidden, Activation activation,
                                std::uint64_t seed, const Eigen::VectorXd& torque_limit);

// Shared input construction + net evaluation. Both s and s_star are plain
// data even in loss graphs; only the parameters differentiate.
template <class S, class Ctx>
std::vector<S> controller_output(Ctx& cx, const Normalizer& norm, const ControllerModel& model,
                                 std::span<const S> params, const Eigen::VectorXd& s,
                                 const Eigen::VectorXd& s_star) {
  std::vector<S> x;
  x.reserve(static_cast<std::size_t>(model.state_dim + model.goal_dim()));
  for (int d = 0; d < model.state_dim; ++d) {
    x.push_back(cx.lift((s[d] - norm.s_mean[d]) / norm.s_std[d]));
  }
  for (int j = 0; j < model.goal_dim(); ++j) {
    const int d = model.task_dims[j];
    x.push_back(cx.lift((s_star[j] - norm.s_mean[d]) / norm.s_std[d]));
  }
  return mlp_apply(model.spec, params, std::span<const S>(x));
}

// Raw (unclamped) torque, plain-double path.
Eigen::VectorXd controller_apply(const ParamStore& store, const ControllerModel& model,
                                 const Normalizer& norm, const Eigen::VectorXd& s,
                                 const Eigen::VectorXd& s_star);

Eigen::VectorXd clamp_torque(const Eigen::VectorXd& tau, const Eigen::VectorXd& limit);

}  // namespace lcl
