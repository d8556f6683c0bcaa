#include "lcl/controller.hpp"

#include <algorithm>

#include "lcl/ensemble.hpp"
#include "lcl/error.hpp"

namespace lcl {

ControllerModel init_controller(ParamStore& store, const std::string& segment_name, int state_dim,
                                const Eigen::VectorXi& task_dims, int action_dim,
                                const std::vector<int>& hidden, Activation activation,
                                std::uint64_t seed, const Eigen::VectorXd& torque_limit) {
  if (torque_limit.size() != action_dim) {
    throw ConfigError("torque limit size must match the action dimension");
  }
  for (Eigen::Index j = 0; j < task_dims.size(); ++j) {
    if (task_dims[j] < 0 || task_dims[j] >= state_dim) {
      throw ConfigError("task dimension index out of range");
    }
  }

  ControllerModel model;
  model.state_dim = state_dim;
  model.task_dims = task_dims;
  model.torque_limit = torque_limit;

  LayerSpec spec;
  spec.sizes.push_back(state_dim + static_cast<int>(task_dims.size()));
  spec.sizes.insert(spec.sizes.end(), hidden.begin(), hidden.end());
  spec.sizes.push_back(action_dim);
  spec.activation = activation;
  model.spec = spec;

  const MlpParams net = init_mlp(store, segment_name, spec, seed);
  model.segment = net.segment;
  return model;
}

Eigen::VectorXd controller_apply(const ParamStore& store, const ControllerModel& model,
                                 const Normalizer& norm, const Eigen::VectorXd& s,
                                 const Eigen::VectorXd& s_star) {
  if (s.size() != model.state_dim) throw Error("controller_apply: state size mismatch");
  if (s_star.size() != model.goal_dim()) throw Error("controller_apply: goal size mismatch");
  PlainCtx cx;
  const std::vector<double> tau =
      controller_output(cx, norm, model, segment_span(store, model.segment), s, s_star);
  return Eigen::Map<const Eigen::VectorXd>(tau.data(), static_cast<Eigen::Index>(tau.size()));
}

Eigen::VectorXd clamp_torque(const Eigen::VectorXd& tau, const Eigen::VectorXd& limit) {
  Eigen::VectorXd out(tau.size());
  for (Eigen::Index i = 0; i < tau.size(); ++i) {
    out[i] = std::clamp(tau[i], -limit[i], limit[i]);
  }
  return out;
}

}  // namespace lcl
