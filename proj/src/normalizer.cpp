#include "lcl/normalizer.hpp"

#include <cmath>

#include "lcl/error.hpp"

namespace lcl {

namespace {

constexpr double kStdFloor = 1e-6;

void fit_channel(const Eigen::MatrixXd& data, Eigen::VectorXd& mean, Eigen::VectorXd& std) {
  const auto n = static_cast<double>(data.cols());
  mean = data.rowwise().mean();
  std.resize(data.rows());
  for (Eigen::Index r = 0; r < data.rows(); ++r) {
    const double var = (data.row(r).array() - mean[r]).square().sum() / n;
    std[r] = std::max(std::sqrt(var), kStdFloor);
  }
}

}  // namespace

Normalizer Normalizer::identity(int state_dim, int action_dim) {
  Normalizer norm;
  norm.s_mean = Eigen::VectorXd::Zero(state_dim);
  norm.s_std = Eigen::VectorXd::Ones(state_dim);
  norm.a_mean = Eigen::VectorXd::Zero(action_dim);
  norm.a_std = Eigen::VectorXd::Ones(action_dim);
  norm.d_mean = Eigen::VectorXd::Zero(state_dim);
  norm.d_std = Eigen::VectorXd::Ones(state_dim);
  return norm;
}

Normalizer Normalizer::fit(const Eigen::MatrixXd& states, const Eigen::MatrixXd& actions,
                           const Eigen::MatrixXd& deltas) {
  if (states.cols() == 0) throw Error("Normalizer::fit: no samples");
  if (states.cols() != actions.cols() || states.cols() != deltas.cols()) {
    throw Error("Normalizer::fit: sample count mismatch");
  }
  if (states.rows() != deltas.rows()) throw Error("Normalizer::fit: state/delta dim mismatch");

  Normalizer norm;
  fit_channel(states, norm.s_mean, norm.s_std);
  fit_channel(actions, norm.a_mean, norm.a_std);
  fit_channel(deltas, norm.d_mean, norm.d_std);
  return norm;
}

}  // namespace lcl
