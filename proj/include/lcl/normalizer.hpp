#pragma once

#include <Eigen/Core>

namespace lcl {

// Per-channel affine statistics frozen once after motor babbling. The forward
// model sees normalized states and actions and predicts the normalized state
// delta; controller losses compare states in units of s_std. Stddevs are
// floored at 1e-6 so constant channels stay usable.
struct Normalizer {
  Eigen::VectorXd s_mean, s_std;
  Eigen::VectorXd a_mean, a_std;
  Eigen::VectorXd d_mean, d_std;  // delta = s_next - s

  int state_dim() const { return static_cast<int>(s_mean.size()); }
  int action_dim() const { return static_cast<int>(a_mean.size()); }

  static Normalizer identity(int state_dim, int action_dim);

  // Columns are samples. deltas must be next_states - states, precomputed by
  // the caller so the fit sees exactly what training will see.
  static Normalizer fit(const Eigen::MatrixXd& states, const Eigen::MatrixXd& actions,
                        const Eigen::MatrixXd& deltas);
};

}  // namespace lcl
