#pragma once

#include <cstdint>
#include <vector>

#include <Eigen/Core>

#include "lcl/param_store.hpp"

namespace lcl {

struct AdamConfig {
  double lr = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

// First and second moment estimates plus a per-segment step count. Keeping the
// count per segment means a segment that sits frozen for a phase resumes its
// own bias-correction schedule instead of inheriting everyone else's.
struct AdamState {
  Eigen::VectorXd m;
  Eigen::VectorXd v;
  std::vector<std::int64_t> step;

  void ensure_shape(const ParamStore& params);
};

// One Adam update over all unfrozen segments. Frozen segments keep their
// parameters, moments and step count untouched. Throws NumericError on a
// non-finite gradient entry before mutating anything.
void adam_step(ParamStore& params, const Eigen::VectorXd& grad, AdamState& state,
               const AdamConfig& config);

}  // namespace lcl
