#pragma once

#include <functional>

#include <Eigen/Core>

#include "lcl/param_store.hpp"
#include "lcl/value.hpp"

namespace lcl {

// Builds the scalar objective as a graph over `params`. The same callable is
// reused for the finite-difference evaluations, so the two sides of the check
// run identical arithmetic.
using GraphFn = std::function<Value(Tape&, const ParamStore&)>;

struct GradCheckReport {
  bool pass = false;
  double max_abs_err = 0.0;
  double max_rel_err = 0.0;
  Eigen::Index worst_index = -1;
  Eigen::VectorXd analytic;
  Eigen::VectorXd numeric;
};

// Central-difference check of backward() over every unfrozen parameter.
// Relative error uses the scale max(|analytic|, |numeric|, 1e-3); below that
// scale the comparison degenerates to an absolute one, which keeps tiny true
// gradients from failing on finite-difference noise.
GradCheckReport grad_check(const GraphFn& f, ParamStore& params, double step = 1e-5,
                           double tol = 1e-4);

}  // namespace lcl
