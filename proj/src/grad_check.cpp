#include "lcl/grad_check.hpp"

#include <algorithm>
#include <cmath>

namespace lcl {

GradCheckReport grad_check(const GraphFn& f, ParamStore& params, double step, double tol) {
  Tape tape;
  const Value root = f(tape, params);
  GradCheckReport report;
  report.analytic = backward(root, params);
  report.numeric = Eigen::VectorXd::Zero(params.size());

  const auto eval = [&](Tape& t) {
    t.reset();
    return f(t, params).value();
  };

  Tape scratch;
  for (Eigen::Index i = 0; i < params.size(); ++i) {
    if (params.frozen_at(i)) continue;
    const double saved = params.values()[i];
    params.values()[i] = saved + step;
    const double hi = eval(scratch);
    params.values()[i] = saved - step;
    const double lo = eval(scratch);
    params.values()[i] = saved;
    report.numeric[i] = (hi - lo) / (2.0 * step);
  }

  for (Eigen::Index i = 0; i < params.size(); ++i) {
    if (params.frozen_at(i)) continue;
    const double a = report.analytic[i];
    const double n = report.numeric[i];
    const double abs_err = std::abs(a - n);
    const double rel_err = abs_err / std::max({std::abs(a), std::abs(n), 1e-3});
    if (rel_err >= report.max_rel_err) {
      report.max_rel_err = rel_err;
      report.worst_index = i;
    }
    report.max_abs_err = std::max(report.max_abs_err, abs_err);
  }
  report.pass = report.max_rel_err <= tol;
  return report;
}

}  // namespace lcl
