#include "lcl/adam.hpp"

#include <cmath>
#include <cstdio>

#include "lcl/error.hpp"

namespace lcl {

void AdamState::ensure_shape(const ParamStore& params) {
  if (m.size() != params.size()) {
    m = Eigen::VectorXd::Zero(params.size());
    v = Eigen::VectorXd::Zero(params.size());
    step.assign(static_cast<std::size_t>(params.segment_count()), 0);
  }
  if (step.size() != static_cast<std::size_t>(params.segment_count())) {
    step.resize(static_cast<std::size_t>(params.segment_count()), 0);
  }
}

void adam_step(ParamStore& params, const Eigen::VectorXd& grad, AdamState& state,
               const AdamConfig& config) {
  if (grad.size() != params.size()) throw Error("adam_step: gradient size mismatch");
  state.ensure_shape(params);

  for (int s = 0; s < params.segment_count(); ++s) {
    const ParamStore::Segment& seg = params.segment(s);
    if (seg.frozen) continue;
    for (Eigen::Index i = seg.offset; i < seg.offset + seg.size; ++i) {
      if (!std::isfinite(grad[i])) {
        char buf[96];
        std::snprintf(buf, sizeof(buf), "adam_step: non-finite gradient at parameter %lld",
                      static_cast<long long>(i));
        throw NumericError(buf);
      }
    }
  }

  for (int s = 0; s < params.segment_count(); ++s) {
    const ParamStore::Segment& seg = params.segment(s);
    if (seg.frozen) continue;
    const std::int64_t t = ++state.step[static_cast<std::size_t>(s)];
    const double bc1 = 1.0 - std::pow(config.beta1, static_cast<double>(t));
    const double bc2 = 1.0 - std::pow(config.beta2, static_cast<double>(t));
    for (Eigen::Index i = seg.offset; i < seg.offset + seg.size; ++i) {
      const double g = grad[i];
      state.m[i] = config.beta1 * state.m[i] + (1.0 - config.beta1) * g;
      state.v[i] = config.beta2 * state.v[i] + (1.0 - config.beta2) * g * g;
      const double m_hat = state.m[i] / bc1;
      const double v_hat = state.v[i] / bc2;
      params.values()[i] -= config.lr * m_hat / (std::sqrt(v_hat) + config.eps);
    }
  }
}

}  // namespace lcl
