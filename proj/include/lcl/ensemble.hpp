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

// Ensemble of probabilistic nets over normalized inputs. Each member maps
// [norm(s), norm(tau)] to a Gaussian over the normalized state delta: the
// first state_dim outputs are the mean, the rest the log-variance, clamped to
// [logvar_min, logvar_max].
struct EnsembleForwardModel {
  LayerSpec member_spec;
  std::vector<int> segments;
  int state_dim = 0;
  int action_dim = 0;
  double logvar_min = -10.0;
  double logvar_max = 5.0;

  int members() const { return static_cast<int>(segments.size()); }
};

EnsembleForwardModel init_ensemble(ParamStore& store, const std::string& name_prefix,
                                   int state_dim, int action_dim,
                                   const std::vector<int>& hidden, int members,
                                   Activation activation, std::uint64_t seed,
                                   double logvar_min = -10.0, double logvar_max = 5.0);

// Splits a raw head output of size 2D into mean and clamped log-variance.
template <class S, class Ctx>
void gaussian_head(Ctx& cx, std::span<const S> raw, double logvar_min, double logvar_max,
                   std::vector<S>& mean, std::vector<S>& logvar) {
  const std::size_t d = raw.size() / 2;
  mean.assign(raw.begin(), raw.begin() + static_cast<std::ptrdiff_t>(d));
  logvar.clear();
  logvar.reserve(d);
  for (std::size_t i = 0; i < d; ++i) {
    logvar.push_back(clamp_range(cx, raw[d + i], logvar_min, logvar_max));
  }
}

// Gaussian negative log-likelihood, summed over dimensions:
//   1/2 sum_d [ log(2 pi v_d) + (t_d - mu_d)^2 / v_d ]
// The log-variance form avoids the exp/log round trip during training.
template <class S, class Ctx>
S gaussian_nll_logvar(Ctx& cx, std::span<const S> mean, std::span<const S> logvar,
                      std::span<const S> target) {
  constexpr double kLog2Pi = 1.8378770664093453;
  S total = cx.lift(0.0);
  for (std::size_t d = 0; d < mean.size(); ++d) {
    const S sq = square(target[d] - mean[d]);
    total = total + (cx.lift(kLog2Pi) + logvar[d] + sq * exp(-logvar[d]));
  }
  return cx.lift(0.5) * total;
}

template <class S, class Ctx>
S gaussian_nll(Ctx& cx, std::span<const S> mean, std::span<const S> var,
               std::span<const S> target) {
  constexpr double kLog2Pi = 1.8378770664093453;
  S total = cx.lift(0.0);
  for (std::size_t d = 0; d < mean.size(); ++d) {
    const S sq = square(target[d] - mean[d]);
    total = total + (cx.lift(kLog2Pi) + log(var[d]) + sq / var[d]);
  }
  return cx.lift(0.5) * total;
}

// Full prediction pipeline shared by training graphs and plain evaluation:
// normalize inputs, run every member, average the member means incrementally
// (so identical members reproduce a single member exactly), denormalize. The
// state enters as plain data; tau may be a graph value so controller
// gradients flow through the model.
template <class S, class Ctx>
std::vector<S> predict_next_state(Ctx& cx, const Normalizer& norm, const LayerSpec& member_spec,
                                  const std::vector<std::span<const S>>& member_params,
                                  double logvar_min, double logvar_max, const Eigen::VectorXd& s,
                                  std::span<const S> tau) {
  const int dim = norm.state_dim();
  const int adim = norm.action_dim();

  std::vector<S> x;
  x.reserve(static_cast<std::size_t>(dim + adim));
  for (int d = 0; d < dim; ++d) x.push_back(cx.lift((s[d] - norm.s_mean[d]) / norm.s_std[d]));
  for (int a = 0; a < adim; ++a) {
    x.push_back((tau[static_cast<std::size_t>(a)] - cx.lift(norm.a_mean[a])) *
                cx.lift(1.0 / norm.a_std[a]));
  }

  std::vector<S> delta;
  std::vector<S> mean, logvar;
  for (std::size_t k = 0; k < member_params.size(); ++k) {
    const std::vector<S> raw = mlp_apply(member_spec, member_params[k], std::span<const S>(x));
    gaussian_head(cx, std::span<const S>(raw), logvar_min, logvar_max, mean, logvar);
    if (k == 0) {
      delta = mean;
    } else {
      const double inv = 1.0 / static_cast<double>(k + 1);
      for (int d = 0; d < dim; ++d) {
        delta[static_cast<std::size_t>(d)] =
            delta[static_cast<std::size_t>(d)] +
            (mean[static_cast<std::size_t>(d)] - delta[static_cast<std::size_t>(d)]) * cx.lift(inv);
      }
    }
  }

  std::vector<S> s_pred;
  s_pred.reserve(static_cast<std::size_t>(dim));
  for (int d = 0; d < dim; ++d) {
    s_pred.push_back(cx.lift(s[d] + norm.d_mean[d]) +
                     cx.lift(norm.d_std[d]) * delta[static_cast<std::size_t>(d)]);
  }
  return s_pred;
}

// Per-member Gaussian over the normalized delta, plain-double path.
struct GaussianPrediction {
  Eigen::VectorXd mean;
  Eigen::VectorXd var;
};

GaussianPrediction member_predict(const ParamStore& store, const EnsembleForwardModel& model,
                                  int member, const Normalizer& norm, const Eigen::VectorXd& s,
                                  const Eigen::VectorXd& tau);

// Physical-units next-state estimate from the mean of member means.
Eigen::VectorXd ensemble_predict(const ParamStore& store, const EnsembleForwardModel& model,
                                 const Normalizer& norm, const Eigen::VectorXd& s,
                                 const Eigen::VectorXd& tau);

// Mean over samples (and members) of the per-sample NLL; the forward-model
// training objective evaluated without a tape. Columns are samples.
double ensemble_nll(const ParamStore& store, const EnsembleForwardModel& model,
                    const Normalizer& norm, const Eigen::MatrixXd& s, const Eigen::MatrixXd& tau,
                    const Eigen::MatrixXd& s_next);

std::span<const double> segment_span(const ParamStore& store, int segment);

}  // namespace lcl
