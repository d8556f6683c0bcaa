#include "lcl/ensemble.hpp"

#include <cmath>

#include "lcl/error.hpp"
#include "lcl/rng.hpp"

namespace lcl {

namespace {

std::vector<double> normalized_input(const Normalizer& norm, const Eigen::VectorXd& s,
                                     const Eigen::VectorXd& tau) {
  std::vector<double> x;
  x.reserve(static_cast<std::size_t>(s.size() + tau.size()));
  for (Eigen::Index d = 0; d < s.size(); ++d) x.push_back((s[d] - norm.s_mean[d]) / norm.s_std[d]);
  for (Eigen::Index a = 0; a < tau.size(); ++a) {
    x.push_back((tau[a] - norm.a_mean[a]) * (1.0 / norm.a_std[a]));
  }
  return x;
}

}  // namespace

EnsembleForwardModel init_ensemble(ParamStore& store, const std::string& name_prefix,
                                   int state_dim, int action_dim,
                                   const std::vector<int>& hidden, int members,
                                   Activation activation, std::uint64_t seed, double logvar_min,
                                   double logvar_max) {
  if (members <= 0) throw ConfigError("ensemble needs at least one member");
  if (logvar_min >= logvar_max) throw ConfigError("logvar clamp bounds are inverted");

  EnsembleForwardModel model;
  model.state_dim = state_dim;
  model.action_dim = action_dim;
  model.logvar_min = logvar_min;
  model.logvar_max = logvar_max;

  LayerSpec spec;
  spec.sizes.push_back(state_dim + action_dim);
  spec.sizes.insert(spec.sizes.end(), hidden.begin(), hidden.end());
  spec.sizes.push_back(2 * state_dim);
  spec.activation = activation;
  model.member_spec = spec;

  for (int k = 0; k < members; ++k) {
    const MlpParams net =
        init_mlp(store, name_prefix + "_member_" + std::to_string(k), spec, mix_seed(seed, k));
    model.segments.push_back(net.segment);
  }
  return model;
}

std::span<const double> segment_span(const ParamStore& store, int segment) {
  const ParamStore::Segment& seg = store.segment(segment);
  return {store.values().data() + seg.offset, static_cast<std::size_t>(seg.size)};
}

GaussianPrediction member_predict(const ParamStore& store, const EnsembleForwardModel& model,
                                  int member, const Normalizer& norm, const Eigen::VectorXd& s,
                                  const Eigen::VectorXd& tau) {
  PlainCtx cx;
  const int dim = model.state_dim;
  const std::vector<double> x = normalized_input(norm, s, tau);
  const std::vector<double> raw = mlp_apply(
      model.member_spec, segment_span(store, model.segments[static_cast<std::size_t>(member)]),
      std::span<const double>(x));
  std::vector<double> mean, logvar;
  gaussian_head(cx, std::span<const double>(raw), model.logvar_min, model.logvar_max, mean, logvar);

  GaussianPrediction pred;
  pred.mean = Eigen::Map<const Eigen::VectorXd>(mean.data(), dim);
  pred.var.resize(dim);
  for (int d = 0; d < dim; ++d) pred.var[d] = std::exp(logvar[static_cast<std::size_t>(d)]);
  return pred;
}

Eigen::VectorXd ensemble_predict(const ParamStore& store, const EnsembleForwardModel& model,
                                 const Normalizer& norm, const Eigen::VectorXd& s,
                                 const Eigen::VectorXd& tau) {
  PlainCtx cx;
  std::vector<std::span<const double>> member_params;
  member_params.reserve(model.segments.size());
  for (int seg : model.segments) member_params.push_back(segment_span(store, seg));
  const std::span<const double> tau_span(tau.data(), static_cast<std::size_t>(tau.size()));
  const std::vector<double> s_pred = predict_next_state(
      cx, norm, model.member_spec, member_params, model.logvar_min, model.logvar_max, s, tau_span);
  return Eigen::Map<const Eigen::VectorXd>(s_pred.data(), static_cast<Eigen::Index>(s_pred.size()));
}

double ensemble_nll(const ParamStore& store, const EnsembleForwardModel& model,
                    const Normalizer& norm, const Eigen::MatrixXd& s, const Eigen::MatrixXd& tau,
                    const Eigen::MatrixXd& s_next) {
  if (s.cols() == 0) throw Error("ensemble_nll: no samples");
  PlainCtx cx;
  const auto dim = static_cast<std::size_t>(model.state_dim);
  double total = 0.0;
  std::vector<double> target(dim);
  std::vector<double> mean, logvar;
  for (Eigen::Index c = 0; c < s.cols(); ++c) {
    for (std::size_t d = 0; d < dim; ++d) {
      const auto r = static_cast<Eigen::Index>(d);
      target[d] = (s_next(r, c) - s(r, c) - norm.d_mean[r]) / norm.d_std[r];
    }
    const std::vector<double> x = normalized_input(norm, s.col(c), tau.col(c));
    for (int k = 0; k < model.members(); ++k) {
      const std::vector<double> raw = mlp_apply(
          model.member_spec, segment_span(store, model.segments[static_cast<std::size_t>(k)]),
          std::span<const double>(x));
      gaussian_head(cx, std::span<const double>(raw), model.logvar_min, model.logvar_max, mean,
                    logvar);
      total += gaussian_nll_logvar(cx, std::span<const double>(mean),
                                   std::span<const double>(logvar),
                                   std::span<const double>(target));
    }
  }
  return total / (static_cast<double>(s.cols()) * model.members());
}

}  // namespace lcl
