#include <cmath>
#include <vector>

#include <gtest/gtest.h>

#include "lcl/adam.hpp"
#include "lcl/controller.hpp"
#include "lcl/ensemble.hpp"
#include "lcl/grad_check.hpp"
#include "lcl/mlp.hpp"
#include "lcl/normalizer.hpp"
#include "lcl/rng.hpp"
#include "lcl/scalar.hpp"
#include "lcl/value.hpp"

namespace {

using lcl::Activation;
using lcl::EnsembleForwardModel;
using lcl::LayerSpec;
using lcl::MlpParams;
using lcl::Normalizer;
using lcl::ParamStore;
using lcl::PlainCtx;
using lcl::Rng;
using lcl::Tape;
using lcl::TapeCtx;
using lcl::Value;

LayerSpec make_spec(std::vector<int> sizes, Activation act = Activation::kRelu) {
  LayerSpec spec;
  spec.sizes = std::move(sizes);
  spec.activation = act;
  return spec;
}

TEST(Mlp, ParamCountMatchesLayout) {
  const LayerSpec spec = make_spec({4, 16, 16, 3});
  EXPECT_EQ(spec.param_count(), (4 + 1) * 16 + (16 + 1) * 16 + (16 + 1) * 3);
}

TEST(Mlp, InitIsDeterministicAndBounded) {
  const LayerSpec spec = make_spec({4, 16, 16, 3});
  ParamStore s1, s2;
  lcl::init_mlp(s1, "net", spec, 77);
  lcl::init_mlp(s2, "net", spec, 77);
  EXPECT_EQ(s1.values(), s2.values());

  ParamStore s3;
  lcl::init_mlp(s3, "net", spec, 78);
  EXPECT_NE(s1.values(), s3.values());

  // weights bounded by 1/sqrt(fan_in) of the widest-input layer, biases zero
  Eigen::Index w = 0;
  for (std::size_t l = 0; l + 1 < spec.sizes.size(); ++l) {
    const double bound = 1.0 / std::sqrt(static_cast<double>(spec.sizes[l]));
    for (int k = 0; k < spec.sizes[l] * spec.sizes[l + 1]; ++k) {
      EXPECT_LE(std::abs(s1.values()[w]), bound);
      ++w;
    }
    for (int k = 0; k < spec.sizes[l + 1]; ++k) {
      EXPECT_EQ(s1.values()[w], 0.0);
      ++w;
    }
  }
}

TEST(Mlp, HandComputedTwoLayerForward) {
  // sizes {2,2,1}, relu. Layer 0: W=[[1,2],[3,4]], b=[0.5,-10]; layer 1: W=[[1,1]], b=0.25.
  const LayerSpec spec = make_spec({2, 2, 1});
  ParamStore store;
  MlpParams net;
  net.spec = spec;
  net.segment = store.add_segment("net", spec.param_count());
  store.values() << 1, 2, 3, 4, 0.5, -10, 1, 1, 0.25;

  const Eigen::VectorXd out = lcl::mlp_forward(store, net, Eigen::Vector2d(1.0, 1.0));
  // hidden = relu([1+2+0.5, 3+4-10]) = [3.5, 0]; out = 3.5 + 0 + 0.25
  ASSERT_EQ(out.size(), 1);
  EXPECT_DOUBLE_EQ(out[0], 3.75);
}

TEST(Mlp, GraphAndPlainPathsAgreeBitwise) {
  const LayerSpec spec = make_spec({3, 8, 8, 2}, Activation::kTanh);
  ParamStore store;
  const MlpParams net = lcl::init_mlp(store, "net", spec, 3);

  Rng rng(9);
  for (int trial = 0; trial < 20; ++trial) {
    Eigen::VectorXd input(3);
    for (int i = 0; i < 3; ++i) input[i] = rng.uniform(-2.0, 2.0);
    const Eigen::VectorXd plain = lcl::mlp_forward(store, net, input);

    Tape tape;
    const std::vector<Value> params = lcl::bind_segment(tape, store, net.segment);
    std::vector<Value> x;
    for (int i = 0; i < 3; ++i) x.push_back(tape.constant(input[i]));
    const std::vector<Value> out =
        lcl::mlp_apply(spec, std::span<const Value>(params), std::span<const Value>(x));
    ASSERT_EQ(out.size(), 2u);
    EXPECT_EQ(out[0].value(), plain[0]);
    EXPECT_EQ(out[1].value(), plain[1]);
  }
}

TEST(Mlp, GradCheckOnSquaredOutput) {
  const LayerSpec spec = make_spec({4, 16, 16, 3});
  ParamStore store;
  const MlpParams net = lcl::init_mlp(store, "net", spec, 21);

  Rng rng(4);
  Eigen::VectorXd input(4);
  for (int i = 0; i < 4; ++i) input[i] = rng.uniform(-1.0, 1.0);

  const lcl::GraphFn f = [&](Tape& t, const ParamStore& p) {
    const std::vector<Value> params = lcl::bind_segment(t, p, net.segment);
    std::vector<Value> x;
    for (int i = 0; i < 4; ++i) x.push_back(t.constant(input[i]));
    const std::vector<Value> out =
        lcl::mlp_apply(spec, std::span<const Value>(params), std::span<const Value>(x));
    Value loss = t.constant(0.0);
    for (const Value& o : out) loss = loss + square(o);
    return loss;
  };
  const lcl::GradCheckReport report = lcl::grad_check(f, store);
  EXPECT_TRUE(report.pass) << "max rel err " << report.max_rel_err;
}

TEST(ClampRange, EndsExactInteriorClose) {
  PlainCtx cx;
  EXPECT_DOUBLE_EQ(lcl::clamp_range(cx, -12.0, -10.0, 5.0), -10.0);
  EXPECT_DOUBLE_EQ(lcl::clamp_range(cx, 7.3, -10.0, 5.0), 5.0);
  EXPECT_NEAR(lcl::clamp_range(cx, 0.37, -10.0, 5.0), 0.37, 1e-14);
}

TEST(GaussianNll, MatchesHandComputedValue) {
  PlainCtx cx;
  const std::vector<double> mean = {1.0, -2.0};
  const std::vector<double> var = {1.0, 4.0};
  const std::vector<double> target = {2.0, -2.0};
  // 0.5 * [ (log(2pi) + 0 + 1) + (log(2pi) + log 4 + 0) ]
  const double expected = 0.5 * (2.0 * std::log(2.0 * M_PI) + 1.0 + std::log(4.0));
  const double got = lcl::gaussian_nll(cx, std::span<const double>(mean),
                                       std::span<const double>(var),
                                       std::span<const double>(target));
  EXPECT_NEAR(got, expected, 1e-14);

  // log-variance form agrees
  const std::vector<double> logvar = {0.0, std::log(4.0)};
  const double got_lv = lcl::gaussian_nll_logvar(cx, std::span<const double>(mean),
                                                 std::span<const double>(logvar),
                                                 std::span<const double>(target));
  EXPECT_NEAR(got_lv, expected, 1e-12);
}

// With variance pinned at one the NLL is half the squared error plus a
// constant, so its parameter gradients are exactly half as large.
TEST(GaussianNll, PinnedVarianceGradientsAreHalfOfSquaredError) {
  const LayerSpec spec = make_spec({2, 8, 2});
  ParamStore store;
  const MlpParams net = lcl::init_mlp(store, "net", spec, 13);
  const Eigen::Vector2d input(0.3, -0.8);
  const std::vector<double> target = {0.7, 0.1};

  const auto outputs = [&](Tape& t, const ParamStore& p) {
    const std::vector<Value> params = lcl::bind_segment(t, p, net.segment);
    std::vector<Value> x = {t.constant(input[0]), t.constant(input[1])};
    return lcl::mlp_apply(spec, std::span<const Value>(params), std::span<const Value>(x));
  };

  Tape t1;
  {
    TapeCtx cx{&t1};
    const std::vector<Value> mu = outputs(t1, store);
    const std::vector<Value> var = {t1.constant(1.0), t1.constant(1.0)};
    std::vector<Value> tgt = {t1.constant(target[0]), t1.constant(target[1])};
    const Value nll = lcl::gaussian_nll(cx, std::span<const Value>(mu),
                                        std::span<const Value>(var), std::span<const Value>(tgt));
    const Eigen::VectorXd g_nll = lcl::backward(nll, store);

    Tape t2;
    const std::vector<Value> mu2 = outputs(t2, store);
    Value se = t2.constant(0.0);
    for (int d = 0; d < 2; ++d) se = se + square(t2.constant(target[d]) - mu2[d]);
    const Eigen::VectorXd g_se = lcl::backward(se, store);

    for (Eigen::Index i = 0; i < store.size(); ++i) {
      EXPECT_NEAR(2.0 * g_nll[i], g_se[i], 1e-14) << "param " << i;
    }
  }
}

TEST(Ensemble, InitShapesAndDeterminism) {
  ParamStore store;
  const EnsembleForwardModel model =
      lcl::init_ensemble(store, "fwd", 4, 3, {16, 16}, 3, Activation::kRelu, 11);
  EXPECT_EQ(model.members(), 3);
  EXPECT_EQ(model.member_spec.input_dim(), 7);
  EXPECT_EQ(model.member_spec.output_dim(), 8);
  // members differ from each other but rebuild identically from the seed
  EXPECT_NE(store.segment_values(model.segments[0]), store.segment_values(model.segments[1]));
  ParamStore store2;
  lcl::init_ensemble(store2, "fwd", 4, 3, {16, 16}, 3, Activation::kRelu, 11);
  EXPECT_EQ(store.values(), store2.values());
}

TEST(Ensemble, VarianceRespectsClampBounds) {
  ParamStore store;
  const EnsembleForwardModel model =
      lcl::init_ensemble(store, "fwd", 4, 3, {16, 16}, 3, Activation::kRelu, 11, -10.0, 5.0);
  const Normalizer norm = Normalizer::identity(4, 3);
  Rng rng(2);
  for (int trial = 0; trial < 50; ++trial) {
    Eigen::VectorXd s(4), tau(3);
    for (int i = 0; i < 4; ++i) s[i] = rng.uniform(-50.0, 50.0);
    for (int i = 0; i < 3; ++i) tau[i] = rng.uniform(-50.0, 50.0);
    for (int k = 0; k < 3; ++k) {
      const lcl::GaussianPrediction pred = lcl::member_predict(store, model, k, norm, s, tau);
      for (int d = 0; d < 4; ++d) {
        EXPECT_TRUE(std::isfinite(pred.mean[d]));
        // the relu-built clamp can overshoot the bounds by roundoff
        EXPECT_GE(pred.var[d], std::exp(-10.0) * (1.0 - 1e-12));
        EXPECT_LE(pred.var[d], std::exp(5.0) * (1.0 + 1e-12));
      }
    }
  }
}

TEST(Ensemble, IdenticalMembersEqualSingleMemberExactly) {
  ParamStore store;
  const EnsembleForwardModel model =
      lcl::init_ensemble(store, "fwd", 3, 2, {8}, 3, Activation::kRelu, 5);
  // overwrite members 1 and 2 with member 0's parameters
  for (int k = 1; k < 3; ++k) store.segment_values(model.segments[k]) = store.segment_values(model.segments[0]);

  ParamStore single_store;
  const EnsembleForwardModel single =
      lcl::init_ensemble(single_store, "fwd", 3, 2, {8}, 1, Activation::kRelu, 5);
  ASSERT_EQ(single_store.segment_values(single.segments[0]).size(),
            store.segment_values(model.segments[0]).size());
  EXPECT_EQ(single_store.segment_values(single.segments[0]), store.segment_values(model.segments[0]));

  const Normalizer norm = Normalizer::identity(3, 2);
  Rng rng(8);
  for (int trial = 0; trial < 20; ++trial) {
    Eigen::VectorXd s(3), tau(2);
    for (int i = 0; i < 3; ++i) s[i] = rng.uniform(-1.0, 1.0);
    for (int i = 0; i < 2; ++i) tau[i] = rng.uniform(-1.0, 1.0);
    const Eigen::VectorXd p3 = lcl::ensemble_predict(store, model, norm, s, tau);
    const Eigen::VectorXd p1 = lcl::ensemble_predict(single_store, single, norm, s, tau);
    EXPECT_EQ(p3, p1);
  }
}

TEST(Ensemble, PredictGraphMatchesPlainPathBitwise) {
  ParamStore store;
  const EnsembleForwardModel model =
      lcl::init_ensemble(store, "fwd", 3, 2, {8, 8}, 3, Activation::kRelu, 19);
  Normalizer norm = Normalizer::identity(3, 2);
  norm.s_mean << 0.1, -0.2, 0.05;
  norm.s_std << 1.5, 0.7, 2.0;
  norm.a_mean << 0.0, 0.3;
  norm.a_std << 0.9, 1.1;
  norm.d_mean << 0.01, 0.0, -0.02;
  norm.d_std << 0.2, 0.3, 0.15;

  Rng rng(31);
  Eigen::VectorXd s(3), tau(2);
  for (int i = 0; i < 3; ++i) s[i] = rng.uniform(-1.0, 1.0);
  for (int i = 0; i < 2; ++i) tau[i] = rng.uniform(-1.0, 1.0);

  const Eigen::VectorXd plain = lcl::ensemble_predict(store, model, norm, s, tau);

  Tape tape;
  TapeCtx cx{&tape};
  std::vector<std::vector<Value>> bound;
  std::vector<std::span<const Value>> member_params;
  for (int seg : model.segments) bound.push_back(lcl::bind_segment(tape, store, seg));
  for (const auto& b : bound) member_params.emplace_back(b.data(), b.size());
  std::vector<Value> tau_v = {tape.constant(tau[0]), tape.constant(tau[1])};
  const std::vector<Value> sp = lcl::predict_next_state(
      cx, norm, model.member_spec, member_params, model.logvar_min, model.logvar_max, s,
      std::span<const Value>(tau_v));
  for (int d = 0; d < 3; ++d) EXPECT_EQ(sp[static_cast<std::size_t>(d)].value(), plain[d]);
}

TEST(Normalizer, FitComputesChannelStatsWithFloor) {
  Eigen::MatrixXd states(2, 4);
  states << 1, 2, 3, 4,
            5, 5, 5, 5;  // constant channel hits the floor
  Eigen::MatrixXd actions(1, 4);
  actions << -1, 1, -1, 1;
  Eigen::MatrixXd deltas(2, 4);
  deltas << 0.1, 0.2, 0.3, 0.4,
            0, 0, 0, 0;

  const Normalizer norm = Normalizer::fit(states, actions, deltas);
  EXPECT_DOUBLE_EQ(norm.s_mean[0], 2.5);
  EXPECT_NEAR(norm.s_std[0], std::sqrt(1.25), 1e-12);
  EXPECT_DOUBLE_EQ(norm.s_mean[1], 5.0);
  EXPECT_DOUBLE_EQ(norm.s_std[1], 1e-6);
  EXPECT_DOUBLE_EQ(norm.a_mean[0], 0.0);
  EXPECT_DOUBLE_EQ(norm.a_std[0], 1.0);
  EXPECT_DOUBLE_EQ(norm.d_std[1], 1e-6);
  EXPECT_THROW(Normalizer::fit(Eigen::MatrixXd(2, 0), Eigen::MatrixXd(1, 0), Eigen::MatrixXd(2, 0)),
               lcl::Error);
}

TEST(Controller, InputLayoutUsesTaskDimStats) {
  // state dim 4, task dims {0, 2}: s_star channels normalized by those stats
  ParamStore store;
  Eigen::VectorXi task_dims(2);
  task_dims << 0, 2;
  const lcl::ControllerModel model = lcl::init_controller(
      store, "ctrl", 4, task_dims, 1, {}, Activation::kRelu, 3, Eigen::VectorXd::Ones(1));
  ASSERT_EQ(model.spec.sizes.size(), 2u);  // no hidden layers: direct affine map
  EXPECT_EQ(model.spec.input_dim(), 6);

  // weights: pick out the s_star slots (indices 4, 5)
  store.segment_values(model.segment).setZero();
  store.segment_values(model.segment)[4] = 1.0;
  store.segment_values(model.segment)[5] = 10.0;

  Normalizer norm = Normalizer::identity(4, 1);
  norm.s_mean << 1.0, 2.0, 3.0, 4.0;
  norm.s_std << 2.0, 1.0, 5.0, 1.0;

  Eigen::VectorXd s = Eigen::VectorXd::Zero(4);
  Eigen::VectorXd s_star(2);
  s_star << 3.0, 13.0;
  const Eigen::VectorXd tau = lcl::controller_apply(store, model, norm, s, s_star);
  // slot 4: (3-1)/2 = 1; slot 5: (13-3)/5 = 2 weighted 10 -> 21
  EXPECT_DOUBLE_EQ(tau[0], 21.0);
}

TEST(Controller, ClampTorqueIsElementwise) {
  Eigen::VectorXd tau(3), lim(3);
  tau << 5.0, -0.2, -9.0;
  lim << 1.0, 1.0, 2.5;
  const Eigen::VectorXd out = lcl::clamp_torque(tau, lim);
  EXPECT_DOUBLE_EQ(out[0], 1.0);
  EXPECT_DOUBLE_EQ(out[1], -0.2);
  EXPECT_DOUBLE_EQ(out[2], -2.5);
}

}  // namespace
