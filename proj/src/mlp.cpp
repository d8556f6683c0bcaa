#include "lcl/mlp.hpp"

#include <cmath>

#include "lcl/error.hpp"
#include "lcl/rng.hpp"

namespace lcl {

const char* activation_name(Activation a) {
  return a == Activation::kRelu ? "relu" : "tanh";
}

Activation activation_from_name(const std::string& name) {
  if (name == "relu") return Activation::kRelu;
  if (name == "tanh") return Activation::kTanh;
  throw ConfigError("unknown activation '" + name + "' (expected relu or tanh)");
}

Eigen::Index LayerSpec::param_count() const {
  Eigen::Index n = 0;
  for (std::size_t l = 0; l + 1 < sizes.size(); ++l) {
    n += static_cast<Eigen::Index>(sizes[l] + 1) * sizes[l + 1];
  }
  return n;
}

void LayerSpec::validate() const {
  if (sizes.size() < 2) throw ConfigError("layer spec needs at least input and output sizes");
  for (int s : sizes) {
    if (s <= 0) throw ConfigError("layer sizes must be positive");
  }
}

MlpParams init_mlp(ParamStore& store, const std::string& segment_name, const LayerSpec& spec,
                   std::uint64_t seed) {
  spec.validate();
  MlpParams net;
  net.spec = spec;
  net.segment = store.add_segment(segment_name, spec.param_count());

  Rng rng(seed);
  Eigen::Ref<Eigen::VectorXd> p = store.segment_values(net.segment);
  Eigen::Index w = 0;
  for (std::size_t l = 0; l + 1 < spec.sizes.size(); ++l) {
    const int in = spec.sizes[l];
    const int out = spec.sizes[l + 1];
    const double bound = 1.0 / std::sqrt(static_cast<double>(in));
    for (int j = 0; j < out; ++j) {
      for (int i = 0; i < in; ++i) p[w++] = rng.uniform(-bound, bound);
    }
    for (int j = 0; j < out; ++j) p[w++] = 0.0;
  }
  return net;
}

Eigen::VectorXd mlp_forward(const ParamStore& store, const MlpParams& net,
                            const Eigen::VectorXd& input) {
  if (input.size() != net.spec.input_dim()) throw Error("mlp_forward: input size mismatch");
  const ParamStore::Segment& seg = store.segment(net.segment);
  const std::span<const double> params(store.values().data() + seg.offset,
                                       static_cast<std::size_t>(seg.size));
  const std::span<const double> in(input.data(), static_cast<std::size_t>(input.size()));
  const std::vector<double> out = mlp_apply(net.spec, params, in);
  return Eigen::Map<const Eigen::VectorXd>(out.data(), static_cast<Eigen::Index>(out.size()));
}

std::vector<Value> bind_segment(Tape& tape, const ParamStore& store, int segment) {
  const ParamStore::Segment& seg = store.segment(segment);
  std::vector<Value> bound;
  bound.reserve(static_cast<std::size_t>(seg.size));
  for (Eigen::Index i = seg.offset; i < seg.offset + seg.size; ++i) {
    bound.push_back(tape.parameter(store, i));
  }
  return bound;
}

}  // namespace lcl
