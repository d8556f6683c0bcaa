#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "lcl/param_store.hpp"
#include "lcl/scalar.hpp"
#include "lcl/value.hpp"

namespace lcl {

enum class Activation : std::uint8_t { kRelu, kTanh };

const char* activation_name(Activation a);
Activation activation_from_name(const std::string& name);

// Fully connected net: sizes = {input, hidden..., output}, hidden activations
// applied everywhere except the last layer. Parameter layout per layer is all
// weights row-major [out][in], then the biases; layers are concatenated in
// order. Evaluation starts each unit from its bias and adds weight * input in
// ascending input order, which pins the floating-point result.
struct LayerSpec {
  std::vector<int> sizes;
  Activation activation = Activation::kRelu;

  int input_dim() const { return sizes.front(); }
  int output_dim() const { return sizes.back(); }
  Eigen::Index param_count() const;
  void validate() const;
};

// Handle to one net inside a ParamStore.
struct MlpParams {
  LayerSpec spec;
  int segment = -1;
};

// Allocates a segment and fills it: weights uniform on +-1/sqrt(fan_in),
// biases zero. Draw order is layer by layer, unit by unit, input by input.
MlpParams init_mlp(ParamStore& store, const std::string& segment_name, const LayerSpec& spec,
                   std::uint64_t seed);

template <class S>
std::vector<S> mlp_apply(const LayerSpec& spec, std::span<const S> params,
                         std::span<const S> input) {
  const std::size_t layers = spec.sizes.size() - 1;
  std::vector<S> act(input.begin(), input.end());
  std::vector<S> next;
  std::size_t w = 0;
  for (std::size_t l = 0; l < layers; ++l) {
    const auto in = static_cast<std::size_t>(spec.sizes[l]);
    const auto out = static_cast<std::size_t>(spec.sizes[l + 1]);
    const std::size_t wbase = w;
    const std::size_t bbase = w + in * out;
    next.clear();
    next.reserve(out);
    for (std::size_t j = 0; j < out; ++j) {
      S acc = params[bbase + j];
      const std::size_t row = wbase + j * in;
      for (std::size_t i = 0; i < in; ++i) acc = acc + params[row + i] * act[i];
      if (l + 1 < layers) {
        next.push_back(spec.activation == Activation::kRelu ? relu(acc) : tanh(acc));
      } else {
        next.push_back(acc);
      }
    }
    act.swap(next);
    w = bbase + out;
  }
  return act;
}

// Convenience double-path evaluation straight out of the store.
Eigen::VectorXd mlp_forward(const ParamStore& store, const MlpParams& net,
                            const Eigen::VectorXd& input);

// Binds every parameter of a segment as tape leaves, in segment order.
std::vector<Value> bind_segment(Tape& tape, const ParamStore& store, int segment);

}  // namespace lcl
