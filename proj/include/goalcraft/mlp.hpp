#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "goalcraft/tensor.hpp"

namespace goalcraft {

class Rng;

enum class Activation { relu, linear, tanh };

/// Fully connected network: hidden layers share one activation, the output
/// layer has its own. Weight tensors are [in, out], biases [out].
struct MlpSpec {
  std::size_t input_dim = 1;
  std::vector<std::size_t> hidden_widths;
  std::size_t output_dim = 1;
  Activation hidden_activation = Activation::relu;
  Activation output_activation = Activation::linear;

  std::size_t num_layers() const noexcept { return hidden_widths.size() + 1; }
  std::size_t layer_in(std::size_t layer) const;
  std::size_t layer_out(std::size_t layer) const;
  void validate() const;
  /// Scalar parameter count (weights + biases).
  std::size_t param_count() const;

  friend bool operator==(const MlpSpec&, const MlpSpec&) = default;
};

/// Three relu hidden layers of `width`, the shape used for every network here.
MlpSpec three_layer_mlp(std::size_t input_dim, std::size_t width, std::size_t output_dim,
                        Activation output = Activation::linear);

std::string weight_name(std::string_view prefix, std::size_t layer);
std::string bias_name(std::string_view prefix, std::size_t layer);

/// Weights uniform in [-1/sqrt(fan_in), 1/sqrt(fan_in)], zero biases.
ParamStore init_params(const MlpSpec& spec, std::uint64_t seed);

/// Same initialisation, inserting `prefix`-named tensors into an existing store.
void init_params_into(ParamStore& store, const MlpSpec& spec, std::string_view prefix, Rng& rng);

struct MlpCache {
  std::vector<Tensor> layer_inputs;     // input to each affine layer
  std::vector<Tensor> pre_activations;  // affine output of each layer
  Tensor output;
};

/// Forward pass over a [batch, input_dim] tensor.
MlpCache mlp_forward(const MlpSpec& spec, const ParamStore& params, const Tensor& input,
                     std::string_view prefix = "");

/// Output only, no cache kept.
Tensor mlp_apply(const MlpSpec& spec, const ParamStore& params, const Tensor& input,
                 std::string_view prefix = "");

struct MlpGrads {
  ParamStore params;  // keyed with the same prefixed names as the parameters
  Tensor input;       // [batch, input_dim]
};

/// Reverse-mode gradients for `upstream` = dL/d(output).
/// With `want_param_grads` false only the input gradient is produced.
MlpGrads mlp_backward(const MlpSpec& spec, const ParamStore& params, const MlpCache& cache,
                      const Tensor& upstream, std::string_view prefix = "",
                      bool want_param_grads = true);

}  // namespace goalcraft
