#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "tgan/rng.hpp"
#include "tgan/tensor.hpp"

// Minimal dense-network substrate: sequential linear/activation stacks with
// explicit reverse traversal, plus optimizers and initialization.
namespace tgan::nn {

enum class Activation { relu, leaky_relu, sigmoid, tanh, identity };
enum class LayerKind { linear, activation };

inline constexpr double kLeakySlope = 0.2;

std::string_view to_string(Activation a);
Activation parse_activation(std::string_view name);

struct LayerSpec {
  LayerKind kind = LayerKind::activation;
  std::size_t in_dim = 0;   // linear only
  std::size_t out_dim = 0;  // linear only
  Activation activation = Activation::identity;

  static LayerSpec linear(std::size_t in, std::size_t out) {
    return {LayerKind::linear, in, out, Activation::identity};
  }
  static LayerSpec act(Activation a) { return {LayerKind::activation, 0, 0, a}; }

  friend bool operator==(const LayerSpec&, const LayerSpec&) = default;
};

// Tensor names for linear layer `index`: "l<index>.weight" [in,out] and "l<index>.bias" [out].
std::string weight_name(std::size_t index);
std::string bias_name(std::size_t index);

struct ModelParams {
  std::vector<LayerSpec> layers;
  std::map<std::string, Tensor> tensors;

  const Tensor& weight(std::size_t index) const;
  const Tensor& bias(std::size_t index) const;
  Tensor& weight(std::size_t index);
  Tensor& bias(std::size_t index);

  // Width of the first linear layer's input / last linear layer's output.
  std::size_t in_dim() const;
  std::size_t out_dim() const;

  friend bool operator==(const ModelParams&, const ModelParams&) = default;
};

using GradientMap = std::map<std::string, Tensor>;

// Checks layer chaining and that every linear layer owns correctly shaped tensors.
void validate(const ModelParams& params);

GradientMap zeros_like(const ModelParams& params);
void accumulate(GradientMap& into, const GradientMap& from, double scale = 1.0);

// Half-open range of layer indices; the default covers the whole network.
struct LayerRange {
  std::size_t first = 0;
  std::size_t last = static_cast<std::size_t>(-1);
};

// values[0] is the input, values[i + 1] the output of layer range.first + i.
struct ForwardTrace {
  LayerRange range;
  std::vector<Tensor> values;

  const Tensor& input() const { return values.front(); }
  const Tensor& output() const { return values.back(); }
};

ForwardTrace forward_trace(const ModelParams& params, const Tensor& input, LayerRange range = {});
Tensor forward(const ModelParams& params, const Tensor& input, LayerRange range = {});

// Reverse pass over a recorded trace. Parameter gradients are added into
// `grads` when it is non-null; returns the gradient w.r.t. the trace input.
Tensor backward_trace(const ModelParams& params, const ForwardTrace& trace, const Tensor& upstream,
                      GradientMap* grads);

struct BackwardResult {
  GradientMap grads;
  Tensor input_grad;
};

BackwardResult backward(const ModelParams& params, const Tensor& input, const Tensor& upstream);

// For a network with scalar output s_i per sample, returns the gradient with
// respect to the parameters of  sum_i <seed_i, d s_i / d x_i>  (second-order
// reverse pass through the input gradient). Backs the gradient penalty.
GradientMap input_gradient_vjp(const ModelParams& params, const Tensor& input, const Tensor& seed);

// Uniform Glorot init on [-sqrt(6/(fan_in+fan_out)), +sqrt(6/(fan_in+fan_out))], shape [fan_in, fan_out].
Tensor xavier_init(std::size_t fan_in, std::size_t fan_out, Rng& rng);

enum class OptimizerKind { adam, rmsprop };

std::string_view to_string(OptimizerKind k);

struct OptimizerState {
  OptimizerKind kind = OptimizerKind::adam;
  double learning_rate = 1e-4;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double decay = 0.9;
  double epsilon = 1e-8;
  std::uint64_t step_count = 0;
  GradientMap first;   // adam m
  GradientMap second;  // adam v, rmsprop mean square

  friend bool operator==(const OptimizerState&, const OptimizerState&) = default;
};

// Accumulators are zero-initialized with the parameter shapes.
OptimizerState make_optimizer(OptimizerKind kind, double learning_rate, const ModelParams& params);

// In-place updates. Gradients are validated (names, shapes, finiteness) before
// any parameter is touched.
void adam_step(ModelParams& params, const GradientMap& grads, OptimizerState& state);
void rmsprop_step(ModelParams& params, const GradientMap& grads, OptimizerState& state);
void optimizer_step(ModelParams& params, const GradientMap& grads, OptimizerState& state);

}  // namespace tgan::nn
