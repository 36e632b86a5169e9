#include "tgan/models.hpp"

#include "tgan/error.hpp"

namespace tgan::models {

using nn::Activation;
using nn::LayerSpec;
using nn::ModelParams;

namespace {

void add_linear(ModelParams& p, std::size_t in, std::size_t out, Rng& rng) {
  const std::size_t index = p.layers.size();
  p.layers.push_back(LayerSpec::linear(in, out));
  p.tensors.emplace(nn::weight_name(index), nn::xavier_init(in, out, rng));
  p.tensors.emplace(nn::bias_name(index), Tensor({out}));
}

void require_positive(std::size_t v, const char* what) {
  if (v == 0) throw ConfigError(std::string(what) + " must be positive");
}

ModelParams build_mlp(std::size_t in, const std::vector<std::size_t>& hidden, std::size_t out,
                      Activation hidden_act, Activation out_act, Rng& rng) {
  ModelParams p;
  std::size_t width = in;
  for (std::size_t h : hidden) {
    require_positive(h, "hidden layer width");
    add_linear(p, width, h, rng);
    p.layers.push_back(LayerSpec::act(hidden_act));
    width = h;
  }
  add_linear(p, width, out, rng);
  if (out_act != Activation::identity) p.layers.push_back(LayerSpec::act(out_act));
  return p;
}

constexpr std::size_t kBlockLayers = 3;

}  // namespace

ModelParams build_generator(const GeneratorSpec& spec, Rng& rng) {
  require_positive(spec.noise_dim, "generator noise_dim");
  require_positive(spec.data_dim, "generator data_dim");
  return build_mlp(spec.noise_dim, spec.hidden_dims, spec.data_dim, Activation::relu,
                   Activation::identity, rng);
}

ModelParams build_discriminator(const DiscriminatorSpec& spec, Rng& rng) {
  require_positive(spec.data_dim, "discriminator data_dim");
  return build_mlp(spec.data_dim, spec.hidden_dims, 1, Activation::leaky_relu,
                   spec.bounded_output ? Activation::sigmoid : Activation::identity, rng);
}

ModelParams build_lens(const LensSpec& spec, Rng& rng) {
  require_positive(spec.data_dim, "lens data_dim");
  require_positive(spec.block_count, "lens block_count");
  require_positive(spec.block_hidden_dim, "lens block_hidden_dim");
  ModelParams p;
  for (std::size_t k = 0; k < spec.block_count; ++k) {
    add_linear(p, spec.data_dim, spec.block_hidden_dim, rng);
    p.layers.push_back(LayerSpec::act(Activation::relu));
    add_linear(p, spec.block_hidden_dim, spec.data_dim, rng);
  }
  add_linear(p, spec.data_dim, spec.data_dim, rng);
  if (spec.zero_init_last) make_lens_identity(p);
  return p;
}

std::size_t lens_block_count(const ModelParams& lens) {
  const std::size_t n = lens.layers.size();
  if (n == 0 || (n - 1) % kBlockLayers != 0) {
    throw DimensionError("lens must have 3*blocks+1 layers, got " + std::to_string(n));
  }
  const std::size_t blocks = (n - 1) / kBlockLayers;
  const std::size_t d = lens.layers.back().in_dim;
  for (std::size_t k = 0; k < blocks; ++k) {
    const LayerSpec& a = lens.layers[k * kBlockLayers];
    const LayerSpec& r = lens.layers[k * kBlockLayers + 1];
    const LayerSpec& b = lens.layers[k * kBlockLayers + 2];
    if (a.kind != nn::LayerKind::linear || r.kind != nn::LayerKind::activation ||
        b.kind != nn::LayerKind::linear || a.in_dim != d || b.out_dim != d) {
      throw DimensionError("lens block " + std::to_string(k) + " is not linear->activation->linear on width " +
                           std::to_string(d));
    }
  }
  const LayerSpec& head = lens.layers.back();
  if (head.kind != nn::LayerKind::linear || head.out_dim != d) {
    throw DimensionError("lens head must be linear " + std::to_string(d) + "->" + std::to_string(d));
  }
  return blocks;
}

LensTrace lens_forward_trace(const ModelParams& lens, const Tensor& x) {
  const std::size_t blocks = lens_block_count(lens);
  require_matrix(x, lens.layers.back().in_dim, "lens input");
  LensTrace trace;
  trace.blocks.reserve(blocks);
  Tensor y = x;
  for (std::size_t k = 0; k < blocks; ++k) {
    trace.blocks.push_back(nn::forward_trace(lens, y, {k * kBlockLayers, (k + 1) * kBlockLayers}));
    const Tensor& delta = trace.blocks.back().output();
    for (std::size_t e = 0; e < y.size(); ++e) y[e] += delta[e];
  }
  trace.head = nn::forward_trace(lens, y, {blocks * kBlockLayers, blocks * kBlockLayers + 1});
  trace.output = x;
  const Tensor& t = trace.head.output();
  for (std::size_t e = 0; e < x.size(); ++e) trace.output[e] += t[e];
  return trace;
}

Tensor lens_trunk_forward(const ModelParams& lens, const Tensor& x) {
  LensTrace trace = lens_forward_trace(lens, x);
  return std::move(trace.head.values.back());
}

Tensor lens_forward(const ModelParams& lens, const Tensor& x) {
  return std::move(lens_forward_trace(lens, x).output);
}

Tensor lens_backward_trace(const ModelParams& lens, const LensTrace& trace, const Tensor& upstream,
                           nn::GradientMap* grads) {
  if (!upstream.same_shape(trace.output)) {
    throw DimensionError("lens upstream gradient shape " + shape_string(upstream.shape()) +
                         " does not match output " + shape_string(trace.output.shape()));
  }
  Tensor g = nn::backward_trace(lens, trace.head, upstream, grads);
  for (std::size_t k = trace.blocks.size(); k-- > 0;) {
    const Tensor inner = nn::backward_trace(lens, trace.blocks[k], g, grads);
    for (std::size_t e = 0; e < g.size(); ++e) g[e] += inner[e];
  }
  for (std::size_t e = 0; e < g.size(); ++e) g[e] += upstream[e];  // global skip
  return g;
}

nn::BackwardResult lens_backward(const ModelParams& lens, const Tensor& x, const Tensor& upstream) {
  const LensTrace trace = lens_forward_trace(lens, x);
  nn::BackwardResult result{nn::zeros_like(lens), {}};
  result.input_grad = lens_backward_trace(lens, trace, upstream, &result.grads);
  return result;
}

void make_lens_identity(ModelParams& lens) {
  const std::size_t head = lens_block_count(lens) * kBlockLayers;
  for (double& v : lens.weight(head).values()) v = 0.0;
  for (double& v : lens.bias(head).values()) v = 0.0;
}

}  // namespace tgan::models
