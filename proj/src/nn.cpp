#include "tgan/nn.hpp"

#include <algorithm>
#include <cmath>

#include "tgan/error.hpp"
#include "tgan/kernels.hpp"

namespace tgan::nn {

namespace {

double activate(Activation a, double v) {
  switch (a) {
    case Activation::relu:
      return v > 0.0 ? v : 0.0;
    case Activation::leaky_relu:
      return v > 0.0 ? v : kLeakySlope * v;
    case Activation::sigmoid:
      if (v >= 0.0) return 1.0 / (1.0 + std::exp(-v));
      else {
        const double e = std::exp(v);
        return e / (1.0 + e);
      }
    case Activation::tanh:
      return std::tanh(v);
    case Activation::identity:
      return v;
  }
  return v;
}

// First derivative from the pre-activation `v` and its output `y`.
double activate_d1(Activation a, double v, double y) {
  switch (a) {
    case Activation::relu:
      return v > 0.0 ? 1.0 : 0.0;
    case Activation::leaky_relu:
      return v > 0.0 ? 1.0 : kLeakySlope;
    case Activation::sigmoid:
      return y * (1.0 - y);
    case Activation::tanh:
      return 1.0 - y * y;
    case Activation::identity:
      return 1.0;
  }
  return 1.0;
}

double activate_d2(Activation a, double y) {
  switch (a) {
    case Activation::sigmoid:
      return y * (1.0 - y) * (1.0 - 2.0 * y);
    case Activation::tanh:
      return -2.0 * y * (1.0 - y * y);
    default:
      return 0.0;  // piecewise linear
  }
}

bool has_curvature(Activation a) { return a == Activation::sigmoid || a == Activation::tanh; }

LayerRange clamp_range(const ModelParams& params, LayerRange range) {
  range.last = std::min(range.last, params.layers.size());
  if (range.first > range.last) {
    throw DimensionError("invalid layer range [" + std::to_string(range.first) + ", " +
                         std::to_string(range.last) + ")");
  }
  return range;
}

std::string describe_layer(const ModelParams& params, std::size_t i) {
  const LayerSpec& l = params.layers[i];
  if (l.kind == LayerKind::linear) {
    return "layer " + std::to_string(i) + " (linear " + std::to_string(l.in_dim) + "->" +
           std::to_string(l.out_dim) + ")";
  }
  return "layer " + std::to_string(i) + " (" + std::string(to_string(l.activation)) + ")";
}

Tensor linear_forward(const Tensor& in, const Tensor& w, const Tensor& b) {
  const std::size_t n = in.rows();
  const std::size_t k = w.dim(0);
  const std::size_t m = w.dim(1);
  Tensor out({n, m});
  kernels::gemm_nn(in.values(), w.values(), out.values(), n, k, m);
  double* o = out.data();
  const double* bias = b.data();
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < m; ++j) o[i * m + j] += bias[j];
  }
  return out;
}

// grads[w] += in^T g, grads[b] += colsum(g)
void linear_param_grads(const Tensor& in, const Tensor& g, Tensor& gw, Tensor& gb) {
  const std::size_t n = in.rows();
  const std::size_t k = in.cols();
  const std::size_t m = g.cols();
  Tensor tmp({k, m});
  kernels::gemm_tn(in.values(), g.values(), tmp.values(), n, k, m);
  for (std::size_t e = 0; e < tmp.size(); ++e) gw[e] += tmp[e];
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < m; ++j) gb[j] += g(i, j);
  }
}

// g W^T
Tensor linear_input_grad(const Tensor& g, const Tensor& w) {
  const std::size_t n = g.rows();
  const std::size_t m = w.dim(1);
  const std::size_t k = w.dim(0);
  Tensor out({n, k});
  kernels::gemm_nt(g.values(), w.values(), out.values(), n, m, k);
  return out;
}

Tensor& grad_slot(GradientMap& grads, const std::string& name, const Tensor& like) {
  auto it = grads.find(name);
  if (it == grads.end()) it = grads.emplace(name, Tensor(like.shape())).first;
  return it->second;
}

}  // namespace

std::string_view to_string(Activation a) {
  switch (a) {
    case Activation::relu:
      return "relu";
    case Activation::leaky_relu:
      return "leaky_relu";
    case Activation::sigmoid:
      return "sigmoid";
    case Activation::tanh:
      return "tanh";
    case Activation::identity:
      return "identity";
  }
  return "?";
}

Activation parse_activation(std::string_view name) {
  for (Activation a : {Activation::relu, Activation::leaky_relu, Activation::sigmoid,
                       Activation::tanh, Activation::identity}) {
    if (to_string(a) == name) return a;
  }
  throw ConfigError("unknown activation '" + std::string(name) + "'");
}

std::string_view to_string(OptimizerKind k) { return k == OptimizerKind::adam ? "adam" : "rmsprop"; }

std::string weight_name(std::size_t index) { return "l" + std::to_string(index) + ".weight"; }
std::string bias_name(std::size_t index) { return "l" + std::to_string(index) + ".bias"; }

const Tensor& ModelParams::weight(std::size_t index) const { return tensors.at(weight_name(index)); }
const Tensor& ModelParams::bias(std::size_t index) const { return tensors.at(bias_name(index)); }
Tensor& ModelParams::weight(std::size_t index) { return tensors.at(weight_name(index)); }
Tensor& ModelParams::bias(std::size_t index) { return tensors.at(bias_name(index)); }

std::size_t ModelParams::in_dim() const {
  for (const LayerSpec& l : layers) {
    if (l.kind == LayerKind::linear) return l.in_dim;
  }
  return 0;
}

std::size_t ModelParams::out_dim() const {
  for (auto it = layers.rbegin(); it != layers.rend(); ++it) {
    if (it->kind == LayerKind::linear) return it->out_dim;
  }
  return 0;
}

void validate(const ModelParams& params) {
  std::size_t width = 0;
  std::size_t expected_tensors = 0;
  for (std::size_t i = 0; i < params.layers.size(); ++i) {
    const LayerSpec& l = params.layers[i];
    if (l.kind != LayerKind::linear) continue;
    if (l.in_dim == 0 || l.out_dim == 0) {
      throw DimensionError(describe_layer(params, i) + ": dimensions must be positive");
    }
    if (width != 0 && l.in_dim != width) {
      throw DimensionError(describe_layer(params, i) + ": input width " + std::to_string(l.in_dim) +
                           " does not match previous output " + std::to_string(width));
    }
    width = l.out_dim;
    auto w = params.tensors.find(weight_name(i));
    auto b = params.tensors.find(bias_name(i));
    if (w == params.tensors.end() || b == params.tensors.end()) {
      throw DimensionError(describe_layer(params, i) + ": missing weight or bias tensor");
    }
    if (w->second.shape() != std::vector<std::size_t>{l.in_dim, l.out_dim} ||
        b->second.shape() != std::vector<std::size_t>{l.out_dim}) {
      throw DimensionError(describe_layer(params, i) + ": tensor shapes " +
                           shape_string(w->second.shape()) + ", " +
                           shape_string(b->second.shape()) + " do not match the layer");
    }
    expected_tensors += 2;
  }
  if (params.tensors.size() != expected_tensors) {
    throw DimensionError("model holds " + std::to_string(params.tensors.size()) +
                         " tensors but its layers need " + std::to_string(expected_tensors));
  }
}

GradientMap zeros_like(const ModelParams& params) {
  GradientMap out;
  for (const auto& [name, t] : params.tensors) out.emplace(name, Tensor(t.shape()));
  return out;
}

void accumulate(GradientMap& into, const GradientMap& from, double scale) {
  for (const auto& [name, g] : from) {
    Tensor& dst = grad_slot(into, name, g);
    if (!dst.same_shape(g)) throw DimensionError("gradient shape mismatch for " + name);
    for (std::size_t e = 0; e < g.size(); ++e) dst[e] += scale * g[e];
  }
}

ForwardTrace forward_trace(const ModelParams& params, const Tensor& input, LayerRange range) {
  range = clamp_range(params, range);
  if (input.rank() != 2) {
    throw DimensionError("network input must be [batch, features], got " + shape_string(input.shape()));
  }
  ForwardTrace trace;
  trace.range = range;
  trace.values.reserve(range.last - range.first + 1);
  trace.values.push_back(input);
  for (std::size_t i = range.first; i < range.last; ++i) {
    const LayerSpec& l = params.layers[i];
    const Tensor& in = trace.values.back();
    if (l.kind == LayerKind::linear) {
      if (in.cols() != l.in_dim) {
        throw DimensionError(describe_layer(params, i) + ": expected input width " +
                             std::to_string(l.in_dim) + ", got " + std::to_string(in.cols()));
      }
      trace.values.push_back(linear_forward(in, params.weight(i), params.bias(i)));
    } else {
      Tensor out(in.shape());
      for (std::size_t e = 0; e < in.size(); ++e) out[e] = activate(l.activation, in[e]);
      trace.values.push_back(std::move(out));
    }
  }
  return trace;
}

Tensor forward(const ModelParams& params, const Tensor& input, LayerRange range) {
  ForwardTrace trace = forward_trace(params, input, range);
  return std::move(trace.values.back());
}

Tensor backward_trace(const ModelParams& params, const ForwardTrace& trace, const Tensor& upstream,
                      GradientMap* grads) {
  if (!upstream.same_shape(trace.output())) {
    throw DimensionError("upstream gradient shape " + shape_string(upstream.shape()) +
                         " does not match network output " + shape_string(trace.output().shape()));
  }
  Tensor g = upstream;
  for (std::size_t i = trace.range.last; i-- > trace.range.first;) {
    const LayerSpec& l = params.layers[i];
    const Tensor& in = trace.values[i - trace.range.first];
    if (l.kind == LayerKind::linear) {
      const Tensor& w = params.weight(i);
      if (grads != nullptr) {
        linear_param_grads(in, g, grad_slot(*grads, weight_name(i), w),
                           grad_slot(*grads, bias_name(i), params.bias(i)));
      }
      g = linear_input_grad(g, w);
    } else {
      const Tensor& out = trace.values[i - trace.range.first + 1];
      for (std::size_t e = 0; e < g.size(); ++e) g[e] *= activate_d1(l.activation, in[e], out[e]);
    }
  }
  return g;
}

BackwardResult backward(const ModelParams& params, const Tensor& input, const Tensor& upstream) {
  const ForwardTrace trace = forward_trace(params, input);
  BackwardResult result{zeros_like(params), {}};
  result.input_grad = backward_trace(params, trace, upstream, &result.grads);
  return result;
}

GradientMap input_gradient_vjp(const ModelParams& params, const Tensor& input, const Tensor& seed) {
  if (params.out_dim() != 1) {
    throw DimensionError("input_gradient_vjp needs a scalar-output network, got width " +
                         std::to_string(params.out_dim()));
  }
  if (!seed.same_shape(input)) {
    throw DimensionError("seed shape " + shape_string(seed.shape()) + " does not match input " +
                         shape_string(input.shape()));
  }
  const ForwardTrace trace = forward_trace(params, input);
  const std::size_t L = params.layers.size();
  const std::size_t n = input.rows();

  // r[i]: gradient of the output w.r.t. values[i] (first-order backward pass).
  std::vector<Tensor> r(L + 1);
  r[L] = Tensor({n, 1}, 1.0);
  for (std::size_t i = L; i-- > 0;) {
    const LayerSpec& l = params.layers[i];
    if (l.kind == LayerKind::linear) {
      r[i] = linear_input_grad(r[i + 1], params.weight(i));
    } else {
      r[i] = r[i + 1];
      for (std::size_t e = 0; e < r[i].size(); ++e) {
        r[i][e] *= activate_d1(l.activation, trace.values[i][e], trace.values[i + 1][e]);
      }
    }
  }

  // Adjoint of the backward pass, walked input to output. `rbar` is the
  // adjoint of r[i]; curvature terms land in vbar (adjoints of forward values).
  GradientMap grads = zeros_like(params);
  std::vector<Tensor> vbar(L + 1);
  bool any_curvature = false;
  Tensor rbar = seed;
  for (std::size_t i = 0; i < L; ++i) {
    const LayerSpec& l = params.layers[i];
    if (l.kind == LayerKind::linear) {
      // r[i] = r[i+1] W^T  =>  Wbar += rbar^T r[i+1], r[i+1]bar = rbar W
      const Tensor& w = params.weight(i);
      Tensor& gw = grads.at(weight_name(i));
      Tensor tmp(w.shape());
      kernels::gemm_tn(rbar.values(), r[i + 1].values(), tmp.values(), n, w.dim(0), w.dim(1));
      for (std::size_t e = 0; e < tmp.size(); ++e) gw[e] += tmp[e];
      Tensor next({n, w.dim(1)});
      kernels::gemm_nn(rbar.values(), w.values(), next.values(), n, w.dim(0), w.dim(1));
      rbar = std::move(next);
    } else {
      const Tensor& pre = trace.values[i];
      const Tensor& post = trace.values[i + 1];
      if (has_curvature(l.activation)) {
        any_curvature = true;
        vbar[i] = Tensor(pre.shape());
        for (std::size_t e = 0; e < pre.size(); ++e) {
          vbar[i][e] = rbar[e] * r[i + 1][e] * activate_d2(l.activation, post[e]);
        }
      }
      for (std::size_t e = 0; e < rbar.size(); ++e) {
        rbar[e] *= activate_d1(l.activation, pre[e], post[e]);
      }
    }
  }

  // Curvature adjoints depend on parameters through the forward pass.
  if (any_curvature) {
    Tensor a({n, 1}, 0.0);
    for (std::size_t i = L; i-- > 0;) {
      const LayerSpec& l = params.layers[i];
      const Tensor& in = trace.values[i];
      if (l.kind == LayerKind::linear) {
        linear_param_grads(in, a, grads.at(weight_name(i)), grads.at(bias_name(i)));
        a = linear_input_grad(a, params.weight(i));
      } else {
        for (std::size_t e = 0; e < a.size(); ++e) {
          a[e] *= activate_d1(l.activation, in[e], trace.values[i + 1][e]);
        }
      }
      if (!vbar[i].empty()) {
        for (std::size_t e = 0; e < a.size(); ++e) a[e] += vbar[i][e];
      }
    }
  }
  return grads;
}

Tensor xavier_init(std::size_t fan_in, std::size_t fan_out, Rng& rng) {
  if (fan_in == 0 || fan_out == 0) throw DimensionError("xavier_init needs positive fan_in and fan_out");
  const double bound = std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
  Tensor w({fan_in, fan_out});
  for (double& v : w.values()) v = rng.uniform(-bound, bound);
  return w;
}

OptimizerState make_optimizer(OptimizerKind kind, double learning_rate, const ModelParams& params) {
  if (!(learning_rate >= 0.0) || !std::isfinite(learning_rate)) {
    throw ConfigError("learning rate must be finite and nonnegative");
  }
  OptimizerState s;
  s.kind = kind;
  s.learning_rate = learning_rate;
  s.second = zeros_like(params);
  if (kind == OptimizerKind::adam) s.first = zeros_like(params);
  return s;
}

namespace {

void check_step_inputs(const ModelParams& params, const GradientMap& grads, const OptimizerState& state) {
  for (const auto& [name, p] : params.tensors) {
    auto g = grads.find(name);
    if (g == grads.end()) throw DimensionError("missing gradient for tensor " + name);
    if (!g->second.same_shape(p)) {
      throw DimensionError("gradient for " + name + " has shape " + shape_string(g->second.shape()) +
                           ", parameter has " + shape_string(p.shape()));
    }
    if (!g->second.all_finite()) throw NonFiniteError("non-finite gradient in tensor " + name);
    auto v = state.second.find(name);
    if (v == state.second.end() || !v->second.same_shape(p)) {
      throw DimensionError("optimizer accumulator missing or misshaped for " + name);
    }
    if (state.kind == OptimizerKind::adam) {
      auto m = state.first.find(name);
      if (m == state.first.end() || !m->second.same_shape(p)) {
        throw DimensionError("optimizer accumulator missing or misshaped for " + name);
      }
    }
  }
  if (grads.size() != params.tensors.size()) {
    throw DimensionError("gradient map has tensors the model does not own");
  }
}

}  // namespace

void adam_step(ModelParams& params, const GradientMap& grads, OptimizerState& state) {
  if (state.kind != OptimizerKind::adam) throw ConfigError("adam_step called with a non-adam state");
  check_step_inputs(params, grads, state);
  state.step_count += 1;
  const double t = static_cast<double>(state.step_count);
  const double c1 = 1.0 - std::pow(state.beta1, t);
  const double c2 = 1.0 - std::pow(state.beta2, t);
  for (auto& [name, p] : params.tensors) {
    const Tensor& g = grads.at(name);
    Tensor& m = state.first.at(name);
    Tensor& v = state.second.at(name);
    for (std::size_t e = 0; e < p.size(); ++e) {
      m[e] = state.beta1 * m[e] + (1.0 - state.beta1) * g[e];
      v[e] = state.beta2 * v[e] + (1.0 - state.beta2) * g[e] * g[e];
      const double mhat = m[e] / c1;
      const double vhat = v[e] / c2;
      p[e] -= state.learning_rate * mhat / (std::sqrt(vhat) + state.epsilon);
    }
  }
}

void rmsprop_step(ModelParams& params, const GradientMap& grads, OptimizerState& state) {
  if (state.kind != OptimizerKind::rmsprop) throw ConfigError("rmsprop_step called with a non-rmsprop state");
  check_step_inputs(params, grads, state);
  state.step_count += 1;
  for (auto& [name, p] : params.tensors) {
    const Tensor& g = grads.at(name);
    Tensor& s = state.second.at(name);
    for (std::size_t e = 0; e < p.size(); ++e) {
      s[e] = state.decay * s[e] + (1.0 - state.decay) * g[e] * g[e];
      p[e] -= state.learning_rate * g[e] / (std::sqrt(s[e]) + state.epsilon);
    }
  }
}

void optimizer_step(ModelParams& params, const GradientMap& grads, OptimizerState& state) {
  if (state.kind == OptimizerKind::adam) {
    adam_step(params, grads, state);
  } else {
    rmsprop_step(params, grads, state);
  }
}

}  // namespace tgan::nn
