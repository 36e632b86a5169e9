#pragma once

// Central-difference gradient oracle shared by the unit tests and the
// acceptance binary. The numeric side only ever calls forward evaluations and
// loss values.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "tgan/models.hpp"
#include "tgan/nn.hpp"
#include "tgan/objectives.hpp"
#include "tgan/rng.hpp"

namespace tgan::oracle {

inline constexpr double kFdStep = 1e-5;
inline constexpr double kFdRelTol = 1e-4;
inline constexpr double kFdAbsFloor = 1e-7;

struct GradCheck {
  std::size_t checked = 0;
  std::size_t failed = 0;
  double worst_rel = 0.0;  // over entries outside the absolute floor
  double worst_abs = 0.0;
  std::string first_failure;

  bool ok() const { return failed == 0 && checked > 0; }
  void merge(const GradCheck& o) {
    checked += o.checked;
    failed += o.failed;
    worst_rel = std::max(worst_rel, o.worst_rel);
    worst_abs = std::max(worst_abs, o.worst_abs);
    if (first_failure.empty()) first_failure = o.first_failure;
  }
};

inline bool grad_close(double analytic, double numeric, double* rel_out = nullptr) {
  const double diff = std::abs(analytic - numeric);
  const double scale = std::max(std::abs(analytic), std::abs(numeric));
  const double rel = scale > 0.0 ? diff / scale : 0.0;
  if (rel_out != nullptr) *rel_out = diff <= kFdAbsFloor ? 0.0 : rel;
  return diff <= kFdAbsFloor || rel <= kFdRelTol;
}

// Perturbs each entry of `x` in place by +-h and differentiates f.
template <typename F>
Tensor numeric_gradient(Tensor& x, F&& f, double h = kFdStep) {
  Tensor g(x.shape());
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double orig = x[i];
    x[i] = orig + h;
    const double fp = f();
    x[i] = orig - h;
    const double fm = f();
    x[i] = orig;
    g[i] = (fp - fm) / (2.0 * h);
  }
  return g;
}

inline void compare(GradCheck& acc, const std::string& label, const Tensor& analytic, const Tensor& numeric) {
  if (!analytic.same_shape(numeric)) {
    ++acc.failed;
    if (acc.first_failure.empty()) acc.first_failure = label + ": shape mismatch";
    return;
  }
  for (std::size_t i = 0; i < analytic.size(); ++i) {
    double rel = 0.0;
    ++acc.checked;
    const bool ok = grad_close(analytic[i], numeric[i], &rel);
    acc.worst_rel = std::max(acc.worst_rel, rel);
    acc.worst_abs = std::max(acc.worst_abs, std::abs(analytic[i] - numeric[i]));
    if (!ok) {
      ++acc.failed;
      if (acc.first_failure.empty()) {
        acc.first_failure = label + "[" + std::to_string(i) + "]: analytic " + std::to_string(analytic[i]) +
                            " numeric " + std::to_string(numeric[i]);
      }
    }
  }
}

inline double weighted_sum(const Tensor& out, const Tensor& w) {
  double s = 0.0;
  for (std::size_t i = 0; i < out.size(); ++i) s += out[i] * w[i];
  return s;
}

inline Tensor random_matrix(std::size_t rows, std::size_t cols, Rng& rng, double lo = -1.0, double hi = 1.0) {
  Tensor t({rows, cols});
  for (double& v : t.values()) v = rng.uniform(lo, hi);
  return t;
}

// One linear layer per entry of `acts`, each followed by that activation.
// Weights and biases are random (biases nonzero so their gradients matter).
inline nn::ModelParams random_mlp(const std::vector<std::size_t>& dims, const std::vector<nn::Activation>& acts,
                                  Rng& rng) {
  nn::ModelParams p;
  for (std::size_t i = 0; i + 1 < dims.size(); ++i) {
    const std::size_t li = p.layers.size();
    p.layers.push_back(nn::LayerSpec::linear(dims[i], dims[i + 1]));
    p.tensors[nn::weight_name(li)] = random_matrix(dims[i], dims[i + 1], rng);
    Tensor b({dims[i + 1]});
    for (double& v : b.values()) v = rng.uniform(-0.5, 0.5);
    p.tensors[nn::bias_name(li)] = b;
    p.layers.push_back(nn::LayerSpec::act(acts[i]));
  }
  return p;
}

// Smallest |input| to any ReLU-family activation in the trace. Central
// differences straddling a kink are meaningless, so cases are resampled until
// this is comfortably larger than the perturbation.
inline double kink_margin(const nn::ModelParams& p, const nn::ForwardTrace& trace) {
  double m = INFINITY;
  for (std::size_t j = 0; j + 1 < trace.values.size(); ++j) {
    const nn::LayerSpec& layer = p.layers[trace.range.first + j];
    if (layer.kind != nn::LayerKind::activation) continue;
    if (layer.activation != nn::Activation::relu && layer.activation != nn::Activation::leaky_relu) continue;
    for (double v : trace.values[j].values()) m = std::min(m, std::abs(v));
  }
  return m;
}

inline double kink_margin(const nn::ModelParams& p, const Tensor& x) {
  return kink_margin(p, nn::forward_trace(p, x));
}

inline double lens_kink_margin(const nn::ModelParams& lens, const Tensor& x) {
  const models::LensTrace t = models::lens_forward_trace(lens, x);
  double m = INFINITY;
  for (const auto& b : t.blocks) m = std::min(m, kink_margin(lens, b));
  return m;
}

inline constexpr double kKinkMargin = 1e-3;

// Checks parameter and input gradients of sum(u * net(x)).
inline GradCheck check_network(const std::string& label, nn::ModelParams p, Tensor x, const Tensor& u,
                               bool is_lens) {
  const nn::BackwardResult analytic = is_lens ? models::lens_backward(p, x, u) : nn::backward(p, x, u);
  const auto objective = [&] {
    return weighted_sum(is_lens ? models::lens_forward(p, x) : nn::forward(p, x), u);
  };
  GradCheck acc;
  for (auto& [name, t] : p.tensors) compare(acc, label + " " + name, analytic.grads.at(name), numeric_gradient(t, objective));
  compare(acc, label + " input", analytic.input_grad, numeric_gradient(x, objective));
  return acc;
}

struct GradientCase {
  std::string label;
  std::function<GradCheck()> run;
};

namespace detail {

inline nn::ModelParams discriminator_for(objectives::GanVariant v, Rng& rng) {
  models::DiscriminatorSpec spec{.data_dim = 2, .hidden_dims = {10, 7},
                                 .bounded_output = objectives::requires_bounded_output(v)};
  return models::build_discriminator(spec, rng);
}

inline models::GeneratorSpec small_generator() { return {.noise_dim = 3, .hidden_dims = {9, 6}, .data_dim = 2}; }
inline models::LensSpec small_lens() {
  return {.data_dim = 2, .block_count = 3, .block_hidden_dim = 6, .zero_init_last = false};
}

// Randomizes every tensor so bias gradients and the head layer are exercised.
inline void jitter(nn::ModelParams& p, Rng& rng, double scale) {
  for (auto& [name, t] : p.tensors) {
    for (double& v : t.values()) v += rng.uniform(-scale, scale);
  }
}

}  // namespace detail

// Discriminator loss w.r.t. D parameters, plus the gradient penalty at fixed
// interpolates for wgan_gp. Inputs are held fixed.
inline GradCheck check_d_loss(objectives::GanVariant v, std::uint64_t seed) {
  Rng rng({seed, 101});
  nn::ModelParams d = detail::discriminator_for(v, rng);
  detail::jitter(d, rng, 0.1);
  Tensor real, fake, xhat;
  for (int attempt = 0;; ++attempt) {
    real = random_matrix(5, 2, rng, -2.0, 2.0);
    fake = random_matrix(5, 2, rng, -2.0, 2.0);
    xhat = random_matrix(5, 2, rng, -2.0, 2.0);
    if (std::min({kink_margin(d, real), kink_margin(d, fake), kink_margin(d, xhat)}) > kKinkMargin) break;
  }
  const bool gp = v == objectives::GanVariant::wgan_gp;
  const auto loss_value = [&] {
    double l = objectives::d_loss(v, nn::forward(d, real), nn::forward(d, fake));
    if (gp) l += objectives::gradient_penalty_at(d, xhat, 10.0).penalty;
    return l;
  };
  const nn::ForwardTrace tr = nn::forward_trace(d, real);
  const nn::ForwardTrace tf = nn::forward_trace(d, fake);
  const auto loss = objectives::d_loss_with_grad(v, tr.output(), tf.output());
  nn::GradientMap grads = nn::zeros_like(d);
  nn::backward_trace(d, tr, loss.grad_real, &grads);
  nn::backward_trace(d, tf, loss.grad_fake, &grads);
  if (gp) nn::accumulate(grads, objectives::gradient_penalty_at(d, xhat, 10.0).grads);

  GradCheck acc;
  for (auto& [name, t] : d.tensors) compare(acc, "d_loss " + name, grads.at(name), numeric_gradient(t, loss_value));
  return acc;
}

// Generator loss through the discriminator, w.r.t. G parameters.
inline GradCheck check_g_loss(objectives::GanVariant v, std::uint64_t seed) {
  Rng rng({seed, 102});
  nn::ModelParams d = detail::discriminator_for(v, rng);
  nn::ModelParams g = models::build_generator(detail::small_generator(), rng);
  detail::jitter(g, rng, 0.1);
  Tensor z;
  for (int attempt = 0;; ++attempt) {
    z = random_matrix(4, 3, rng, -2.0, 2.0);
    if (std::min(kink_margin(g, z), kink_margin(d, nn::forward(g, z))) > kKinkMargin) break;
  }
  const auto loss_value = [&] { return objectives::g_loss(v, nn::forward(d, nn::forward(g, z))); };
  const nn::ForwardTrace tg = nn::forward_trace(g, z);
  const nn::ForwardTrace td = nn::forward_trace(d, tg.output());
  const auto loss = objectives::g_loss_with_grad(v, td.output());
  const Tensor into_d = nn::backward_trace(d, td, loss.grad, nullptr);
  nn::GradientMap grads = nn::zeros_like(g);
  nn::backward_trace(g, tg, into_d, &grads);

  GradCheck acc;
  for (auto& [name, t] : g.tensors) compare(acc, "g_loss " + name, grads.at(name), numeric_gradient(t, loss_value));
  return acc;
}

// lambda * adversarial + reconstruction, through D and the lens skip, w.r.t. L
// parameters and the lens input.
inline GradCheck check_lens_loss(objectives::GanVariant v, std::uint64_t seed, double lambda) {
  Rng rng({seed, 103});
  nn::ModelParams d = detail::discriminator_for(v, rng);
  nn::ModelParams l = models::build_lens(detail::small_lens(), rng);
  detail::jitter(l, rng, 0.1);
  Tensor x;
  for (int attempt = 0;; ++attempt) {
    x = random_matrix(4, 2, rng, -2.0, 2.0);
    if (std::min(lens_kink_margin(l, x), kink_margin(d, models::lens_forward(l, x))) > kKinkMargin) break;
  }
  const auto loss_value = [&] {
    const Tensor lx = models::lens_forward(l, x);
    return objectives::lens_total_loss(objectives::lens_adv_loss(v, nn::forward(d, lx)),
                                       objectives::reconstruction_loss(x, lx), lambda);
  };
  const models::LensTrace tl = models::lens_forward_trace(l, x);
  const nn::ForwardTrace td = nn::forward_trace(d, tl.output);
  const auto adv = objectives::lens_adv_loss_with_grad(v, td.output());
  Tensor upstream = objectives::reconstruction_loss_grad(x, tl.output);
  const Tensor through_d = nn::backward_trace(d, td, adv.grad, nullptr);
  for (std::size_t i = 0; i < upstream.size(); ++i) upstream[i] += lambda * through_d[i];
  nn::GradientMap grads = nn::zeros_like(l);
  const Tensor input_grad = models::lens_backward_trace(l, tl, upstream, &grads);

  GradCheck acc;
  for (auto& [name, t] : l.tensors) compare(acc, "lens_loss " + name, grads.at(name), numeric_gradient(t, loss_value));
  // x appears in both the lens input and the reconstruction target.
  Tensor rec_direct = objectives::reconstruction_loss_grad(x, tl.output);
  Tensor full_input(input_grad.shape());
  for (std::size_t i = 0; i < full_input.size(); ++i) full_input[i] = input_grad[i] - rec_direct[i];
  compare(acc, "lens_loss input", full_input, numeric_gradient(x, loss_value));
  return acc;
}

// Gradient-penalty parameter gradients for a smooth or piecewise-linear critic.
inline GradCheck check_penalty(nn::Activation hidden, std::uint64_t seed) {
  Rng rng({seed, 104});
  nn::ModelParams d = random_mlp({2, 6, 5, 1}, {hidden, hidden, nn::Activation::identity}, rng);
  Tensor xhat;
  for (int attempt = 0;; ++attempt) {
    xhat = random_matrix(4, 2, rng, -1.5, 1.5);
    if (kink_margin(d, xhat) > kKinkMargin) break;
  }
  const auto pen = objectives::gradient_penalty_at(d, xhat, 10.0);
  const auto value = [&] { return objectives::gradient_penalty_at(d, xhat, 10.0).penalty; };
  GradCheck acc;
  for (auto& [name, t] : d.tensors) compare(acc, "penalty " + name, pen.grads.at(name), numeric_gradient(t, value));
  return acc;
}

// The case matrix: plain stacks over every activation and depth 1-4 with
// batches 1-8, the three builders, whole-loss compositions for every variant,
// and the penalty's second-order path.
inline std::vector<GradientCase> gradient_cases(std::uint64_t seed) {
  using nn::Activation;
  std::vector<GradientCase> cases;
  const Activation acts[] = {Activation::relu, Activation::leaky_relu, Activation::sigmoid, Activation::tanh,
                             Activation::identity};
  std::size_t index = 0;
  for (Activation a : acts) {
    for (std::size_t depth = 1; depth <= 4; ++depth, ++index) {
      const std::size_t batch = 1 + index % 8;
      const std::string label = std::string("mlp ") + std::string(nn::to_string(a)) + " depth " +
                                std::to_string(depth) + " batch " + std::to_string(batch);
      cases.push_back({label, [=] {
                         Rng rng({seed, 200 + index});
                         std::vector<std::size_t> dims{1 + rng.index(4)};
                         for (std::size_t i = 0; i < depth; ++i) dims.push_back(1 + rng.index(5));
                         // Mix in a second activation so stacks are not uniform.
                         std::vector<Activation> layer_acts(depth, a);
                         if (depth > 1) layer_acts[0] = acts[(index + 2) % 5];
                         nn::ModelParams p = random_mlp(dims, layer_acts, rng);
                         Tensor x;
                         for (int attempt = 0;; ++attempt) {
                           x = random_matrix(batch, dims.front(), rng, -2.0, 2.0);
                           if (kink_margin(p, x) > kKinkMargin) break;
                           if (attempt % 20 == 19) p = random_mlp(dims, layer_acts, rng);
                         }
                         const Tensor u = random_matrix(batch, dims.back(), rng);
                         return check_network(label, p, x, u, false);
                       }});
    }
  }
  cases.push_back({"generator", [=] {
                     Rng rng({seed, 300});
                     nn::ModelParams g = models::build_generator(detail::small_generator(), rng);
                     detail::jitter(g, rng, 0.1);
                     Tensor z;
                     do z = random_matrix(3, 3, rng, -2.0, 2.0);
                     while (kink_margin(g, z) <= kKinkMargin);
                     return check_network("generator", g, z, random_matrix(3, 2, rng), false);
                   }});
  for (bool bounded : {true, false}) {
    const std::string label = bounded ? "discriminator bounded" : "discriminator unbounded";
    cases.push_back({label, [=] {
                       Rng rng({seed, 301, bounded ? 1u : 0u});
                       nn::ModelParams d = models::build_discriminator(
                           {.data_dim = 2, .hidden_dims = {8, 6}, .bounded_output = bounded}, rng);
                       detail::jitter(d, rng, 0.1);
                       Tensor x;
                       do x = random_matrix(4, 2, rng, -2.0, 2.0);
                       while (kink_margin(d, x) <= kKinkMargin);
                       return check_network(label, d, x, random_matrix(4, 1, rng), false);
                     }});
  }
  for (std::size_t blocks : {1u, 3u}) {
    const std::string label = "lens " + std::to_string(blocks) + " blocks";
    cases.push_back({label, [=] {
                       Rng rng({seed, 302, blocks});
                       nn::ModelParams l = models::build_lens(
                           {.data_dim = 2, .block_count = blocks, .block_hidden_dim = 5, .zero_init_last = false},
                           rng);
                       detail::jitter(l, rng, 0.2);
                       Tensor x;
                       do x = random_matrix(5, 2, rng, -2.0, 2.0);
                       while (lens_kink_margin(l, x) <= kKinkMargin);
                       return check_network(label, l, x, random_matrix(5, 2, rng), true);
                     }});
  }
  for (auto v : {objectives::GanVariant::original, objectives::GanVariant::lsgan, objectives::GanVariant::wgan_gp}) {
    const std::string name(objectives::to_string(v));
    cases.push_back({"d_loss " + name, [=] { return check_d_loss(v, seed); }});
    cases.push_back({"g_loss " + name, [=] { return check_g_loss(v, seed); }});
    cases.push_back({"lens_loss " + name, [=] { return check_lens_loss(v, seed, 0.6); }});
  }
  for (Activation a : {Activation::tanh, Activation::sigmoid, Activation::leaky_relu}) {
    const std::string label = "penalty " + std::string(nn::to_string(a));
    cases.push_back({label, [=] { return check_penalty(a, seed); }});
  }
  return cases;
}

}  // namespace tgan::oracle
