#pragma once

#include <cstddef>
#include <vector>

#include "tgan/nn.hpp"

namespace tgan::models {

struct GeneratorSpec {
  std::size_t noise_dim = 8;
  std::vector<std::size_t> hidden_dims{64, 64};
  std::size_t data_dim = 2;
};

struct DiscriminatorSpec {
  std::size_t data_dim = 2;
  std::vector<std::size_t> hidden_dims{64, 64};
  bool bounded_output = true;  // final sigmoid; false gives a raw critic score
};

struct LensSpec {
  std::size_t data_dim = 2;
  std::size_t block_count = 4;
  std::size_t block_hidden_dim = 32;
  bool zero_init_last = false;
};

// ReLU hidden layers, identity output. Xavier weights, zero biases.
nn::ModelParams build_generator(const GeneratorSpec& spec, Rng& rng);
// Leaky-ReLU hidden layers, output [batch, 1], sigmoid iff bounded_output.
nn::ModelParams build_discriminator(const DiscriminatorSpec& spec, Rng& rng);

// The lens is stored as a flat layer list:
//   block k (k < block_count): linear(d->h), relu, linear(h->d)   at layers 3k..3k+2
//   head:                      linear(d->d)                       at layer 3*block_count
// and evaluated as  L(x) = x + head(trunk(x)),  trunk block k: y <- y + block_k(y).
nn::ModelParams build_lens(const LensSpec& spec, Rng& rng);

// Validates the lens layout and returns its block count.
std::size_t lens_block_count(const nn::ModelParams& lens);

struct LensTrace {
  std::vector<nn::ForwardTrace> blocks;
  nn::ForwardTrace head;
  Tensor output;
};

LensTrace lens_forward_trace(const nn::ModelParams& lens, const Tensor& x);
// head(trunk(x)) alone, i.e. L(x) - x.
Tensor lens_trunk_forward(const nn::ModelParams& lens, const Tensor& x);
Tensor lens_forward(const nn::ModelParams& lens, const Tensor& x);

// Adds parameter gradients into `grads` when non-null; returns d/dx including
// the identity contribution of the global skip.
Tensor lens_backward_trace(const nn::ModelParams& lens, const LensTrace& trace, const Tensor& upstream,
                           nn::GradientMap* grads);
nn::BackwardResult lens_backward(const nn::ModelParams& lens, const Tensor& x, const Tensor& upstream);

// Zeroes the head layer so L becomes exactly the identity.
void make_lens_identity(nn::ModelParams& lens);

}  // namespace tgan::models
