#pragma once

#include <cstdint>
#include <string_view>

#include "tgan/nn.hpp"

// Adversarial objectives for the three GAN families, the lens losses, the
// adversarial-weight schedule, and the critic gradient penalty.
//
// Score tensors are discriminator outputs of shape [batch, 1]. Every loss is a
// batch mean; `*_with_grad` variants also return d(loss)/d(scores).
namespace tgan::objectives {

enum class GanVariant { original, lsgan, wgan_gp };

std::string_view to_string(GanVariant v);
GanVariant parse_variant(std::string_view name);
// original needs sigmoid scores; lsgan and wgan_gp need raw scores.
bool requires_bounded_output(GanVariant v);

// Log-based losses clamp scores into [kScoreClamp, 1 - kScoreClamp].
inline constexpr double kScoreClamp = 1e-7;

// 1 - sin(t*pi/(2K)) for t <= K, 0 afterwards. Throws ConfigError when K < 1.
double lambda_schedule(std::int64_t t, std::int64_t K);

struct ScheduleState {
  std::int64_t t = 0;
  std::int64_t K = 10000;
  double lambda = 1.0;

  static ScheduleState at(std::int64_t t, std::int64_t K) { return {t, K, lambda_schedule(t, K)}; }
  void advance() {
    ++t;
    lambda = lambda_schedule(t, K);
  }
  friend bool operator==(const ScheduleState&, const ScheduleState&) = default;
};

// Mean over the batch of the squared Euclidean distance between rows.
double reconstruction_loss(const Tensor& x, const Tensor& lx);
// d/d(lx) of reconstruction_loss.
Tensor reconstruction_loss_grad(const Tensor& x, const Tensor& lx);

inline double lens_total_loss(double adv, double rec, double lambda) { return lambda * adv + rec; }

struct ScoreLoss {
  double value = 0.0;
  Tensor grad;
};

struct DiscriminatorLoss {
  double value = 0.0;
  Tensor grad_real;  // w.r.t. scores on (lensed) real samples
  Tensor grad_fake;
};

DiscriminatorLoss d_loss_with_grad(GanVariant v, const Tensor& d_lensed_real, const Tensor& d_fake);
ScoreLoss g_loss_with_grad(GanVariant v, const Tensor& d_fake);
ScoreLoss lens_adv_loss_with_grad(GanVariant v, const Tensor& d_lensed_real);

inline double d_loss(GanVariant v, const Tensor& d_lensed_real, const Tensor& d_fake) {
  return d_loss_with_grad(v, d_lensed_real, d_fake).value;
}
inline double g_loss(GanVariant v, const Tensor& d_fake) { return g_loss_with_grad(v, d_fake).value; }
inline double lens_adv_loss(GanVariant v, const Tensor& d_lensed_real) {
  return lens_adv_loss_with_grad(v, d_lensed_real).value;
}

struct PenaltyResult {
  double penalty = 0.0;
  nn::GradientMap grads;  // d(penalty)/d(critic parameters)
};

// coeff * mean_i (||grad_x D(xhat_i)|| - 1)^2 on xhat_i = e_i*real_i + (1-e_i)*fake_i,
// e_i ~ U[0,1) drawn per sample from `rng`.
PenaltyResult gradient_penalty(const nn::ModelParams& critic, const Tensor& lensed_real, const Tensor& fake,
                               double coeff, Rng& rng);

// Same, at caller-supplied interpolation points.
PenaltyResult gradient_penalty_at(const nn::ModelParams& critic, const Tensor& interpolates, double coeff);

struct LossReport {
  double loss_d = 0.0;
  double loss_g = 0.0;
  double loss_lens_adv = 0.0;
  double loss_lens_rec = 0.0;
  double loss_lens_total = 0.0;
  double gradient_penalty = 0.0;

  friend bool operator==(const LossReport&, const LossReport&) = default;
};

}  // namespace tgan::objectives
