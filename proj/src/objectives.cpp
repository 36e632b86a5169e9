#include "tgan/objectives.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "tgan/error.hpp"

namespace tgan::objectives {

namespace {

void require_scores(const Tensor& s, const char* what) {
  if (s.rank() != 2 || s.cols() != 1) {
    throw DimensionError(std::string(what) + " must have shape [batch, 1], got " + shape_string(s.shape()));
  }
}

// Probabilities must lie in [0, 1]; the endpoints are reachable by a saturated
// sigmoid in floating point and are handled by the clamp. NaN passes through
// and surfaces as a non-finite loss.
void require_probabilities(const Tensor& s, const char* what) {
  for (std::size_t i = 0; i < s.size(); ++i) {
    const double v = s[i];
    if (v < 0.0 || v > 1.0) {
      throw DomainError(std::string(what) + ": score " + std::to_string(v) + " at row " + std::to_string(i) +
                        " is outside (0,1); the original variant needs a sigmoid discriminator");
    }
  }
}

double clamp_prob(double v) { return std::clamp(v, kScoreClamp, 1.0 - kScoreClamp); }

// Batch mean of f(v) with gradient f'(v)/n.
template <typename F, typename DF>
ScoreLoss mean_term(const Tensor& s, F f, DF df) {
  const double n = static_cast<double>(s.rows());
  ScoreLoss out{0.0, Tensor(s.shape())};
  double sum = 0.0;
  for (std::size_t i = 0; i < s.size(); ++i) {
    sum += f(s[i]);
    out.grad[i] = df(s[i]) / n;
  }
  out.value = sum / n;
  return out;
}

// -log(v) and -log(1 - v) on clamped probabilities.
ScoreLoss neg_log(const Tensor& s) {
  return mean_term(
      s, [](double v) { return -std::log(clamp_prob(v)); }, [](double v) { return -1.0 / clamp_prob(v); });
}
ScoreLoss neg_log_one_minus(const Tensor& s) {
  return mean_term(
      s, [](double v) { return -std::log(1.0 - clamp_prob(v)); },
      [](double v) { return 1.0 / (1.0 - clamp_prob(v)); });
}
ScoreLoss squared_offset(const Tensor& s, double target) {
  return mean_term(
      s, [target](double v) { return (v - target) * (v - target); },
      [target](double v) { return 2.0 * (v - target); });
}
ScoreLoss linear(const Tensor& s, double sign) {
  return mean_term(s, [sign](double v) { return sign * v; }, [sign](double) { return sign; });
}

}  // namespace

std::string_view to_string(GanVariant v) {
  switch (v) {
    case GanVariant::original:
      return "original";
    case GanVariant::lsgan:
      return "lsgan";
    case GanVariant::wgan_gp:
      return "wgan_gp";
  }
  return "?";
}

GanVariant parse_variant(std::string_view name) {
  for (GanVariant v : {GanVariant::original, GanVariant::lsgan, GanVariant::wgan_gp}) {
    if (to_string(v) == name) return v;
  }
  throw ConfigError("unknown GAN variant '" + std::string(name) + "' (expected original, lsgan or wgan_gp)");
}

bool requires_bounded_output(GanVariant v) { return v == GanVariant::original; }

double lambda_schedule(std::int64_t t, std::int64_t K) {
  if (K < 1) throw ConfigError("schedule ramp length K must satisfy K >= 1, got " + std::to_string(K));
  if (t < 0) throw ConfigError("schedule step t must be nonnegative, got " + std::to_string(t));
  if (t >= K) return 0.0;
  const double angle = static_cast<double>(t) * std::numbers::pi / (2.0 * static_cast<double>(K));
  return 1.0 - std::sin(angle);
}

double reconstruction_loss(const Tensor& x, const Tensor& lx) {
  if (!x.same_shape(lx) || x.rank() != 2) {
    throw DimensionError("reconstruction_loss: shapes " + shape_string(x.shape()) + " and " +
                         shape_string(lx.shape()) + " differ");
  }
  double sum = 0.0;
  for (std::size_t e = 0; e < x.size(); ++e) {
    const double d = x[e] - lx[e];
    sum += d * d;
  }
  return sum / static_cast<double>(x.rows());
}

Tensor reconstruction_loss_grad(const Tensor& x, const Tensor& lx) {
  if (!x.same_shape(lx) || x.rank() != 2) {
    throw DimensionError("reconstruction_loss_grad: shapes " + shape_string(x.shape()) + " and " +
                         shape_string(lx.shape()) + " differ");
  }
  const double scale = 2.0 / static_cast<double>(x.rows());
  Tensor g(x.shape());
  for (std::size_t e = 0; e < x.size(); ++e) g[e] = scale * (lx[e] - x[e]);
  return g;
}

DiscriminatorLoss d_loss_with_grad(GanVariant v, const Tensor& d_lensed_real, const Tensor& d_fake) {
  require_scores(d_lensed_real, "d_loss real scores");
  require_scores(d_fake, "d_loss fake scores");
  ScoreLoss real;
  ScoreLoss fake;
  switch (v) {
    case GanVariant::original:
      require_probabilities(d_lensed_real, "d_loss");
      require_probabilities(d_fake, "d_loss");
      real = neg_log(d_lensed_real);
      fake = neg_log_one_minus(d_fake);
      break;
    case GanVariant::lsgan:
      real = squared_offset(d_lensed_real, 1.0);
      fake = squared_offset(d_fake, 0.0);
      break;
    case GanVariant::wgan_gp:
      real = linear(d_lensed_real, -1.0);
      fake = linear(d_fake, 1.0);
      break;
  }
  return {real.value + fake.value, std::move(real.grad), std::move(fake.grad)};
}

ScoreLoss g_loss_with_grad(GanVariant v, const Tensor& d_fake) {
  require_scores(d_fake, "g_loss scores");
  switch (v) {
    case GanVariant::original:
      require_probabilities(d_fake, "g_loss");
      return neg_log(d_fake);
    case GanVariant::lsgan:
      return squared_offset(d_fake, 1.0);
    case GanVariant::wgan_gp:
      return linear(d_fake, -1.0);
  }
  return {};
}

ScoreLoss lens_adv_loss_with_grad(GanVariant v, const Tensor& d_lensed_real) {
  require_scores(d_lensed_real, "lens_adv_loss scores");
  switch (v) {
    case GanVariant::original:
      require_probabilities(d_lensed_real, "lens_adv_loss");
      return neg_log_one_minus(d_lensed_real);
    case GanVariant::lsgan:
      return squared_offset(d_lensed_real, 0.0);
    case GanVariant::wgan_gp:
      return linear(d_lensed_real, 1.0);
  }
  return {};
}

PenaltyResult gradient_penalty_at(const nn::ModelParams& critic, const Tensor& interpolates, double coeff) {
  const std::size_t n = interpolates.rows();
  const std::size_t d = interpolates.cols();
  const nn::BackwardResult first = nn::backward(critic, interpolates, Tensor({n, 1}, 1.0));
  const Tensor& g = first.input_grad;

  PenaltyResult out;
  Tensor seed(g.shape());
  double sum = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    double sq = 0.0;
    for (std::size_t j = 0; j < d; ++j) sq += g(i, j) * g(i, j);
    const double norm = std::sqrt(sq);
    sum += (norm - 1.0) * (norm - 1.0);
    if (norm > 0.0) {
      const double scale = coeff * 2.0 * (norm - 1.0) / (static_cast<double>(n) * norm);
      for (std::size_t j = 0; j < d; ++j) seed(i, j) = scale * g(i, j);
    }
  }
  out.penalty = coeff * sum / static_cast<double>(n);
  out.grads = nn::input_gradient_vjp(critic, interpolates, seed);
  return out;
}

PenaltyResult gradient_penalty(const nn::ModelParams& critic, const Tensor& lensed_real, const Tensor& fake,
                               double coeff, Rng& rng) {
  if (!lensed_real.same_shape(fake) || lensed_real.rank() != 2) {
    throw DimensionError("gradient_penalty: real batch " + shape_string(lensed_real.shape()) +
                         " and fake batch " + shape_string(fake.shape()) + " differ");
  }
  const std::size_t n = fake.rows();
  const std::size_t d = fake.cols();
  Tensor xhat(fake.shape());
  for (std::size_t i = 0; i < n; ++i) {
    const double e = rng.uniform();
    for (std::size_t j = 0; j < d; ++j) xhat(i, j) = e * lensed_real(i, j) + (1.0 - e) * fake(i, j);
  }
  return gradient_penalty_at(critic, xhat, coeff);
}

}  // namespace tgan::objectives
