#include "tgan/harness.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>

#include "tgan/data.hpp"
#include "tgan/metrics.hpp"
#include "tgan/models.hpp"

namespace tgan {

namespace {

namespace fs = std::filesystem;
using objectives::GanVariant;

// Stream tags mixed into the seeds.
enum : std::uint64_t {
  kGeneratorInit = 1,
  kDiscriminatorInit = 2,
  kLensInit = 3,
  kDataStream = 11,
  kNoiseStream = 12,
  kGpStream = 13,
  kLensDataStream = 14,
  kEvalStream = 15,
};

void require_finite(double v, const char* term, std::int64_t step) {
  if (!std::isfinite(v)) throw TrainingAborted(term, step);
}

nn::OptimizerState make_opt(const ExperimentConfig& c, double lr, const nn::ModelParams& p) {
  nn::OptimizerState s = nn::make_optimizer(c.optimizer, lr, p);
  s.beta1 = c.beta1;
  s.beta2 = c.beta2;
  s.decay = c.rms_decay;
  s.epsilon = c.epsilon;
  return s;
}

void add_into(Tensor& dst, const Tensor& src, double scale) {
  for (std::size_t e = 0; e < dst.size(); ++e) dst[e] += scale * src[e];
}

}  // namespace

void update_discriminator(TrainState& s, const ExperimentConfig& c, objectives::LossReport& report) {
  const std::int64_t step = s.step();
  Tensor x = data::sample_data(c.data, c.batch_size, s.rng.data);
  const Tensor z = data::sample_noise(c.noise, c.batch_size, s.rng.noise);
  const Tensor real = c.lens_enabled ? models::lens_forward(s.lens, x) : std::move(x);
  const Tensor fake = nn::forward(s.generator, z);

  const nn::ForwardTrace on_real = nn::forward_trace(s.discriminator, real);
  const nn::ForwardTrace on_fake = nn::forward_trace(s.discriminator, fake);
  const auto loss = objectives::d_loss_with_grad(c.variant, on_real.output(), on_fake.output());
  report.loss_d = loss.value;
  require_finite(loss.value, "loss_d", step);

  nn::GradientMap grads = nn::zeros_like(s.discriminator);
  nn::backward_trace(s.discriminator, on_real, loss.grad_real, &grads);
  nn::backward_trace(s.discriminator, on_fake, loss.grad_fake, &grads);
  if (c.variant == GanVariant::wgan_gp) {
    const auto gp = objectives::gradient_penalty(s.discriminator, real, fake, c.gp_coeff, s.rng.gp);
    report.gradient_penalty = gp.penalty;
    require_finite(gp.penalty, "gradient_penalty", step);
    nn::accumulate(grads, gp.grads);
  }
  nn::optimizer_step(s.discriminator, grads, s.opt_discriminator);
}

void update_generator(TrainState& s, const ExperimentConfig& c, objectives::LossReport& report) {
  const Tensor z = data::sample_noise(c.noise, c.batch_size, s.rng.noise);
  const nn::ForwardTrace gen = nn::forward_trace(s.generator, z);
  const nn::ForwardTrace disc = nn::forward_trace(s.discriminator, gen.output());
  const auto loss = objectives::g_loss_with_grad(c.variant, disc.output());
  report.loss_g = loss.value;
  require_finite(loss.value, "loss_g", s.step());

  // D's parameter gradients are not needed here.
  const Tensor d_fake = nn::backward_trace(s.discriminator, disc, loss.grad, nullptr);
  nn::GradientMap grads = nn::zeros_like(s.generator);
  nn::backward_trace(s.generator, gen, d_fake, &grads);
  nn::optimizer_step(s.generator, grads, s.opt_generator);
}

void update_lens(TrainState& s, const ExperimentConfig& c, objectives::LossReport& report) {
  const std::int64_t step = s.step();
  const double lambda = s.schedule.lambda;
  const Tensor x = data::sample_data(c.data, c.batch_size, s.rng.lens_data);
  const models::LensTrace lens = models::lens_forward_trace(s.lens, x);
  const nn::ForwardTrace disc = nn::forward_trace(s.discriminator, lens.output);
  const auto adv = objectives::lens_adv_loss_with_grad(c.variant, disc.output());
  const double rec = objectives::reconstruction_loss(x, lens.output);
  report.loss_lens_adv = adv.value;
  report.loss_lens_rec = rec;
  report.loss_lens_total = objectives::lens_total_loss(adv.value, rec, lambda);
  require_finite(adv.value, "loss_lens_adv", step);
  require_finite(rec, "loss_lens_rec", step);
  require_finite(report.loss_lens_total, "loss_lens_total", step);

  Tensor upstream = objectives::reconstruction_loss_grad(x, lens.output);
  if (lambda != 0.0) {
    add_into(upstream, nn::backward_trace(s.discriminator, disc, adv.grad, nullptr), lambda);
  }
  nn::GradientMap grads = nn::zeros_like(s.lens);
  models::lens_backward_trace(s.lens, lens, upstream, &grads);
  nn::optimizer_step(s.lens, grads, s.opt_lens);
}

namespace {

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string fmt(const std::optional<double>& v) { return v ? fmt(*v) : std::string(); }

MetricsRecord evaluate_impl(const TrainState& s, const ExperimentConfig& c, std::size_t n, Tensor* generated) {
  Rng rng({c.data_seed, kEvalStream, static_cast<std::uint64_t>(s.step())});
  const Tensor z = data::sample_noise(c.noise, n, rng);
  Tensor gen = nn::forward(s.generator, z);
  const Tensor real = data::sample_data(c.data, n, rng);

  MetricsRecord r;
  r.step = s.step();
  r.frechet = metrics::frechet_distance(metrics::fit_gaussian_moments(gen), metrics::fit_gaussian_moments(real));
  const auto coverage = metrics::mode_coverage(gen, data::mode_centers(c.data), c.threshold_sigmas, c.data.sigma);
  r.modes_covered = coverage.modes_covered;
  r.hq_fraction = coverage.hq_fraction;
  if (c.lens_enabled) {
    r.lambda = s.schedule.lambda;
    r.lens_identity_mse = metrics::identity_deviation(real, models::lens_forward(s.lens, real));
  }
  if (s.last_losses) {
    const auto& l = *s.last_losses;
    r.loss_d = l.loss_d;
    r.loss_g = l.loss_g;
    if (c.lens_enabled) {
      r.loss_lens_adv = l.loss_lens_adv;
      r.loss_lens_rec = l.loss_lens_rec;
    }
    if (c.variant == GanVariant::wgan_gp) r.gradient_penalty = l.gradient_penalty;
  }
  if (generated != nullptr) *generated = std::move(gen);
  return r;
}

bool record_finite(const MetricsRecord& r) {
  for (const auto& v : {r.lambda, r.loss_d, r.loss_g, r.loss_lens_adv, r.loss_lens_rec, r.gradient_penalty,
                        r.lens_identity_mse}) {
    if (v && !std::isfinite(*v)) return false;
  }
  return std::isfinite(r.frechet) && std::isfinite(r.hq_fraction);
}

}  // namespace

TrainState init_state(const ExperimentConfig& c) {
  validate(c);
  TrainState s{
      .schedule = objectives::ScheduleState::at(0, c.K),
      .generator = {},
      .discriminator = {},
      .lens = {},
      .opt_generator = {},
      .opt_discriminator = {},
      .opt_lens = {},
      .rng = {Rng({c.data_seed, kDataStream}), Rng({c.data_seed, kNoiseStream}), Rng({c.data_seed, kGpStream}),
              Rng({c.data_seed, kLensDataStream})},
      .last_losses = std::nullopt,
  };
  Rng g_init({c.weight_init_seed, kGeneratorInit});
  Rng d_init({c.weight_init_seed, kDiscriminatorInit});
  s.generator = models::build_generator(c.generator, g_init);
  s.discriminator = models::build_discriminator(c.discriminator, d_init);
  s.opt_generator = make_opt(c, c.learning_rate, s.generator);
  s.opt_discriminator = make_opt(c, c.learning_rate, s.discriminator);
  if (c.lens_enabled) {
    Rng l_init({c.weight_init_seed, kLensInit});
    s.lens = models::build_lens(c.lens, l_init);
    s.opt_lens = make_opt(c, c.lens_learning_rate, s.lens);
  }
  return s;
}

void train_step(TrainState& s, const ExperimentConfig& c) {
  objectives::LossReport report;
  for (std::size_t k = 0; k < c.critic_steps_per_iter; ++k) update_discriminator(s, c, report);
  update_generator(s, c, report);
  if (c.lens_enabled) update_lens(s, c, report);
  s.last_losses = report;
  s.schedule.advance();
}

std::string to_csv_row(const MetricsRecord& r) {
  std::string row = std::to_string(r.step);
  for (const std::string& field :
       {fmt(r.lambda), fmt(r.loss_d), fmt(r.loss_g), fmt(r.loss_lens_adv), fmt(r.loss_lens_rec),
        fmt(r.gradient_penalty), fmt(r.frechet), std::to_string(r.modes_covered), fmt(r.hq_fraction),
        fmt(r.lens_identity_mse)}) {
    row += ',';
    row += field;
  }
  return row;
}

MetricsRecord evaluate(const TrainState& state, const ExperimentConfig& config, std::size_t sample_size) {
  return evaluate_impl(state, config, sample_size, nullptr);
}

MetricsRecord evaluate(const TrainState& state, const ExperimentConfig& config) {
  return evaluate_impl(state, config, config.eval_sample_size, nullptr);
}

RunResult run_experiment(const ExperimentConfig& config, std::optional<TrainState> start) {
  validate(config);
  RunResult result;
  result.output_dir = config.output_dir;
  std::error_code ec;
  fs::create_directories(result.output_dir, ec);
  if (ec) throw Error("cannot create output directory " + result.output_dir.string() + ": " + ec.message());

  {
    std::ofstream resolved(result.output_dir / "resolved_config.txt");
    if (!resolved) throw Error("cannot write " + (result.output_dir / "resolved_config.txt").string());
    resolved << resolved_config_text(config);
  }
  result.metrics_csv = result.output_dir / "metrics.csv";
  std::ofstream csv(result.metrics_csv);
  if (!csv) throw Error("cannot write " + result.metrics_csv.string());
  csv << kMetricsHeader << '\n' << std::flush;

  TrainState state = start ? std::move(*start) : init_state(config);

  const auto abort_run = [&](const std::string& reason) {
    result.aborted = true;
    result.abort_reason = reason;
    std::ofstream diag(result.output_dir / "abort.txt");
    diag << "step=" << state.step() << "\nreason=" << reason << '\n';
  };

  const auto emit = [&]() -> bool {
    Tensor generated;
    MetricsRecord r;
    try {
      r = evaluate_impl(state, config, config.eval_sample_size, &generated);
    } catch (const Error& e) {
      abort_run(std::string("evaluation failed: ") + e.what());
      return false;
    }
    if (!record_finite(r)) {
      abort_run("non-finite metrics at step " + std::to_string(r.step));
      return false;
    }
    csv << to_csv_row(r) << '\n' << std::flush;
    if (!csv) throw Error("write failed for " + result.metrics_csv.string());
    if (config.write_samples) {
      data::write_points_csv(result.output_dir / ("samples_" + std::to_string(r.step) + ".csv"), generated);
    }
    result.records.push_back(std::move(r));
    return true;
  };

  if (!emit()) return result;
  while (state.step() < config.total_steps) {
    try {
      train_step(state, config);
    } catch (const TrainingAborted& e) {
      abort_run(e.what());
      return result;
    } catch (const Error& e) {
      abort_run(std::string(e.what()) + " (during step " + std::to_string(state.step()) + ")");
      return result;
    }
    if (state.step() % config.eval_every == 0 || state.step() == config.total_steps) {
      if (!emit()) return result;
    }
  }
  result.checkpoint = result.output_dir / "checkpoint.bin";
  save_checkpoint(result.checkpoint, config, state);
  return result;
}

}  // namespace tgan
