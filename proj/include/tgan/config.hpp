#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "tgan/data.hpp"
#include "tgan/models.hpp"
#include "tgan/nn.hpp"
#include "tgan/objectives.hpp"

namespace tgan {

// Full declarative description of one run.
struct ExperimentConfig {
  objectives::GanVariant variant = objectives::GanVariant::original;
  bool lens_enabled = true;
  std::int64_t K = 10000;
  std::int64_t total_steps = 20000;
  std::size_t batch_size = 64;
  std::size_t critic_steps_per_iter = 1;
  double gp_coeff = 10.0;

  nn::OptimizerKind optimizer = nn::OptimizerKind::adam;
  double learning_rate = 1e-4;
  double lens_learning_rate = 1e-4;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double rms_decay = 0.9;
  double epsilon = 1e-8;

  data::DataDistributionSpec data;
  data::NoiseSpec noise;
  models::GeneratorSpec generator;
  models::DiscriminatorSpec discriminator;
  models::LensSpec lens;

  std::int64_t eval_every = 1000;
  std::size_t eval_sample_size = 4096;
  double threshold_sigmas = 3.0;
  bool write_samples = true;

  std::uint64_t weight_init_seed = 1;
  std::uint64_t data_seed = 1;
  std::string output_dir = "runs/default";
};

// Checks every invariant, including cross-field ones; throws ConfigError.
void validate(const ExperimentConfig& config);

// Parses the line-based format:
//
//   # comment
//   variant = wgan_gp
//   [optimizer]
//   learning_rate = 1e-4
//
// Omitted keys take defaults; variant-dependent keys (critic_steps_per_iter,
// optimizer.kind, discriminator.bounded_output) default from the variant.
// Errors carry the line number and key. The result is validated.
ExperimentConfig parse_config(std::string_view text);
ExperimentConfig load_config(const std::string& path);

// Applies one "section.key" (or top-level "key") assignment to a parsed config,
// re-resolving variant-dependent defaults that were not set explicitly.
// Used by the sweep runner.
struct ConfigOverride {
  std::string key;
  std::string value;
};
ExperimentConfig parse_config(std::string_view text, const std::vector<ConfigOverride>& overrides);

// Every resolved value in the parse_config format; parse_config(dump) reproduces the config.
std::string resolved_config_text(const ExperimentConfig& config);

// All recognized keys, "section.key" form.
std::vector<std::string> config_keys();

}  // namespace tgan
