#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "tgan/config.hpp"
#include "tgan/error.hpp"
#include "tgan/nn.hpp"
#include "tgan/objectives.hpp"
#include "tgan/rng.hpp"

namespace tgan {

// Random streams, each seeded independently so that lensed and baseline runs
// consume identical discriminator/generator draws.
struct RngStreams {
  Rng data;        // real batches for discriminator updates
  Rng noise;       // noise batches for discriminator and generator updates
  Rng gp;          // gradient-penalty interpolation weights
  Rng lens_data;   // real batches for lens updates

  friend bool operator==(const RngStreams&, const RngStreams&) = default;
};

struct TrainState {
  objectives::ScheduleState schedule;
  nn::ModelParams generator;
  nn::ModelParams discriminator;
  nn::ModelParams lens;  // empty when the lens is disabled
  nn::OptimizerState opt_generator;
  nn::OptimizerState opt_discriminator;
  nn::OptimizerState opt_lens;
  RngStreams rng;
  std::optional<objectives::LossReport> last_losses;  // from the most recent step

  std::int64_t step() const { return schedule.t; }

  friend bool operator==(const TrainState&, const TrainState&) = default;
};

// Raised when a loss turns NaN/Inf; names the term and step.
class TrainingAborted : public Error {
 public:
  TrainingAborted(std::string term, std::int64_t step)
      : Error("non-finite " + term + " at step " + std::to_string(step)), term_(std::move(term)), step_(step) {}
  const std::string& term() const { return term_; }
  std::int64_t step() const { return step_; }

 private:
  std::string term_;
  std::int64_t step_;
};

// Builds initial parameters from weight_init_seed (G, D and L each on their
// own derived stream, so G and D do not depend on lens_enabled) and the rng
// streams from data_seed.
TrainState init_state(const ExperimentConfig& config);

// One iteration: discriminator update(s), one generator update, one lens
// update (when enabled), then t <- t + 1.
void train_step(TrainState& state, const ExperimentConfig& config);

// The phases of train_step, in order. Each draws fresh batches, records its
// losses into `report`, and updates only its own network.
void update_discriminator(TrainState& state, const ExperimentConfig& config, objectives::LossReport& report);
void update_generator(TrainState& state, const ExperimentConfig& config, objectives::LossReport& report);
// Uses lambda = state.schedule.lambda; gradients flow through D but only L changes.
void update_lens(TrainState& state, const ExperimentConfig& config, objectives::LossReport& report);

struct MetricsRecord {
  std::int64_t step = 0;
  std::optional<double> lambda;
  std::optional<double> loss_d;
  std::optional<double> loss_g;
  std::optional<double> loss_lens_adv;
  std::optional<double> loss_lens_rec;
  std::optional<double> gradient_penalty;
  double frechet = 0.0;
  std::size_t modes_covered = 0;
  double hq_fraction = 0.0;
  std::optional<double> lens_identity_mse;

  friend bool operator==(const MetricsRecord&, const MetricsRecord&) = default;
};

inline constexpr const char* kMetricsHeader =
    "step,lambda,loss_d,loss_g,loss_lens_adv,loss_lens_rec,gradient_penalty,frechet,modes_covered,hq_fraction,"
    "lens_identity_mse";

std::string to_csv_row(const MetricsRecord& r);

// Evaluates the current generator on `sample_size` samples against fresh real
// samples. The evaluation stream is derived from (data_seed, step), so it never
// disturbs training streams.
MetricsRecord evaluate(const TrainState& state, const ExperimentConfig& config, std::size_t sample_size);
MetricsRecord evaluate(const TrainState& state, const ExperimentConfig& config);

struct RunResult {
  std::vector<MetricsRecord> records;
  bool aborted = false;
  std::string abort_reason;
  std::filesystem::path output_dir;
  std::filesystem::path metrics_csv;
  std::filesystem::path checkpoint;

  const MetricsRecord& final_record() const { return records.back(); }
};

// Runs (or continues, from `start`) up to config.total_steps. Writes into
// config.output_dir: resolved_config.txt, metrics.csv, samples_<step>.csv per
// evaluation, checkpoint.bin at the end, and abort.txt on a non-finite loss.
RunResult run_experiment(const ExperimentConfig& config, std::optional<TrainState> start = std::nullopt);

// Binary checkpoint: magic "TGANLAB1", version byte, then framed records
//   u32 name length | name | u32 rank | u32 dims... | 8-byte LE words
// and a trailing CRC-32 of all preceding bytes. Parameter and accumulator
// records hold IEEE doubles; rng records hold raw engine words; the embedded
// resolved config is one double per character.
void save_checkpoint(const std::filesystem::path& path, const ExperimentConfig& config, const TrainState& state);

struct Checkpoint {
  ExperimentConfig config;
  TrainState state;
};

// Throws FormatError naming the first bad record; never returns partial state.
Checkpoint load_checkpoint(const std::filesystem::path& path);

inline constexpr std::uint8_t kCheckpointVersion = 1;

}  // namespace tgan
