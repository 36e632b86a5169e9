#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "tgan/config.hpp"
#include "tgan/harness.hpp"

// Operations behind the command-line subcommands.
namespace tgan::commands {

// "t,lambda" CSV with one row per t in [0, steps].
std::string cmd_schedule(std::int64_t K, std::int64_t steps);

struct ArmOutcome {
  std::string label;  // e.g. "seed=3" or "K=5000"
  std::string arm;    // "lens" / "baseline" / "run"
  bool ok = false;
  std::string error;
  std::optional<MetricsRecord> final_record;
  std::filesystem::path output_dir;
};

struct ArmMedians {
  double frechet = 0.0;
  double modes_covered = 0.0;
  double hq_fraction = 0.0;
};

struct CompareSummary {
  std::vector<ArmOutcome> arms;
  std::optional<ArmMedians> lens_median;      // over successful lens arms
  std::optional<ArmMedians> baseline_median;  // over successful baseline arms

  bool all_ok() const;
};

double median(std::vector<double> values);

// For each seed: weight_init_seed <- seed, then a lensed and a baseline run into
// out/seed_<seed>/{lens,baseline}. Asserts identical initial G and D across the
// two arms (throws Error otherwise). Writes out/summary.csv. A failing arm is
// recorded and the remaining arms still run.
CompareSummary cmd_compare(const ExperimentConfig& base, const std::vector<std::uint64_t>& seeds,
                           const std::filesystem::path& out, bool parallel = false);

// One run per value of `key`, into out/<key>=<value>. Writes out/summary.csv.
CompareSummary cmd_sweep(const std::string& config_text, const std::string& key,
                         const std::vector<std::string>& values, const std::filesystem::path& out,
                         bool parallel = false);

// Evaluates a checkpoint's generator on `samples` fresh samples.
MetricsRecord cmd_eval(const std::filesystem::path& checkpoint, std::size_t samples);

// Human- and machine-readable table (CSV) of a summary.
std::string summary_csv(const CompareSummary& summary);

// {"status":"failed","failures":[{"run":..., "arm":..., "reason":...}]}
std::string failure_json(const CompareSummary& summary);

}  // namespace tgan::commands
