// Command-line entry point: train, compare, sweep, eval, schedule, validate-config.

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "tgan/commands.hpp"
#include "tgan/config.hpp"
#include "tgan/harness.hpp"
#include "tgan/kernels.hpp"

namespace {

bool deterministic_mode() {
  const char* v = std::getenv("TGAN_DETERMINISTIC");
  return v != nullptr && std::string(v) == "1";
}

std::string read_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw tgan::ConfigError("cannot read config file " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::vector<std::uint64_t> parse_seeds(const std::string& list) {
  std::vector<std::uint64_t> seeds;
  std::stringstream ss(list);
  std::string item;
  while (std::getline(ss, item, ',')) {
    std::size_t used = 0;
    const unsigned long long v = std::stoull(item, &used);
    if (used != item.size()) throw tgan::ConfigError("bad seed '" + item + "'");
    seeds.push_back(v);
  }
  if (seeds.empty()) throw tgan::ConfigError("--seeds needs at least one seed");
  return seeds;
}

int report(const tgan::commands::CompareSummary& summary) {
  std::cout << tgan::commands::summary_csv(summary);
  if (summary.all_ok()) return 0;
  std::cerr << tgan::commands::failure_json(summary) << '\n';
  return 1;
}

void fail_json(const std::string& command, const std::string& reason) {
  std::cerr << nlohmann::json{{"status", "failed"}, {"command", command}, {"failures", {{{"reason", reason}}}}}.dump()
            << '\n';
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Lensed GAN training laboratory"};
  app.require_subcommand(1, 1);

  std::string config_path;
  std::string out_dir;
  std::uint64_t seed = 0;

  auto* train = app.add_subcommand("train", "Run one experiment");
  train->add_option("--config", config_path, "Config file")->required();
  auto* seed_opt = train->add_option("--seed", seed, "Override weight_init_seed");
  auto* train_out = train->add_option("--out", out_dir, "Override output_dir");

  std::string seeds_list;
  auto* compare = app.add_subcommand("compare", "Paired lensed-vs-baseline runs over seeds");
  compare->add_option("--config", config_path, "Config file")->required();
  compare->add_option("--seeds", seeds_list, "Comma-separated seeds")->required();
  compare->add_option("--out", out_dir, "Output directory")->required();

  std::string vary;
  auto* sweep = app.add_subcommand("sweep", "One run per value of a config key");
  sweep->add_option("--config", config_path, "Config file")->required();
  sweep->add_option("--vary", vary, "key=v1,v2,...")->required();
  sweep->add_option("--out", out_dir, "Output directory")->required();

  std::string checkpoint;
  std::size_t samples = 4096;
  auto* eval = app.add_subcommand("eval", "Evaluate a checkpoint");
  eval->add_option("--checkpoint", checkpoint, "Checkpoint file")->required();
  eval->add_option("--samples", samples, "Evaluation sample size")->required();

  std::int64_t k = 0;
  std::int64_t steps = 0;
  auto* schedule = app.add_subcommand("schedule", "Print the adversarial-weight schedule as CSV");
  schedule->add_option("--k", k, "Ramp length K")->required();
  schedule->add_option("--steps", steps, "Last step to print")->required();

  auto* validate = app.add_subcommand("validate-config", "Parse, validate and print the resolved config");
  validate->add_option("--config", config_path, "Config file")->required();

  CLI11_PARSE(app, argc, argv);

  const bool deterministic = deterministic_mode();
  if (deterministic) tgan::kernels::set_parallel(false);
  const std::string command = app.get_subcommands().front()->get_name();

  try {
    if (train->parsed()) {
      tgan::ExperimentConfig config = tgan::load_config(config_path);
      if (*seed_opt) config.weight_init_seed = seed;
      if (*train_out) config.output_dir = out_dir;
      const tgan::RunResult result = tgan::run_experiment(config);
      std::cout << tgan::kMetricsHeader << '\n' << tgan::to_csv_row(result.final_record()) << '\n';
      if (result.aborted) {
        std::cerr << nlohmann::json{{"status", "failed"},
                                    {"command", command},
                                    {"failures", {{{"run", config.output_dir}, {"reason", result.abort_reason}}}}}
                         .dump()
                  << '\n';
        return 1;
      }
      return 0;
    }
    if (compare->parsed()) {
      const tgan::ExperimentConfig config = tgan::load_config(config_path);
      return report(tgan::commands::cmd_compare(config, parse_seeds(seeds_list), out_dir, !deterministic));
    }
    if (sweep->parsed()) {
      const auto eq = vary.find('=');
      if (eq == std::string::npos) throw tgan::ConfigError("--vary expects key=v1,v2,...");
      std::vector<std::string> values;
      std::stringstream ss(vary.substr(eq + 1));
      std::string item;
      while (std::getline(ss, item, ',')) values.push_back(item);
      return report(
          tgan::commands::cmd_sweep(read_file(config_path), vary.substr(0, eq), values, out_dir, !deterministic));
    }
    if (eval->parsed()) {
      const tgan::MetricsRecord r = tgan::commands::cmd_eval(checkpoint, samples);
      std::cout << tgan::kMetricsHeader << '\n' << tgan::to_csv_row(r) << '\n';
      return 0;
    }
    if (schedule->parsed()) {
      std::cout << tgan::commands::cmd_schedule(k, steps);
      return 0;
    }
    if (validate->parsed()) {
      std::cout << tgan::resolved_config_text(tgan::load_config(config_path));
      return 0;
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    fail_json(command, e.what());
    return 1;
  }
  return 1;
}
