#include "tgan/commands.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <functional>
#include <future>
#include <sstream>

#include "json.hpp"

namespace tgan::commands {

namespace fs = std::filesystem;

namespace {

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

ArmOutcome run_arm(const ExperimentConfig& config, std::string label, std::string arm) {
  ArmOutcome outcome{std::move(label), std::move(arm), false, {}, std::nullopt, config.output_dir};
  try {
    const RunResult result = run_experiment(config);
    if (!result.records.empty()) outcome.final_record = result.final_record();
    outcome.ok = !result.aborted;
    outcome.error = result.abort_reason;
  } catch (const std::exception& e) {
    outcome.error = e.what();
  }
  return outcome;
}

std::vector<ArmOutcome> run_all(const std::vector<std::function<ArmOutcome()>>& jobs, bool parallel) {
  std::vector<ArmOutcome> out;
  if (!parallel) {
    for (const auto& job : jobs) out.push_back(job());
    return out;
  }
  std::vector<std::future<ArmOutcome>> pending;
  for (const auto& job : jobs) pending.push_back(std::async(std::launch::async, job));
  for (auto& f : pending) out.push_back(f.get());
  return out;
}

std::optional<ArmMedians> medians_for(const std::vector<ArmOutcome>& arms, const std::string& arm) {
  std::vector<double> frechet, modes, hq;
  for (const ArmOutcome& a : arms) {
    if (a.arm != arm || !a.ok || !a.final_record) continue;
    frechet.push_back(a.final_record->frechet);
    modes.push_back(static_cast<double>(a.final_record->modes_covered));
    hq.push_back(a.final_record->hq_fraction);
  }
  if (frechet.empty()) return std::nullopt;
  return ArmMedians{median(frechet), median(modes), median(hq)};
}

void write_summary(const CompareSummary& summary, const fs::path& out) {
  fs::create_directories(out);
  std::ofstream f(out / "summary.csv");
  if (!f) throw Error("cannot write " + (out / "summary.csv").string());
  f << summary_csv(summary);
}

}  // namespace

bool CompareSummary::all_ok() const {
  return std::all_of(arms.begin(), arms.end(), [](const ArmOutcome& a) { return a.ok; });
}

double median(std::vector<double> values) {
  if (values.empty()) throw Error("median of an empty set");
  std::sort(values.begin(), values.end());
  const std::size_t n = values.size();
  return n % 2 == 1 ? values[n / 2] : 0.5 * (values[n / 2 - 1] + values[n / 2]);
}

std::string cmd_schedule(std::int64_t K, std::int64_t steps) {
  if (K < 1) throw ConfigError("schedule: K must satisfy K >= 1, got " + std::to_string(K));
  if (steps < 0) throw ConfigError("schedule: steps must be >= 0");
  std::string out = "t,lambda\n";
  for (std::int64_t t = 0; t <= steps; ++t) {
    out += std::to_string(t) + "," + fmt(objectives::lambda_schedule(t, K)) + "\n";
  }
  return out;
}

CompareSummary cmd_compare(const ExperimentConfig& base, const std::vector<std::uint64_t>& seeds,
                           const fs::path& out, bool parallel) {
  if (seeds.empty()) throw ConfigError("compare needs at least one seed");
  std::vector<std::function<ArmOutcome()>> jobs;
  for (std::uint64_t seed : seeds) {
    ExperimentConfig lens = base;
    lens.weight_init_seed = seed;
    lens.lens_enabled = true;
    ExperimentConfig baseline = lens;
    baseline.lens_enabled = false;
    const fs::path seed_dir = out / ("seed_" + std::to_string(seed));
    lens.output_dir = (seed_dir / "lens").string();
    baseline.output_dir = (seed_dir / "baseline").string();

    const TrainState a = init_state(lens);
    const TrainState b = init_state(baseline);
    if (!(a.generator == b.generator) || !(a.discriminator == b.discriminator)) {
      throw Error("seed " + std::to_string(seed) + ": lensed and baseline arms do not share initial G/D parameters");
    }
    const std::string label = "seed=" + std::to_string(seed);
    jobs.emplace_back([lens, label] { return run_arm(lens, label, "lens"); });
    jobs.emplace_back([baseline, label] { return run_arm(baseline, label, "baseline"); });
  }
  CompareSummary summary;
  summary.arms = run_all(jobs, parallel);
  summary.lens_median = medians_for(summary.arms, "lens");
  summary.baseline_median = medians_for(summary.arms, "baseline");
  write_summary(summary, out);
  return summary;
}

CompareSummary cmd_sweep(const std::string& config_text, const std::string& key,
                         const std::vector<std::string>& values, const fs::path& out, bool parallel) {
  if (values.empty()) throw ConfigError("sweep needs at least one value for " + key);
  std::vector<std::function<ArmOutcome()>> jobs;
  for (const std::string& value : values) {
    ExperimentConfig config = parse_config(config_text, {{key, value}});
    const std::string label = key + "=" + value;
    config.output_dir = (out / label).string();
    jobs.emplace_back([config, label] { return run_arm(config, label, "run"); });
  }
  CompareSummary summary;
  summary.arms = run_all(jobs, parallel);
  write_summary(summary, out);
  return summary;
}

MetricsRecord cmd_eval(const fs::path& checkpoint, std::size_t samples) {
  if (samples < 2) throw ConfigError("eval needs at least 2 samples");
  const Checkpoint cp = load_checkpoint(checkpoint);
  return evaluate(cp.state, cp.config, samples);
}

std::string summary_csv(const CompareSummary& summary) {
  std::ostringstream os;
  os << "run,arm,status,final_step,final_frechet,modes_covered,hq_fraction\n";
  for (const ArmOutcome& a : summary.arms) {
    os << a.label << ',' << a.arm << ',' << (a.ok ? "ok" : "failed") << ',';
    if (a.final_record) {
      os << a.final_record->step << ',' << fmt(a.final_record->frechet) << ',' << a.final_record->modes_covered << ','
         << fmt(a.final_record->hq_fraction);
    } else {
      os << ",,,";
    }
    os << '\n';
  }
  const auto median_row = [&os](const char* arm, const std::optional<ArmMedians>& m) {
    if (!m) return;
    os << "median," << arm << ",ok,," << fmt(m->frechet) << ',' << fmt(m->modes_covered) << ','
       << fmt(m->hq_fraction) << '\n';
  };
  median_row("lens", summary.lens_median);
  median_row("baseline", summary.baseline_median);
  return os.str();
}

std::string failure_json(const CompareSummary& summary) {
  nlohmann::json failures = nlohmann::json::array();
  for (const ArmOutcome& a : summary.arms) {
    if (a.ok) continue;
    failures.push_back({{"run", a.label}, {"arm", a.arm}, {"reason", a.error}, {"output_dir", a.output_dir.string()}});
  }
  return nlohmann::json{{"status", failures.empty() ? "ok" : "failed"}, {"failures", failures}}.dump();
}

}  // namespace tgan::commands
