#include "tgan/config.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <set>
#include <sstream>

#include "tgan/error.hpp"

namespace tgan {

namespace {

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

// Raised by value parsers; the caller adds line/key context.
struct BadValue {
  std::string expected;
};

std::uint64_t parse_u64(const std::string& v) {
  std::uint64_t out = 0;
  auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc() || p != v.data() + v.size()) throw BadValue{"a nonnegative integer"};
  return out;
}

std::int64_t parse_i64(const std::string& v) {
  std::int64_t out = 0;
  auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc() || p != v.data() + v.size()) throw BadValue{"an integer"};
  return out;
}

double parse_f64(const std::string& v) {
  double out = 0.0;
  auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc() || p != v.data() + v.size() || !std::isfinite(out)) throw BadValue{"a finite real number"};
  return out;
}

bool parse_bool(const std::string& v) {
  if (v == "true" || v == "1" || v == "yes") return true;
  if (v == "false" || v == "0" || v == "no") return false;
  throw BadValue{"a boolean (true/false)"};
}

std::vector<std::size_t> parse_dims(const std::string& v) {
  std::vector<std::size_t> out;
  if (v.empty()) return out;
  std::stringstream ss(v);
  std::string item;
  while (std::getline(ss, item, ',')) {
    const std::string t = trim(item);
    try {
      out.push_back(parse_u64(t));
    } catch (const BadValue&) {
      throw BadValue{"a comma-separated list of positive integers"};
    }
  }
  return out;
}

std::string fmt_f64(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string fmt_dims(const std::vector<std::size_t>& dims) {
  std::string out;
  for (std::size_t i = 0; i < dims.size(); ++i) {
    if (i) out += ",";
    out += std::to_string(dims[i]);
  }
  return out;
}

std::string fmt_bool(bool b) { return b ? "true" : "false"; }

template <typename E>
E parse_enum(const std::string& v, const std::function<E(std::string_view)>& parser) {
  try {
    return parser(v);
  } catch (const ConfigError& e) {
    throw BadValue{e.what()};
  }
}

struct Entry {
  std::string section;  // "" for top level
  std::string key;
  std::function<void(ExperimentConfig&, const std::string&)> set;
  std::function<std::string(const ExperimentConfig&)> get;

  std::string full() const { return section.empty() ? key : section + "." + key; }
};

const std::vector<Entry>& entries() {
  using C = ExperimentConfig;
  static const std::vector<Entry> table = {
      {"", "variant",
       [](C& c, const std::string& v) {
         c.variant = parse_enum<objectives::GanVariant>(v, objectives::parse_variant);
       },
       [](const C& c) { return std::string(objectives::to_string(c.variant)); }},
      {"", "lens_enabled", [](C& c, const std::string& v) { c.lens_enabled = parse_bool(v); },
       [](const C& c) { return fmt_bool(c.lens_enabled); }},
      {"", "K", [](C& c, const std::string& v) { c.K = parse_i64(v); },
       [](const C& c) { return std::to_string(c.K); }},
      {"", "total_steps", [](C& c, const std::string& v) { c.total_steps = parse_i64(v); },
       [](const C& c) { return std::to_string(c.total_steps); }},
      {"", "batch_size", [](C& c, const std::string& v) { c.batch_size = parse_u64(v); },
       [](const C& c) { return std::to_string(c.batch_size); }},
      {"", "critic_steps_per_iter", [](C& c, const std::string& v) { c.critic_steps_per_iter = parse_u64(v); },
       [](const C& c) { return std::to_string(c.critic_steps_per_iter); }},
      {"", "gp_coeff", [](C& c, const std::string& v) { c.gp_coeff = parse_f64(v); },
       [](const C& c) { return fmt_f64(c.gp_coeff); }},
      {"", "eval_every", [](C& c, const std::string& v) { c.eval_every = parse_i64(v); },
       [](const C& c) { return std::to_string(c.eval_every); }},
      {"", "eval_sample_size", [](C& c, const std::string& v) { c.eval_sample_size = parse_u64(v); },
       [](const C& c) { return std::to_string(c.eval_sample_size); }},
      {"", "threshold_sigmas", [](C& c, const std::string& v) { c.threshold_sigmas = parse_f64(v); },
       [](const C& c) { return fmt_f64(c.threshold_sigmas); }},
      {"", "write_samples", [](C& c, const std::string& v) { c.write_samples = parse_bool(v); },
       [](const C& c) { return fmt_bool(c.write_samples); }},
      {"", "weight_init_seed", [](C& c, const std::string& v) { c.weight_init_seed = parse_u64(v); },
       [](const C& c) { return std::to_string(c.weight_init_seed); }},
      {"", "data_seed", [](C& c, const std::string& v) { c.data_seed = parse_u64(v); },
       [](const C& c) { return std::to_string(c.data_seed); }},
      {"", "output_dir", [](C& c, const std::string& v) { c.output_dir = v; },
       [](const C& c) { return c.output_dir; }},

      {"optimizer", "kind",
       [](C& c, const std::string& v) {
         if (v == "adam") {
           c.optimizer = nn::OptimizerKind::adam;
         } else if (v == "rmsprop") {
           c.optimizer = nn::OptimizerKind::rmsprop;
         } else {
           throw BadValue{"adam or rmsprop"};
         }
       },
       [](const C& c) { return std::string(nn::to_string(c.optimizer)); }},
      {"optimizer", "learning_rate", [](C& c, const std::string& v) { c.learning_rate = parse_f64(v); },
       [](const C& c) { return fmt_f64(c.learning_rate); }},
      {"optimizer", "lens_learning_rate", [](C& c, const std::string& v) { c.lens_learning_rate = parse_f64(v); },
       [](const C& c) { return fmt_f64(c.lens_learning_rate); }},
      {"optimizer", "beta1", [](C& c, const std::string& v) { c.beta1 = parse_f64(v); },
       [](const C& c) { return fmt_f64(c.beta1); }},
      {"optimizer", "beta2", [](C& c, const std::string& v) { c.beta2 = parse_f64(v); },
       [](const C& c) { return fmt_f64(c.beta2); }},
      {"optimizer", "decay", [](C& c, const std::string& v) { c.rms_decay = parse_f64(v); },
       [](const C& c) { return fmt_f64(c.rms_decay); }},
      {"optimizer", "epsilon", [](C& c, const std::string& v) { c.epsilon = parse_f64(v); },
       [](const C& c) { return fmt_f64(c.epsilon); }},

      {"data", "kind",
       [](C& c, const std::string& v) {
         c.data.kind = parse_enum<data::DistributionKind>(v, data::parse_distribution);
       },
       [](const C& c) { return std::string(data::to_string(c.data.kind)); }},
      {"data", "mode_count", [](C& c, const std::string& v) { c.data.mode_count = parse_u64(v); },
       [](const C& c) { return std::to_string(c.data.mode_count); }},
      {"data", "grid_side", [](C& c, const std::string& v) { c.data.grid_side = parse_u64(v); },
       [](const C& c) { return std::to_string(c.data.grid_side); }},
      {"data", "radius", [](C& c, const std::string& v) { c.data.radius = parse_f64(v); },
       [](const C& c) { return fmt_f64(c.data.radius); }},
      {"data", "spacing", [](C& c, const std::string& v) { c.data.spacing = parse_f64(v); },
       [](const C& c) { return fmt_f64(c.data.spacing); }},
      {"data", "sigma", [](C& c, const std::string& v) { c.data.sigma = parse_f64(v); },
       [](const C& c) { return fmt_f64(c.data.sigma); }},

      {"noise", "dim", [](C& c, const std::string& v) { c.noise.dim = parse_u64(v); },
       [](const C& c) { return std::to_string(c.noise.dim); }},

      {"generator", "hidden_dims", [](C& c, const std::string& v) { c.generator.hidden_dims = parse_dims(v); },
       [](const C& c) { return fmt_dims(c.generator.hidden_dims); }},

      {"discriminator", "hidden_dims",
       [](C& c, const std::string& v) { c.discriminator.hidden_dims = parse_dims(v); },
       [](const C& c) { return fmt_dims(c.discriminator.hidden_dims); }},
      {"discriminator", "bounded_output",
       [](C& c, const std::string& v) { c.discriminator.bounded_output = parse_bool(v); },
       [](const C& c) { return fmt_bool(c.discriminator.bounded_output); }},

      {"lens", "block_count", [](C& c, const std::string& v) { c.lens.block_count = parse_u64(v); },
       [](const C& c) { return std::to_string(c.lens.block_count); }},
      {"lens", "block_hidden_dim", [](C& c, const std::string& v) { c.lens.block_hidden_dim = parse_u64(v); },
       [](const C& c) { return std::to_string(c.lens.block_hidden_dim); }},
      {"lens", "zero_init_last", [](C& c, const std::string& v) { c.lens.zero_init_last = parse_bool(v); },
       [](const C& c) { return fmt_bool(c.lens.zero_init_last); }},
  };
  return table;
}

const Entry* find_entry(const std::string& section, const std::string& key) {
  const std::string s = section == "run" ? "" : section;
  for (const Entry& e : entries()) {
    if (e.section == s && e.key == key) return &e;
  }
  return nullptr;
}

bool known_section(const std::string& s) {
  if (s == "run") return true;
  for (const Entry& e : entries()) {
    if (e.section == s) return true;
  }
  return false;
}

void assign(ExperimentConfig& config, const Entry& entry, const std::string& value, const std::string& where) {
  try {
    entry.set(config, value);
  } catch (const BadValue& bad) {
    throw ConfigError(where + "key '" + entry.full() + "' expects " + bad.expected + ", got '" + value + "'");
  }
}

// Fills variant-dependent and derived values the user did not set.
void resolve_defaults(ExperimentConfig& c, const std::set<std::string>& explicit_keys) {
  using objectives::GanVariant;
  const bool wgan = c.variant == GanVariant::wgan_gp;
  if (!explicit_keys.contains("critic_steps_per_iter")) c.critic_steps_per_iter = wgan ? 5 : 1;
  if (!explicit_keys.contains("optimizer.kind")) {
    c.optimizer = wgan ? nn::OptimizerKind::rmsprop : nn::OptimizerKind::adam;
  }
  if (!explicit_keys.contains("discriminator.bounded_output")) {
    c.discriminator.bounded_output = objectives::requires_bounded_output(c.variant);
  }
  if (!explicit_keys.contains("optimizer.lens_learning_rate")) c.lens_learning_rate = c.learning_rate;
  c.generator.noise_dim = c.noise.dim;
  c.generator.data_dim = data::DataDistributionSpec::data_dim;
  c.discriminator.data_dim = data::DataDistributionSpec::data_dim;
  c.lens.data_dim = data::DataDistributionSpec::data_dim;
}

void require(bool ok, const std::string& message) {
  if (!ok) throw ConfigError(message);
}

}  // namespace

void validate(const ExperimentConfig& c) {
  require(c.K >= 1, "K must satisfy K >= 1, got " + std::to_string(c.K));
  require(c.total_steps >= 0, "total_steps must be >= 0");
  require(c.batch_size >= 1, "batch_size must be >= 1");
  require(c.critic_steps_per_iter >= 1, "critic_steps_per_iter must be >= 1");
  require(c.gp_coeff >= 0.0, "gp_coeff must be >= 0");
  require(c.learning_rate > 0.0, "optimizer.learning_rate must be > 0");
  require(c.lens_learning_rate >= 0.0, "optimizer.lens_learning_rate must be >= 0");
  require(c.beta1 >= 0.0 && c.beta1 < 1.0, "optimizer.beta1 must lie in [0, 1)");
  require(c.beta2 >= 0.0 && c.beta2 < 1.0, "optimizer.beta2 must lie in [0, 1)");
  require(c.rms_decay >= 0.0 && c.rms_decay < 1.0, "optimizer.decay must lie in [0, 1)");
  require(c.epsilon > 0.0, "optimizer.epsilon must be > 0");
  require(c.eval_every >= 1, "eval_every must be >= 1");
  require(c.eval_sample_size >= 2, "eval_sample_size must be >= 2");
  require(c.threshold_sigmas > 0.0, "threshold_sigmas must be > 0");
  require(c.data.sigma > 0.0, "data.sigma must be > 0");
  data::validate(c.data);
  require(c.noise.dim >= 1, "noise.dim must be >= 1");
  for (std::size_t h : c.generator.hidden_dims) require(h >= 1, "generator.hidden_dims entries must be >= 1");
  for (std::size_t h : c.discriminator.hidden_dims) require(h >= 1, "discriminator.hidden_dims entries must be >= 1");
  require(c.lens.block_count >= 1, "lens.block_count must be >= 1");
  require(c.lens.block_hidden_dim >= 1, "lens.block_hidden_dim must be >= 1");
  require(c.generator.noise_dim == c.noise.dim, "generator noise width must equal noise.dim");
  const bool needs_bounded = objectives::requires_bounded_output(c.variant);
  if (needs_bounded && !c.discriminator.bounded_output) {
    throw ConfigError("variant original requires discriminator.bounded_output = true (sigmoid scores)");
  }
  if (!needs_bounded && c.discriminator.bounded_output) {
    throw ConfigError("variant " + std::string(objectives::to_string(c.variant)) +
                      " requires discriminator.bounded_output = false (raw scores)");
  }
  require(!c.output_dir.empty(), "output_dir must not be empty");
}

ExperimentConfig parse_config(std::string_view text) { return parse_config(text, {}); }

ExperimentConfig parse_config(std::string_view text, const std::vector<ConfigOverride>& overrides) {
  ExperimentConfig config;
  std::set<std::string> explicit_keys;
  std::string section;
  std::istringstream in{std::string(text)};
  std::string raw;
  std::size_t line_no = 0;
  while (std::getline(in, raw)) {
    ++line_no;
    const std::string where = "line " + std::to_string(line_no) + ": ";
    std::string line = raw;
    if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']') throw ConfigError(where + "malformed section header '" + line + "'");
      section = trim(std::string_view(line).substr(1, line.size() - 2));
      if (!known_section(section)) throw ConfigError(where + "unknown section [" + section + "]");
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw ConfigError(where + "expected 'key = value', got '" + line + "'");
    const std::string key = trim(std::string_view(line).substr(0, eq));
    const std::string value = trim(std::string_view(line).substr(eq + 1));
    const Entry* entry = find_entry(section, key);
    if (entry == nullptr) {
      throw ConfigError(where + "unknown key '" + (section.empty() ? key : section + "." + key) + "'");
    }
    if (!explicit_keys.insert(entry->full()).second) {
      throw ConfigError(where + "duplicate key '" + entry->full() + "'");
    }
    assign(config, *entry, value, where);
  }
  for (const ConfigOverride& o : overrides) {
    const auto dot = o.key.find('.');
    const std::string sec = dot == std::string::npos ? "" : o.key.substr(0, dot);
    const std::string key = dot == std::string::npos ? o.key : o.key.substr(dot + 1);
    const Entry* entry = find_entry(sec, key);
    if (entry == nullptr) throw ConfigError("override: unknown key '" + o.key + "'");
    explicit_keys.insert(entry->full());
    assign(config, *entry, trim(o.value), "override: ");
  }
  resolve_defaults(config, explicit_keys);
  validate(config);
  return config;
}

ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read config file " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  try {
    return parse_config(ss.str());
  } catch (const ConfigError& e) {
    throw ConfigError(path + ": " + e.what());
  }
}

std::string resolved_config_text(const ExperimentConfig& config) {
  std::string out;
  std::string section = "<none>";
  for (const Entry& e : entries()) {
    if (e.section != section) {
      section = e.section;
      if (!section.empty()) out += "\n[" + section + "]\n";
    }
    out += e.key + " = " + e.get(config) + "\n";
  }
  return out;
}

std::vector<std::string> config_keys() {
  std::vector<std::string> keys;
  for (const Entry& e : entries()) keys.push_back(e.full());
  return keys;
}

}  // namespace tgan
