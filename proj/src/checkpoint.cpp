#include <zlib.h>

#include <algorithm>
#include <bit>
#include <cstring>
#include <fstream>
#include <iterator>
#include <map>

#include "tgan/harness.hpp"

namespace tgan {

namespace {

constexpr char kMagic[8] = {'T', 'G', 'A', 'N', 'L', 'A', 'B', '1'};

struct Record {
  std::vector<std::uint32_t> dims;
  std::vector<std::uint64_t> words;
};

class Writer {
 public:
  void u32(std::uint32_t v) {
    for (int i = 0; i < 4; ++i) buf_.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
  }
  void u64(std::uint64_t v) {
    for (int i = 0; i < 8; ++i) buf_.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
  }
  void bytes(const void* p, std::size_t n) {
    const auto* b = static_cast<const std::uint8_t*>(p);
    buf_.insert(buf_.end(), b, b + n);
  }

  void record(const std::string& name, const std::vector<std::uint32_t>& dims, const std::vector<std::uint64_t>& words) {
    u32(static_cast<std::uint32_t>(name.size()));
    bytes(name.data(), name.size());
    u32(static_cast<std::uint32_t>(dims.size()));
    for (std::uint32_t d : dims) u32(d);
    for (std::uint64_t w : words) u64(w);
  }

  void tensor(const std::string& name, const Tensor& t) {
    std::vector<std::uint32_t> dims(t.shape().begin(), t.shape().end());
    std::vector<std::uint64_t> words;
    words.reserve(t.size());
    for (double v : t.values()) words.push_back(std::bit_cast<std::uint64_t>(v));
    record(name, dims, words);
  }

  void reals(const std::string& name, const std::vector<double>& values) {
    tensor(name, Tensor({values.size()}, values));
  }

  std::vector<std::uint8_t>& buffer() { return buf_; }

 private:
  std::vector<std::uint8_t> buf_;
};

class Reader {
 public:
  Reader(const std::uint8_t* p, std::size_t n) : p_(p), n_(n) {}
  bool has(std::size_t k) const { return n_ - pos_ >= k; }
  std::size_t remaining() const { return n_ - pos_; }
  std::uint32_t u32() {
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(p_[pos_ + i]) << (8 * i);
    pos_ += 4;
    return v;
  }
  std::uint64_t u64() {
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(p_[pos_ + i]) << (8 * i);
    pos_ += 8;
    return v;
  }
  std::string str(std::size_t k) {
    std::string s(reinterpret_cast<const char*>(p_ + pos_), k);
    pos_ += k;
    return s;
  }

 private:
  const std::uint8_t* p_;
  std::size_t n_;
  std::size_t pos_ = 0;
};

void write_model(Writer& w, const std::string& prefix, const nn::ModelParams& params, const nn::OptimizerState& opt) {
  for (const auto& [name, t] : params.tensors) w.tensor(prefix + "/" + name, t);
  w.reals(prefix + "/opt",
          {opt.kind == nn::OptimizerKind::adam ? 0.0 : 1.0, opt.learning_rate, opt.beta1, opt.beta2, opt.decay,
           opt.epsilon, static_cast<double>(opt.step_count)});
  for (const auto& [name, t] : opt.first) w.tensor(prefix + "/opt.m/" + name, t);
  for (const auto& [name, t] : opt.second) w.tensor(prefix + "/opt.v/" + name, t);
}

void write_rng(Writer& w, const std::string& name, const Rng& rng) {
  const auto words = rng.state_words();
  w.record(name, {static_cast<std::uint32_t>(words.size())}, words);
}

std::vector<std::uint32_t> dims_of(const Tensor& t) { return {t.shape().begin(), t.shape().end()}; }

class RecordSet {
 public:
  explicit RecordSet(std::map<std::string, Record> records) : records_(std::move(records)) {}

  bool contains(const std::string& name) const { return records_.contains(name); }

  const Record& take(const std::string& name) {
    auto it = records_.find(name);
    if (it == records_.end()) throw FormatError("checkpoint is missing record '" + name + "'");
    used_.push_back(name);
    return it->second;
  }

  void fill(const std::string& name, Tensor& t) {
    const Record& r = take(name);
    if (r.dims != dims_of(t)) {
      throw FormatError("checkpoint record '" + name + "' has the wrong shape for the configured model");
    }
    for (std::size_t e = 0; e < t.size(); ++e) t[e] = std::bit_cast<double>(r.words[e]);
  }

  std::vector<double> reals(const std::string& name, std::size_t count) {
    const Record& r = take(name);
    if (r.dims.size() != 1 || r.dims[0] != count) {
      throw FormatError("checkpoint record '" + name + "' should hold " + std::to_string(count) + " values");
    }
    std::vector<double> out;
    for (std::uint64_t w : r.words) out.push_back(std::bit_cast<double>(w));
    return out;
  }

  void check_all_used() const {
    if (used_.size() != records_.size()) {
      for (const auto& [name, r] : records_) {
        if (std::find(used_.begin(), used_.end(), name) == used_.end()) {
          throw FormatError("checkpoint has unexpected record '" + name + "'");
        }
      }
    }
  }

 private:
  std::map<std::string, Record> records_;
  std::vector<std::string> used_;
};

void read_model(RecordSet& rs, const std::string& prefix, nn::ModelParams& params, nn::OptimizerState& opt) {
  for (auto& [name, t] : params.tensors) rs.fill(prefix + "/" + name, t);
  const auto o = rs.reals(prefix + "/opt", 7);
  if (o[0] != 0.0 && o[0] != 1.0) throw FormatError("checkpoint record '" + prefix + "/opt' has an unknown optimizer kind");
  const auto kind = o[0] == 0.0 ? nn::OptimizerKind::adam : nn::OptimizerKind::rmsprop;
  if (kind != opt.kind) throw FormatError("checkpoint record '" + prefix + "/opt' disagrees with the configured optimizer");
  opt.learning_rate = o[1];
  opt.beta1 = o[2];
  opt.beta2 = o[3];
  opt.decay = o[4];
  opt.epsilon = o[5];
  opt.step_count = static_cast<std::uint64_t>(o[6]);
  for (auto& [name, t] : opt.first) rs.fill(prefix + "/opt.m/" + name, t);
  for (auto& [name, t] : opt.second) rs.fill(prefix + "/opt.v/" + name, t);
}

Rng read_rng(RecordSet& rs, const std::string& name) {
  const Record& r = rs.take(name);
  if (r.dims.size() != 1) throw FormatError("checkpoint record '" + name + "' is not a word vector");
  try {
    return Rng::from_state_words(r.words);
  } catch (const FormatError& e) {
    throw FormatError("checkpoint record '" + name + "': " + e.what());
  }
}

}  // namespace

void save_checkpoint(const std::filesystem::path& path, const ExperimentConfig& config, const TrainState& state) {
  Writer w;
  w.bytes(kMagic, sizeof kMagic);
  const std::uint8_t version = kCheckpointVersion;
  w.bytes(&version, 1);

  const std::string text = resolved_config_text(config);
  std::vector<double> chars;
  chars.reserve(text.size());
  for (unsigned char ch : text) chars.push_back(static_cast<double>(ch));
  w.reals("meta.config", chars);
  w.reals("schedule", {static_cast<double>(state.schedule.t), static_cast<double>(state.schedule.K)});

  write_model(w, "G", state.generator, state.opt_generator);
  write_model(w, "D", state.discriminator, state.opt_discriminator);
  if (config.lens_enabled) write_model(w, "L", state.lens, state.opt_lens);

  write_rng(w, "rng.data", state.rng.data);
  write_rng(w, "rng.noise", state.rng.noise);
  write_rng(w, "rng.gp", state.rng.gp);
  write_rng(w, "rng.lens_data", state.rng.lens_data);

  if (state.last_losses) {
    const auto& l = *state.last_losses;
    w.reals("last_losses",
            {l.loss_d, l.loss_g, l.loss_lens_adv, l.loss_lens_rec, l.loss_lens_total, l.gradient_penalty});
  }

  auto& buf = w.buffer();
  const auto crc = static_cast<std::uint32_t>(crc32(0L, buf.data(), static_cast<uInt>(buf.size())));
  w.u32(crc);

  // Write to a sibling file then rename, so a crash never leaves a torn checkpoint.
  const std::filesystem::path tmp = path.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error("cannot open " + tmp.string() + " for writing");
    out.write(reinterpret_cast<const char*>(buf.data()), static_cast<std::streamsize>(buf.size()));
    if (!out) throw Error("write failed for " + tmp.string());
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) throw Error("cannot move checkpoint into place at " + path.string() + ": " + ec.message());
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FormatError("cannot open checkpoint " + path.string());
  const std::vector<std::uint8_t> buf((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  const std::string where = "checkpoint " + path.string() + ": ";

  constexpr std::size_t kHeader = sizeof kMagic + 1;
  if (buf.size() < kHeader + 4 || std::memcmp(buf.data(), kMagic, sizeof kMagic) != 0) {
    throw FormatError(where + "missing TGANLAB1 header");
  }
  if (buf[sizeof kMagic] != kCheckpointVersion) {
    throw FormatError(where + "unsupported format version " + std::to_string(buf[sizeof kMagic]));
  }

  const std::size_t body_end = buf.size() - 4;
  Reader r(buf.data() + kHeader, body_end - kHeader);
  std::map<std::string, Record> records;
  std::size_t index = 0;
  while (r.remaining() > 0) {
    const std::string label = "record #" + std::to_string(index);
    if (!r.has(4)) throw FormatError(where + label + " is truncated before its name length");
    const std::uint32_t name_len = r.u32();
    if (!r.has(name_len)) throw FormatError(where + label + " is truncated inside its name");
    const std::string name = r.str(name_len);
    const std::string named = label + " ('" + name + "')";
    if (!r.has(4)) throw FormatError(where + named + " is truncated before its rank");
    const std::uint32_t rank = r.u32();
    if (!r.has(4ull * rank)) throw FormatError(where + named + " is truncated inside its dims");
    Record rec;
    std::uint64_t count = 1;
    for (std::uint32_t i = 0; i < rank; ++i) {
      rec.dims.push_back(r.u32());
      count *= rec.dims.back();
    }
    if (count > r.remaining() / 8) throw FormatError(where + named + " is truncated inside its values");
    rec.words.reserve(count);
    for (std::uint64_t i = 0; i < count; ++i) rec.words.push_back(r.u64());
    if (!records.emplace(name, std::move(rec)).second) throw FormatError(where + named + " is duplicated");
    ++index;
  }

  const auto expected = static_cast<std::uint32_t>(crc32(0L, buf.data(), static_cast<uInt>(body_end)));
  Reader tail(buf.data() + body_end, 4);
  if (tail.u32() != expected) throw FormatError(where + "checksum mismatch");

  try {
    RecordSet rs(std::move(records));
    std::string text;
    {
      const Record& meta = rs.take("meta.config");
      for (std::uint64_t w : meta.words) text.push_back(static_cast<char>(std::bit_cast<double>(w)));
    }
    Checkpoint cp{parse_config(text), {}};
    cp.state = init_state(cp.config);
    const auto sched = rs.reals("schedule", 2);
    cp.state.schedule = objectives::ScheduleState::at(static_cast<std::int64_t>(sched[0]),
                                                      static_cast<std::int64_t>(sched[1]));
    read_model(rs, "G", cp.state.generator, cp.state.opt_generator);
    read_model(rs, "D", cp.state.discriminator, cp.state.opt_discriminator);
    if (cp.config.lens_enabled) read_model(rs, "L", cp.state.lens, cp.state.opt_lens);
    cp.state.rng.data = read_rng(rs, "rng.data");
    cp.state.rng.noise = read_rng(rs, "rng.noise");
    cp.state.rng.gp = read_rng(rs, "rng.gp");
    cp.state.rng.lens_data = read_rng(rs, "rng.lens_data");
    if (rs.contains("last_losses")) {  // absent before the first step
      const auto l = rs.reals("last_losses", 6);
      cp.state.last_losses = objectives::LossReport{l[0], l[1], l[2], l[3], l[4], l[5]};
    }
    rs.check_all_used();
    return cp;
  } catch (const FormatError& e) {
    throw FormatError(where + e.what());
  } catch (const ConfigError& e) {
    throw FormatError(where + "embedded config is invalid: " + e.what());
  }
}

}  // namespace tgan
