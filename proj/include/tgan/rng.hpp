#pragma once

#include <cstdint>
#include <initializer_list>
#include <random>
#include <string>
#include <vector>

namespace tgan {

// Seeded random stream. All distributions are computed here from raw engine
// output so sequences are identical across standard-library implementations,
// and the complete state is the engine state (no cached normals).
class Rng {
 public:
  Rng() : Rng(std::uint64_t{0}) {}
  explicit Rng(std::uint64_t seed);
  // Independent stream derived from several seed words (e.g. {seed, stream_tag}).
  Rng(std::initializer_list<std::uint64_t> seed_words);

  std::uint64_t next_u64() { return engine_(); }
  // Uniform on [0, 1).
  double uniform();
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
  // Standard normal via Box-Muller (one value per call, two engine draws).
  double normal();
  // Uniform integer on [0, n).
  std::size_t index(std::size_t n);

  // Raw 64-bit words of the engine state, for checkpointing.
  std::vector<std::uint64_t> state_words() const;
  static Rng from_state_words(const std::vector<std::uint64_t>& words);

  friend bool operator==(const Rng& a, const Rng& b) { return a.engine_ == b.engine_; }

 private:
  std::mt19937_64 engine_;
};

}  // namespace tgan
