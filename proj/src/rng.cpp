#include "tgan/rng.hpp"

#include <cmath>
#include <numbers>
#include <sstream>

#include "tgan/error.hpp"

namespace tgan {

namespace {
// mt19937_64 text state: 312 words followed by the position index.
constexpr std::size_t kStateWords = std::mt19937_64::state_size + 1;
}  // namespace

Rng::Rng(std::uint64_t seed) : engine_(seed) {}

Rng::Rng(std::initializer_list<std::uint64_t> seed_words) {
  std::vector<std::uint32_t> halves;
  for (std::uint64_t w : seed_words) {
    halves.push_back(static_cast<std::uint32_t>(w));
    halves.push_back(static_cast<std::uint32_t>(w >> 32));
  }
  std::seed_seq seq(halves.begin(), halves.end());
  engine_.seed(seq);
}

double Rng::uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

double Rng::normal() {
  const double u1 = 1.0 - uniform();  // (0, 1]
  const double u2 = uniform();
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

std::size_t Rng::index(std::size_t n) {
  // Rejection sampling keeps the draw exactly uniform.
  const std::uint64_t bound = static_cast<std::uint64_t>(n);
  const std::uint64_t limit = UINT64_MAX - UINT64_MAX % bound;
  std::uint64_t x;
  do {
    x = engine_();
  } while (x >= limit);
  return static_cast<std::size_t>(x % bound);
}

std::vector<std::uint64_t> Rng::state_words() const {
  std::ostringstream os;
  os << engine_;
  std::istringstream is(os.str());
  std::vector<std::uint64_t> words;
  std::uint64_t w;
  while (is >> w) words.push_back(w);
  return words;
}

Rng Rng::from_state_words(const std::vector<std::uint64_t>& words) {
  if (words.size() != kStateWords) {
    throw FormatError("rng state needs " + std::to_string(kStateWords) + " words, got " +
                      std::to_string(words.size()));
  }
  std::ostringstream os;
  for (std::size_t i = 0; i < words.size(); ++i) {
    if (i) os << ' ';
    os << words[i];
  }
  Rng rng;
  std::istringstream is(os.str());
  is >> rng.engine_;
  if (is.fail()) throw FormatError("rng state words rejected by engine");
  return rng;
}

}  // namespace tgan
