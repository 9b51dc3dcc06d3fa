#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <span>
#include <string_view>

namespace rlcm::rng {

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

// FNV-1a, used to turn substream names into seed material.
inline std::uint64_t hash_name(std::string_view name) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : name) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

// All randomness in a run flows from one master seed through named
// substreams, so stages can be re-run independently without replaying
// each other's draws.
inline std::uint64_t derive_seed(std::uint64_t master, std::string_view stream,
                                 std::uint64_t index = 0) {
  std::uint64_t h = splitmix64(master ^ hash_name(stream));
  return splitmix64(h ^ splitmix64(index ^ 0xd1b54a32d192ed03ULL));
}

// mt19937_64 with hand-rolled draw helpers. The standard pins the engine's
// output sequence but not the distributions, so the helpers below keep
// streams identical across compilers.
class Stream {
 public:
  explicit Stream(std::uint64_t seed) : gen_(seed) {}

  std::uint64_t bits() { return gen_(); }

  // uniform on [0, 1) with 53-bit resolution
  double uniform() { return static_cast<double>(gen_() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  bool bernoulli(double p) { return uniform() < p; }

  // Box-Muller without spare caching; draw count stays predictable.
  double normal() {
    double u1 = uniform();
    double u2 = uniform();
    while (u1 <= 0.0) u1 = uniform();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586477 * u2);
  }

  // unbiased integer in [0, n)
  std::uint64_t uniform_int(std::uint64_t n) {
    std::uint64_t threshold = (0 - n) % n;
    for (;;) {
      std::uint64_t r = gen_();
      if (r >= threshold) return r % n;
    }
  }

  // index sampled proportionally to probs (assumed to sum to ~1)
  std::size_t categorical(std::span<const double> probs) {
    double u = uniform();
    double acc = 0.0;
    for (std::size_t i = 0; i + 1 < probs.size(); ++i) {
      acc += probs[i];
      if (u < acc) return i;
    }
    return probs.empty() ? 0 : probs.size() - 1;
  }

 private:
  std::mt19937_64 gen_;
};

inline Stream substream(std::uint64_t master, std::string_view name,
                        std::uint64_t index = 0) {
  return Stream(derive_seed(master, name, index));
}

}  // namespace rlcm::rng
