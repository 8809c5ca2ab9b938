#pragma once

#include <cmath>
#include <cstdint>
#include <initializer_list>
#include <numbers>
#include <random>

namespace fctrack {

/// SplitMix64 finaliser; used to derive independent stream seeds.
inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

/// Stream purposes. Each (seed, purpose, keys...) tuple gets its own generator, so adding
/// draws to one stream never shifts another.
enum class Stream : std::uint64_t {
  anchor = 1,     // keys: agent
  detection = 2,  // keys: agent, frame
  layout = 3,     // keys: scenario index
};

inline std::uint64_t stream_seed(std::uint64_t seed, Stream purpose,
                                 std::initializer_list<std::uint64_t> keys) {
  std::uint64_t h = splitmix64(seed ^ splitmix64(static_cast<std::uint64_t>(purpose)));
  for (auto k : keys) h = splitmix64(h ^ splitmix64(k + 0x632BE59BD9B4E019ULL));
  return h;
}

/// mt19937_64 with hand-written transforms: the engine's output is fixed by the standard,
/// the std:: distributions are not, so draws are identical on every platform.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}
  Rng(std::uint64_t seed, Stream purpose, std::initializer_list<std::uint64_t> keys)
      : engine_(stream_seed(seed, purpose, keys)) {}

  /// Uniform in [0, 1) with 53 random bits.
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  /// Uniform integer in [lo, hi].
  int uniform_int(int lo, int hi) {
    const auto span = static_cast<std::uint64_t>(hi - lo) + 1;
    return lo + static_cast<int>(engine_() % span);
  }

  bool bernoulli(double p) { return uniform() < p; }

  /// Standard normal via Box-Muller.
  double normal() {
    double u1 = uniform();
    while (u1 <= 0.0) u1 = uniform();
    const double u2 = uniform();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
  }
  double normal(double mean, double stddev) { return mean + stddev * normal(); }

 private:
  std::mt19937_64 engine_;
};

}  // namespace fctrack
