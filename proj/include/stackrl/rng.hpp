#ifndef STACKRL_RNG_HPP_
#define STACKRL_RNG_HPP_

#include <cmath>
#include <cstdint>
#include <numbers>

namespace stackrl {

// SplitMix64 finalizer, used both for key derivation and as the counter hash.
constexpr std::uint64_t mix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

// Named stream families. Every consumer of randomness draws from its own
// family so that adding draws in one place never shifts another.
enum class Stream : std::uint64_t {
  kInit = 1,
  kEnvReset = 2,
  kAction = 3,
  kShuffle = 4,
  kEval = 5,
  kTest = 6,
};

// Counter-based generator: output i is a pure function of (key, i). Copying
// the object snapshots the stream position, which keeps environments and
// samplers trivially clonable.
class CounterRng {
 public:
  CounterRng() = default;
  CounterRng(std::uint64_t seed, Stream family, std::uint64_t index = 0)
      : key_(mix64(mix64(seed) ^ mix64(static_cast<std::uint64_t>(family) << 32) ^
                   mix64(index + 0x632be59bd9b4e019ULL))) {}

  std::uint64_t next_u64() {
    return mix64(key_ ^ mix64(counter_++ * 0xd1342543de82ef95ULL));
  }

  // Uniform in [0, 1) with 53 bits of precision.
  double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  // Uniform integer in [0, n), n > 0. Lemire-style rejection keeps it unbiased.
  std::uint64_t below(std::uint64_t n) {
    const std::uint64_t limit = (~std::uint64_t{0}) - (~std::uint64_t{0}) % n;
    std::uint64_t x;
    do {
      x = next_u64();
    } while (x >= limit);
    return x % n;
  }

  // Standard normal via Box-Muller; both draws are always consumed so the
  // counter advances by a fixed amount per sample.
  double normal() {
    const double u1 = 1.0 - uniform();  // (0, 1]
    const double u2 = uniform();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
  }

  std::uint64_t counter() const { return counter_; }
  std::uint64_t key() const { return key_; }

  friend bool operator==(const CounterRng&, const CounterRng&) = default;

 private:
  std::uint64_t key_ = 0;
  std::uint64_t counter_ = 0;
};

}  // namespace stackrl

#endif  // STACKRL_RNG_HPP_
