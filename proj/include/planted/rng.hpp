#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>

namespace planted {

// Counter-based pseudo-random stream. The i-th output is a pure function of
// (key, i), so substreams derived from (master seed, trial index) give
// results that do not depend on execution order or worker count.
class Stream {
 public:
  explicit Stream(std::uint64_t key) : key_(key) {}

  static Stream substream(std::uint64_t master, std::uint64_t index) {
    return Stream(mix(master ^ mix(index + 0x632BE59BD9B4E019ULL)));
  }

  std::uint64_t key() const { return key_; }

  std::uint64_t next_u64() {
    ++counter_;
    return mix(key_ + counter_ * 0x9E3779B97F4A7C15ULL);
  }

  // Uniform on [0, 1) with 53 random bits.
  double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  // Unbiased integer in [0, bound).
  std::uint64_t below(std::uint64_t bound) {
    const std::uint64_t threshold = (0 - bound) % bound;
    for (;;) {
      const std::uint64_t r = next_u64();
      const unsigned __int128 prod = static_cast<unsigned __int128>(r) * bound;
      if (static_cast<std::uint64_t>(prod) >= threshold) {
        return static_cast<std::uint64_t>(prod >> 64);
      }
    }
  }

  // Standard normal via Box-Muller; the second variate of each pair is cached.
  double normal() {
    if (has_spare_) {
      has_spare_ = false;
      return spare_;
    }
    const double u1 = 1.0 - uniform();  // (0, 1]
    const double u2 = uniform();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double a = 2.0 * std::numbers::pi * u2;
    spare_ = r * std::sin(a);
    has_spare_ = true;
    return r * std::cos(a);
  }

  bool coin() { return (next_u64() >> 63) != 0; }

  static std::uint64_t mix(std::uint64_t z) {
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
  }

 private:
  std::uint64_t key_;
  std::uint64_t counter_ = 0;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

}  // namespace planted
