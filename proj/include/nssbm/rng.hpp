#pragma once

#include <cstdint>
#include <random>
#include <span>
#include <vector>

namespace nssbm {

// Splitmix-style bit mix, used to derive independent per-restart seeds.
inline std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t stream) {
  std::uint64_t z = seed + 0x9E3779B97F4A7C15ull * (stream + 1);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
  return z ^ (z >> 31);
}

// mt19937_64 with hand-rolled draw algorithms so that a given seed yields
// the same stream on every platform (std::*_distribution would not).
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : eng_(seed) {}

  std::uint64_t next_u64() { return eng_(); }

  // [0, 1) with 53 random bits
  double uniform01() {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
  }

  // unbiased draw from [0, n), Lemire's method
  std::uint32_t uniform_below(std::uint32_t n) {
    std::uint64_t x = next_u64();
    unsigned __int128 m = static_cast<unsigned __int128>(x) * n;
    auto low = static_cast<std::uint64_t>(m);
    if (low < n) {
      std::uint64_t threshold = (0 - static_cast<std::uint64_t>(n)) % n;
      while (low < threshold) {
        x = next_u64();
        m = static_cast<unsigned __int128>(x) * n;
        low = static_cast<std::uint64_t>(m);
      }
    }
    return static_cast<std::uint32_t>(m >> 64);
  }

  std::int64_t poisson(double mean);

  template <class T>
  void shuffle(std::vector<T>& v) {
    for (std::size_t i = v.size(); i > 1; --i) {
      std::size_t j = uniform_below(static_cast<std::uint32_t>(i));
      std::swap(v[i - 1], v[j]);
    }
  }

  // index draw given cumulative weights (last entry = total mass)
  int categorical(std::span<const double> cumulative);

 private:
  std::int64_t poisson_knuth(double mean);

  std::mt19937_64 eng_;
};

}  // namespace nssbm
