#pragma once

#include <cstdint>
#include <random>
#include <string_view>
#include <utility>
#include <vector>

namespace cograph {

// Deterministic random source. Sampling helpers are implemented by hand so
// results do not depend on the standard library's distribution internals:
// a run is reproducible bit-for-bit from its seed on any platform.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next_u64() { return engine_(); }

  // Uniform in [0, n); n must be > 0.
  std::size_t below(std::size_t n);

  // Uniform in [0, 1), 53-bit resolution.
  double unit() {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
  }

  double uniform(double lo, double hi) { return lo + (hi - lo) * unit(); }

  // Fisher-Yates.
  template <typename T>
  void shuffle(std::vector<T>& items) {
    for (std::size_t i = items.size(); i > 1; --i) {
      std::swap(items[i - 1], items[below(i)]);
    }
  }

  // k distinct indices drawn uniformly from [0, n), in draw order. k <= n.
  std::vector<std::size_t> sample_indices(std::size_t n, std::size_t k);

 private:
  std::mt19937_64 engine_;
};

// Stable fan-out of one master seed into independent streams, keyed by a
// textual tag plus up to two integers (epoch, step, item index, ...).
std::uint64_t derive_seed(std::uint64_t base, std::string_view tag,
                          std::uint64_t a = 0, std::uint64_t b = 0);

}  // namespace cograph
