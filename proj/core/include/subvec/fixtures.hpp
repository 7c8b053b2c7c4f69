#pragma once

#include <cstdint>

#include "subvec/tensor.hpp"

namespace subvec {

// splitmix64. Hand-rolled so fixture bytes are identical on every platform;
// std::uniform_int_distribution is implementation defined and is not.
class SplitMix64 {
public:
  explicit SplitMix64(uint64_t seed) : state_(seed) {}

  uint64_t next() {
    uint64_t z = (state_ += 0x9E3779B97F4A7C15ull);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return z ^ (z >> 31);
  }

  // Unbiased draw from [0, n) by rejection.
  uint64_t below(uint64_t n) {
    const uint64_t limit = UINT64_MAX - UINT64_MAX % n;
    uint64_t v = next();
    while (v >= limit) v = next();
    return v % n;
  }

private:
  uint64_t state_;
};

// Uniform random tensor over the declared precision range, fully determined
// by the seed.
QuantTensor make_random_tensor(uint64_t seed, int channels, int height,
                               int width, int bits);

// Tensor with every value at the precision maximum. Worst case input for
// accumulator budget checks.
QuantTensor make_allmax_tensor(int channels, int height, int width, int bits);

// Stable per-row seed derivation for sweeps: same base seed and index give
// the same stream no matter how rows are scheduled.
inline uint64_t derive_seed(uint64_t base, uint64_t index) {
  SplitMix64 rng(base ^ (0xA5A5A5A5A5A5A5A5ull + index * 0x9E3779B97F4A7C15ull));
  return rng.next();
}

}  // namespace subvec
