#include "subvec/fixtures.hpp"

namespace subvec {

QuantTensor make_random_tensor(uint64_t seed, int channels, int height,
                               int width, int bits) {
  QuantTensor t(channels, height, width, bits);
  SplitMix64 rng(seed);
  const uint64_t range = 1ull << bits;
  for (auto& v : t.data) {
    v = static_cast<uint8_t>(rng.below(range));
  }
  return t;
}

QuantTensor make_allmax_tensor(int channels, int height, int width, int bits) {
  QuantTensor t(channels, height, width, bits);
  for (auto& v : t.data) v = t.max_value();
  return t;
}

}  // namespace subvec
