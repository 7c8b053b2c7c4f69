#pragma once

#include <cstdint>
#include <vector>

#include "subvec/errors.hpp"

namespace subvec {

// Operand precision of a quantized conv layer: activation and weight bit
// widths. Both are between 1 and 8; the values themselves are unsigned.
struct Precision {
  int act_bits = 0;
  int wgt_bits = 0;

  bool operator==(const Precision&) const = default;
};

inline void validate_precision(const Precision& p) {
  if (p.act_bits < 1 || p.act_bits > 8 || p.wgt_bits < 1 || p.wgt_bits > 8) {
    throw ConfigError("precision bits must be in [1, 8], got Na=" +
                      std::to_string(p.act_bits) +
                      " Nw=" + std::to_string(p.wgt_bits));
  }
}

// Channel-first (c, h, w) tensor of unsigned quantized values. `bits`
// declares the value range: every element must be < 2^bits, bits <= 8.
struct QuantTensor {
  int channels = 0;
  int height = 0;
  int width = 0;
  int bits = 0;
  std::vector<uint8_t> data;  // row-major, index c*height*width + h*width + w

  QuantTensor() = default;
  QuantTensor(int c, int h, int w, int value_bits)
      : channels(c), height(h), width(w), bits(value_bits),
        data(static_cast<size_t>(c) * h * w, 0) {
    if (c < 1 || h < 1 || w < 1) {
      throw ConfigError("tensor dimensions must be positive");
    }
    if (value_bits < 1 || value_bits > 8) {
      throw ConfigError("tensor value bits must be in [1, 8]");
    }
  }

  size_t size() const { return data.size(); }

  uint8_t at(int c, int h, int w) const {
    return data[(static_cast<size_t>(c) * height + h) * width + w];
  }
  void set(int c, int h, int w, uint8_t v) {
    data[(static_cast<size_t>(c) * height + h) * width + w] = v;
  }

  uint8_t max_value() const { return static_cast<uint8_t>((1u << bits) - 1); }

  bool operator==(const QuantTensor&) const = default;
};

// Throws if any element exceeds the declared bit range.
inline void validate_tensor_range(const QuantTensor& t) {
  const uint8_t max = t.max_value();
  for (size_t i = 0; i < t.data.size(); ++i) {
    if (t.data[i] > max) {
      throw ConfigError("tensor value " + std::to_string(t.data[i]) +
                        " at flat index " + std::to_string(i) +
                        " exceeds " + std::to_string(t.bits) + "-bit range");
    }
  }
}

}  // namespace subvec
