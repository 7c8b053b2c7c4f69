#include "subvec/packing.hpp"

#include <string>

namespace subvec {

void validate_elem_bits(int elem_bits) {
  if (elem_bits != 8 && elem_bits != 16) {
    throw ConfigError("packed element width must be 8 or 16, got " +
                      std::to_string(elem_bits));
  }
}

PackedTensor pack_p1(const QuantTensor& t, int elem_bits, PackRole role) {
  validate_elem_bits(elem_bits);
  const int half = elem_bits / 2;
  if (t.bits > half) {
    throw ConfigError("cannot pack " + std::to_string(t.bits) +
                      "-bit values into a " + std::to_string(half) +
                      "-bit sub-field");
  }
  validate_tensor_range(t);

  PackedTensor p;
  p.elem_bits = elem_bits;
  p.role = role;
  p.orig_channels = t.channels;
  p.packed_channels = (t.channels + 1) / 2;
  p.height = t.height;
  p.width = t.width;
  p.value_bits = t.bits;
  p.data.assign(static_cast<size_t>(p.packed_channels) * t.height * t.width, 0);

  const uint32_t scale = 1u << half;
  for (int pc = 0; pc < p.packed_channels; ++pc) {
    const int c0 = 2 * pc;
    const int c1 = 2 * pc + 1;
    const bool padded = c1 >= t.channels;
    for (int h = 0; h < t.height; ++h) {
      for (int w = 0; w < t.width; ++w) {
        const uint32_t v0 = t.at(c0, h, w);
        const uint32_t v1 = padded ? 0 : t.at(c1, h, w);
        uint32_t elem;
        if (role == PackRole::kActivation) {
          elem = v0 + scale * v1;
        } else {
          elem = v1 + scale * v0;
        }
        p.data[(static_cast<size_t>(pc) * t.height + h) * t.width + w] =
            static_cast<uint16_t>(elem);
      }
    }
  }
  return p;
}

QuantTensor unpack_p1(const PackedTensor& p) {
  validate_elem_bits(p.elem_bits);
  const int half = p.elem_bits / 2;
  const uint32_t mask = (1u << half) - 1;

  QuantTensor t(p.orig_channels, p.height, p.width, p.value_bits);
  for (int pc = 0; pc < p.packed_channels; ++pc) {
    const int c0 = 2 * pc;
    const int c1 = 2 * pc + 1;
    for (int h = 0; h < p.height; ++h) {
      for (int w = 0; w < p.width; ++w) {
        const uint32_t elem = p.at(pc, h, w);
        const uint32_t lo = elem & mask;
        const uint32_t hi = (elem >> half) & mask;
        uint32_t v0, v1;
        if (p.role == PackRole::kActivation) {
          v0 = lo;
          v1 = hi;
        } else {
          v0 = hi;
          v1 = lo;
        }
        if (v0 > ((1u << p.value_bits) - 1) ||
            v1 > ((1u << p.value_bits) - 1)) {
          throw ConfigError("packed element holds a sub-field outside the " +
                            std::to_string(p.value_bits) + "-bit range");
        }
        t.set(c0, h, w, static_cast<uint8_t>(v0));
        if (c1 < p.orig_channels) {
          t.set(c1, h, w, static_cast<uint8_t>(v1));
        } else if (v1 != 0) {
          throw ConfigError("pad channel of a packed tensor is not zero");
        }
      }
    }
  }
  return t;
}

ProductFields packed_product_fields(uint32_t a, uint32_t w, int elem_bits) {
  validate_elem_bits(elem_bits);
  const uint32_t elem_mask =
      elem_bits == 32 ? 0xFFFFFFFFu : ((1u << elem_bits) - 1);
  const int half = elem_bits / 2;
  const uint32_t half_mask = (1u << half) - 1;
  if (a > elem_mask || w > elem_mask) {
    throw ConfigError("packed operand exceeds the element width");
  }
  const uint32_t product = (a * w) & elem_mask;
  ProductFields f;
  f.low = product & half_mask;
  f.mid = (product >> half) & half_mask;
  return f;
}

int safe_accum_budget(const Precision& prec, int elem_bits, AccumMode mode) {
  validate_precision(prec);
  validate_elem_bits(elem_bits);
  if (mode == AccumMode::kVmacsr) {
    return kUnboundedBudget;
  }
  const int half = elem_bits / 2;
  if (prec.act_bits + prec.wgt_bits + 1 > half) {
    return 0;
  }
  const int64_t field_max = (1ll << half) - 1;
  const int64_t per_product =
      2ll * ((1ll << prec.act_bits) - 1) * ((1ll << prec.wgt_bits) - 1);
  return static_cast<int>(field_max / per_product);
}

int published_accum_budget(int elem_bits) {
  validate_elem_bits(elem_bits);
  return (1 << (elem_bits / 2)) / 2;
}

int budget_for_policy(const Precision& prec, int elem_bits, AccumMode mode,
                      BudgetPolicy policy) {
  if (mode == AccumMode::kVmacsr) {
    return kUnboundedBudget;
  }
  if (policy == BudgetPolicy::kPaper) {
    return published_accum_budget(elem_bits);
  }
  return safe_accum_budget(prec, elem_bits, mode);
}

RegionMap region_map(int elem_bits, AccumMode mode) {
  validate_elem_bits(elem_bits);
  RegionMap m;
  m.elem_bits = elem_bits;
  m.mode = mode;
  const int half = elem_bits / 2;
  for (int na = 1; na <= 8; ++na) {
    for (int nw = 1; nw <= 8; ++nw) {
      bool ok = na + nw + 1 <= half;
      if (ok && mode == AccumMode::kNative) {
        ok = safe_accum_budget({na, nw}, elem_bits, mode) >= 1;
      }
      m.grid[na - 1][nw - 1] = ok;
    }
  }
  return m;
}

std::string region_violation(const Precision& prec, int elem_bits) {
  validate_precision(prec);
  validate_elem_bits(elem_bits);
  const int half = elem_bits / 2;
  if (prec.act_bits + prec.wgt_bits + 1 <= half) {
    return "";
  }
  const int64_t field_max = (1ll << half) - 1;
  const int64_t amax = (1ll << prec.act_bits) - 1;
  const int64_t wmax = (1ll << prec.wgt_bits) - 1;
  const int64_t worst = 2 * amax * wmax;
  std::string msg = "Na + Nw + 1 = " +
                    std::to_string(prec.act_bits + prec.wgt_bits + 1) +
                    " exceeds E/2 = " + std::to_string(half);
  if (worst > field_max) {
    msg += "; worst-case mid field 2*" + std::to_string(amax) + "*" +
           std::to_string(wmax) + " = " + std::to_string(worst) + " > " +
           std::to_string(field_max);
  }
  return msg;
}

}  // namespace subvec
