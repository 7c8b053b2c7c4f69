#pragma once

#include <array>
#include <cstdint>
#include <limits>
#include <vector>

#include "subvec/tensor.hpp"

namespace subvec {

// Two sub-byte operands share one 8- or 16-bit element. Channel 2k supplies
// sub-field 0, channel 2k+1 supplies sub-field 1, and the two roles place
// them at opposite ends:
//
//   activation element  A = a0 + 2^(E/2) * a1
//   weight element      W = w1 + 2^(E/2) * w0
//
// so that a non-widening E-bit multiply leaves a0*w0 + a1*w1 in the middle
// field of A*W. The 2^E cross term a1*w0 falls off the top on its own.

enum class PackRole { kActivation, kWeight };

// How products are accumulated after the multiply. Native accumulation keeps
// raw products in an E-bit register and must respect a budget; the
// multiply-shift-accumulate instruction extracts per product and has none.
enum class AccumMode { kNative, kVmacsr };

inline constexpr int kUnboundedBudget = std::numeric_limits<int>::max();

// ULPPACK P1 pairing: C channels fold into ceil(C/2) packed channels of
// E-bit elements. Odd C gets a zero pad channel. `value_bits` remembers the
// operand range so unpacking can restore the original tensor.
struct PackedTensor {
  int elem_bits = 0;       // E, 8 or 16
  PackRole role = PackRole::kActivation;
  int packed_channels = 0;
  int orig_channels = 0;
  int height = 0;
  int width = 0;
  int value_bits = 0;
  std::vector<uint16_t> data;  // row-major (p, h, w), elements < 2^elem_bits

  uint16_t at(int p, int h, int w) const {
    return data[(static_cast<size_t>(p) * height + h) * width + w];
  }
};

PackedTensor pack_p1(const QuantTensor& t, int elem_bits, PackRole role);
QuantTensor unpack_p1(const PackedTensor& p);

// Sub-fields of one non-widening packed product (A * W) mod 2^E.
struct ProductFields {
  uint32_t low = 0;  // bits [0, E/2): a0*w1 residue
  uint32_t mid = 0;  // bits [E/2, E): a0*w0 + a1*w1 when in range
};

ProductFields packed_product_fields(uint32_t a, uint32_t w, int elem_bits);

// Largest number of packed products that may pile up in an E-bit register
// before the middle field must be extracted. Derived from the two worst-case
// bounds on k accumulated products of (Na, Nw) operands:
//
//   mid field:  k * 2 * (2^Na - 1) * (2^Nw - 1) <= 2^(E/2) - 1
//   low carry:  k * (2^Na - 1) * (2^Nw - 1)     <= 2^(E/2) - 1
//
// The mid bound implies the low bound, so the budget is its floor. Zero
// means the precision is unusable in native mode at this width. In vmacsr
// mode every product is extracted immediately and the budget is unbounded.
int safe_accum_budget(const Precision& prec, int elem_bits, AccumMode mode);

// Accumulation depth published with the original design: floor(2^(E/2) / 2),
// one deeper than the worst-case bound at 1-bit operands. Reproducible via
// BudgetPolicy::kPaper; the adversarial tests show why it is not the default.
int published_accum_budget(int elem_bits);

enum class BudgetPolicy { kConservative, kPaper };

int budget_for_policy(const Precision& prec, int elem_bits, AccumMode mode,
                      BudgetPolicy policy);

// 8x8 admissibility grid over Na, Nw in [1, 8]. A point is admissible when
// the operand widths and the extraction field coexist: Na + Nw + 1 <= E/2.
// Native mode additionally needs a nonzero budget, which that condition
// already guarantees.
struct RegionMap {
  int elem_bits = 0;
  AccumMode mode = AccumMode::kVmacsr;
  std::array<std::array<bool, 8>, 8> grid{};  // grid[na-1][nw-1]

  bool admissible(int na, int nw) const { return grid[na - 1][nw - 1]; }
};

RegionMap region_map(int elem_bits, AccumMode mode);

// One-line explanation of why (Na, Nw, E) is inadmissible, with the violated
// inequality spelled out. Empty string when admissible.
std::string region_violation(const Precision& prec, int elem_bits);

void validate_elem_bits(int elem_bits);

}  // namespace subvec
