#pragma once

#include <array>
#include <cstdint>
#include <string>

#include "subvec/errors.hpp"

namespace subvec {

// Straight-line instruction set of the simulated vector machine. Exactly the
// operations the conv kernels need; no branches, no masking.
enum class Opcode : uint8_t {
  kVsetvl = 0,   // set SEW and VL
  kVle,          // unit-stride vector load at current SEW
  kVse,          // unit-stride vector store at current SEW
  kVmv,          // vd <- vs2
  kVmvI,         // vd <- broadcast immediate
  kVslidedown,   // vd[i] <- vs2[i + imm], zero fill past VL
  kVaddVV,
  kVmulVV,
  kVmulVX,
  kVsrlVI,       // logical shift right by immediate
  kVmaccVV,      // vd += vs1 * vs2
  kVmaccVX,      // vd += x[rs1] * vs2
  kVmacsrVV,     // vd += (vs1 * vs2) >> SEW/2, product truncated to SEW first
  kVmacsrVX,
  kScalarLoad,   // x[rd] <- zero-extended mem[addr], width_bits wide
  kScalarStore,  // mem[addr] <- low width_bits of x[rs1]
  kOpcodeCount,
};

inline constexpr size_t kNumOpcodes = static_cast<size_t>(Opcode::kOpcodeCount);

const char* opcode_name(Opcode op);
bool is_vector_op(Opcode op);

struct Instruction {
  Opcode op = Opcode::kVsetvl;
  uint8_t vd = 0;          // vector destination, or scalar rd for kScalarLoad
  uint8_t vs1 = 0;         // vector source 1, or scalar rs1 for .vx forms
  uint8_t vs2 = 0;
  uint8_t width_bits = 0;  // scalar memory access width: 8, 16, 32, 64
  bool masked = false;     // survives decode; execution rejects it
  uint16_t sew = 0;        // kVsetvl only
  int32_t imm = 0;         // vl, slide offset, shift amount, or broadcast value
  uint32_t addr = 0;       // byte address for memory ops
};

// --- 32-bit encoding of the two multiply-accumulate forms ---------------
//
// Standard vector arithmetic layout:
//   bits[6:0]   0b1010111
//   bits[11:7]  vd
//   bits[14:12] funct3, OPMVV = 0b010 / OPMVX = 0b110
//   bits[19:15] vs1 (OPMVV) or rs1 (OPMVX)
//   bits[24:20] vs2
//   bit[25]     vm, 1 = unmasked
//   bits[31:26] funct6
//
// The multiply-shift-accumulate form claims the free funct6 slot directly
// after the plain multiply-accumulate.

inline constexpr uint32_t kVectorOpcode = 0b1010111;
inline constexpr uint32_t kFunct3Opmvv = 0b010;
inline constexpr uint32_t kFunct3Opmvx = 0b110;
inline constexpr uint32_t kFunct6Vmacc = 0b101101;
inline constexpr uint32_t kFunct6Vmacsr = kFunct6Vmacc + 1;

uint32_t encode_vmacsr(bool vx, unsigned vd, unsigned s1, unsigned vs2,
                       bool masked);
uint32_t encode_vmacc(bool vx, unsigned vd, unsigned s1, unsigned vs2,
                      bool masked);

// Recognizes exactly the encoded subset (vmacc / vmacsr in both forms) and
// throws DecodeError naming the offending field for anything else.
Instruction decode_word(uint32_t word);

std::array<uint8_t, 4> to_le_bytes(uint32_t word);
uint32_t from_le_bytes(const std::array<uint8_t, 4>& bytes);

// Assembly-like rendering, e.g. "vmacsr.vx v3, x5, v1".
std::string format_instruction(const Instruction& inst);

// Terse constructors for program builders.
namespace ops {

inline Instruction vsetvl(unsigned vl, unsigned sew) {
  Instruction i;
  i.op = Opcode::kVsetvl;
  i.imm = static_cast<int32_t>(vl);
  i.sew = static_cast<uint16_t>(sew);
  return i;
}
inline Instruction vle(unsigned vd, uint32_t addr) {
  Instruction i;
  i.op = Opcode::kVle;
  i.vd = static_cast<uint8_t>(vd);
  i.addr = addr;
  return i;
}
inline Instruction vse(unsigned vs, uint32_t addr) {
  Instruction i;
  i.op = Opcode::kVse;
  i.vs1 = static_cast<uint8_t>(vs);
  i.addr = addr;
  return i;
}
inline Instruction vmv(unsigned vd, unsigned vs2) {
  Instruction i;
  i.op = Opcode::kVmv;
  i.vd = static_cast<uint8_t>(vd);
  i.vs2 = static_cast<uint8_t>(vs2);
  return i;
}
inline Instruction vmv_i(unsigned vd, int32_t imm) {
  Instruction i;
  i.op = Opcode::kVmvI;
  i.vd = static_cast<uint8_t>(vd);
  i.imm = imm;
  return i;
}
inline Instruction vslidedown(unsigned vd, unsigned vs2, uint32_t offset) {
  Instruction i;
  i.op = Opcode::kVslidedown;
  i.vd = static_cast<uint8_t>(vd);
  i.vs2 = static_cast<uint8_t>(vs2);
  i.imm = static_cast<int32_t>(offset);
  return i;
}
inline Instruction vadd(unsigned vd, unsigned vs1, unsigned vs2) {
  Instruction i;
  i.op = Opcode::kVaddVV;
  i.vd = static_cast<uint8_t>(vd);
  i.vs1 = static_cast<uint8_t>(vs1);
  i.vs2 = static_cast<uint8_t>(vs2);
  return i;
}
inline Instruction vmul(unsigned vd, unsigned vs1, unsigned vs2) {
  Instruction i;
  i.op = Opcode::kVmulVV;
  i.vd = static_cast<uint8_t>(vd);
  i.vs1 = static_cast<uint8_t>(vs1);
  i.vs2 = static_cast<uint8_t>(vs2);
  return i;
}
inline Instruction vmul_vx(unsigned vd, unsigned rs1, unsigned vs2) {
  Instruction i;
  i.op = Opcode::kVmulVX;
  i.vd = static_cast<uint8_t>(vd);
  i.vs1 = static_cast<uint8_t>(rs1);
  i.vs2 = static_cast<uint8_t>(vs2);
  return i;
}
inline Instruction vsrl(unsigned vd, unsigned vs2, unsigned shift) {
  Instruction i;
  i.op = Opcode::kVsrlVI;
  i.vd = static_cast<uint8_t>(vd);
  i.vs2 = static_cast<uint8_t>(vs2);
  i.imm = static_cast<int32_t>(shift);
  return i;
}
inline Instruction vmacc(unsigned vd, unsigned vs1, unsigned vs2) {
  Instruction i;
  i.op = Opcode::kVmaccVV;
  i.vd = static_cast<uint8_t>(vd);
  i.vs1 = static_cast<uint8_t>(vs1);
  i.vs2 = static_cast<uint8_t>(vs2);
  return i;
}
inline Instruction vmacc_vx(unsigned vd, unsigned rs1, unsigned vs2) {
  Instruction i;
  i.op = Opcode::kVmaccVX;
  i.vd = static_cast<uint8_t>(vd);
  i.vs1 = static_cast<uint8_t>(rs1);
  i.vs2 = static_cast<uint8_t>(vs2);
  return i;
}
inline Instruction vmacsr(unsigned vd, unsigned vs1, unsigned vs2) {
  Instruction i;
  i.op = Opcode::kVmacsrVV;
  i.vd = static_cast<uint8_t>(vd);
  i.vs1 = static_cast<uint8_t>(vs1);
  i.vs2 = static_cast<uint8_t>(vs2);
  return i;
}
inline Instruction vmacsr_vx(unsigned vd, unsigned rs1, unsigned vs2) {
  Instruction i;
  i.op = Opcode::kVmacsrVX;
  i.vd = static_cast<uint8_t>(vd);
  i.vs1 = static_cast<uint8_t>(rs1);
  i.vs2 = static_cast<uint8_t>(vs2);
  return i;
}
inline Instruction scalar_load(unsigned rd, uint32_t addr,
                               unsigned width_bits) {
  Instruction i;
  i.op = Opcode::kScalarLoad;
  i.vd = static_cast<uint8_t>(rd);
  i.addr = addr;
  i.width_bits = static_cast<uint8_t>(width_bits);
  return i;
}
inline Instruction scalar_store(unsigned rs, uint32_t addr,
                                unsigned width_bits) {
  Instruction i;
  i.op = Opcode::kScalarStore;
  i.vs1 = static_cast<uint8_t>(rs);
  i.addr = addr;
  i.width_bits = static_cast<uint8_t>(width_bits);
  return i;
}

}  // namespace ops

}  // namespace subvec
