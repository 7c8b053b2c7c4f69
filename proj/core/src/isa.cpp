#include "subvec/isa.hpp"

namespace subvec {

const char* opcode_name(Opcode op) {
  switch (op) {
    case Opcode::kVsetvl: return "vsetvl";
    case Opcode::kVle: return "vle";
    case Opcode::kVse: return "vse";
    case Opcode::kVmv: return "vmv.v.v";
    case Opcode::kVmvI: return "vmv.v.i";
    case Opcode::kVslidedown: return "vslidedown.vi";
    case Opcode::kVaddVV: return "vadd.vv";
    case Opcode::kVmulVV: return "vmul.vv";
    case Opcode::kVmulVX: return "vmul.vx";
    case Opcode::kVsrlVI: return "vsrl.vi";
    case Opcode::kVmaccVV: return "vmacc.vv";
    case Opcode::kVmaccVX: return "vmacc.vx";
    case Opcode::kVmacsrVV: return "vmacsr.vv";
    case Opcode::kVmacsrVX: return "vmacsr.vx";
    case Opcode::kScalarLoad: return "scalar-load";
    case Opcode::kScalarStore: return "scalar-store";
    default: return "?";
  }
}

bool is_vector_op(Opcode op) {
  switch (op) {
    case Opcode::kVsetvl:
    case Opcode::kScalarLoad:
    case Opcode::kScalarStore:
      return false;
    default:
      return true;
  }
}

namespace {

void check_reg(unsigned idx, const char* field) {
  if (idx > 31) {
    throw DecodeError(std::string(field) + " register index " +
                      std::to_string(idx) + " out of range");
  }
}

uint32_t encode_mac_family(uint32_t funct6, bool vx, unsigned vd, unsigned s1,
                           unsigned vs2, bool masked) {
  check_reg(vd, "vd");
  check_reg(s1, vx ? "rs1" : "vs1");
  check_reg(vs2, "vs2");
  const uint32_t funct3 = vx ? kFunct3Opmvx : kFunct3Opmvv;
  uint32_t word = kVectorOpcode;
  word |= vd << 7;
  word |= funct3 << 12;
  word |= s1 << 15;
  word |= vs2 << 20;
  word |= (masked ? 0u : 1u) << 25;
  word |= funct6 << 26;
  return word;
}

}  // namespace

uint32_t encode_vmacsr(bool vx, unsigned vd, unsigned s1, unsigned vs2,
                       bool masked) {
  return encode_mac_family(kFunct6Vmacsr, vx, vd, s1, vs2, masked);
}

uint32_t encode_vmacc(bool vx, unsigned vd, unsigned s1, unsigned vs2,
                      bool masked) {
  return encode_mac_family(kFunct6Vmacc, vx, vd, s1, vs2, masked);
}

Instruction decode_word(uint32_t word) {
  const uint32_t opcode = word & 0x7F;
  if (opcode != kVectorOpcode) {
    throw DecodeError("unsupported opcode field 0x" +
                      [&] {
                        char buf[8];
                        snprintf(buf, sizeof buf, "%02x", opcode);
                        return std::string(buf);
                      }());
  }
  const uint32_t funct3 = (word >> 12) & 0x7;
  bool vx;
  if (funct3 == kFunct3Opmvv) {
    vx = false;
  } else if (funct3 == kFunct3Opmvx) {
    vx = true;
  } else {
    throw DecodeError("unsupported funct3 field 0b" +
                      std::to_string((funct3 >> 2) & 1) +
                      std::to_string((funct3 >> 1) & 1) +
                      std::to_string(funct3 & 1));
  }
  const uint32_t funct6 = word >> 26;
  Instruction inst;
  if (funct6 == kFunct6Vmacc) {
    inst.op = vx ? Opcode::kVmaccVX : Opcode::kVmaccVV;
  } else if (funct6 == kFunct6Vmacsr) {
    inst.op = vx ? Opcode::kVmacsrVX : Opcode::kVmacsrVV;
  } else {
    std::string bits;
    for (int i = 5; i >= 0; --i) bits += ((funct6 >> i) & 1) ? '1' : '0';
    throw DecodeError("unsupported funct6 field 0b" + bits);
  }
  inst.vd = static_cast<uint8_t>((word >> 7) & 0x1F);
  inst.vs1 = static_cast<uint8_t>((word >> 15) & 0x1F);
  inst.vs2 = static_cast<uint8_t>((word >> 20) & 0x1F);
  inst.masked = ((word >> 25) & 1) == 0;
  return inst;
}

std::array<uint8_t, 4> to_le_bytes(uint32_t word) {
  return {static_cast<uint8_t>(word & 0xFF),
          static_cast<uint8_t>((word >> 8) & 0xFF),
          static_cast<uint8_t>((word >> 16) & 0xFF),
          static_cast<uint8_t>((word >> 24) & 0xFF)};
}

uint32_t from_le_bytes(const std::array<uint8_t, 4>& b) {
  return static_cast<uint32_t>(b[0]) | (static_cast<uint32_t>(b[1]) << 8) |
         (static_cast<uint32_t>(b[2]) << 16) |
         (static_cast<uint32_t>(b[3]) << 24);
}

std::string format_instruction(const Instruction& inst) {
  const std::string name = opcode_name(inst.op);
  std::string out = name;
  auto v = [](unsigned r) { return "v" + std::to_string(r); };
  auto x = [](unsigned r) { return "x" + std::to_string(r); };
  switch (inst.op) {
    case Opcode::kVsetvl:
      out += " vl=" + std::to_string(inst.imm) +
             ", sew=" + std::to_string(inst.sew);
      break;
    case Opcode::kVle:
      out += " " + v(inst.vd) + ", " + std::to_string(inst.addr);
      break;
    case Opcode::kVse:
      out += " " + v(inst.vs1) + ", " + std::to_string(inst.addr);
      break;
    case Opcode::kVmv:
      out += " " + v(inst.vd) + ", " + v(inst.vs2);
      break;
    case Opcode::kVmvI:
      out += " " + v(inst.vd) + ", " + std::to_string(inst.imm);
      break;
    case Opcode::kVslidedown:
    case Opcode::kVsrlVI:
      out += " " + v(inst.vd) + ", " + v(inst.vs2) + ", " +
             std::to_string(inst.imm);
      break;
    case Opcode::kVaddVV:
    case Opcode::kVmulVV:
    case Opcode::kVmaccVV:
    case Opcode::kVmacsrVV:
      out += " " + v(inst.vd) + ", " + v(inst.vs1) + ", " + v(inst.vs2);
      break;
    case Opcode::kVmulVX:
    case Opcode::kVmaccVX:
    case Opcode::kVmacsrVX:
      out += " " + v(inst.vd) + ", " + x(inst.vs1) + ", " + v(inst.vs2);
      break;
    case Opcode::kScalarLoad:
      out += " " + x(inst.vd) + ", " + std::to_string(inst.addr) + " (" +
             std::to_string(inst.width_bits) + "b)";
      break;
    case Opcode::kScalarStore:
      out += " " + x(inst.vs1) + ", " + std::to_string(inst.addr) + " (" +
             std::to_string(inst.width_bits) + "b)";
      break;
    default:
      break;
  }
  if (inst.masked) out += ", v0.t";
  return out;
}

}  // namespace subvec
