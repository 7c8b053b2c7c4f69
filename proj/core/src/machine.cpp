#include "subvec/machine.hpp"

#include <cstring>
#include <string>

namespace subvec {

ExecUnit unit_of(Opcode op) {
  switch (op) {
    case Opcode::kVsetvl:
    case Opcode::kScalarLoad:
    case Opcode::kScalarStore:
      return ExecUnit::kScalar;
    case Opcode::kVle:
    case Opcode::kVse:
      return ExecUnit::kMemory;
    case Opcode::kVslidedown:
      return ExecUnit::kSlide;
    default:
      return ExecUnit::kCompute;
  }
}

void validate_config(const MachineConfig& cfg) {
  if (cfg.vlen_bits == 0 || cfg.lanes == 0 || cfg.datapath_bits_per_lane == 0) {
    throw ConfigError("machine dimensions must be positive");
  }
  if (cfg.vlen_bits % 64 != 0) {
    throw ConfigError("vlen_bits must be a multiple of 64");
  }
  if (cfg.vlen_bits % cfg.bits_per_cycle() != 0) {
    throw ConfigError("vlen_bits must be a multiple of lanes * datapath width");
  }
  if (cfg.mem_bytes == 0 || cfg.mem_bytes > 0xFFFFFFFFull) {
    throw ConfigError("memory size must be in (0, 4 GiB]");
  }
}

uint64_t vector_op_cycles(unsigned vl, unsigned sew, const MachineConfig& cfg) {
  const uint64_t bits = static_cast<uint64_t>(vl) * sew;
  const uint64_t per_cycle = cfg.bits_per_cycle();
  const uint64_t cycles = (bits + per_cycle - 1) / per_cycle;
  return cycles == 0 ? 1 : cycles;
}

PerfCounters& PerfCounters::operator+=(const PerfCounters& o) {
  for (size_t i = 0; i < issues.size(); ++i) issues[i] += o.issues[i];
  for (size_t i = 0; i < unit_cycles.size(); ++i)
    unit_cycles[i] += o.unit_cycles[i];
  instructions_total += o.instructions_total;
  element_ops += o.element_ops;
  return *this;
}

PerfCounters PerfCounters::operator-(const PerfCounters& o) const {
  PerfCounters d;
  for (size_t i = 0; i < issues.size(); ++i) d.issues[i] = issues[i] - o.issues[i];
  for (size_t i = 0; i < unit_cycles.size(); ++i)
    d.unit_cycles[i] = unit_cycles[i] - o.unit_cycles[i];
  d.instructions_total = instructions_total - o.instructions_total;
  d.element_ops = element_ops - o.element_ops;
  return d;
}

VectorMachine::VectorMachine(const MachineConfig& cfg) : cfg_(cfg) {
  validate_config(cfg_);
  vreg_bytes_ = cfg_.vlen_bits / 8;
  vregs_.assign(32 * vreg_bytes_, 0);
  mem_.assign(cfg_.mem_bytes, 0);
}

void VectorMachine::check_mem(uint32_t addr, size_t bytes, unsigned align,
                              const char* what) const {
  if (align > 1 && addr % align != 0) {
    throw TrapError(std::string(what) + " at address " + std::to_string(addr) +
                    " is not " + std::to_string(align) + "-byte aligned");
  }
  if (static_cast<size_t>(addr) + bytes > mem_.size()) {
    throw TrapError(std::string(what) + " of " + std::to_string(bytes) +
                    " bytes at address " + std::to_string(addr) +
                    " runs past the end of memory (" +
                    std::to_string(mem_.size()) + " bytes)");
  }
}

void VectorMachine::account(const Instruction& inst) {
  counters_.issues[static_cast<size_t>(inst.op)]++;
  counters_.instructions_total++;
  uint64_t cycles = 1;
  if (is_vector_op(inst.op)) {
    counters_.element_ops += vl_;
    cycles = vector_op_cycles(vl_, sew_, cfg_);
  }
  counters_.unit_cycles[static_cast<size_t>(unit_of(inst.op))] += cycles;
}

namespace {
bool valid_sew(unsigned sew) {
  return sew == 8 || sew == 16 || sew == 32 || sew == 64;
}
}  // namespace

template <typename T>
void VectorMachine::exec_elems(const Instruction& inst) {
  const unsigned vl = vl_;
  const unsigned half_shift = sew_ / 2;
  T* vd = reinterpret_cast<T*>(vreg_data(inst.vd));
  const T* vs1 = reinterpret_cast<const T*>(vreg_data(inst.vs1));
  const T* vs2 = reinterpret_cast<const T*>(vreg_data(inst.vs2));

  switch (inst.op) {
    case Opcode::kVle: {
      check_mem(inst.addr, static_cast<size_t>(vl) * sizeof(T), sizeof(T),
                "vector load");
      std::memcpy(vd, mem_.data() + inst.addr, static_cast<size_t>(vl) * sizeof(T));
      break;
    }
    case Opcode::kVse: {
      check_mem(inst.addr, static_cast<size_t>(vl) * sizeof(T), sizeof(T),
                "vector store");
      std::memcpy(mem_.data() + inst.addr, vs1, static_cast<size_t>(vl) * sizeof(T));
      break;
    }
    case Opcode::kVmv:
      for (unsigned i = 0; i < vl; ++i) vd[i] = vs2[i];
      break;
    case Opcode::kVmvI:
      for (unsigned i = 0; i < vl; ++i) vd[i] = static_cast<T>(inst.imm);
      break;
    case Opcode::kVslidedown: {
      // Ascending walk is in-place safe: reads stay ahead of writes.
      const uint32_t off = static_cast<uint32_t>(inst.imm);
      for (unsigned i = 0; i < vl; ++i) {
        vd[i] = (i + off < vl) ? vs2[i + off] : T{0};
      }
      break;
    }
    case Opcode::kVaddVV:
      for (unsigned i = 0; i < vl; ++i)
        vd[i] = static_cast<T>(vs1[i] + vs2[i]);
      break;
    case Opcode::kVmulVV:
      for (unsigned i = 0; i < vl; ++i)
        vd[i] = static_cast<T>(vs1[i] * vs2[i]);
      break;
    case Opcode::kVmulVX: {
      const T x = static_cast<T>(sregs_[inst.vs1]);
      for (unsigned i = 0; i < vl; ++i) vd[i] = static_cast<T>(x * vs2[i]);
      break;
    }
    case Opcode::kVsrlVI: {
      const unsigned sh = static_cast<unsigned>(inst.imm);
      if (sh >= sew_) {
        throw TrapError("shift amount " + std::to_string(sh) +
                        " is not below SEW " + std::to_string(sew_));
      }
      for (unsigned i = 0; i < vl; ++i) vd[i] = static_cast<T>(vs2[i] >> sh);
      break;
    }
    case Opcode::kVmaccVV:
      for (unsigned i = 0; i < vl; ++i)
        vd[i] = static_cast<T>(vd[i] + static_cast<T>(vs1[i] * vs2[i]));
      break;
    case Opcode::kVmaccVX: {
      const T x = static_cast<T>(sregs_[inst.vs1]);
      for (unsigned i = 0; i < vl; ++i)
        vd[i] = static_cast<T>(vd[i] + static_cast<T>(x * vs2[i]));
      break;
    }
    case Opcode::kVmacsrVV:
      // The product is truncated to SEW before the logical half-width shift,
      // so the top sub-field of a packed product never reaches the sum.
      for (unsigned i = 0; i < vl; ++i) {
        const T prod = static_cast<T>(vs1[i] * vs2[i]);
        vd[i] = static_cast<T>(vd[i] + static_cast<T>(prod >> half_shift));
      }
      break;
    case Opcode::kVmacsrVX: {
      const T x = static_cast<T>(sregs_[inst.vs1]);
      for (unsigned i = 0; i < vl; ++i) {
        const T prod = static_cast<T>(x * vs2[i]);
        vd[i] = static_cast<T>(vd[i] + static_cast<T>(prod >> half_shift));
      }
      break;
    }
    default:
      throw DecodeError(std::string("unhandled vector opcode ") +
                        opcode_name(inst.op));
  }
}

void VectorMachine::execute(const Instruction& inst) {
  if (inst.masked) {
    throw Error(std::string(opcode_name(inst.op)) +
                ": masked execution is not implemented");
  }
  switch (inst.op) {
    case Opcode::kVsetvl: {
      const unsigned sew = inst.sew;
      if (!valid_sew(sew)) {
        throw ConfigError("unsupported SEW " + std::to_string(sew));
      }
      const unsigned vl = static_cast<unsigned>(inst.imm);
      if (inst.imm < 0 || vl > cfg_.max_vl(sew)) {
        throw ConfigError("VL " + std::to_string(inst.imm) +
                          " exceeds VLEN/SEW = " +
                          std::to_string(cfg_.max_vl(sew)) + " at SEW " +
                          std::to_string(sew));
      }
      sew_ = sew;
      vl_ = vl;
      break;
    }
    case Opcode::kScalarLoad: {
      const unsigned bytes = inst.width_bits / 8;
      if (inst.width_bits != 8 && inst.width_bits != 16 &&
          inst.width_bits != 32 && inst.width_bits != 64) {
        throw ConfigError("scalar access width must be 8/16/32/64 bits");
      }
      check_mem(inst.addr, bytes, bytes, "scalar load");
      uint64_t value = 0;
      std::memcpy(&value, mem_.data() + inst.addr, bytes);
      if (inst.vd != 0) sregs_[inst.vd] = value;  // x0 stays zero
      break;
    }
    case Opcode::kScalarStore: {
      const unsigned bytes = inst.width_bits / 8;
      if (inst.width_bits != 8 && inst.width_bits != 16 &&
          inst.width_bits != 32 && inst.width_bits != 64) {
        throw ConfigError("scalar access width must be 8/16/32/64 bits");
      }
      check_mem(inst.addr, bytes, bytes, "scalar store");
      const uint64_t value = inst.vs1 == 0 ? 0 : sregs_[inst.vs1];
      std::memcpy(mem_.data() + inst.addr, &value, bytes);
      break;
    }
    default:
      switch (sew_) {
        case 8: exec_elems<uint8_t>(inst); break;
        case 16: exec_elems<uint16_t>(inst); break;
        case 32: exec_elems<uint32_t>(inst); break;
        case 64: exec_elems<uint64_t>(inst); break;
        default:
          throw ConfigError("machine SEW is in an invalid state");
      }
      break;
  }
  account(inst);
}

void VectorMachine::run_program(std::span<const Instruction> program) {
  for (size_t pc = 0; pc < program.size(); ++pc) {
    try {
      execute(program[pc]);
    } catch (const TrapError& e) {
      throw TrapError("pc " + std::to_string(pc) + " (" +
                      format_instruction(program[pc]) + "): " + e.what());
    } catch (const DecodeError& e) {
      throw DecodeError("pc " + std::to_string(pc) + " (" +
                        format_instruction(program[pc]) + "): " + e.what());
    } catch (const ConfigError& e) {
      throw ConfigError("pc " + std::to_string(pc) + " (" +
                        format_instruction(program[pc]) + "): " + e.what());
    } catch (const Error& e) {
      throw Error("pc " + std::to_string(pc) + " (" +
                  format_instruction(program[pc]) + "): " + e.what());
    }
  }
}

void VectorMachine::poke_bytes(uint32_t addr, std::span<const uint8_t> bytes) {
  check_mem(addr, bytes.size(), 1, "setup write");
  std::memcpy(mem_.data() + addr, bytes.data(), bytes.size());
}

void VectorMachine::peek_bytes(uint32_t addr, std::span<uint8_t> out) const {
  check_mem(addr, out.size(), 1, "setup read");
  std::memcpy(out.data(), mem_.data() + addr, out.size());
}

void VectorMachine::poke_elem(uint32_t addr, uint64_t value,
                              unsigned width_bits) {
  const unsigned bytes = width_bits / 8;
  check_mem(addr, bytes, bytes, "setup write");
  std::memcpy(mem_.data() + addr, &value, bytes);
}

uint64_t VectorMachine::peek_elem(uint32_t addr, unsigned width_bits) const {
  const unsigned bytes = width_bits / 8;
  check_mem(addr, bytes, bytes, "setup read");
  uint64_t value = 0;
  std::memcpy(&value, mem_.data() + addr, bytes);
  return value;
}

uint64_t VectorMachine::scalar_reg(unsigned idx) const {
  if (idx > 31) throw ConfigError("scalar register index out of range");
  return idx == 0 ? 0 : sregs_[idx];
}

void VectorMachine::set_scalar_reg(unsigned idx, uint64_t value) {
  if (idx > 31) throw ConfigError("scalar register index out of range");
  if (idx != 0) sregs_[idx] = value;
}

uint64_t VectorMachine::vreg_elem(unsigned reg, size_t idx,
                                  unsigned sew_bits) const {
  if (reg > 31) throw ConfigError("vector register index out of range");
  const unsigned bytes = sew_bits / 8;
  if ((idx + 1) * bytes > vreg_bytes_) {
    throw ConfigError("vector element index out of range");
  }
  uint64_t value = 0;
  std::memcpy(&value, vreg_data(reg) + idx * bytes, bytes);
  return value;
}

void VectorMachine::set_vreg_elem(unsigned reg, size_t idx, unsigned sew_bits,
                                  uint64_t value) {
  if (reg > 31) throw ConfigError("vector register index out of range");
  const unsigned bytes = sew_bits / 8;
  if ((idx + 1) * bytes > vreg_bytes_) {
    throw ConfigError("vector element index out of range");
  }
  std::memcpy(vreg_data(reg) + idx * bytes, &value, bytes);
}

}  // namespace subvec
