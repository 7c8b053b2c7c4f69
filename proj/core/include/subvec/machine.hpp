#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <vector>

#include "subvec/isa.hpp"

namespace subvec {

// Functional unit a retired instruction occupies. Units run concurrently in
// the cycle model; see perfmodel.
enum class ExecUnit : uint8_t {
  kCompute = 0,  // arithmetic, moves, shifts, multiply-accumulate
  kSlide,        // slide unit
  kMemory,       // vector loads and stores
  kScalar,       // vsetvl and scalar memory traffic
};
inline constexpr size_t kNumExecUnits = 4;

ExecUnit unit_of(Opcode op);

struct MachineConfig {
  unsigned vlen_bits = 4096;
  unsigned lanes = 4;
  unsigned datapath_bits_per_lane = 64;
  size_t mem_bytes = 64ull << 20;

  unsigned max_vl(unsigned sew) const { return vlen_bits / sew; }
  unsigned bits_per_cycle() const { return lanes * datapath_bits_per_lane; }
};

void validate_config(const MachineConfig& cfg);

// Occupancy of one vector instruction at a given VL and SEW: the element
// bits divided by the datapath width, at least one cycle.
uint64_t vector_op_cycles(unsigned vl, unsigned sew, const MachineConfig& cfg);

// Monotone tallies of retired work. Reset only explicitly; subtraction gives
// phase deltas (counters taken after a prologue minus before it).
struct PerfCounters {
  std::array<uint64_t, kNumOpcodes> issues{};
  std::array<uint64_t, kNumExecUnits> unit_cycles{};
  uint64_t instructions_total = 0;
  uint64_t element_ops = 0;  // sum of VL over vector instructions

  void reset() { *this = PerfCounters{}; }

  uint64_t issues_of(Opcode op) const {
    return issues[static_cast<size_t>(op)];
  }
  uint64_t unit_busy(ExecUnit u) const {
    return unit_cycles[static_cast<size_t>(u)];
  }

  PerfCounters& operator+=(const PerfCounters& o);
  PerfCounters operator-(const PerfCounters& o) const;
};

// Bit-exact simulator: 32 vector registers of vlen_bits, 32 64-bit scalar
// registers with x0 pinned to zero, and a flat little-endian byte-addressable
// memory. All element arithmetic is modulo 2^SEW.
class VectorMachine {
public:
  explicit VectorMachine(const MachineConfig& cfg = {});

  const MachineConfig& config() const { return cfg_; }
  unsigned sew() const { return sew_; }
  unsigned vl() const { return vl_; }

  void execute(const Instruction& inst);
  void run_program(std::span<const Instruction> program);

  const PerfCounters& counters() const { return counters_; }
  void reset_counters() { counters_.reset(); }

  // Direct state access for program setup and result readout. None of this
  // is charged to the counters.
  void poke_bytes(uint32_t addr, std::span<const uint8_t> bytes);
  void peek_bytes(uint32_t addr, std::span<uint8_t> out) const;
  void poke_elem(uint32_t addr, uint64_t value, unsigned width_bits);
  uint64_t peek_elem(uint32_t addr, unsigned width_bits) const;

  uint64_t scalar_reg(unsigned idx) const;
  void set_scalar_reg(unsigned idx, uint64_t value);
  uint64_t vreg_elem(unsigned reg, size_t idx, unsigned sew_bits) const;
  void set_vreg_elem(unsigned reg, size_t idx, unsigned sew_bits,
                     uint64_t value);

  size_t mem_size() const { return mem_.size(); }

private:
  template <typename T>
  void exec_elems(const Instruction& inst);
  void check_mem(uint32_t addr, size_t bytes, unsigned align,
                 const char* what) const;
  uint8_t* vreg_data(unsigned reg) { return vregs_.data() + reg * vreg_bytes_; }
  const uint8_t* vreg_data(unsigned reg) const {
    return vregs_.data() + reg * vreg_bytes_;
  }
  void account(const Instruction& inst);

  MachineConfig cfg_;
  size_t vreg_bytes_;
  std::vector<uint8_t> vregs_;
  std::array<uint64_t, 32> sregs_{};
  std::vector<uint8_t> mem_;
  unsigned sew_ = 8;
  unsigned vl_ = 0;
  PerfCounters counters_;
};

}  // namespace subvec
