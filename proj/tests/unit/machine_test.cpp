#include <doctest.h>

#include <vector>

#include "subvec/fixtures.hpp"
#include "subvec/machine.hpp"

using namespace subvec;
using namespace subvec::ops;

TEST_SUITE("machine") {

TEST_CASE("vsetvl validates SEW and VL bounds") {
  VectorMachine m;
  m.execute(vsetvl(512, 8));
  CHECK(m.vl() == 512);
  CHECK(m.sew() == 8);
  CHECK_THROWS_AS(m.execute(vsetvl(513, 8)), ConfigError);
  CHECK_THROWS_AS(m.execute(vsetvl(257, 16)), ConfigError);
  CHECK_THROWS_AS(m.execute(vsetvl(4, 12)), ConfigError);
  m.execute(vsetvl(64, 64));
  CHECK(m.vl() == 64);
}

TEST_CASE("load then store copies memory and counts three instructions") {
  VectorMachine m;
  std::vector<uint8_t> src(32);
  for (size_t i = 0; i < src.size(); ++i) src[i] = static_cast<uint8_t>(i * 3);
  m.poke_bytes(0x100, src);

  const Instruction prog[] = {vsetvl(32, 8), vle(1, 0x100), vse(1, 0x200)};
  m.run_program(prog);

  std::vector<uint8_t> dst(32);
  m.peek_bytes(0x200, dst);
  CHECK(dst == src);
  CHECK(m.counters().instructions_total == 3);
  CHECK(m.counters().issues_of(Opcode::kVle) == 1);
  CHECK(m.counters().element_ops == 64);
}

TEST_CASE("memory violations trap with program counter context") {
  VectorMachine m(MachineConfig{.mem_bytes = 4096});
  const Instruction oob[] = {vsetvl(16, 64), vle(1, 4000)};
  CHECK_THROWS_WITH_AS(m.run_program(oob), doctest::Contains("pc 1"),
                       TrapError);
  const Instruction misaligned[] = {vsetvl(4, 32), vle(1, 0x102)};
  CHECK_THROWS_WITH_AS(m.run_program(misaligned),
                       doctest::Contains("aligned"), TrapError);
  CHECK_THROWS_AS(m.execute(scalar_load(3, 4095, 16)), TrapError);
}

TEST_CASE("vmacsr adds the shifted truncated product") {
  VectorMachine m;
  m.execute(vsetvl(4, 8));
  for (int i = 0; i < 4; ++i) {
    m.set_vreg_elem(1, i, 8, 5);     // accumulator
    m.set_vreg_elem(2, i, 8, 0x11);  // multiplicand
  }
  m.set_scalar_reg(5, 0x11);
  // 0x11 * 0x11 = 289, mod 256 = 0x21, >> 4 = 2, 5 + 2 = 7.
  m.execute(vmacsr_vx(1, 5, 2));
  for (int i = 0; i < 4; ++i) CHECK(m.vreg_elem(1, i, 8) == 7);
}

TEST_CASE("vmacsr with zero sources leaves the accumulator alone") {
  VectorMachine m;
  m.execute(vsetvl(8, 16));
  for (int i = 0; i < 8; ++i) {
    m.set_vreg_elem(1, i, 16, 1000 + i);
    m.set_vreg_elem(2, i, 16, 0);
    m.set_vreg_elem(3, i, 16, 0xABCD);
  }
  m.execute(vmacsr(1, 2, 3));
  for (int i = 0; i < 8; ++i) CHECK(m.vreg_elem(1, i, 16) == 1000 + i);
}

TEST_CASE("vmacsr.vv equals the multiply, shift, add composition") {
  for (unsigned sew : {8u, 16u, 32u}) {
    const unsigned vl = 64;
    SplitMix64 rng(1234 + sew);
    VectorMachine a, b;
    a.execute(vsetvl(vl, sew));
    b.execute(vsetvl(vl, sew));
    const uint64_t mask = sew == 64 ? ~0ull : ((1ull << sew) - 1);
    for (unsigned i = 0; i < vl; ++i) {
      const uint64_t acc = rng.next() & mask;
      const uint64_t s1 = rng.next() & mask;
      const uint64_t s2 = rng.next() & mask;
      a.set_vreg_elem(1, i, sew, acc);
      a.set_vreg_elem(2, i, sew, s1);
      a.set_vreg_elem(3, i, sew, s2);
      b.set_vreg_elem(1, i, sew, acc);
      b.set_vreg_elem(2, i, sew, s1);
      b.set_vreg_elem(3, i, sew, s2);
    }
    a.execute(vmacsr(1, 2, 3));
    const Instruction composed[] = {vmul(4, 2, 3), vsrl(4, 4, sew / 2),
                                    vadd(1, 1, 4)};
    b.run_program(composed);
    for (unsigned i = 0; i < vl; ++i) {
      CHECK(a.vreg_elem(1, i, sew) == b.vreg_elem(1, i, sew));
    }
  }
}

TEST_CASE("vx forms equal vv forms with a broadcast vector") {
  SplitMix64 rng(77);
  VectorMachine a, b;
  const unsigned vl = 100;
  a.execute(vsetvl(vl, 16));
  b.execute(vsetvl(vl, 16));
  const uint64_t x = rng.below(65536);
  a.set_scalar_reg(7, x);
  for (unsigned i = 0; i < vl; ++i) {
    const uint64_t acc = rng.below(65536);
    const uint64_t src = rng.below(65536);
    a.set_vreg_elem(1, i, 16, acc);
    a.set_vreg_elem(2, i, 16, src);
    b.set_vreg_elem(1, i, 16, acc);
    b.set_vreg_elem(2, i, 16, src);
    b.set_vreg_elem(3, i, 16, x);
  }
  a.execute(vmacsr_vx(1, 7, 2));
  b.execute(vmacsr(1, 3, 2));
  for (unsigned i = 0; i < vl; ++i) {
    CHECK(a.vreg_elem(1, i, 16) == b.vreg_elem(1, i, 16));
  }
}

TEST_CASE("vslidedown shifts elements toward zero and zero-fills the tail") {
  VectorMachine m;
  m.execute(vsetvl(4, 8));
  for (int i = 0; i < 4; ++i) m.set_vreg_elem(2, i, 8, i);
  m.execute(vslidedown(1, 2, 1));
  CHECK(m.vreg_elem(1, 0, 8) == 1);
  CHECK(m.vreg_elem(1, 1, 8) == 2);
  CHECK(m.vreg_elem(1, 2, 8) == 3);
  CHECK(m.vreg_elem(1, 3, 8) == 0);

  // In place, offset past VL: everything zero.
  m.execute(vslidedown(2, 2, 9));
  for (int i = 0; i < 4; ++i) CHECK(m.vreg_elem(2, i, 8) == 0);
}

TEST_CASE("element arithmetic wraps modulo two to the SEW") {
  VectorMachine m;
  m.execute(vsetvl(1, 8));
  m.set_vreg_elem(1, 0, 8, 200);
  m.set_vreg_elem(2, 0, 8, 2);
  m.execute(vmul(3, 1, 2));
  CHECK(m.vreg_elem(3, 0, 8) == (200 * 2) % 256);
  m.set_vreg_elem(4, 0, 8, 250);
  m.execute(vadd(4, 4, 1));
  CHECK(m.vreg_elem(4, 0, 8) == (250 + 200) % 256);
}

TEST_CASE("vmacc accumulates the full low product") {
  VectorMachine m;
  m.execute(vsetvl(2, 16));
  m.set_vreg_elem(1, 0, 16, 7);
  m.set_vreg_elem(1, 1, 16, 0);
  m.set_vreg_elem(2, 0, 16, 300);
  m.set_vreg_elem(2, 1, 16, 1000);
  m.set_scalar_reg(4, 200);
  m.execute(vmacc_vx(1, 4, 2));
  CHECK(m.vreg_elem(1, 0, 16) == (7 + 300 * 200) % 65536);
  CHECK(m.vreg_elem(1, 1, 16) == (1000 * 200) % 65536);
}

TEST_CASE("vmv variants copy and broadcast") {
  VectorMachine m;
  m.execute(vsetvl(3, 32));
  m.execute(vmv_i(1, 42));
  for (int i = 0; i < 3; ++i) CHECK(m.vreg_elem(1, i, 32) == 42);
  m.execute(vmv(2, 1));
  for (int i = 0; i < 3; ++i) CHECK(m.vreg_elem(2, i, 32) == 42);
  // Elements past VL are untouched.
  CHECK(m.vreg_elem(1, 3, 32) == 0);
}

TEST_CASE("scalar register zero is pinned to zero") {
  VectorMachine m;
  m.poke_elem(0x40, 999, 64);
  m.execute(scalar_load(0, 0x40, 64));
  CHECK(m.scalar_reg(0) == 0);
  m.set_scalar_reg(0, 5);
  CHECK(m.scalar_reg(0) == 0);
}

TEST_CASE("scalar loads zero-extend the accessed width") {
  VectorMachine m;
  m.poke_elem(0x80, 0xFFEE, 16);
  m.execute(scalar_load(3, 0x80, 8));
  CHECK(m.scalar_reg(3) == 0xEE);
  m.execute(scalar_load(3, 0x80, 16));
  CHECK(m.scalar_reg(3) == 0xFFEE);
  m.set_scalar_reg(4, 0x1234567890ABCDEFull);
  m.execute(scalar_store(4, 0x90, 32));
  CHECK(m.peek_elem(0x90, 32) == 0x90ABCDEF);
}

TEST_CASE("masked instructions are rejected at execute") {
  VectorMachine m;
  m.execute(vsetvl(4, 8));
  Instruction inst = vmacsr(1, 2, 3);
  inst.masked = true;
  CHECK_THROWS_WITH_AS(m.execute(inst), doctest::Contains("masked"), Error);
}

TEST_CASE("unit accounting follows the occupancy rule") {
  VectorMachine m;  // 4 lanes x 64 bits: 256 bits per cycle
  const Instruction prog[] = {vsetvl(256, 16), vle(1, 0), vmacc(2, 1, 1),
                              vslidedown(3, 1, 1), vse(2, 8192)};
  m.run_program(prog);
  // 256 elements * 16 bits = 4096 bits = 16 cycles per vector instruction.
  CHECK(m.counters().unit_busy(ExecUnit::kScalar) == 1);
  CHECK(m.counters().unit_busy(ExecUnit::kMemory) == 32);
  CHECK(m.counters().unit_busy(ExecUnit::kCompute) == 16);
  CHECK(m.counters().unit_busy(ExecUnit::kSlide) == 16);
  CHECK(m.counters().element_ops == 4 * 256);

  // VL=1 still costs one full cycle.
  m.execute(vsetvl(1, 8));
  const auto before = m.counters().unit_busy(ExecUnit::kCompute);
  m.execute(vadd(1, 1, 1));
  CHECK(m.counters().unit_busy(ExecUnit::kCompute) == before + 1);
}

TEST_CASE("counter deltas isolate program phases") {
  VectorMachine m;
  m.execute(vsetvl(16, 8));
  const PerfCounters before = m.counters();
  m.execute(vadd(1, 2, 3));
  m.execute(vadd(1, 2, 3));
  const PerfCounters delta = m.counters() - before;
  CHECK(delta.instructions_total == 2);
  CHECK(delta.issues_of(Opcode::kVaddVV) == 2);
  CHECK(delta.issues_of(Opcode::kVsetvl) == 0);
}

TEST_CASE("execution is deterministic across identical machines") {
  auto build_and_run = [] {
    VectorMachine m(MachineConfig{.vlen_bits = 1024, .mem_bytes = 1 << 16});
    auto t = make_random_tensor(99, 1, 4, 64, 8);
    m.poke_bytes(0, t.data);
    const Instruction prog[] = {vsetvl(64, 8),  vle(1, 0),
                                vle(2, 64),     vmacc(3, 1, 2),
                                vmacsr(3, 2, 2), vslidedown(1, 1, 1),
                                vadd(3, 3, 1),  vse(3, 1024)};
    m.run_program(prog);
    std::vector<uint8_t> out(64);
    m.peek_bytes(1024, out);
    return out;
  };
  CHECK(build_and_run() == build_and_run());
}

TEST_CASE("machine config validation") {
  CHECK_THROWS_AS(VectorMachine(MachineConfig{.vlen_bits = 100}), ConfigError);
  CHECK_THROWS_AS(VectorMachine(MachineConfig{.vlen_bits = 128, .lanes = 3}),
                  ConfigError);
  CHECK_THROWS_AS(VectorMachine(MachineConfig{.mem_bytes = 0}), ConfigError);
}

}  // TEST_SUITE
