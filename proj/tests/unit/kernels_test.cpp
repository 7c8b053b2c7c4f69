#include <doctest.h>

#include <vector>

#include "subvec/errors.hpp"
#include "subvec/fixtures.hpp"
#include "subvec/isa.hpp"
#include "subvec/kernels.hpp"

using namespace subvec;

namespace {

// Second reference with a transposed loop order: kernel taps outermost,
// scattering into the output instead of gathering per position.
std::vector<uint64_t> conv_reference(const QuantTensor& in,
                                     const QuantTensor& k) {
  int oh = in.height - k.height + 1;
  int ow = in.width - k.width + 1;
  std::vector<uint64_t> out(static_cast<size_t>(oh) * ow, 0);
  for (int c = 0; c < in.channels; ++c) {
    for (int r = 0; r < k.height; ++r) {
      for (int i = 0; i < k.width; ++i) {
        uint64_t w = k.at(c, r, i);
        for (int y = 0; y < oh; ++y) {
          for (int x = 0; x < ow; ++x) {
            out[static_cast<size_t>(y) * ow + x] += w * in.at(c, y + r, x + i);
          }
        }
      }
    }
  }
  return out;
}

ConvRun run_variant(ConvVariant v, const QuantTensor& in, const QuantTensor& k,
                    ConvOptions o = {}) {
  VectorMachine m = make_conv_machine(v, shape_of(in, k), o.elem_bits);
  return run_conv2d(m, v, in, k, o);
}

QuantTensor tensor_from(int c, int h, int w, int bits,
                        std::vector<uint8_t> vals) {
  QuantTensor t(c, h, w, bits);
  t.data = std::move(vals);
  return t;
}

}  // namespace

TEST_SUITE("kernels") {

TEST_CASE("oracle matches a hand-worked example") {
  auto in = tensor_from(1, 2, 3, 3, {1, 2, 3, 4, 5, 6});
  auto k = tensor_from(1, 2, 2, 1, {1, 0, 0, 1});
  auto out = conv2d_oracle(in, k);
  REQUIRE(out.size() == 2);
  CHECK(out[0] == 6);
  CHECK(out[1] == 8);

  auto ones_in = make_allmax_tensor(2, 3, 3, 1);
  auto ones_k = make_allmax_tensor(2, 2, 2, 1);
  auto ones = conv2d_oracle(ones_in, ones_k);
  REQUIRE(ones.size() == 4);
  for (uint64_t v : ones) CHECK(v == 8);
}

TEST_CASE("oracle agrees with a transposed-loop reference") {
  for (uint64_t seed = 0; seed < 6; ++seed) {
    auto in = make_random_tensor(derive_seed(901, seed), 3, 9, 11, 4);
    auto k = make_random_tensor(derive_seed(902, seed), 3, 3, 2, 3);
    CHECK(conv2d_oracle(in, k) == conv_reference(in, k));
  }
}

TEST_CASE("int16 baseline reproduces the oracle bit for bit") {
  for (uint64_t seed = 0; seed < 4; ++seed) {
    auto in = make_random_tensor(derive_seed(910, seed), 3, 8, 10, 3);
    auto k = make_random_tensor(derive_seed(911, seed), 3, 3, 3, 3);
    auto run = run_variant(ConvVariant::kInt16, in, k);
    auto cmp = compare_with_oracle(run, conv2d_oracle(in, k));
    CHECK(cmp.verdict == MatchVerdict::kExact);
    CHECK(cmp.overflow.empty());
  }
}

TEST_CASE("vmacsr variant is exact inside the region at both widths") {
  struct Point { int na, nw, e, c; };
  for (auto [na, nw, e, c] : {Point{1, 1, 8, 2}, Point{1, 2, 8, 2},
                              Point{2, 1, 8, 3}, Point{2, 2, 16, 4},
                              Point{3, 3, 16, 4}, Point{1, 6, 16, 2}}) {
    ConvOptions o;
    o.prec = {na, nw};
    o.elem_bits = e;
    auto in = make_random_tensor(derive_seed(920, na * 16 + nw), c, 7, 9, na);
    auto k = make_random_tensor(derive_seed(921, na * 16 + nw), c, 3, 3, nw);
    auto run = run_variant(ConvVariant::kUlppackVmacsr, in, k, o);
    auto cmp = compare_with_oracle(run, conv2d_oracle(in, k));
    CHECK(cmp.verdict == MatchVerdict::kExact);
    CHECK(run.budget == kUnboundedBudget);
    CHECK(run.sew == static_cast<unsigned>(e));
  }
}

TEST_CASE("native variant is exact and actually flushes") {
  struct Point { int na, nw, e, c; };
  for (auto [na, nw, e, c] : {Point{1, 1, 8, 4}, Point{1, 2, 8, 2},
                              Point{2, 2, 16, 4}, Point{3, 3, 16, 4}}) {
    ConvOptions o;
    o.prec = {na, nw};
    o.elem_bits = e;
    auto in = make_random_tensor(derive_seed(930, na * 16 + nw), c, 7, 9, na);
    auto k = make_random_tensor(derive_seed(931, na * 16 + nw), c, 3, 3, nw);
    auto run = run_variant(ConvVariant::kUlppackNative, in, k, o);
    auto cmp = compare_with_oracle(run, conv2d_oracle(in, k));
    CHECK(cmp.verdict == MatchVerdict::kExact);
    CHECK(run.budget == safe_accum_budget(o.prec, e, AccumMode::kNative));
    CHECK(run.conv_counters.issues_of(Opcode::kVsrlVI) > 0);
    CHECK(run.conv_counters.issues_of(Opcode::kVsrlVI) ==
          run.conv_counters.issues_of(Opcode::kVaddVV));
  }
}

TEST_CASE("native with budget one equals the fused instruction bit for bit") {
  for (int e : {8, 16}) {
    ConvOptions o;
    o.prec = {1, 2};
    o.elem_bits = e;
    auto in = make_random_tensor(derive_seed(940, e), 3, 6, 8, 1);
    auto k = make_random_tensor(derive_seed(941, e), 3, 2, 2, 2);
    auto fused = run_variant(ConvVariant::kUlppackVmacsr, in, k, o);
    o.budget_override = 1;
    auto native = run_variant(ConvVariant::kUlppackNative, in, k, o);
    CHECK(native.output == fused.output);
    CHECK(native.budget == 1);
  }
}

TEST_CASE("published budget corrupts an all-max chain the safe budget survives") {
  // 16 channels of 1x1 taps pile exactly 8 products into one chain at E=8;
  // 256 channels pile exactly 128 at E=16. One deeper than safe breaks both.
  struct Case { int e, c; };
  for (auto [e, c] : {Case{8, 16}, Case{16, 256}}) {
    auto in = make_allmax_tensor(c, 4, 5, 1);
    auto k = make_allmax_tensor(c, 1, 1, 1);
    auto oracle = conv2d_oracle(in, k);
    ConvOptions o;
    o.prec = {1, 1};
    o.elem_bits = e;
    o.budget_policy = BudgetPolicy::kPaper;
    auto broken = run_variant(ConvVariant::kUlppackNative, in, k, o);
    CHECK(broken.budget == published_accum_budget(e));
    CHECK(compare_with_oracle(broken, oracle).verdict == MatchVerdict::kMismatch);
    o.budget_policy = BudgetPolicy::kConservative;
    auto safe = run_variant(ConvVariant::kUlppackNative, in, k, o);
    CHECK(compare_with_oracle(safe, oracle).verdict == MatchVerdict::kExact);
  }
}

TEST_CASE("region enforcement rejects inadmissible precision") {
  auto in = make_allmax_tensor(2, 5, 6, 2);
  auto k = make_allmax_tensor(2, 2, 2, 2);
  ConvOptions o;
  o.prec = {2, 2};
  o.elem_bits = 8;
  CHECK_THROWS_AS(run_variant(ConvVariant::kUlppackVmacsr, in, k, o),
                  RegionError);
  CHECK_THROWS_AS(run_variant(ConvVariant::kUlppackNative, in, k, o),
                  RegionError);
  // same precision is admissible one width up
  o.elem_bits = 16;
  auto run = run_variant(ConvVariant::kUlppackVmacsr, in, k, o);
  CHECK(compare_with_oracle(run, conv2d_oracle(in, k)).verdict ==
        MatchVerdict::kExact);
}

TEST_CASE("disabling enforcement runs the point and reports the damage") {
  auto in = make_allmax_tensor(2, 5, 6, 2);
  auto k = make_allmax_tensor(2, 2, 2, 2);
  ConvOptions o;
  o.prec = {2, 2};
  o.elem_bits = 8;
  o.enforce_region = false;
  auto run = run_variant(ConvVariant::kUlppackVmacsr, in, k, o);
  auto cmp = compare_with_oracle(run, conv2d_oracle(in, k));
  CHECK(cmp.verdict == MatchVerdict::kMismatch);
  CHECK(cmp.first_mismatch.has_value());
}

TEST_CASE("wraparound outputs are exact modulo the element width") {
  // every output is 32*9*3 = 864 >= 256, still exact mod 2^8
  auto in = make_allmax_tensor(32, 5, 6, 1);
  auto k = make_allmax_tensor(32, 3, 3, 2);
  ConvOptions o;
  o.prec = {1, 2};
  o.elem_bits = 8;
  auto run = run_variant(ConvVariant::kUlppackVmacsr, in, k, o);
  auto oracle = conv2d_oracle(in, k);
  auto cmp = compare_with_oracle(run, oracle);
  CHECK(cmp.verdict == MatchVerdict::kExactModuloSew);
  CHECK(cmp.overflow.size() == oracle.size());
  CHECK(cmp.overflow.front().value == 864);
}

TEST_CASE("overflow monitor flags exactly the saturating positions") {
  ConvShape s{1, 1, 3, 1, 1};
  std::vector<uint64_t> oracle = {255, 256, 70000};
  auto at8 = overflow_monitor(oracle, s, 8);
  REQUIRE(at8.size() == 2);
  CHECK(at8[0].x == 1);
  CHECK(at8[1].x == 2);
  auto at16 = overflow_monitor(oracle, s, 16);
  REQUIRE(at16.size() == 1);
  CHECK(at16[0].value == 70000);
  CHECK(overflow_monitor(oracle, s, 32).empty());
}

TEST_CASE("conv loop traffic counts follow the loop structure") {
  int c = 4, h = 8, w = 10, kh = 3, kw = 3;
  auto in = make_random_tensor(950, c, h, w, 1);
  auto k = make_random_tensor(951, c, kh, kw, 1);
  ConvOptions o;
  o.prec = {1, 1};
  o.elem_bits = 8;

  auto fused = run_variant(ConvVariant::kUlppackVmacsr, in, k, o);
  REQUIRE(fused.column_tiles == 1);
  const auto& cc = fused.conv_counters;
  int pc = c / 2, outh = h - kh + 1;
  CHECK(cc.issues_of(Opcode::kVle) == static_cast<uint64_t>(h * pc));
  CHECK(cc.issues_of(Opcode::kScalarLoad) ==
        static_cast<uint64_t>(h * pc * kh * kw));
  CHECK(cc.issues_of(Opcode::kVse) == static_cast<uint64_t>(outh));
  CHECK(cc.issues_of(Opcode::kVslidedown) == static_cast<uint64_t>(h * pc * kw));
  CHECK(cc.issues_of(Opcode::kVmacsrVX) ==
        static_cast<uint64_t>(h * pc * kh * kw));
  CHECK(cc.issues_of(Opcode::kVmvI) == static_cast<uint64_t>(h));
  CHECK(cc.issues_of(Opcode::kVmv) == static_cast<uint64_t>(h * (kh - 1)));

  auto base = run_variant(ConvVariant::kInt16, in, k);
  CHECK(base.conv_counters.issues_of(Opcode::kVle) ==
        static_cast<uint64_t>(h * c));
  CHECK(base.conv_counters.issues_of(Opcode::kScalarLoad) ==
        static_cast<uint64_t>(h * c * kh * kw));
  CHECK(base.conv_counters.issues_of(Opcode::kVse) ==
        static_cast<uint64_t>(outh));
}

TEST_CASE("column tiling splits wide outputs and stays exact") {
  MachineConfig small;
  small.vlen_bits = 256;  // 32 bytes per register at SEW 8
  ConvShape s{2, 6, 70, 2, 3};
  auto in = make_random_tensor(960, s.channels, s.height, s.width, 1);
  auto k = make_random_tensor(961, s.channels, s.kh, s.kw, 1);
  ConvOptions o;
  o.prec = {1, 1};
  o.elem_bits = 8;
  VectorMachine m = make_conv_machine(ConvVariant::kUlppackVmacsr, s, 8, small);
  auto run = run_conv2d(m, ConvVariant::kUlppackVmacsr, in, k, o);
  // 68 output columns in tiles of 30
  CHECK(run.column_tiles == 3);
  CHECK(run.conv_counters.issues_of(Opcode::kVle) ==
        static_cast<uint64_t>(3 * s.height * 1));
  CHECK(compare_with_oracle(run, conv2d_oracle(in, k)).verdict ==
        MatchVerdict::kExact);
}

TEST_CASE("prepacked weights skip the weight packing traffic only") {
  auto in = make_random_tensor(970, 4, 6, 8, 1);
  auto k = make_random_tensor(971, 4, 3, 3, 2);
  ConvOptions o;
  o.prec = {1, 2};
  o.elem_bits = 8;
  auto packed_in_sim = run_variant(ConvVariant::kUlppackVmacsr, in, k, o);
  o.prepacked_weights = true;
  auto host_packed = run_variant(ConvVariant::kUlppackVmacsr, in, k, o);
  CHECK(host_packed.output == packed_in_sim.output);
  CHECK(host_packed.instructions() < packed_in_sim.instructions());
  CHECK(host_packed.conv_counters.instructions_total ==
        packed_in_sim.conv_counters.instructions_total);
}

TEST_CASE("machine reuse leaves no residue") {
  ConvOptions o;
  o.prec = {1, 1};
  o.elem_bits = 8;
  auto in_a = make_random_tensor(980, 2, 6, 8, 1);
  auto k_a = make_random_tensor(981, 2, 3, 3, 1);
  auto in_b = make_random_tensor(982, 2, 6, 8, 1);
  auto k_b = make_random_tensor(983, 2, 3, 3, 1);
  VectorMachine m =
      make_conv_machine(ConvVariant::kUlppackVmacsr, shape_of(in_a, k_a), 8);
  auto first = run_conv2d(m, ConvVariant::kUlppackVmacsr, in_a, k_a, o);
  auto other = run_conv2d(m, ConvVariant::kUlppackVmacsr, in_b, k_b, o);
  auto again = run_conv2d(m, ConvVariant::kUlppackVmacsr, in_a, k_a, o);
  CHECK(compare_with_oracle(other, conv2d_oracle(in_b, k_b)).verdict ==
        MatchVerdict::kExact);
  CHECK(again.output == first.output);
  CHECK(again.conv_counters.instructions_total ==
        first.conv_counters.instructions_total);
}

TEST_CASE("odd channel counts pad with a zero channel") {
  for (int c : {1, 3, 5}) {
    ConvOptions o;
    o.prec = {2, 2};
    o.elem_bits = 16;
    auto in = make_random_tensor(derive_seed(990, c), c, 6, 7, 2);
    auto k = make_random_tensor(derive_seed(991, c), c, 2, 3, 2);
    auto run = run_variant(ConvVariant::kUlppackVmacsr, in, k, o);
    CHECK(compare_with_oracle(run, conv2d_oracle(in, k)).verdict ==
          MatchVerdict::kExact);
  }
}

TEST_CASE("fused variant needs fewer instructions than native") {
  auto in = make_random_tensor(1000, 4, 8, 10, 1);
  auto k = make_random_tensor(1001, 4, 3, 3, 1);
  ConvOptions o;
  o.prec = {1, 1};
  o.elem_bits = 8;
  auto fused = run_variant(ConvVariant::kUlppackVmacsr, in, k, o);
  auto native = run_variant(ConvVariant::kUlppackNative, in, k, o);
  CHECK(fused.output == native.output);
  CHECK(fused.instructions() < native.instructions());
  CHECK(fused.conv_counters.instructions_total <
        native.conv_counters.instructions_total);
}

TEST_CASE("kernel height is capped by the slot file") {
  auto in = make_random_tensor(1010, 1, 14, 8, 1);
  ConvOptions o;
  o.prec = {1, 1};
  o.elem_bits = 16;
  auto tall_ok = make_random_tensor(1011, 1, 12, 2, 1);
  auto run = run_variant(ConvVariant::kUlppackVmacsr, in, tall_ok, o);
  CHECK(compare_with_oracle(run, conv2d_oracle(in, tall_ok)).verdict ==
        MatchVerdict::kExact);
  auto too_tall = make_random_tensor(1012, 1, 13, 2, 1);
  CHECK_THROWS_AS(run_variant(ConvVariant::kUlppackVmacsr, in, too_tall, o),
                  ConfigError);
}

TEST_CASE("configuration errors are rejected up front") {
  auto in = make_random_tensor(1020, 2, 6, 6, 1);
  auto k = make_random_tensor(1021, 2, 3, 3, 1);
  ConvOptions o;
  o.prec = {1, 1};
  o.elem_bits = 8;

  auto k_wrong_c = make_random_tensor(1022, 3, 3, 3, 1);
  CHECK_THROWS_AS(shape_of(in, k_wrong_c), ConfigError);

  auto k_too_wide = make_random_tensor(1023, 2, 3, 7, 1);
  CHECK_THROWS_AS(run_variant(ConvVariant::kUlppackVmacsr, in, k_too_wide, o),
                  ConfigError);

  MachineConfig tiny_cfg;
  tiny_cfg.mem_bytes = 64;
  VectorMachine tiny(tiny_cfg);
  CHECK_THROWS_AS(run_conv2d(tiny, ConvVariant::kUlppackVmacsr, in, k, o),
                  ConfigError);

  ConvOptions narrow;
  narrow.prec = {1, 1};
  narrow.elem_bits = 16;
  auto wide_vals = make_random_tensor(1024, 2, 6, 6, 3);
  CHECK_THROWS_AS(
      run_variant(ConvVariant::kUlppackVmacsr, wide_vals, k, narrow),
      ConfigError);

  ConvOptions bad_override;
  bad_override.budget_override = 2;
  CHECK_THROWS_AS(run_variant(ConvVariant::kInt16, in, k, bad_override),
                  ConfigError);
}

}  // TEST_SUITE
