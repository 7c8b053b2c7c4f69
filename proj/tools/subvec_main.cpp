#include <CLI11.hpp>

#include <cstdio>
#include <fstream>
#include <iostream>
#include <set>
#include <string>
#include <vector>

#include "subvec/errors.hpp"
#include "subvec/fixtures.hpp"
#include "subvec/isa.hpp"
#include "subvec/kernels.hpp"
#include "subvec/kvconfig.hpp"
#include "subvec/perfmodel.hpp"
#include "subvec/tensor_io.hpp"

namespace {

using namespace subvec;

constexpr int kExitMismatch = 1;
constexpr int kExitRegion = 2;
constexpr int kExitUsage = 64;

ConvVariant parse_variant(const std::string& name) {
  if (name == "int16") return ConvVariant::kInt16;
  if (name == "native" || name == "ulppack-native") {
    return ConvVariant::kUlppackNative;
  }
  if (name == "vmacsr" || name == "ulppack-vmacsr") {
    return ConvVariant::kUlppackVmacsr;
  }
  throw ConfigError("unknown variant '" + name +
                    "' (expected int16, native, or vmacsr)");
}

BudgetPolicy parse_policy(const std::string& name) {
  if (name == "conservative") return BudgetPolicy::kConservative;
  if (name == "paper") return BudgetPolicy::kPaper;
  throw ConfigError("unknown budget policy '" + name +
                    "' (expected conservative or paper)");
}

// One simulation point plus machine geometry, fed by flags over file values.
struct PointConfig {
  std::string variant = "vmacsr";
  int e = 8;
  int na = 1, nw = 1;
  int c = 8;
  int h = 32, w = 32;
  int fh = 3, fw = 3;
  uint64_t seed = 1;
  std::string budget_policy = "conservative";
  int budget = 0;
  bool prepacked = false;
  unsigned vlen = 4096, lanes = 4;
  unsigned threads = 1;
};

constexpr std::initializer_list<const char*> kPointKeys = {
    "variant", "e",  "na", "nw",   "c",           "h",
    "w",       "hw", "fh", "fw",   "k",           "seed",
    "budget",  "budget_policy",    "prepacked_weights"};

// CLI flags that were explicitly given win over config-file keys; within one
// source the square shorthands hw/k expand to the sides they stand for.
struct PointFlags {
  CLI::App* sub = nullptr;
  PointConfig flags;
  int hw = 0, k = 0;
  std::string config_path;

  void attach(CLI::App* s, bool with_machine) {
    sub = s;
    s->add_option("--variant", flags.variant,
                  "conv variant: int16, native, vmacsr");
    s->add_option("--e", flags.e, "packed element width, 8 or 16");
    s->add_option("--na", flags.na, "activation bits");
    s->add_option("--nw", flags.nw, "weight bits");
    s->add_option("--c", flags.c, "input channels");
    s->add_option("--height", flags.h, "input height");
    s->add_option("--width", flags.w, "input width");
    s->add_option("--hw", hw, "square input side (sets --height and --width)");
    s->add_option("--fh", flags.fh, "kernel height");
    s->add_option("--fw", flags.fw, "kernel width");
    s->add_option("--k", k, "square kernel side (sets --fh and --fw)");
    s->add_option("--seed", flags.seed, "fixture seed");
    s->add_option("--budget-policy", flags.budget_policy,
                  "native accumulation budget: conservative or paper");
    s->add_option("--budget", flags.budget,
                  "explicit native flush threshold (diagnostics)");
    s->add_flag("--prepacked-weights", flags.prepacked,
                "pack weights on the host instead of in the simulation");
    s->add_option("--config", config_path,
                  "key = value file supplying any of the flags above");
    if (with_machine) {
      s->add_option("--vlen", flags.vlen, "vector register bits");
      s->add_option("--lanes", flags.lanes, "execution lanes");
    }
  }

  bool given(const char* flag) const { return sub->count(flag) > 0; }

  PointConfig resolve() const {
    PointConfig out = flags;
    if (given("--hw")) {
      if (!given("--height")) out.h = hw;
      if (!given("--width")) out.w = hw;
    }
    if (given("--k")) {
      if (!given("--fh")) out.fh = k;
      if (!given("--fw")) out.fw = k;
    }
    if (config_path.empty()) return out;

    auto blocks = load_kv_file(config_path);
    if (blocks.size() != 1) {
      throw ConfigError("config file must hold exactly one block; use bench "
                        "--sweep for block lists");
    }
    const KvBlock& b = blocks[0];
    require_known_keys(b, kPointKeys);
    auto want = [&](const char* key, const char* flag) {
      return b.has(key) && !given(flag);
    };
    if (want("variant", "--variant")) out.variant = b.get("variant");
    if (want("e", "--e")) out.e = static_cast<int>(b.get_int("e"));
    if (want("na", "--na")) out.na = static_cast<int>(b.get_int("na"));
    if (want("nw", "--nw")) out.nw = static_cast<int>(b.get_int("nw"));
    if (want("c", "--c")) out.c = static_cast<int>(b.get_int("c"));
    if (want("seed", "--seed")) {
      out.seed = static_cast<uint64_t>(b.get_int("seed"));
    }
    if (want("budget", "--budget")) {
      out.budget = static_cast<int>(b.get_int("budget"));
    }
    if (want("budget_policy", "--budget-policy")) {
      out.budget_policy = b.get("budget_policy");
    }
    if (b.has("prepacked_weights") && !given("--prepacked-weights")) {
      out.prepacked = b.get_bool_or("prepacked_weights", false);
    }
    bool h_flagged = given("--height") || given("--hw");
    bool w_flagged = given("--width") || given("--hw");
    if (!h_flagged) {
      if (b.has("h")) out.h = static_cast<int>(b.get_int("h"));
      else if (b.has("hw")) out.h = static_cast<int>(b.get_int("hw"));
    }
    if (!w_flagged) {
      if (b.has("w")) out.w = static_cast<int>(b.get_int("w"));
      else if (b.has("hw")) out.w = static_cast<int>(b.get_int("hw"));
    }
    bool fh_flagged = given("--fh") || given("--k");
    bool fw_flagged = given("--fw") || given("--k");
    if (!fh_flagged) {
      if (b.has("fh")) out.fh = static_cast<int>(b.get_int("fh"));
      else if (b.has("k")) out.fh = static_cast<int>(b.get_int("k"));
    }
    if (!fw_flagged) {
      if (b.has("fw")) out.fw = static_cast<int>(b.get_int("fw"));
      else if (b.has("k")) out.fw = static_cast<int>(b.get_int("k"));
    }
    return out;
  }
};

MachineConfig machine_of(const PointConfig& cfg) {
  MachineConfig m;
  m.vlen_bits = cfg.vlen;
  m.lanes = cfg.lanes;
  return m;
}

int cmd_verify(const PointConfig& cfg) {
  ConvVariant variant = parse_variant(cfg.variant);
  ConvShape shape{cfg.c, cfg.h, cfg.w, cfg.fh, cfg.fw};
  validate_shape(shape);
  ConvOptions o;
  o.prec = {cfg.na, cfg.nw};
  o.elem_bits = cfg.e;
  o.budget_policy = parse_policy(cfg.budget_policy);
  o.budget_override = cfg.budget;
  o.prepacked_weights = cfg.prepacked;

  QuantTensor input = make_random_tensor(derive_seed(cfg.seed, 0), cfg.c,
                                         cfg.h, cfg.w, cfg.na);
  QuantTensor kernel = make_random_tensor(derive_seed(cfg.seed, 1), cfg.c,
                                          cfg.fh, cfg.fw, cfg.nw);
  VectorMachine m = make_conv_machine(variant, shape, cfg.e, machine_of(cfg));
  ConvRun run = run_conv2d(m, variant, input, kernel, o);
  OracleComparison cmp = compare_with_oracle(run, conv2d_oracle(input, kernel));
  PerfReport rep = make_report(run);

  std::printf("variant         %s\n", variant_name(variant));
  std::printf("shape           C=%d H=%d W=%d Fh=%d Fw=%d (out %dx%d)\n",
              shape.channels, shape.height, shape.width, shape.kh, shape.kw,
              shape.out_height(), shape.out_width());
  std::printf("precision       Na=%d Nw=%d (SEW %u)\n", cfg.na, cfg.nw,
              run.sew);
  if (run.budget == kUnboundedBudget) {
    std::printf("budget          unbounded\n");
  } else {
    std::printf("budget          %d\n", run.budget);
  }
  std::printf("column tiles    %d\n", run.column_tiles);
  std::printf("instructions    %llu (conv loop %llu)\n",
              static_cast<unsigned long long>(run.counters.instructions_total),
              static_cast<unsigned long long>(
                  run.conv_counters.instructions_total));
  std::printf("modeled cycles  %llu\n",
              static_cast<unsigned long long>(rep.modeled_cycles));
  std::printf("ops per cycle   %.4f\n", rep.ops_per_cycle);
  std::printf("utilization     %.4f\n", rep.utilization);
  std::printf("oracle match    %s\n", verdict_name(cmp.verdict));
  std::printf("overflow flags  %zu\n", cmp.overflow.size());
  if (cmp.first_mismatch) {
    const OverflowRecord& fm = *cmp.first_mismatch;
    std::printf("first mismatch  (%d, %d) simulated %llu\n", fm.y, fm.x,
                static_cast<unsigned long long>(fm.value));
  }
  switch (cmp.verdict) {
    case MatchVerdict::kExact: return 0;
    case MatchVerdict::kExactModuloSew:
      std::fprintf(stderr,
                   "accumulator overflow: %zu outputs exceed 2^%u; "
                   "rerun at a wider SEW or shallower shape\n",
                   cmp.overflow.size(), run.sew);
      return kExitRegion;
    case MatchVerdict::kMismatch: return kExitMismatch;
  }
  return kExitMismatch;
}

std::vector<SweepPoint> expand_sweep_block(const KvBlock& b) {
  require_known_keys(b, kPointKeys);
  SweepPoint base;
  base.variant = parse_variant(b.get("variant"));
  base.elem_bits = static_cast<int>(b.get_int_or("e", 8));
  if (b.has("budget")) {
    throw ConfigError("sweep blocks take budget_policy, not budget");
  }
  if (b.has("seed")) {
    throw ConfigError("the sweep seed is global; pass --seed instead");
  }
  ConvShape s;
  s.channels = static_cast<int>(b.get_int_or("c", 8));
  long hw = b.get_int_or("hw", 32);
  s.height = static_cast<int>(b.has("h") ? b.get_int("h") : hw);
  s.width = static_cast<int>(b.has("w") ? b.get_int("w") : hw);
  long k = b.get_int_or("k", 3);
  s.kh = static_cast<int>(b.has("fh") ? b.get_int("fh") : k);
  s.kw = static_cast<int>(b.has("fw") ? b.get_int("fw") : k);
  validate_shape(s);
  base.shape = s;
  base.budget_policy = parse_policy(b.get_or("budget_policy", "conservative"));
  base.prepacked_weights = b.get_bool_or("prepacked_weights", false);
  auto [na_lo, na_hi] = b.get_range_or("na", 1, 1);
  auto [nw_lo, nw_hi] = b.get_range_or("nw", 1, 1);
  if (na_lo < 1 || na_hi > 8 || nw_lo < 1 || nw_hi > 8) {
    throw ConfigError("na and nw ranges must stay inside [1, 8]");
  }
  std::vector<SweepPoint> out;
  for (long na = na_lo; na <= na_hi; ++na) {
    for (long nw = nw_lo; nw <= nw_hi; ++nw) {
      base.prec = {static_cast<int>(na), static_cast<int>(nw)};
      out.push_back(base);
    }
  }
  return out;
}

int cmd_bench(const PointFlags& pf, const std::string& sweep_path,
              const std::string& out_path) {
  PointConfig cfg = pf.resolve();
  std::vector<SweepPoint> grid;
  if (!sweep_path.empty()) {
    for (const char* pt : {"--variant", "--e", "--na", "--nw", "--c", "--height",
                           "--width", "--hw", "--fh", "--fw", "--k", "--budget",
                           "--budget-policy", "--prepacked-weights"}) {
      if (pf.given(pt)) {
        throw ConfigError(std::string("point flag ") + pt +
                          " conflicts with --sweep");
      }
    }
    auto blocks = load_kv_file(sweep_path);
    if (blocks.empty()) throw ConfigError("sweep file has no blocks");
    for (const KvBlock& b : blocks) {
      auto points = expand_sweep_block(b);
      grid.insert(grid.end(), points.begin(), points.end());
    }
  } else {
    if (cfg.budget != 0) {
      throw ConfigError("bench reports policy budgets; --budget is for verify");
    }
    SweepPoint p;
    p.variant = parse_variant(cfg.variant);
    p.elem_bits = cfg.e;
    p.prec = {cfg.na, cfg.nw};
    p.shape = {cfg.c, cfg.h, cfg.w, cfg.fh, cfg.fw};
    validate_shape(p.shape);
    p.budget_policy = parse_policy(cfg.budget_policy);
    p.prepacked_weights = cfg.prepacked;
    grid.push_back(p);
  }

  auto rows = run_sweep(grid, machine_of(cfg), cfg.seed, cfg.threads);
  if (out_path.empty()) {
    write_sweep_csv(std::cout, rows);
  } else {
    std::ofstream out(out_path);
    if (!out) throw IoError("cannot open " + out_path + " for writing");
    write_sweep_csv(out, rows);
    if (!out) throw IoError("sweep CSV write failed");
  }
  std::cerr << sweep_summary(rows);
  return 0;
}

int cmd_region(int e, const std::string& mode_name, bool csv) {
  AccumMode mode;
  if (mode_name == "vmacsr") {
    mode = AccumMode::kVmacsr;
  } else if (mode_name == "native") {
    mode = AccumMode::kNative;
  } else {
    throw ConfigError("unknown mode '" + mode_name +
                      "' (expected vmacsr or native)");
  }
  RegionMap map = region_map(e, mode);
  if (csv) {
    std::printf("na,nw,admissible\n");
    for (int na = 1; na <= 8; ++na) {
      for (int nw = 1; nw <= 8; ++nw) {
        std::printf("%d,%d,%d\n", na, nw, map.admissible(na, nw) ? 1 : 0);
      }
    }
    return 0;
  }
  std::printf("admissible (Na, Nw) at E=%d, %s accumulation\n", e,
              mode_name.c_str());
  std::printf("      ");
  for (int nw = 1; nw <= 8; ++nw) std::printf("Nw=%d ", nw);
  std::printf("\n");
  for (int na = 1; na <= 8; ++na) {
    std::printf("Na=%d  ", na);
    for (int nw = 1; nw <= 8; ++nw) {
      std::printf("%4s ", map.admissible(na, nw) ? "x" : ".");
    }
    std::printf("\n");
  }
  return 0;
}

int cmd_encode(const std::string& form, unsigned vd, unsigned s1, unsigned vs2,
               bool masked) {
  bool vx;
  if (form == "vx") {
    vx = true;
  } else if (form == "vv") {
    vx = false;
  } else {
    throw ConfigError("unknown form '" + form + "' (expected vv or vx)");
  }
  uint32_t word = encode_vmacsr(vx, vd, s1, vs2, masked);
  Instruction inst = decode_word(word);
  auto bytes = to_le_bytes(word);
  std::printf("%s\n", format_instruction(inst).c_str());
  std::printf("word    0x%08X\n", word);
  std::printf("bytes   %02X %02X %02X %02X  (little-endian)\n", bytes[0],
              bytes[1], bytes[2], bytes[3]);
  std::printf("funct6  0b%c%c%c%c%c%c\n", (word >> 31 & 1) + '0',
              (word >> 30 & 1) + '0', (word >> 29 & 1) + '0',
              (word >> 28 & 1) + '0', (word >> 27 & 1) + '0',
              (word >> 26 & 1) + '0');
  std::printf("vm      %u (%s)\n", word >> 25 & 1,
              masked ? "masked" : "unmasked");
  std::printf("vs2     v%u\n", word >> 20 & 31);
  std::printf("%s     %s%u\n", vx ? "rs1" : "vs1", vx ? "x" : "v",
              word >> 15 & 31);
  std::printf("funct3  0b%c%c%c (%s)\n", (word >> 14 & 1) + '0',
              (word >> 13 & 1) + '0', (word >> 12 & 1) + '0',
              vx ? "OPMVX" : "OPMVV");
  std::printf("vd      v%u\n", word >> 7 & 31);
  std::printf("opcode  0b1010111 (0x%02X)\n", word & 0x7F);
  std::printf("decode  %s\n", format_instruction(inst).c_str());
  return 0;
}

int cmd_gen_fixture(const std::string& out_path, const std::string& format,
                    int c, int h, int w, int hw_flag, int bits, uint64_t seed,
                    bool hw_given, bool h_given, bool w_given) {
  if (hw_given) {
    if (!h_given) h = hw_flag;
    if (!w_given) w = hw_flag;
  }
  QuantTensor t = make_random_tensor(seed, c, h, w, bits);
  if (format == "bin") {
    save_tensor(out_path, t);
  } else if (format == "csv") {
    save_tensor_csv(out_path, t);
  } else {
    throw ConfigError("unknown format '" + format + "' (expected bin or csv)");
  }
  std::printf("wrote %s: C=%d H=%d W=%d bits=%d seed=%llu (%s)\n",
              out_path.c_str(), c, h, w, bits,
              static_cast<unsigned long long>(seed), format.c_str());
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"bit-exact simulator for packed sub-byte convolution on a "
               "vector machine"};
  app.require_subcommand(1);

  auto* verify = app.add_subcommand(
      "verify", "run one conv point against the 64-bit oracle");
  PointFlags vf;
  vf.attach(verify, true);

  auto* bench = app.add_subcommand(
      "bench", "emit the performance-model CSV for a point or a sweep file");
  PointFlags bf;
  bf.attach(bench, true);
  std::string sweep_path, out_path;
  bench->add_option("--sweep", sweep_path, "sweep file of key = value blocks");
  bench->add_option("--out", out_path, "write CSV here instead of stdout");
  bench->add_option("--threads", bf.flags.threads, "concurrent sweep workers");

  auto* region = app.add_subcommand(
      "region", "print the 8x8 (Na, Nw) admissibility grid");
  int region_e = 8;
  std::string region_mode = "vmacsr";
  bool region_csv = false;
  region->add_option("--e", region_e, "element width, 8 or 16");
  region->add_option("--mode", region_mode, "vmacsr or native");
  region->add_flag("--csv", region_csv, "long-form CSV instead of the grid");

  auto* encode = app.add_subcommand(
      "encode", "print the multiply-shift-accumulate instruction encoding");
  std::string enc_form = "vv";
  unsigned enc_vd = 0, enc_s1 = 1, enc_vs2 = 2;
  bool enc_masked = false;
  encode->add_option("--form", enc_form, "vv or vx");
  encode->add_option("--vd", enc_vd, "destination register");
  encode->add_option("--vs1", enc_s1, "vector source (vv form)");
  encode->add_option("--rs1", enc_s1, "scalar source (vx form)");
  encode->add_option("--vs2", enc_vs2, "vector source 2");
  encode->add_flag("--masked", enc_masked, "set the mask bit");

  auto* gen = app.add_subcommand("gen-fixture",
                                 "write a seeded random tensor fixture");
  std::string gen_out, gen_format = "bin";
  int gen_c = 8, gen_h = 32, gen_w = 32, gen_hw = 0, gen_bits = 4;
  uint64_t gen_seed = 1;
  gen->add_option("--out", gen_out, "output path")->required();
  gen->add_option("--format", gen_format, "bin or csv");
  gen->add_option("--c", gen_c, "channels");
  gen->add_option("--height", gen_h, "height");
  gen->add_option("--width", gen_w, "width");
  gen->add_option("--hw", gen_hw, "square side (sets --height and --width)");
  gen->add_option("--bits", gen_bits, "value bits, 1 to 8");
  gen->add_option("--seed", gen_seed, "fixture seed");

  try {
    app.parse(argc, argv);
    if (verify->parsed()) return cmd_verify(vf.resolve());
    if (bench->parsed()) return cmd_bench(bf, sweep_path, out_path);
    if (region->parsed()) return cmd_region(region_e, region_mode, region_csv);
    if (encode->parsed()) {
      return cmd_encode(enc_form, enc_vd, enc_s1, enc_vs2, enc_masked);
    }
    if (gen->parsed()) {
      return cmd_gen_fixture(gen_out, gen_format, gen_c, gen_h, gen_w, gen_hw,
                             gen_bits, gen_seed, gen->count("--hw") > 0,
                             gen->count("--height") > 0, gen->count("--width") > 0);
    }
    return kExitUsage;
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? 0 : kExitUsage;
  } catch (const RegionError& e) {
    std::fprintf(stderr, "region violation: %s\n", e.what());
    return kExitRegion;
  } catch (const ConfigError& e) {
    std::fprintf(stderr, "usage error: %s\n", e.what());
    return kExitUsage;
  } catch (const IoError& e) {
    std::fprintf(stderr, "io error: %s\n", e.what());
    return kExitUsage;
  } catch (const Error& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitMismatch;
  }
}
