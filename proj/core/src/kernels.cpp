#include "subvec/kernels.hpp"

#include <algorithm>
#include <cstdio>

#include "subvec/errors.hpp"
#include "subvec/isa.hpp"

namespace subvec {
namespace {

constexpr int kMaxKernelRows = 12;

// Register map. Slots are the wide accumulators, one per in-flight output
// row; locals hold raw packed products between extractions in native mode.
constexpr unsigned kRowReg = 0;     // v0: current input row segment
constexpr unsigned kSlotBase = 1;   // v1..v12
constexpr unsigned kLocalBase = 13; // v13..v24
constexpr unsigned kScratch = 25;   // v25: extraction scratch
constexpr unsigned kColBase = 1;    // x1..x12: one kernel column
constexpr unsigned kScaleReg = 13;  // x13: packing constant 2^(E/2)

struct Arena {
  uint64_t next = 0;
  uint32_t take(uint64_t bytes) {
    uint64_t base = next;
    next += (bytes + 7) / 8 * 8;
    if (next > 0xFFFFFFFFull) throw ConfigError("memory layout exceeds 4 GiB");
    return static_cast<uint32_t>(base);
  }
};

struct Layout {
  unsigned esz = 2;
  int pc = 0;  // channel count the conv loop sees
  uint32_t consts = 0, input = 0, kernel = 0;
  uint32_t packed_in = 0, packed_k = 0, output = 0;
  uint64_t total = 0;
};

Layout plan_layout(ConvVariant variant, const ConvShape& s, int elem_bits) {
  Layout l;
  bool packed = variant != ConvVariant::kInt16;
  l.esz = packed ? static_cast<unsigned>(elem_bits) / 8 : 2;
  l.pc = packed ? (s.channels + 1) / 2 : s.channels;
  Arena a;
  l.consts = a.take(8);
  l.input = a.take(static_cast<uint64_t>(s.channels) * s.height * s.width * l.esz);
  l.kernel = a.take(static_cast<uint64_t>(s.channels) * s.kh * s.kw * l.esz);
  if (packed) {
    l.packed_in = a.take(static_cast<uint64_t>(l.pc) * s.height * s.width * l.esz);
    l.packed_k = a.take(static_cast<uint64_t>(l.pc) * s.kh * s.kw * l.esz);
  }
  l.output = a.take(static_cast<uint64_t>(s.out_height()) * s.out_width() * l.esz);
  l.total = a.next;
  return l;
}

// Emits vsetvl only when the requested shape differs from the last one this
// builder emitted. The first request always emits, so a program never leans
// on machine state left by an earlier program.
struct Builder {
  std::vector<Instruction> prog;
  unsigned vl = 0, sew = 0;

  void set_vl(unsigned n, unsigned s) {
    if (n != vl || s != sew) {
      prog.push_back(ops::vsetvl(n, s));
      vl = n;
      sew = s;
    }
  }
  void emit(const Instruction& i) { prog.push_back(i); }
};

uint32_t row_addr(uint32_t base, int c, int h, int w, const ConvShape& s,
                  unsigned esz) {
  uint64_t at = base + (static_cast<uint64_t>(c) * s.height + h) * s.width * esz +
                static_cast<uint64_t>(w) * esz;
  return static_cast<uint32_t>(at);
}

// In-simulator P1 packing: pair channels (2k, 2k+1) of an unpacked tensor
// into one packed channel with a single vmacc against the scale constant.
void emit_pack(Builder& b, PackRole role, uint32_t src, uint32_t dst, int ch,
               int rows, int cols, unsigned sew, unsigned vlmax) {
  unsigned esz = sew / 8;
  int pc = (ch + 1) / 2;
  for (int p = 0; p < pc; ++p) {
    int c0 = 2 * p, c1 = 2 * p + 1;
    for (int r = 0; r < rows; ++r) {
      for (int off = 0; off < cols; off += static_cast<int>(vlmax)) {
        unsigned len = std::min<unsigned>(vlmax, static_cast<unsigned>(cols - off));
        b.set_vl(len, sew);
        uint64_t at0 = src + (static_cast<uint64_t>(c0) * rows + r) * cols * esz +
                       static_cast<uint64_t>(off) * esz;
        uint64_t at1 = src + (static_cast<uint64_t>(c1) * rows + r) * cols * esz +
                       static_cast<uint64_t>(off) * esz;
        uint64_t to = dst + (static_cast<uint64_t>(p) * rows + r) * cols * esz +
                      static_cast<uint64_t>(off) * esz;
        if (role == PackRole::kActivation) {
          // element = a0 + scale * a1
          b.emit(ops::vle(1, static_cast<uint32_t>(at0)));
          if (c1 < ch) {
            b.emit(ops::vle(2, static_cast<uint32_t>(at1)));
            b.emit(ops::vmacc_vx(1, kScaleReg, 2));
          }
        } else {
          // element = w1 + scale * w0: the even channel rides the high field
          if (c1 < ch) {
            b.emit(ops::vle(1, static_cast<uint32_t>(at1)));
          } else {
            b.emit(ops::vmv_i(1, 0));
          }
          b.emit(ops::vle(2, static_cast<uint32_t>(at0)));
          b.emit(ops::vmacc_vx(1, kScaleReg, 2));
        }
        b.emit(ops::vse(1, static_cast<uint32_t>(to)));
      }
    }
  }
}

// The conv loop. One pass over input rows per column tile; slot j (1-based)
// accumulates output row h - kh + j and takes kernel row kh - j, so the
// per-column scalar loads are the same at every row. Rows rotate through the
// slot chain once per input row; a slot's register is zeroed the row its
// output row is born and stored kh - 1 rows later. Early rows push products
// into registers whose content drains out unstored.
int emit_conv(Builder& b, ConvVariant variant, const Layout& l,
              const ConvShape& s, unsigned sew, unsigned vlmax, int budget) {
  unsigned esz = sew / 8;
  int fh = s.kh, fw = s.kw;
  int outw = s.out_width();
  bool native = variant == ConvVariant::kUlppackNative;
  bool fused = variant == ConvVariant::kUlppackVmacsr;
  uint32_t rows = variant == ConvVariant::kInt16 ? l.input : l.packed_in;
  uint32_t kbase = variant == ConvVariant::kInt16 ? l.kernel : l.packed_k;
  ConvShape rows_shape = s;
  rows_shape.channels = l.pc;

  int tiles = 0;
  for (int x0 = 0; x0 < outw;) {
    int cols = std::min(outw - x0, static_cast<int>(vlmax) - (fw - 1));
    int vlt = cols + fw - 1;
    ++tiles;
    // per-tile extraction bookkeeping, index 1..fh alongside the slots
    std::vector<int> pending(static_cast<size_t>(fh) + 1, 0);
    std::vector<char> fresh(static_cast<size_t>(fh) + 1, 1);
    for (int h = 0; h < s.height; ++h) {
      b.set_vl(static_cast<unsigned>(vlt), sew);
      b.emit(ops::vmv_i(kSlotBase + fh - 1, 0));
      pending[fh] = 0;
      fresh[fh] = 1;
      for (int c = 0; c < l.pc; ++c) {
        b.emit(ops::vle(kRowReg, row_addr(rows, c, h, x0, rows_shape, esz)));
        for (int i = 0; i < fw; ++i) {
          for (int j = 1; j <= fh; ++j) {
            uint64_t ka = kbase +
                          (static_cast<uint64_t>(c) * fh + (fh - j)) * fw * esz +
                          static_cast<uint64_t>(i) * esz;
            b.emit(ops::scalar_load(kColBase + j - 1, static_cast<uint32_t>(ka),
                                    sew));
          }
          for (int j = 1; j <= fh; ++j) {
            unsigned slot = kSlotBase + j - 1;
            unsigned creg = kColBase + j - 1;
            if (fused) {
              b.emit(ops::vmacsr_vx(slot, creg, kRowReg));
            } else if (!native) {
              b.emit(ops::vmacc_vx(slot, creg, kRowReg));
            } else {
              unsigned local = kLocalBase + j - 1;
              if (fresh[j]) {
                b.emit(ops::vmul_vx(local, creg, kRowReg));
                fresh[j] = 0;
                pending[j] = 1;
              } else {
                b.emit(ops::vmacc_vx(local, creg, kRowReg));
                ++pending[j];
              }
              if (pending[j] >= budget) {
                b.emit(ops::vsrl(kScratch, local, sew / 2));
                b.emit(ops::vadd(slot, slot, kScratch));
                pending[j] = 0;
                fresh[j] = 1;
              }
            }
          }
          b.emit(ops::vslidedown(kRowReg, kRowReg, 1));
        }
      }
      if (h >= fh - 1) {
        if (native && pending[1] > 0) {
          b.emit(ops::vsrl(kScratch, kLocalBase, sew / 2));
          b.emit(ops::vadd(kSlotBase, kSlotBase, kScratch));
          pending[1] = 0;
          fresh[1] = 1;
        }
        uint64_t oa = l.output + (static_cast<uint64_t>(h - fh + 1) * outw + x0) * esz;
        b.set_vl(static_cast<unsigned>(cols), sew);
        b.emit(ops::vse(kSlotBase, static_cast<uint32_t>(oa)));
        b.set_vl(static_cast<unsigned>(vlt), sew);
      }
      for (int j = 1; j < fh; ++j) {
        b.emit(ops::vmv(kSlotBase + j - 1, kSlotBase + j));
        if (native) {
          b.emit(ops::vmv(kLocalBase + j - 1, kLocalBase + j));
          pending[j] = pending[j + 1];
          fresh[j] = fresh[j + 1];
        }
      }
    }
    x0 += cols;
  }
  return tiles;
}

void poke_tensor(VectorMachine& m, const QuantTensor& t, uint32_t base,
                 unsigned sew) {
  unsigned esz = sew / 8;
  for (size_t i = 0; i < t.data.size(); ++i) {
    m.poke_elem(base + static_cast<uint32_t>(i * esz), t.data[i], sew);
  }
}

AccumMode mode_of(ConvVariant v) {
  return v == ConvVariant::kUlppackNative ? AccumMode::kNative
                                          : AccumMode::kVmacsr;
}

}  // namespace

ConvShape shape_of(const QuantTensor& input, const QuantTensor& kernel) {
  if (input.channels != kernel.channels) {
    throw ConfigError("input and kernel channel counts differ");
  }
  ConvShape s{input.channels, input.height, input.width, kernel.height,
              kernel.width};
  validate_shape(s);
  return s;
}

void validate_shape(const ConvShape& s) {
  if (s.channels < 1 || s.height < 1 || s.width < 1 || s.kh < 1 || s.kw < 1) {
    throw ConfigError("conv shape fields must be positive");
  }
  if (s.kh > s.height || s.kw > s.width) {
    throw ConfigError("kernel does not fit inside the input");
  }
}

const char* variant_name(ConvVariant v) {
  switch (v) {
    case ConvVariant::kInt16: return "int16";
    case ConvVariant::kUlppackNative: return "ulppack-native";
    case ConvVariant::kUlppackVmacsr: return "ulppack-vmacsr";
  }
  return "?";
}

const char* verdict_name(MatchVerdict v) {
  switch (v) {
    case MatchVerdict::kExact: return "exact";
    case MatchVerdict::kExactModuloSew: return "exact_mod2sew";
    case MatchVerdict::kMismatch: return "mismatch";
  }
  return "?";
}

std::vector<uint64_t> conv2d_oracle(const QuantTensor& input,
                                    const QuantTensor& kernel) {
  ConvShape s = shape_of(input, kernel);
  std::vector<uint64_t> out(static_cast<size_t>(s.out_height()) * s.out_width());
  for (int y = 0; y < s.out_height(); ++y) {
    for (int x = 0; x < s.out_width(); ++x) {
      uint64_t acc = 0;
      for (int c = 0; c < s.channels; ++c) {
        for (int r = 0; r < s.kh; ++r) {
          for (int i = 0; i < s.kw; ++i) {
            acc += static_cast<uint64_t>(input.at(c, y + r, x + i)) *
                   kernel.at(c, r, i);
          }
        }
      }
      out[static_cast<size_t>(y) * s.out_width() + x] = acc;
    }
  }
  return out;
}

size_t conv_memory_demand(ConvVariant variant, const ConvShape& shape,
                          int elem_bits) {
  validate_shape(shape);
  return plan_layout(variant, shape, elem_bits).total;
}

VectorMachine make_conv_machine(ConvVariant variant, const ConvShape& shape,
                                int elem_bits, const MachineConfig& base) {
  MachineConfig cfg = base;
  size_t need = conv_memory_demand(variant, shape, elem_bits);
  cfg.mem_bytes = std::max<size_t>((need + 4095) / 4096 * 4096, 1 << 20);
  return VectorMachine(cfg);
}

ConvRun run_conv2d(VectorMachine& m, ConvVariant variant,
                   const QuantTensor& input, const QuantTensor& kernel,
                   const ConvOptions& options) {
  ConvShape s = shape_of(input, kernel);
  if (s.kh > kMaxKernelRows) {
    throw ConfigError("kernel height exceeds the accumulator slot count");
  }
  validate_tensor_range(input);
  validate_tensor_range(kernel);

  bool packed = variant != ConvVariant::kInt16;
  unsigned sew = 16;
  int budget = kUnboundedBudget;
  if (packed) {
    validate_elem_bits(options.elem_bits);
    validate_precision(options.prec);
    sew = static_cast<unsigned>(options.elem_bits);
    if (input.bits > options.prec.act_bits ||
        kernel.bits > options.prec.wgt_bits) {
      throw ConfigError("tensor value width exceeds the declared precision");
    }
    if (options.enforce_region) {
      std::string why = region_violation(options.prec, options.elem_bits);
      if (!why.empty()) throw RegionError(why);
    }
    if (variant == ConvVariant::kUlppackNative) {
      budget = options.budget_override > 0
                   ? options.budget_override
                   : budget_for_policy(options.prec, options.elem_bits,
                                       AccumMode::kNative,
                                       options.budget_policy);
      if (budget < 1) {
        throw RegionError(region_violation(options.prec, options.elem_bits));
      }
    }
  } else if (options.budget_override != 0) {
    throw ConfigError("budget override only applies to the native variant");
  }

  Layout l = plan_layout(variant, s, options.elem_bits);
  if (l.total > m.mem_size()) {
    char buf[128];
    std::snprintf(buf, sizeof buf,
                  "machine memory too small: need %llu bytes, have %zu",
                  static_cast<unsigned long long>(l.total), m.mem_size());
    throw ConfigError(buf);
  }
  unsigned vlmax = m.config().max_vl(sew);
  if (static_cast<int>(vlmax) < s.kw) {
    throw ConfigError("vector length too short for the kernel width");
  }

  poke_tensor(m, input, l.input, sew);
  bool pack_weights_in_sim = packed && !options.prepacked_weights;
  if (!packed || pack_weights_in_sim) {
    poke_tensor(m, kernel, l.kernel, sew);
  }
  if (packed) {
    m.poke_elem(l.consts, 1ull << (sew / 2), sew);
    if (options.prepacked_weights) {
      PackedTensor pk = pack_p1(kernel, options.elem_bits, PackRole::kWeight);
      unsigned esz = sew / 8;
      for (size_t i = 0; i < pk.data.size(); ++i) {
        m.poke_elem(l.packed_k + static_cast<uint32_t>(i * esz), pk.data[i],
                    sew);
      }
    }
  }

  Builder pack;
  if (packed) {
    pack.emit(ops::scalar_load(kScaleReg, l.consts, sew));
    emit_pack(pack, PackRole::kActivation, l.input, l.packed_in, s.channels,
              s.height, s.width, sew, vlmax);
    if (pack_weights_in_sim) {
      emit_pack(pack, PackRole::kWeight, l.kernel, l.packed_k, s.channels,
                s.kh, s.kw, sew, vlmax);
    }
  }
  Builder conv;
  int tiles = emit_conv(conv, variant, l, s, sew, vlmax, budget);

  PerfCounters before = m.counters();
  m.run_program(pack.prog);
  PerfCounters mid = m.counters();
  m.run_program(conv.prog);
  PerfCounters after = m.counters();

  ConvRun run;
  run.variant = variant;
  run.shape = s;
  run.options = options;
  run.machine = m.config();
  run.sew = sew;
  run.budget = budget;
  run.column_tiles = tiles;
  run.counters = after - before;
  run.conv_counters = after - mid;
  size_t n = static_cast<size_t>(s.out_height()) * s.out_width();
  run.output.resize(n);
  unsigned esz = sew / 8;
  for (size_t i = 0; i < n; ++i) {
    run.output[i] = m.peek_elem(l.output + static_cast<uint32_t>(i * esz), sew);
  }
  return run;
}

ConvRun conv2d_int16(VectorMachine& m, const QuantTensor& input,
                     const QuantTensor& kernel) {
  return run_conv2d(m, ConvVariant::kInt16, input, kernel, ConvOptions{});
}

ConvRun conv2d_ulppack_native(VectorMachine& m, const QuantTensor& input,
                              const QuantTensor& kernel,
                              const ConvOptions& options) {
  return run_conv2d(m, ConvVariant::kUlppackNative, input, kernel, options);
}

ConvRun conv2d_ulppack_vmacsr(VectorMachine& m, const QuantTensor& input,
                              const QuantTensor& kernel,
                              const ConvOptions& options) {
  return run_conv2d(m, ConvVariant::kUlppackVmacsr, input, kernel, options);
}

std::vector<OverflowRecord> overflow_monitor(
    const std::vector<uint64_t>& oracle_output, const ConvShape& shape,
    unsigned sew) {
  std::vector<OverflowRecord> out;
  uint64_t limit = sew >= 64 ? 0 : 1ull << sew;
  if (limit == 0) return out;
  int outw = shape.out_width();
  for (size_t i = 0; i < oracle_output.size(); ++i) {
    if (oracle_output[i] >= limit) {
      out.push_back({static_cast<int>(i) / outw, static_cast<int>(i) % outw,
                     oracle_output[i]});
    }
  }
  return out;
}

OracleComparison compare_with_oracle(const ConvRun& run,
                                     const std::vector<uint64_t>& oracle) {
  if (run.output.size() != oracle.size()) {
    throw ConfigError("oracle and run disagree on the output size");
  }
  OracleComparison cmp;
  cmp.overflow = overflow_monitor(oracle, run.shape, run.sew);
  uint64_t mask = run.sew >= 64 ? ~0ull : (1ull << run.sew) - 1;
  bool exact = true;
  int outw = run.shape.out_width();
  for (size_t i = 0; i < oracle.size(); ++i) {
    if (run.output[i] == oracle[i]) continue;
    exact = false;
    if (run.output[i] != (oracle[i] & mask)) {
      cmp.verdict = MatchVerdict::kMismatch;
      cmp.first_mismatch = OverflowRecord{static_cast<int>(i) / outw,
                                          static_cast<int>(i) % outw,
                                          run.output[i]};
      return cmp;
    }
  }
  cmp.verdict = exact ? MatchVerdict::kExact : MatchVerdict::kExactModuloSew;
  return cmp;
}

}  // namespace subvec
