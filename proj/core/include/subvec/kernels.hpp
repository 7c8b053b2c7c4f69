#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "subvec/machine.hpp"
#include "subvec/packing.hpp"
#include "subvec/tensor.hpp"

namespace subvec {

// Valid (no padding) stride-1 convolution, single output channel, reducing
// over all input channels.
struct ConvShape {
  int channels = 0;
  int height = 0;
  int width = 0;
  int kh = 0;
  int kw = 0;

  int out_height() const { return height - kh + 1; }
  int out_width() const { return width - kw + 1; }
  bool operator==(const ConvShape&) const = default;
};

ConvShape shape_of(const QuantTensor& input, const QuantTensor& kernel);
void validate_shape(const ConvShape& s);

enum class ConvVariant {
  kInt16,           // unpacked 16-bit baseline
  kUlppackNative,   // packed operands, plain vmacc + budgeted extraction
  kUlppackVmacsr,   // packed operands, per-product multiply-shift-accumulate
};

const char* variant_name(ConvVariant v);

struct ConvOptions {
  Precision prec{1, 1};
  int elem_bits = 8;  // E for packed variants; the baseline always runs SEW=16
  BudgetPolicy budget_policy = BudgetPolicy::kConservative;
  // 0 picks the policy budget; >= 1 forces the native flush threshold. Lets
  // diagnostics pin the extraction cadence (budget 1 extracts per product).
  int budget_override = 0;
  bool prepacked_weights = false;
  // Off switch for the admissibility check, for performance measurements at
  // points whose arithmetic is known to be inexact. Results are still read
  // back and compared honestly.
  bool enforce_region = true;
};

// A finished simulated conv run: the readout plus everything the performance
// model needs. Counters are split so data movement caused by runtime packing
// can be told apart from the conv loop proper.
struct ConvRun {
  ConvVariant variant = ConvVariant::kInt16;
  ConvShape shape;
  ConvOptions options;
  MachineConfig machine;
  unsigned sew = 16;
  int budget = 0;            // resolved flush threshold, kUnboundedBudget if none
  int column_tiles = 1;
  std::vector<uint64_t> output;  // out_height x out_width, zero-extended
  PerfCounters counters;         // whole run, packing included
  PerfCounters conv_counters;    // conv loop only

  uint64_t instructions() const { return counters.instructions_total; }
};

// Exact 64-bit reference. The referee for every simulated variant.
std::vector<uint64_t> conv2d_oracle(const QuantTensor& input,
                                    const QuantTensor& kernel);

ConvRun conv2d_int16(VectorMachine& m, const QuantTensor& input,
                     const QuantTensor& kernel);
ConvRun conv2d_ulppack_native(VectorMachine& m, const QuantTensor& input,
                              const QuantTensor& kernel,
                              const ConvOptions& options);
ConvRun conv2d_ulppack_vmacsr(VectorMachine& m, const QuantTensor& input,
                              const QuantTensor& kernel,
                              const ConvOptions& options);
ConvRun run_conv2d(VectorMachine& m, ConvVariant variant,
                   const QuantTensor& input, const QuantTensor& kernel,
                   const ConvOptions& options);

// Memory the simulated machine needs for one run, fixture regions included.
size_t conv_memory_demand(ConvVariant variant, const ConvShape& shape,
                          int elem_bits);

// Convenience: a machine sized for the run.
VectorMachine make_conv_machine(ConvVariant variant, const ConvShape& shape,
                                int elem_bits, const MachineConfig& base = {});

// Output positions whose true value cannot fit an SEW-wide accumulator.
struct OverflowRecord {
  int y = 0;
  int x = 0;
  uint64_t value = 0;
};

std::vector<OverflowRecord> overflow_monitor(
    const std::vector<uint64_t>& oracle_output, const ConvShape& shape,
    unsigned sew);

enum class MatchVerdict {
  kExact,          // bit-equal to the oracle
  kExactModuloSew, // equal modulo 2^SEW; some true values overflow SEW
  kMismatch,
};

const char* verdict_name(MatchVerdict v);

struct OracleComparison {
  MatchVerdict verdict = MatchVerdict::kExact;
  std::optional<OverflowRecord> first_mismatch;  // value = simulated readout
  std::vector<OverflowRecord> overflow;
};

OracleComparison compare_with_oracle(const ConvRun& run,
                                     const std::vector<uint64_t>& oracle);

}  // namespace subvec
