#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "subvec/kernels.hpp"
#include "subvec/machine.hpp"

namespace subvec {

// Analytic throughput model. Vector instructions occupy their execution unit
// for max(1, ceil(VL * SEW / (lanes * datapath))) cycles; scalar-class
// instructions occupy the scalar unit for one. Under ideal chaining the
// units and the one-instruction-per-cycle front end all advance in
// parallel, so the modeled run time is the busiest resource, not the sum.
struct CycleModel {
  unsigned lanes = 4;
  unsigned datapath_bits_per_lane = 64;
  unsigned issue_cost = 1;  // front-end cycles per instruction

  unsigned bits_per_cycle() const { return lanes * datapath_bits_per_lane; }
};

CycleModel model_of(const MachineConfig& cfg);

// The per-unit busy totals in `counters` were accumulated at the machine's
// lane geometry, so `model` must describe the same geometry (model_of does).
uint64_t model_cycles(const PerfCounters& counters, const CycleModel& model);

struct PerfReport {
  ConvVariant variant = ConvVariant::kInt16;
  ConvShape shape;
  Precision prec{1, 1};
  unsigned sew = 16;
  CycleModel model;
  uint64_t instructions = 0;
  uint64_t modeled_cycles = 0;
  uint64_t macs = 0;           // logical multiply-accumulates: C*Fh*Fw per output
  uint64_t effective_ops = 0;  // 2 * macs, one multiply and one add each
  double ops_per_cycle = 0.0;
  double macs_per_cycle = 0.0;
  double peak_macs_per_cycle = 0.0;  // lane width / SEW, doubled when packed
  double utilization = 0.0;          // macs_per_cycle / peak, always <= 1
};

PerfReport make_report(const ConvRun& run);
PerfReport make_report(const ConvRun& run, const CycleModel& model);

// baseline cycles / report cycles, for two runs of the same shape.
double speedup(const PerfReport& report, const PerfReport& baseline);

// One grid point of a benchmark sweep.
struct SweepPoint {
  ConvVariant variant = ConvVariant::kInt16;
  int elem_bits = 16;  // packed element width; the baseline reports its SEW
  Precision prec{1, 1};
  ConvShape shape;
  BudgetPolicy budget_policy = BudgetPolicy::kConservative;
  bool prepacked_weights = false;
};

struct SweepRow {
  SweepPoint point;
  bool simulated = false;    // false rows reproduce the blank region
  std::string oracle_match;  // verdict name, or "region_violation"
  uint64_t instructions = 0;
  uint64_t modeled_cycles = 0;
  double ops_per_cycle = 0.0;
  double speedup_vs_int16 = 0.0;  // 0 when the sweep has no matching baseline
  uint64_t overflow_flags = 0;    // outputs whose true value exceeds 2^SEW
};

// Runs every admissible point on its own machine (concurrently when asked),
// fixtures seeded per point, rows ordered by grid position. Inadmissible
// points are not simulated; their rows carry the violation verdict alone.
// Speedups compare against the first baseline row of matching shape.
std::vector<SweepRow> run_sweep(const std::vector<SweepPoint>& grid,
                                const MachineConfig& machine, uint64_t seed,
                                unsigned threads = 1);

void write_sweep_csv(std::ostream& out, const std::vector<SweepRow>& rows);
std::string sweep_summary(const std::vector<SweepRow>& rows);

}  // namespace subvec
