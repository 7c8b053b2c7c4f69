#include "subvec/perfmodel.hpp"

#include <algorithm>
#include <atomic>
#include <cstdio>
#include <future>
#include <ostream>
#include <sstream>

#include "subvec/errors.hpp"
#include "subvec/fixtures.hpp"

namespace subvec {

CycleModel model_of(const MachineConfig& cfg) {
  return CycleModel{cfg.lanes, cfg.datapath_bits_per_lane, 1};
}

uint64_t model_cycles(const PerfCounters& counters, const CycleModel& model) {
  uint64_t busiest = counters.instructions_total * model.issue_cost;
  for (unsigned u = 0; u < kNumExecUnits; ++u) {
    busiest = std::max(busiest,
                       counters.unit_busy(static_cast<ExecUnit>(u)));
  }
  return busiest;
}

PerfReport make_report(const ConvRun& run) {
  CycleModel model = model_of(run.machine);
  return make_report(run, model);
}

PerfReport make_report(const ConvRun& run, const CycleModel& model) {
  PerfReport r;
  r.variant = run.variant;
  r.shape = run.shape;
  r.prec = run.options.prec;
  r.sew = run.sew;
  r.model = model;
  r.instructions = run.counters.instructions_total;
  r.modeled_cycles = model_cycles(run.counters, model);
  const ConvShape& s = run.shape;
  r.macs = static_cast<uint64_t>(s.channels) * s.kh * s.kw * s.out_height() *
           s.out_width();
  r.effective_ops = 2 * r.macs;
  if (r.modeled_cycles == 0) {
    throw ConfigError("run has no modeled cycles");
  }
  r.ops_per_cycle = static_cast<double>(r.effective_ops) / r.modeled_cycles;
  r.macs_per_cycle = static_cast<double>(r.macs) / r.modeled_cycles;
  double density = run.variant == ConvVariant::kInt16 ? 1.0 : 2.0;
  r.peak_macs_per_cycle = model.bits_per_cycle() / double(r.sew) * density;
  r.utilization = r.macs_per_cycle / r.peak_macs_per_cycle;
  return r;
}

double speedup(const PerfReport& report, const PerfReport& baseline) {
  if (!(report.shape == baseline.shape)) {
    throw ConfigError("speedup requires two runs of the same shape");
  }
  return static_cast<double>(baseline.modeled_cycles) / report.modeled_cycles;
}

namespace {

SweepRow run_point(const SweepPoint& p, const MachineConfig& base,
                   uint64_t seed, size_t index) {
  SweepRow row;
  row.point = p;
  if (p.variant != ConvVariant::kInt16) {
    AccumMode mode = p.variant == ConvVariant::kUlppackNative
                         ? AccumMode::kNative
                         : AccumMode::kVmacsr;
    if (!region_map(p.elem_bits, mode)
             .admissible(p.prec.act_bits, p.prec.wgt_bits)) {
      row.oracle_match = "region_violation";
      return row;
    }
  }
  QuantTensor input =
      make_random_tensor(derive_seed(seed, 2 * index), p.shape.channels,
                         p.shape.height, p.shape.width, p.prec.act_bits);
  QuantTensor kernel =
      make_random_tensor(derive_seed(seed, 2 * index + 1), p.shape.channels,
                         p.shape.kh, p.shape.kw, p.prec.wgt_bits);
  ConvOptions o;
  o.prec = p.prec;
  o.elem_bits = p.elem_bits;
  o.budget_policy = p.budget_policy;
  o.prepacked_weights = p.prepacked_weights;
  VectorMachine m = make_conv_machine(p.variant, p.shape, p.elem_bits, base);
  ConvRun run = run_conv2d(m, p.variant, input, kernel, o);
  OracleComparison cmp = compare_with_oracle(run, conv2d_oracle(input, kernel));
  PerfReport rep = make_report(run);
  row.simulated = true;
  row.oracle_match = verdict_name(cmp.verdict);
  row.instructions = rep.instructions;
  row.modeled_cycles = rep.modeled_cycles;
  row.ops_per_cycle = rep.ops_per_cycle;
  row.overflow_flags = cmp.overflow.size();
  return row;
}

}  // namespace

std::vector<SweepRow> run_sweep(const std::vector<SweepPoint>& grid,
                                const MachineConfig& machine, uint64_t seed,
                                unsigned threads) {
  std::vector<SweepRow> rows(grid.size());
  if (grid.empty()) return rows;
  threads = std::max(1u, std::min<unsigned>(threads, grid.size()));
  std::atomic<size_t> cursor{0};
  auto worker = [&] {
    for (size_t i = cursor.fetch_add(1); i < grid.size();
         i = cursor.fetch_add(1)) {
      try {
        rows[i] = run_point(grid[i], machine, seed, i);
      } catch (const Error& e) {
        rows[i].point = grid[i];
        rows[i].oracle_match = std::string("error: ") + e.what();
      }
    }
  };
  if (threads == 1) {
    worker();
  } else {
    std::vector<std::future<void>> pool;
    for (unsigned t = 0; t < threads; ++t) {
      pool.push_back(std::async(std::launch::async, worker));
    }
    for (auto& f : pool) f.get();
  }
  // baseline resolution: first baseline row per shape, in grid order
  for (size_t i = 0; i < rows.size(); ++i) {
    if (!rows[i].simulated) continue;
    for (const SweepRow& b : rows) {
      if (b.point.variant != ConvVariant::kInt16 || !b.simulated) continue;
      if (!(b.point.shape == rows[i].point.shape)) continue;
      rows[i].speedup_vs_int16 =
          static_cast<double>(b.modeled_cycles) / rows[i].modeled_cycles;
      break;
    }
  }
  return rows;
}

void write_sweep_csv(std::ostream& out, const std::vector<SweepRow>& rows) {
  out << "variant,E,Na,Nw,C,H,W,Fh,Fw,instructions,modeled_cycles,"
         "ops_per_cycle,speedup_vs_int16,oracle_match,overflow_flags\n";
  char buf[160];
  for (const SweepRow& r : rows) {
    const SweepPoint& p = r.point;
    int e = p.variant == ConvVariant::kInt16 ? 16 : p.elem_bits;
    std::snprintf(buf, sizeof buf,
                  "%s,%d,%d,%d,%d,%d,%d,%d,%d,%llu,%llu,%.4f,%.4f,%s,%llu\n",
                  variant_name(p.variant), e, p.prec.act_bits, p.prec.wgt_bits,
                  p.shape.channels, p.shape.height, p.shape.width, p.shape.kh,
                  p.shape.kw, static_cast<unsigned long long>(r.instructions),
                  static_cast<unsigned long long>(r.modeled_cycles),
                  r.ops_per_cycle, r.speedup_vs_int16, r.oracle_match.c_str(),
                  static_cast<unsigned long long>(r.overflow_flags));
    out << buf;
  }
}

std::string sweep_summary(const std::vector<SweepRow>& rows) {
  std::ostringstream out;
  out << "variant          E Na Nw      cycles  ops/cyc  speedup  match\n";
  char buf[160];
  for (const SweepRow& r : rows) {
    const SweepPoint& p = r.point;
    int e = p.variant == ConvVariant::kInt16 ? 16 : p.elem_bits;
    if (r.simulated) {
      std::snprintf(buf, sizeof buf, "%-15s %2d %2d %2d %11llu %8.2f %8.3f  %s\n",
                    variant_name(p.variant), e, p.prec.act_bits,
                    p.prec.wgt_bits,
                    static_cast<unsigned long long>(r.modeled_cycles),
                    r.ops_per_cycle, r.speedup_vs_int16,
                    r.oracle_match.c_str());
    } else {
      std::snprintf(buf, sizeof buf, "%-15s %2d %2d %2d %11s %8s %8s  %s\n",
                    variant_name(p.variant), e, p.prec.act_bits,
                    p.prec.wgt_bits, "-", "-", "-", r.oracle_match.c_str());
    }
    out << buf;
  }
  return out.str();
}

}  // namespace subvec
