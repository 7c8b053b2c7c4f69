#include <benchmark/benchmark.h>

#include <subvec/fixtures.hpp>
#include <subvec/kernels.hpp>
#include <subvec/machine.hpp>
#include <subvec/packing.hpp>
#include <subvec/perfmodel.hpp>

#include <cstdint>
#include <vector>

namespace {

using namespace subvec;

// Host-side packing throughput over a large activation tensor.
void BM_PackP1Host(benchmark::State& state) {
    const int elem_bits = static_cast<int>(state.range(0));
    auto t = make_random_tensor(7, 64, 64, 64, 2);
    for (auto _ : state) {
        auto packed = pack_p1(t, elem_bits, PackRole::kActivation);
        benchmark::DoNotOptimize(packed.data.data());
    }
    state.SetItemsProcessed(state.iterations() *
                            static_cast<int64_t>(t.data.size()));
}

// Simulator throughput for the fused multiply-shift-accumulate on full
// vectors, measured in simulated vector elements per second.
void BM_MachineVmacsr(benchmark::State& state) {
    const int sew = static_cast<int>(state.range(0));
    MachineConfig cfg;
    cfg.vlen_bits = 4096;
    cfg.mem_bytes = 1 << 20;
    VectorMachine m(cfg);
    const unsigned vl = cfg.max_vl(static_cast<unsigned>(sew));

    std::vector<Instruction> prog;
    prog.push_back(ops::vsetvl(vl, static_cast<unsigned>(sew)));
    for (int i = 0; i < 64; ++i)
        prog.push_back(ops::vmacsr_vx(1, 5, 2));
    for (auto _ : state) {
        m.run_program(prog);
        benchmark::DoNotOptimize(m.counters().element_ops);
    }
    state.SetItemsProcessed(state.iterations() * 64 * vl);
}

// End-to-end simulated convolution, one variant per benchmark line.
void conv_bench(benchmark::State& state, ConvVariant variant, int elem_bits) {
    ConvShape shape{16, 32, 32, 3, 3};
    ConvOptions opt;
    opt.prec = {1, 1};
    opt.elem_bits = elem_bits;
    auto in = make_random_tensor(11, shape.channels, shape.height, shape.width,
                                 opt.prec.act_bits);
    auto k = make_random_tensor(12, shape.channels, shape.kh, shape.kw,
                                opt.prec.wgt_bits);
    VectorMachine m(make_conv_machine(variant, shape, elem_bits));
    uint64_t macs = 0;
    for (auto _ : state) {
        auto run = run_conv2d(m, variant, in, k, opt);
        benchmark::DoNotOptimize(run.output.data());
        macs = make_report(run).macs;
    }
    state.SetItemsProcessed(state.iterations() * static_cast<int64_t>(macs));
}

void BM_ConvInt16(benchmark::State& state) {
    conv_bench(state, ConvVariant::kInt16, 16);
}

void BM_ConvNative(benchmark::State& state) {
    conv_bench(state, ConvVariant::kUlppackNative,
               static_cast<int>(state.range(0)));
}

void BM_ConvVmacsr(benchmark::State& state) {
    conv_bench(state, ConvVariant::kUlppackVmacsr,
               static_cast<int>(state.range(0)));
}

}  // namespace

BENCHMARK(BM_PackP1Host)->Arg(8)->Arg(16);
BENCHMARK(BM_MachineVmacsr)->Arg(8)->Arg(16)->Arg(32);
BENCHMARK(BM_ConvInt16);
BENCHMARK(BM_ConvNative)->Arg(8)->Arg(16);
BENCHMARK(BM_ConvVmacsr)->Arg(8)->Arg(16);

BENCHMARK_MAIN();
