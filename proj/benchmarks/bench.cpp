#include <benchmark/benchmark.h>

#include "starnc/galois.hpp"
#include "starnc/netsim.hpp"
#include "starnc/optimizer.hpp"
#include "starnc/rng.hpp"

using namespace starnc;

namespace {

void BM_FieldMul(benchmark::State& state) {
    const auto& f = gf::Field::of(static_cast<int>(state.range(0)));
    rng::Counter r(1);
    const auto q = f.size();
    gf::Element a = static_cast<gf::Element>(1 + r.next_below(q - 1));
    gf::Element b = static_cast<gf::Element>(1 + r.next_below(q - 1));
    for (auto _ : state) {
        a = f.mul(a, b);
        b = gf::Field::add(b, a) | 1;
        benchmark::DoNotOptimize(a);
    }
}
BENCHMARK(BM_FieldMul)->Arg(2)->Arg(6)->Arg(16);

void BM_BitslicedIngest(benchmark::State& state) {
    const int l = static_cast<int>(state.range(0));
    const std::size_t unknowns = static_cast<std::size_t>(state.range(1));
    const auto& f = gf::Field::of(l);
    rng::Counter r(7);
    std::vector<gf::SymbolVec> columns;
    for (std::size_t i = 0; i < unknowns + 8; ++i) {
        gf::SymbolVec c(unknowns);
        for (auto& e : c) e = static_cast<gf::Element>(r.next_below(f.size()));
        columns.push_back(std::move(c));
    }
    for (auto _ : state) {
        gf::BitslicedRank tracker(f, unknowns);
        for (const auto& c : columns)
            if (tracker.ingest(c) && tracker.complete()) break;
        benchmark::DoNotOptimize(tracker.rank());
    }
}
BENCHMARK(BM_BitslicedIngest)->Args({2, 50})->Args({6, 50})->Args({2, 120});

void BM_BroadcastSeries(benchmark::State& state) {
    throughput::NetworkParams p;
    p.Y = 6;
    p.K = 10000;
    p.h = 16;
    p.q = 4;
    p.m = static_cast<int>(state.range(0));
    p.p_mac = p.p_br = 0.04;
    p.R = 0.5;
    for (auto _ : state) benchmark::DoNotOptimize(throughput::br_rlnc_blocks(p));
}
BENCHMARK(BM_BroadcastSeries)->Arg(2)->Arg(10);

void BM_JointOptimize(benchmark::State& state) {
    throughput::NetworkParams p;
    p.Y = 3;
    p.K = 10000;
    p.h = 16;
    p.q = 4;
    p.p_mac = p.p_br = 0.11;
    for (auto _ : state)
        benchmark::DoNotOptimize(opt::optimize(p, opt::Scheme::Rlnc, opt::Phase::Joint));
}
BENCHMARK(BM_JointOptimize);

void BM_RlncTrialBatch(benchmark::State& state) {
    sim::TrialConfig cfg;
    cfg.params.Y = 3;
    cfg.params.K = 1000;
    cfg.params.h = 16;
    cfg.params.q = 4;
    cfg.params.m = 4;
    cfg.params.p_mac = cfg.params.p_br = 0.04;
    cfg.params.R = 0.25;
    cfg.trials = 100;
    cfg.threads = 1;
    std::uint64_t seed = 1;
    for (auto _ : state) {
        cfg.seed = ++seed;
        benchmark::DoNotOptimize(sim::simulate(cfg));
    }
}
BENCHMARK(BM_RlncTrialBatch);

} // namespace

BENCHMARK_MAIN();
