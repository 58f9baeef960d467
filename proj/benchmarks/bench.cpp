#include <benchmark/benchmark.h>

#include "mttlab/lsoi.hpp"
#include "mttlab/nesting.hpp"
#include "mttlab/normalize.hpp"
#include "oracles/corpus.hpp"

using namespace mttlab;

namespace {

Tree chain(const char* sym, int n, const char* leaf) {
    Tree t = Tree::leaf(leaf);
    for (int k = 0; k < n; ++k) t = Tree::make(Symbol::intern(sym), {t});
    return t;
}

void BM_eval_revdewey(benchmark::State& state) {
    Mtt m = oracle::fixture("REVDEWEY");
    Tree in = chain("a", static_cast<int>(state.range(0)), "e");
    for (auto _ : state) {
        Evaluator ev(m);
        benchmark::DoNotOptimize(ev.apply(in));
    }
}
BENCHMARK(BM_eval_revdewey)->DenseRange(4, 16, 4);

void BM_eval_nest2(benchmark::State& state) {
    Mtt m = oracle::fixture("NEST2");
    Tree in = chain("a", static_cast<int>(state.range(0)), "e");
    for (auto _ : state) {
        Evaluator ev(m);
        benchmark::DoNotOptimize(ev.apply(in));
    }
}
BENCHMARK(BM_eval_nest2)->DenseRange(4, 16, 4);

void BM_depth_proper_corpus(benchmark::State& state) {
    auto corpus = oracle::corpus(static_cast<std::size_t>(state.range(0)));
    for (auto _ : state)
        for (const Mtt& m : corpus) benchmark::DoNotOptimize(depth_proper(m).iterations);
}
BENCHMARK(BM_depth_proper_corpus)->Arg(10)->Arg(50)->Unit(benchmark::kMillisecond);

void BM_decide_fixture(benchmark::State& state) {
    static const char* names[] = {"IDENT", "DOUBLE", "NEST2", "REVDEWEY", "MLNEST"};
    Mtt m = oracle::fixture(names[state.range(0)]);
    state.SetLabel(names[state.range(0)]);
    for (auto _ : state) benchmark::DoNotOptimize(decide_lhi(m).verdict);
}
BENCHMARK(BM_decide_fixture)->DenseRange(0, 4)->Unit(benchmark::kMillisecond);

void BM_profile_gadget(benchmark::State& state) {
    Mtt g = build_gadget(oracle::fixture("CONSTB"), oracle::fixture("CONSTC"));
    std::vector<Tree> inputs;
    for (int n = 1; n <= state.range(0); ++n) inputs.push_back(chain("a", n + 1, "e"));
    for (auto _ : state) benchmark::DoNotOptimize(profile_lsoi(g, inputs).slope);
}
BENCHMARK(BM_profile_gadget)->Arg(10)->Arg(16)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
