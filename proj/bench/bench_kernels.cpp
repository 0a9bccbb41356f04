// Serial reference vs OpenMP kernels: state-space exploration and random
// schedule simulation.

#include "statepat/engine.hpp"
#include "statepat/pipeline.hpp"
#include "statepat/text.hpp"
#include "statepat/verifier.hpp"

#include <benchmark/benchmark.h>

#include <map>
#include <memory>
#include <sstream>

using namespace statepat;

namespace
{

// k charts in a ring, each counting its own activations up to `top`. Chart i
// wakes chart i+1 through an internal event, so TWC has real traffic.
std::string ring_model(int k, int top)
{
    std::ostringstream os;
    os << "model Ring\n";
    for (int i = 1; i <= k; ++i)
        os << "in event go" << i << "\n";
    for (int i = 1; i <= k; ++i)
        os << "event e" << i << "\n";
    for (int i = 1; i <= k; ++i)
        os << "var c" << i << ": int[0.." << top << "] = 0\n";
    for (int i = 1; i <= k; ++i) {
        const int prev = i == 1 ? k : i - 1;
        os << "\nchart C" << i << " priority " << i << "\n"
           << "  initial Idle\n  state Idle\n  state Busy\n"
           << "  transition Idle -> Busy on go" << i << " do c" << i << " = c" << i << " + 1; raise e" << i << "\n"
           << "  transition Idle -> Busy on e" << prev << " if c" << i << " < " << top << " do c" << i << " = c" << i
           << " + 1\n"
           << "  transition Busy -> Idle after 1s\n";
    }
    return os.str();
}

const Engine& ring_engine(int k, int top)
{
    static std::map<std::pair<int, int>, std::unique_ptr<Engine>> cache;
    auto& slot = cache[{ k, top }];
    if (!slot)
        slot = std::make_unique<Engine>(load_model(ring_model(k, top), PatternChoice::Both));
    return *slot;
}

void BM_Explore(benchmark::State& st, bool parallel)
{
    const auto& e = ring_engine(static_cast<int>(st.range(0)), static_cast<int>(st.range(1)));
    ExploreOptions o;
    o.parallel = parallel;
    std::size_t states = 0;
    for (auto _ : st) {
        auto g = explore(e, o);
        states = g.nodes.size();
        benchmark::DoNotOptimize(g.edges);
    }
    st.counters["states"] = static_cast<double>(states);
    st.SetItemsProcessed(static_cast<std::int64_t>(st.iterations() * states));
}

void BM_Simulate(benchmark::State& st, bool parallel)
{
    const auto& e = ring_engine(static_cast<int>(st.range(0)), static_cast<int>(st.range(1)));
    auto inv = e.compile_predicate(parse_query("A[] c1 >= 0").predicate);
    SimulationOptions o;
    o.schedules = 2'000;
    o.steps = 100;
    o.parallel = parallel;
    for (auto _ : st) {
        auto r = simulate_invariant(e, inv, o);
        benchmark::DoNotOptimize(r.steps_run);
    }
    st.SetItemsProcessed(static_cast<std::int64_t>(st.iterations() * o.schedules * o.steps));
}

} // namespace

BENCHMARK_CAPTURE(BM_Explore, serial, false)->Args({ 3, 6 })->Args({ 4, 5 })->Unit(benchmark::kMillisecond);
BENCHMARK_CAPTURE(BM_Explore, parallel, true)->Args({ 3, 6 })->Args({ 4, 5 })->Unit(benchmark::kMillisecond);
BENCHMARK_CAPTURE(BM_Simulate, serial, false)->Args({ 3, 6 })->Unit(benchmark::kMillisecond);
BENCHMARK_CAPTURE(BM_Simulate, parallel, true)->Args({ 3, 6 })->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
