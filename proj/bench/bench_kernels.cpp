// Serial reference vs OpenMP kernels on the default synthetic set.
#include <benchmark/benchmark.h>

#include "corex/pipeline.hpp"
#include "corex/synth.hpp"

using namespace corex;

namespace {

const SyntheticSet& data()
{
    static const SyntheticSet s = generate(GeneratorConfig{});
    return s;
}

const Extraction& extraction()
{
    static const Extraction ex = extract(data().dataset, PipelineConfig{});
    return ex;
}

void geometry(benchmark::State& state, Exec exec)
{
    const PipelineConfig cfg;
    for (auto _ : state) benchmark::DoNotOptimize(extract_geometry(data().dataset, cfg, exec));
}

void coverage(benchmark::State& state, Exec exec)
{
    const auto& kb = extraction().kb;
    const CoverageIndex index(kb);
    const auto bottom = bottom_clause(kb.positives.front(), kb, {});
    std::vector<std::vector<Literal>> bodies;
    for (std::size_t i = 0; i < bottom.size(); ++i)
        for (std::size_t j = i + 1; j < bottom.size(); ++j) bodies.push_back({bottom[i], bottom[j]});
    const auto active = index.positives_mask({});
    for (auto _ : state) benchmark::DoNotOptimize(index.evaluate(bodies, active, exec));
    state.counters["bodies"] = static_cast<double>(bodies.size());
}

void induction(benchmark::State& state, Exec exec)
{
    LearnConfig cfg;
    cfg.exec = exec;
    for (auto _ : state) benchmark::DoNotOptimize(induce(extraction().kb, cfg, {}));
}

}  // namespace

BENCHMARK_CAPTURE(geometry, serial, Exec::serial)->Unit(benchmark::kMillisecond);
BENCHMARK_CAPTURE(geometry, parallel, Exec::parallel)->Unit(benchmark::kMillisecond);
BENCHMARK_CAPTURE(coverage, serial, Exec::serial)->Unit(benchmark::kMillisecond);
BENCHMARK_CAPTURE(coverage, parallel, Exec::parallel)->Unit(benchmark::kMillisecond);
BENCHMARK_CAPTURE(induction, serial, Exec::serial)->Unit(benchmark::kMillisecond);
BENCHMARK_CAPTURE(induction, parallel, Exec::parallel)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
