#include <benchmark/benchmark.h>

#include "vprsnn/assignment.hpp"
#include "vprsnn/data.hpp"
#include "vprsnn/pipeline.hpp"
#include "vprsnn/random.hpp"
#include "vprsnn/snn.hpp"

using namespace vprsnn;

namespace {

Network default_network(std::size_t n_exc)
{
    return Network::build(784, n_exc, NeuronParams::excitatory(), NeuronParams::inhibitory(),
                          SynapseParams{}, 1);
}

ImageGray sample_image()
{
    const auto data = generate_synthetic(SynthSpec{});
    return preprocess(data.references[0].images[0], RunConfig{});
}

}  // namespace

static void BM_Step(benchmark::State& state)
{
    auto net = default_network(static_cast<std::size_t>(state.range(0)));
    const auto train = encode_poisson(sample_image(), EncodingConfig{}, 0);
    std::size_t s = 0;
    for (auto _ : state) {
        benchmark::DoNotOptimize(net.step(train.active(s), 0.5));
        s = (s + 1) % train.n_steps();
    }
}
BENCHMARK(BM_Step)->Arg(100)->Arg(400);

static void BM_Present(benchmark::State& state)
{
    auto net = default_network(400);
    const auto train = encode_poisson(sample_image(), EncodingConfig{}, 0);
    const bool learning = state.range(0) != 0;
    for (auto _ : state) {
        benchmark::DoNotOptimize(net.present(train, 350.0, 150.0, 0.5, learning));
    }
    state.SetLabel(learning ? "learning" : "frozen");
}
BENCHMARK(BM_Present)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);

static void BM_Encode(benchmark::State& state)
{
    const auto img = sample_image();
    std::uint64_t seed = 0;
    for (auto _ : state) {
        benchmark::DoNotOptimize(encode_poisson(img, EncodingConfig{}, seed++));
    }
}
BENCHMARK(BM_Encode)->Unit(benchmark::kMicrosecond);

static void BM_Normalize(benchmark::State& state)
{
    auto net = default_network(400);
    for (auto _ : state) {
        net.normalize_weights();
        benchmark::ClobberMemory();
    }
}
BENCHMARK(BM_Normalize)->Unit(benchmark::kMicrosecond);

static void BM_Score(benchmark::State& state)
{
    const std::size_t n = 400, labels = static_cast<std::size_t>(state.range(0));
    Rng rng(3);
    SpikeCountMatrix counts(n, labels);
    for (auto& v : counts.data()) {
        v = rng.below(4) == 0 ? static_cast<double>(rng.below(30)) : 0.0;
    }
    const auto table = assign_standard(counts);
    Matrix<double> queries(100, n);
    for (auto& v : queries.data()) {
        v = static_cast<double>(rng.below(5));
    }
    const auto scheme = static_cast<Scheme>(state.range(1));
    for (auto _ : state) {
        benchmark::DoNotOptimize(score_all(queries, table, counts, scheme, 0.02));
    }
    state.SetLabel(std::string(to_string(scheme)));
}
BENCHMARK(BM_Score)
    ->Args({20, 0})
    ->Args({20, 3})
    ->Args({100, 0})
    ->Args({100, 3})
    ->Unit(benchmark::kMicrosecond);

BENCHMARK_MAIN();
