#include <cmath>
#include <vector>

#include <benchmark/benchmark.h>

#include "polcorr/analysis.hpp"
#include "polcorr/config.hpp"
#include "polcorr/detector.hpp"
#include "polcorr/physics.hpp"
#include "polcorr/pipeline.hpp"
#include "polcorr/random.hpp"
#include "polcorr/sampling.hpp"
#include "polcorr/selection.hpp"

using namespace polcorr;

namespace
{
RandomStream bench_stream(std::uint64_t i)
{
    return RandomStream(derive_stream(3, StreamPurpose::test, i));
}

void BM_IntegrateAcceptance(benchmark::State& state)
{
    AcceptanceOptions opts;
    opts.order = static_cast<int>(state.range(0));
    for (auto _ : state)
        benchmark::DoNotOptimize(integrate_acceptance({72, 90}, {72, 90}, 511, 511, 1.0, opts).mu);
}
BENCHMARK(BM_IntegrateAcceptance)->Arg(4)->Arg(16)->Arg(32);

void BM_SampleDeltaPhi(benchmark::State& state)
{
    auto rng = bench_stream(0);
    for (auto _ : state)
        benchmark::DoNotOptimize(sample_delta_phi(0.45, rng));
}
BENCHMARK(BM_SampleDeltaPhi);

void BM_SamplePair(benchmark::State& state)
{
    PairModel model;
    model.mode = static_cast<Mode>(state.range(0));
    model.theta_scat_nominal_deg = model.mode == Mode::direct ? 0 : 30;
    if (model.mode == Mode::passive)
        model.geometry.b.distance_to_scatterer_mm = 75;
    model.geometry.b.rotation_theta_scat_deg = model.theta_scat_nominal_deg;
    model.geometry.scatterer.active = model.mode == Mode::active;
    PairSampler const sampler(model);
    auto rng = bench_stream(1);
    for (auto _ : state)
        benchmark::DoNotOptimize(sampler(rng).phi1_deg);
}
BENCHMARK(BM_SamplePair)
    ->Arg(static_cast<int>(Mode::direct))
    ->Arg(static_cast<int>(Mode::active))
    ->Arg(static_cast<int>(Mode::passive));

void BM_SimulateDirect(benchmark::State& state)
{
    auto cfg = parse_config("");
    cfg.n_pairs = static_cast<std::uint64_t>(state.range(0));
    for (auto _ : state)
        benchmark::DoNotOptimize(simulate(cfg, 1).events.size());
    state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_SimulateDirect)->Arg(1 << 16)->Unit(benchmark::kMillisecond);

void BM_SelectAndReconstruct(benchmark::State& state)
{
    auto cfg = parse_config("[run]\npairs = 100000\n");
    auto const sim = simulate(cfg, 1);
    for (auto _ : state)
    {
        auto const sel = select_events(sim.events, cfg.selection);
        benchmark::DoNotOptimize(reconstruct_selected(cfg, sel.accepted).size());
    }
    state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(sim.events.size()));
}
BENCHMARK(BM_SelectAndReconstruct)->Unit(benchmark::kMillisecond);

void BM_EventMixing(benchmark::State& state)
{
    auto rng = bench_stream(2);
    std::vector<PairReco> ev(static_cast<std::size_t>(state.range(0)));
    for (auto& r : ev)
    {
        r.a.theta_deg = r.b.theta_deg = 80;
        r.a.phi_deg = rng.uniform(-180, 180);
        r.b.phi_deg = rng.uniform(-180, 180);
    }
    for (auto _ : state)
        benchmark::DoNotOptimize(event_mixing(ev, ThetaWindows{}, 100, rng).mixed_total());
}
BENCHMARK(BM_EventMixing)->Arg(10000)->Unit(benchmark::kMillisecond);

void BM_FitModulation(benchmark::State& state)
{
    DeltaPhiBinning const b;
    std::vector<FitPoint> pts;
    for (int k = 0; k < b.bins; ++k)
    {
        double const y = 1000.0 * (1.0 - 0.3 * bin_average_cos2(b.low(k), b.high(k)));
        pts.push_back({b.low(k), b.high(k), y, std::sqrt(y)});
    }
    for (auto _ : state)
        benchmark::DoNotOptimize(fit_modulation(pts).mu);
}
BENCHMARK(BM_FitModulation);
} // namespace

BENCHMARK_MAIN();
