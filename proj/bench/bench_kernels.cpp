// bench_kernels.cpp - OpenMP kernels against their serial references

#include "isac/ambiguity.hpp"
#include "isac/comms.hpp"
#include "isac/experiments.hpp"
#include "isac/rng.hpp"

#include <benchmark/benchmark.h>

using namespace isac;
using waveform::ChirpMode;
using waveform::WaveformConfig;

namespace {

void BM_PaprBatch(benchmark::State& st) {
    const bool parallel = st.range(0) != 0;
    for (auto _ : st) {
        auto r = parallel ? cli::papr_batch(256, {0.1, 0.3, 0.5}, 2000, 1)
                          : cli::papr_batch_serial(256, {0.1, 0.3, 0.5}, 2000, 1);
        benchmark::DoNotOptimize(r);
    }
    st.SetItemsProcessed(st.iterations() * 2000);
}

struct AmbiguityInput {
    waveform::TimeSignal x;
    ambiguity::ContinuousWaveform model;
    std::vector<double> delays, dopplers;

    AmbiguityInput() {
        const auto cfg = WaveformConfig::nr(128, 1);
        auto eng = rng::stream(1, 0);
        const auto grid = waveform::random_qpsk_grid(cfg, eng);
        const auto plan = waveform::full_band_plan(cfg, ChirpMode::PerSymbol);
        x = waveform::build_frame(grid, plan, cfg, waveform::Scheme::AAC);
        model = ambiguity::aac_model(grid, plan, cfg, cfg.alpha);
        delays = ambiguity::default_delay_axis(cfg);
        dopplers = ambiguity::default_doppler_axis(cfg);
    }
};

const AmbiguityInput& ambiguity_input() {
    static const AmbiguityInput in;
    return in;
}

void BM_AmbiguityNumeric(benchmark::State& st) {
    const auto& in = ambiguity_input();
    for (auto _ : st) {
        auto r = st.range(0) ? ambiguity::ambiguity_numeric_raw(in.x, in.delays, in.dopplers)
                             : ambiguity::ambiguity_numeric_raw_serial(in.x, in.delays, in.dopplers);
        benchmark::DoNotOptimize(r);
    }
}

void BM_AmbiguityAnalytic(benchmark::State& st) {
    const auto& in = ambiguity_input();
    // coarse subgrid of the numeric surface
    std::vector<double> del, dop;
    for (std::size_t i = 0; i < in.delays.size(); i += 4) del.push_back(in.delays[i]);
    for (std::size_t i = 0; i < in.dopplers.size(); i += 16) dop.push_back(in.dopplers[i]);
    for (auto _ : st) {
        auto r = st.range(0) ? ambiguity::analytic_raw(in.model, del, dop)
                             : ambiguity::analytic_raw_serial(in.model, del, dop);
        benchmark::DoNotOptimize(r);
    }
}

void BM_RmseRange(benchmark::State& st) {
    cli::SensingSetup s;
    s.cfg = WaveformConfig::nr(1024, 14);
    s.scheme = cli::SensingScheme::AAC;
    s.placement = ChirpMode::PerSlot;
    for (auto _ : st) {
        double r = st.range(0) ? cli::rmse_range(s, -10.0, 32, 1) : cli::rmse_range_serial(s, -10.0, 32, 1);
        benchmark::DoNotOptimize(r);
    }
    st.SetItemsProcessed(st.iterations() * 32);
}

void BM_Link(benchmark::State& st) {
    comms::LinkSetup s;
    s.cfg = WaveformConfig::nr(1024, 14);
    s.cfg.alpha = 0.3;
    s.scheme = waveform::Scheme::AAC;
    s.plan = waveform::full_band_plan(s.cfg, ChirpMode::PerSymbol);
    for (auto _ : st) {
        auto r = st.range(0) ? comms::simulate_link(s, 4.0, 8, 1) : comms::simulate_link_serial(s, 4.0, 8, 1);
        benchmark::DoNotOptimize(r);
    }
    st.SetItemsProcessed(st.iterations() * 8);
}

} // namespace

// Arg 1 = OpenMP kernel, 0 = serial reference
BENCHMARK(BM_PaprBatch)->ArgName("parallel")->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond)->UseRealTime();
BENCHMARK(BM_AmbiguityNumeric)->ArgName("parallel")->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond)->UseRealTime();
BENCHMARK(BM_AmbiguityAnalytic)->ArgName("parallel")->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond)->UseRealTime();
BENCHMARK(BM_RmseRange)->ArgName("parallel")->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond)->UseRealTime();
BENCHMARK(BM_Link)->ArgName("parallel")->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond)->UseRealTime();

BENCHMARK_MAIN();
