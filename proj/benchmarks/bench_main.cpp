#include "bridgewatch/attention.hpp"
#include "bridgewatch/comms.hpp"
#include "bridgewatch/simulate.hpp"
#include "bridgewatch/stress.hpp"
#include "bridgewatch/visual_focus.hpp"

#include <benchmark/benchmark.h>

#include <cmath>
#include <numbers>
#include <random>

namespace bw = bridgewatch;

namespace {

const bw::GeneratedSession& session() {
    static const bw::GeneratedSession g = [] {
        bw::Scenario s = bw::default_scenario();
        s.duration_ms = 60000;
        s.event.t = {30000};
        s.gaze_phases = {{0, 30000, "ecdis", "", 25.0}, {30000, 60000, "main_engine", "", 15.0}};
        s.pupil.bump_t0_ms = 30000;
        s.pupil.bump_t1_ms = 50000;
        s.audio.transition_t_ms = 40000;
        s.audio.recovery_t_ms = 50000;
        std::erase_if(s.script, [](const bw::ScriptLine& l) { return l.t_ms >= 55000; });
        return bw::simulate_session(s);
    }();
    return g;
}

void BM_WordErrorRate(benchmark::State& state) {
    std::mt19937_64 rng(1);
    std::uniform_int_distribution<int> tok(0, 50);
    const auto n = static_cast<std::size_t>(state.range(0));
    std::vector<std::string> ref(n), hyp(n);
    for (std::size_t i = 0; i < n; ++i) {
        ref[i] = "w" + std::to_string(tok(rng));
        hyp[i] = "w" + std::to_string(tok(rng));
    }
    for (auto _ : state) {
        benchmark::DoNotOptimize(bw::word_error_rate_tokens(ref, hyp));
    }
    state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_WordErrorRate)->RangeMultiplier(4)->Range(16, 1024)->Complexity();

void BM_AfTimeline(benchmark::State& state) {
    const bw::Session& s = session().session;
    bw::AnalysisConfig c;
    for (auto _ : state) {
        benchmark::DoNotOptimize(bw::af_timeline(s, c));
    }
    state.SetItemsProcessed(static_cast<std::int64_t>(state.iterations() * s.gaze.size()));
}
BENCHMARK(BM_AfTimeline)->Unit(benchmark::kMillisecond);

void BM_AssignGaze(benchmark::State& state) {
    const bw::Session& s = session().session;
    for (auto _ : state) {
        benchmark::DoNotOptimize(bw::assign_all(s.gaze, s.panels, 100));
    }
    state.SetItemsProcessed(static_cast<std::int64_t>(state.iterations() * s.gaze.size()));
}
BENCHMARK(BM_AssignGaze)->Unit(benchmark::kMillisecond);

void BM_EstimateF0(benchmark::State& state) {
    std::vector<float> frame(640);
    for (std::size_t i = 0; i < frame.size(); ++i) {
        frame[i] = static_cast<float>(0.5 * std::sin(2 * std::numbers::pi * 220.0 * i / 16000.0));
    }
    for (auto _ : state) {
        benchmark::DoNotOptimize(bw::estimate_f0(frame, 16000));
    }
}
BENCHMARK(BM_EstimateF0);

void BM_StressTimeline(benchmark::State& state) {
    const bw::AudioClip& clip = session().audio;
    for (auto _ : state) {
        benchmark::DoNotOptimize(bw::stress_timeline(clip, bw::StressParams{}));
    }
}
BENCHMARK(BM_StressTimeline)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
