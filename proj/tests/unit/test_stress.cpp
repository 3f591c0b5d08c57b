#include "bridgewatch/audio.hpp"
#include "bridgewatch/error.hpp"
#include "bridgewatch/stress.hpp"
#include "oracles.hpp"
#include "test_support.hpp"

#include <doctest.h>

#include <json.hpp>

#include <cmath>
#include <numbers>
#include <random>

using namespace bridgewatch;

namespace {

template <typename Fn>
Errc error_code(Fn&& fn) {
    try {
        fn();
    } catch (const Error& e) {
        return e.code();
    }
    FAIL("expected bridgewatch::Error");
    return Errc::MalformedLine;
}

AudioClip clip_of(std::vector<float> samples, int rate = 16000) {
    AudioClip c;
    c.sample_rate_hz = rate;
    c.samples = std::move(samples);
    return c;
}

// Tone whose frequency follows f(t) (Hz), synthesized by phase accumulation.
template <typename F>
std::vector<float> swept(F freq, double seconds, double amplitude = 0.4, int rate = 16000) {
    std::vector<float> out(static_cast<std::size_t>(seconds * rate));
    double phase = 0.0;
    for (std::size_t i = 0; i < out.size(); ++i) {
        const double t = static_cast<double>(i) / rate;
        phase += 2.0 * std::numbers::pi * freq(t) / rate;
        out[i] = static_cast<float>(amplitude * (std::sin(phase) + 0.4 * std::sin(2 * phase)) / 1.4);
    }
    return out;
}

std::vector<PitchFrame> voiced_frames(const std::vector<double>& f0s, std::int64_t step_ms = 10) {
    std::vector<PitchFrame> out;
    for (std::size_t i = 0; i < f0s.size(); ++i) {
        PitchFrame f;
        f.t = {static_cast<std::int64_t>(i) * step_ms};
        if (f0s[i] > 0) {
            f.f0_hz = f0s[i];
        }
        f.rms_energy = 0.1;
        f.autocorr_peak = f0s[i] > 0 ? 0.9 : 0.1;
        out.push_back(f);
    }
    return out;
}

StressBaseline unit_baseline() {
    StressBaseline b;
    b.f0_mean = {200.0, 10.0};
    b.jitter = {0.01, 0.005};
    b.energy_rms = {0.1, 0.02};
    return b;
}

class FixedScore final : public StressModelAdapter {
public:
    explicit FixedScore(double s) : s_(s) {}
    double score(const AudioSegment&, std::chrono::milliseconds) override { return s_; }

private:
    double s_;
};

}  // namespace

TEST_SUITE("stress") {

TEST_CASE("framing counts and tiling") {
    AudioClip one_second = clip_of(std::vector<float>(16000, 0.0f));
    CHECK(frame_audio(one_second).size() == 97);
    CHECK(error_code([] { frame_audio(clip_of(std::vector<float>(480, 0.0f))); }) == Errc::ClipTooShort);
    auto tiles = frame_audio(one_second, 40, 40);
    REQUIRE(tiles.size() == 25);
    for (std::size_t i = 0; i < tiles.size(); ++i) {
        CHECK(tiles[i].t.ms == static_cast<std::int64_t>(40 * i));
        CHECK(tiles[i].samples.size() == 640);
        CHECK(tiles[i].samples.data() == one_second.samples.data() + 640 * i);
    }
}

TEST_CASE("frame count follows floor((len - frame)/hop) + 1") {
    for (int ms : {40, 41, 49, 50, 333, 1000, 2017}) {
        AudioClip c = clip_of(std::vector<float>(static_cast<std::size_t>(16 * ms), 0.0f));
        CHECK(frame_audio(c).size() == static_cast<std::size_t>((ms - 40) / 10 + 1));
    }
}

TEST_CASE("220 Hz tone is estimated within 3 Hz") {
    std::vector<float> tone = bwtest::sine(220.0, 0.5, 16000, 0.04);
    PitchFrame f = estimate_f0(tone, 16000);
    REQUIRE(f.f0_hz.has_value());
    CHECK(std::abs(*f.f0_hz - 220.0) <= 3.0);
    CHECK(f.autocorr_peak >= 0.5);
}

TEST_CASE("digital silence is unvoiced") {
    std::vector<float> silence(640, 0.0f);
    PitchFrame f = estimate_f0(silence, 16000);
    CHECK_FALSE(f.f0_hz.has_value());
    CHECK(f.rms_energy == 0.0);
}

TEST_CASE("white noise is mostly unvoiced") {
    std::mt19937_64 rng(99);
    std::uniform_real_distribution<float> u(-0.3f, 0.3f);
    std::vector<float> noise(16000 * 3);
    for (float& x : noise) {
        x = u(rng);
    }
    auto frames = track_pitch(clip_of(noise), StressParams{});
    REQUIRE(frames.size() >= 100);
    std::size_t voiced = 0;
    for (const PitchFrame& f : frames) {
        voiced += f.f0_hz ? 1 : 0;
    }
    CHECK(static_cast<double>(voiced) / frames.size() < 0.2);
}

TEST_CASE("voiced frames respect the band and the voicing threshold") {
    auto frames = track_pitch(clip_of(swept([](double t) { return 80 + 100 * t; }, 3.0)), StressParams{});
    for (const PitchFrame& f : frames) {
        if (f.f0_hz) {
            CHECK(*f.f0_hz >= 60.0);
            CHECK(*f.f0_hz <= 400.0);
            CHECK(f.autocorr_peak >= 0.5);
        }
    }
}

TEST_CASE("pitch is amplitude invariant") {
    std::vector<float> base = swept([](double t) { return 150 + 40 * std::sin(t * 3); }, 2.0, 1.0 / 1.0);
    PitchParams p;
    for (double c : {0.15, 0.4, 0.8, 1.0}) {
        std::vector<float> scaled = base;
        for (float& x : scaled) {
            x = static_cast<float>(x * c * 0.9);
        }
        for (std::size_t start = 0; start + 640 <= base.size(); start += 1600) {
            auto ref = estimate_f0(std::span<const float>(base).subspan(start, 640), 16000, p);
            auto got = estimate_f0(std::span<const float>(scaled).subspan(start, 640), 16000, p);
            REQUIRE(ref.f0_hz.has_value());
            REQUIRE(got.f0_hz.has_value());
            CHECK(std::abs(*ref.f0_hz - *got.f0_hz) <= 1.0);
        }
    }
}

TEST_CASE("window features: constant pitch") {
    auto frames = voiced_frames(std::vector<double>(300, 220.0));
    auto w = window_features(frames, 3000, 1000, 0.2, 3000);
    REQUIRE(w.size() == 1);
    REQUIRE(w[0].features.has_value());
    CHECK(w[0].features->f0_mean == doctest::Approx(220.0));
    CHECK(w[0].features->f0_std == doctest::Approx(0.0));
    CHECK(w[0].features->jitter == 0.0);
    CHECK(w[0].voiced_fraction == 1.0);
}

TEST_CASE("window features: alternating 200/210 Hz jitter") {
    std::vector<double> f0s;
    for (int i = 0; i < 300; ++i) {
        f0s.push_back(i % 2 == 0 ? 200.0 : 210.0);
    }
    auto w = window_features(voiced_frames(f0s), 3000, 1000, 0.2, 3000);
    REQUIRE(w.size() == 1);
    CHECK(std::abs(w[0].features->jitter - 10.0 / 205.0) <= 1e-12);
    CHECK(w[0].features->f0_mean == doctest::Approx(205.0));
}

TEST_CASE("window features: unvoiced window has no features") {
    auto w = window_features(voiced_frames(std::vector<double>(300, 0.0)), 3000, 1000, 0.2, 3000);
    REQUIRE(w.size() == 1);
    CHECK_FALSE(w[0].features.has_value());
    CHECK(w[0].voiced_fraction == 0.0);
}

TEST_CASE("window features: hop and voicing threshold") {
    std::vector<double> f0s(1000, 0.0);
    for (std::size_t i = 0; i < 1000; i += 4) {
        f0s[i] = 180.0;  // 25% voiced
    }
    auto w = window_features(voiced_frames(f0s), 3000, 1000, 0.3);
    REQUIRE(w.size() == 7);
    CHECK(w[1].window_start.ms == 1000);
    CHECK(w[1].window_end.ms == 4000);
    for (const auto& x : w) {
        CHECK(x.voiced_fraction >= 0.0);
        CHECK(x.voiced_fraction <= 1.0);
        CHECK_FALSE(x.features.has_value());
    }
}

TEST_CASE("logistic score closed forms") {
    StressBaseline b = unit_baseline();
    StressParams p;
    WindowFeatures at_mean{200.0, 0.0, 0.01, 0.1};
    StressSample s0 = stress_score(at_mean, b, p);
    CHECK(std::abs(s0.score - 1.0 / (1.0 + std::exp(4.0))) <= 1e-12);
    CHECK(s0.binary == 0);

    WindowFeatures four_sd{240.0, 0.0, 0.01, 0.1};
    CHECK(stress_z(four_sd, b, p) == doctest::Approx(2.0));
    StressSample mid = stress_score(four_sd, b, p);
    CHECK(std::abs(mid.score - 0.5) <= 1e-12);
    CHECK(mid.binary == 1);

    WindowFeatures six_sd{260.0, 0.0, 0.01, 0.1};
    StressSample high = stress_score(six_sd, b, p);
    CHECK(std::abs(high.score - 1.0 / (1.0 + std::exp(-2.0))) <= 1e-12);
    CHECK(high.score == doctest::Approx(0.881).epsilon(1e-3));
}

TEST_CASE("negative deviations do not raise the score") {
    StressBaseline b = unit_baseline();
    WindowFeatures calm{150.0, 0.0, 0.0, 0.01};
    CHECK(stress_z(calm, b, StressParams{}) == 0.0);
}

TEST_CASE("property: score monotone in each positive deviation, bounded, thresholded") {
    StressBaseline b = unit_baseline();
    StressParams p;
    std::mt19937_64 rng(6);
    std::uniform_real_distribution<double> u(0.0, 5.0);
    for (int trial = 0; trial < 1000; ++trial) {
        WindowFeatures f{200 + 10 * u(rng), 0.0, 0.01 + 0.005 * u(rng), 0.1 + 0.02 * u(rng)};
        StressSample s = stress_score(f, b, p);
        CHECK(s.score >= 0.0);
        CHECK(s.score <= 1.0);
        CHECK((s.binary == 1) == (s.score >= 0.5));
        WindowFeatures g = f;
        switch (trial % 3) {
            case 0: g.f0_mean += u(rng); break;
            case 1: g.jitter += 0.001 * u(rng); break;
            default: g.energy_rms += 0.01 * u(rng); break;
        }
        CHECK(stress_score(g, b, p).score >= s.score);
    }
}

TEST_CASE("baseline needs feature windows inside the calm period") {
    std::vector<StressWindowFeatures> ws = {{{40000}, {43000}, 1.0, WindowFeatures{200, 0, 0, 0.1}}};
    CHECK(error_code([&] { compute_baseline(ws, 30000); }) == Errc::MissingBaseline);
    ws.push_back({{0}, {3000}, 1.0, WindowFeatures{200, 0, 0, 0.1}});
    ws.push_back({{1000}, {4000}, 1.0, WindowFeatures{210, 0, 0, 0.1}});
    StressBaseline b = compute_baseline(ws, 30000);
    CHECK(b.f0_mean.mean == doctest::Approx(205.0));
    CHECK(b.f0_mean.std == doctest::Approx(5.0));
    CHECK(b.jitter.std == 1e-6);
}

TEST_CASE("median filter examples and bounds") {
    std::vector<double> v = {1, 9, 2, 8, 3};
    auto m = median_filter(v, 3);
    CHECK(m[1] == 2.0);
    CHECK(m[2] == 8.0);
    CHECK(m[3] == 3.0);
    CHECK(median_filter(v, 1) == v);

    std::mt19937_64 rng(13);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int trial = 0; trial < 300; ++trial) {
        std::vector<double> x(1 + trial % 30);
        for (double& e : x) {
            e = u(rng);
        }
        const int k = 1 + 2 * (trial % 4);
        auto y = median_filter(x, k);
        REQUIRE(y.size() == x.size());
        for (std::size_t i = 0; i < x.size(); ++i) {
            const std::size_t lo = i >= static_cast<std::size_t>(k / 2) ? i - k / 2 : 0;
            const std::size_t hi = std::min(x.size() - 1, i + k / 2);
            auto [mn, mx] = std::minmax_element(x.begin() + static_cast<long>(lo), x.begin() + static_cast<long>(hi) + 1);
            CHECK(y[i] >= *mn);
            CHECK(y[i] <= *mx);
        }
    }
}

TEST_CASE("pitch rise after a transition raises the stress score") {
    auto f = [](double t) {
        double wobble = 3.0 * std::sin(2 * std::numbers::pi * t / 5.0);
        return t < 60.0 ? 200.0 + wobble : 300.0 + 4 * wobble + 6.0 * std::sin(2 * std::numbers::pi * 7 * t);
    };
    StressTimeline tl = stress_timeline(clip_of(swept(f, 120.0)), StressParams{});
    double pre = 0, post = 0;
    int npre = 0, npost = 0;
    for (const StressSample& s : tl.samples) {
        CHECK(s.score >= 0.0);
        CHECK(s.score <= 1.0);
        if (s.t.ms < 58000) {
            pre += s.score;
            ++npre;
        } else if (s.t.ms > 62000) {
            post += s.score;
            ++npost;
        }
    }
    REQUIRE(npre > 0);
    REQUIRE(npost > 0);
    CHECK(post / npost > pre / npre);
    CHECK(tl.samples.front().t.ms == 1500);
}

TEST_CASE("uniform clip stays calm after the baseline") {
    StressTimeline tl = stress_timeline(clip_of(swept([](double) { return 200.0; }, 60.0)), StressParams{});
    REQUIRE_FALSE(tl.samples.empty());
    for (const StressSample& s : tl.samples) {
        CHECK(s.binary == 0);
    }
}

TEST_CASE("clip shorter than the baseline") {
    CHECK(error_code([] { stress_timeline(clip_of(swept([](double) { return 200.0; }, 20.0)), StressParams{}); }) ==
          Errc::MissingBaseline);
}

TEST_CASE("adapter scores pass through or are rejected") {
    std::vector<float> pcm(16000, 0.1f);
    AudioSegment seg{"a.wav", 16000, 0, pcm, {0}, {1000}};
    FixedScore ok(0.7);
    StressSample s = score_with_adapter(ok, seg);
    CHECK(s.score == 0.7);
    CHECK(s.binary == 1);
    FixedScore bad(1.2);
    CHECK(error_code([&] { score_with_adapter(bad, seg); }) == Errc::OutOfRangeScore);
}

TEST_CASE("stress wire contract") {
    std::vector<float> pcm(800, 0.0f);
    AudioSegment seg{"session/audio.wav", 16000, 32000, pcm, {2000}, {2050}};
    nlohmann::json req = nlohmann::json::parse(encode_stress_request(seg));
    CHECK(req["pcm"]["ref"] == "session/audio.wav");
    CHECK(req["pcm"]["offset_samples"] == 32000);
    CHECK(req["pcm"]["length_samples"] == 800);
    CHECK(req["window"]["start_ms"] == 2000);
    CHECK(decode_stress_response(R"({"score":0.25})") == 0.25);
    CHECK(error_code([] { decode_stress_response(R"({"s":1})"); }) == Errc::MalformedAdapterResponse);
}

TEST_CASE("timeline uses the adapter, or falls back when it is unreachable") {
    AudioClip clip = clip_of(swept([](double) { return 200.0; }, 40.0));
    FixedScore fixed(0.7);
    StressTimeline with = stress_timeline(clip, StressParams{}, &fixed);
    CHECK(with.adapter_used);
    for (const StressSample& s : with.samples) {
        CHECK(s.score == 0.7);
    }
    WireStressModel down([](const std::string&, std::chrono::milliseconds) -> std::string {
        throw Error(Errc::AdapterTimeout, "slow");
    });
    StressTimeline fallback = stress_timeline(clip, StressParams{}, &down);
    CHECK_FALSE(fallback.adapter_used);
    CHECK_FALSE(fallback.adapter_error.empty());
    CHECK(fallback.baseline.has_value());
}

TEST_CASE("wav round trip and validation") {
    AudioClip c = clip_of(bwtest::sine(440, 0.5, 8000, 0.1), 8000);
    AudioClip back = decode_wav(encode_wav(c));
    CHECK(back.sample_rate_hz == 8000);
    REQUIRE(back.samples.size() == c.samples.size());
    for (std::size_t i = 0; i < c.samples.size(); ++i) {
        CHECK(std::abs(back.samples[i] - c.samples[i]) <= 1.0 / 32767);
    }
    CHECK(error_code([] { validate_clip(clip_of({0.1f}, 4000)); }) == Errc::InvalidAudio);
    CHECK(error_code([] { validate_clip(clip_of({}, 16000)); }) == Errc::InvalidAudio);
    CHECK(error_code([] { decode_wav("RIFFjunk"); }) == Errc::InvalidAudio);
}

}
