/**
 * stress.hpp: Vocal stress timeline from session audio.
 *
 * Pipeline: 40 ms frames every 10 ms -> normalized-autocorrelation pitch in
 * a 60-400 Hz band -> 3 s feature windows every 1 s -> score against the
 * calm baseline (first 30 s) -> median filter.
 *
 * Window score: z = a1*max(0, z(f0_mean)) + a2*max(0, z(jitter))
 *                 + a3*max(0, z(energy_rms)),
 *               score = 1 / (1 + exp(-slope * (z - z0))).
 * A sample is stressed (binary 1) when score >= 0.5.
 */
#pragma once

#include "bridgewatch/adapters.hpp"
#include "bridgewatch/audio.hpp"
#include "bridgewatch/config.hpp"
#include "bridgewatch/session.hpp"

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace bridgewatch {

struct FrameView {
    Timestamp t;
    std::span<const float> samples;
};

/// Frames start every hop_ms; a trailing partial frame is dropped. Throws
/// ClipTooShort when the clip is shorter than one frame.
std::vector<FrameView> frame_audio(const AudioClip& clip, int frame_ms = 40, int hop_ms = 10);

struct PitchFrame {
    Timestamp t;
    std::optional<double> f0_hz;  // empty when unvoiced
    double rms_energy = 0.0;
    double autocorr_peak = 0.0;

    bool operator==(const PitchFrame&) const = default;
};

PitchFrame estimate_f0(std::span<const float> frame, int sample_rate_hz, const PitchParams& params = {},
                       Timestamp t = {});

std::vector<PitchFrame> track_pitch(const AudioClip& clip, const StressParams& params);

struct WindowFeatures {
    double f0_mean = 0.0;
    double f0_std = 0.0;
    double jitter = 0.0;
    double energy_rms = 0.0;

    bool operator==(const WindowFeatures&) const = default;
};

struct StressWindowFeatures {
    Timestamp window_start;
    Timestamp window_end;
    double voiced_fraction = 0.0;
    /// Absent when voiced_fraction is below the minimum voicing.
    std::optional<WindowFeatures> features;
};

/// Windows [s, s + window_ms) for s = 0, hop, ... while s + window_ms <=
/// end_ms (default: one past the last frame's start).
std::vector<StressWindowFeatures> window_features(std::span<const PitchFrame> frames, int window_ms = 3000,
                                                  int hop_ms = 1000, double min_voicing = 0.2,
                                                  std::optional<std::int64_t> end_ms = std::nullopt);

struct FeatureStats {
    double mean = 0.0;
    double std = 0.0;  // population, floored at 1e-6
};

struct StressBaseline {
    FeatureStats f0_mean;
    FeatureStats jitter;
    FeatureStats energy_rms;
};

/// Statistics over windows ending at or before baseline_ms that carry
/// features. Throws MissingBaseline when there are none.
StressBaseline compute_baseline(std::span<const StressWindowFeatures> windows, std::int64_t baseline_ms);

struct StressSample {
    Timestamp t;
    double score = 0.0;
    int binary = 0;
    /// True when the window had no features and the score was carried forward.
    bool gap = false;

    bool operator==(const StressSample&) const = default;
};

/// Combined positive z-deviation fed to the logistic.
double stress_z(const WindowFeatures& features, const StressBaseline& baseline, const StressParams& params);
StressSample stress_score(const WindowFeatures& features, const StressBaseline& baseline,
                          const StressParams& params, Timestamp t = {});

/// Builds a sample from a score, thresholding at 0.5.
StressSample make_stress_sample(Timestamp t, double score, bool gap = false);

/// Median over a window of k (odd) centred on each element, truncated at
/// the ends.
std::vector<double> median_filter(std::span<const double> values, int k);

struct AudioSegment {
    std::string source;  // file the PCM came from, if any
    int sample_rate_hz = 0;
    std::size_t offset_samples = 0;
    std::span<const float> pcm;
    Timestamp start;
    Timestamp end;
};

/// Boundary for an external stress model scoring one window of audio.
class StressModelAdapter {
public:
    virtual ~StressModelAdapter() = default;
    virtual double score(const AudioSegment& segment, std::chrono::milliseconds timeout) = 0;
};

/// Request: {"pcm": {"ref", "sample_rate_hz", "offset_samples",
/// "length_samples"}, "window": {"start_ms", "end_ms"}}. Response:
/// {"score": float}.
std::string encode_stress_request(const AudioSegment& segment);
double decode_stress_response(std::string_view response);

class WireStressModel final : public StressModelAdapter {
public:
    explicit WireStressModel(JsonTransport transport) : transport_(std::move(transport)) {}
    double score(const AudioSegment& segment, std::chrono::milliseconds timeout) override;

private:
    JsonTransport transport_;
};

/// Throws OutOfRangeScore when the adapter answers outside [0, 1].
StressSample score_with_adapter(StressModelAdapter& adapter, const AudioSegment& segment,
                                std::chrono::milliseconds timeout = kDefaultAdapterTimeout);

struct StressTimeline {
    std::optional<StressBaseline> baseline;
    std::vector<StressSample> samples;
    /// Sample timestamps are window centres.
    std::int64_t window_ms = 0;
    bool adapter_used = false;
    std::string adapter_error;
};

/// Throws ClipTooShort, or MissingBaseline when the clip does not extend
/// past the baseline period. When an adapter is given it scores every
/// window; if it is unavailable or times out the built-in scorer is used.
StressTimeline stress_timeline(const AudioClip& clip, const StressParams& params,
                               StressModelAdapter* adapter = nullptr, const std::string& source = {},
                               std::chrono::milliseconds timeout = kDefaultAdapterTimeout);

}  // namespace bridgewatch
