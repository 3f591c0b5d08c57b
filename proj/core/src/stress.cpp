#include "bridgewatch/stress.hpp"

#include "bridgewatch/error.hpp"
#include "json_io.hpp"

#include <algorithm>
#include <cmath>
#include <fmt/format.h>

namespace bridgewatch {

std::vector<FrameView> frame_audio(const AudioClip& clip, int frame_ms, int hop_ms) {
    if (frame_ms <= 0 || hop_ms <= 0) {
        throw Error(Errc::OutOfRangeValue, "frame_audio: frame and hop must be positive");
    }
    const auto sr = static_cast<std::int64_t>(clip.sample_rate_hz);
    const auto frame_len = static_cast<std::size_t>(sr * frame_ms / 1000);
    const auto hop = static_cast<std::size_t>(sr * hop_ms / 1000);
    if (frame_len == 0 || hop == 0 || clip.samples.size() < frame_len) {
        throw Error(Errc::ClipTooShort, fmt::format("ClipTooShort: {:.1f} ms clip, {} ms frames",
                                                    clip.duration_ms(), frame_ms));
    }
    const std::size_t count = (clip.samples.size() - frame_len) / hop + 1;
    std::vector<FrameView> frames;
    frames.reserve(count);
    std::span<const float> all(clip.samples);
    for (std::size_t i = 0; i < count; ++i) {
        const std::size_t start = i * hop;
        frames.push_back({Timestamp{static_cast<std::int64_t>(start) * 1000 / sr}, all.subspan(start, frame_len)});
    }
    return frames;
}

PitchFrame estimate_f0(std::span<const float> frame, int sample_rate_hz, const PitchParams& params, Timestamp t) {
    PitchFrame out{t};
    const std::size_t n = frame.size();
    if (n < 4 || sample_rate_hz <= 0) {
        return out;
    }
    // Prefix sums of x^2 give the energy of any overlap segment in O(1).
    std::vector<double> cum(n + 1, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        cum[i + 1] = cum[i] + static_cast<double>(frame[i]) * frame[i];
    }
    out.rms_energy = std::sqrt(cum[n] / static_cast<double>(n));

    const double sr = sample_rate_hz;
    auto lag_min = static_cast<std::size_t>(std::ceil(sr / params.f0_max_hz));
    auto lag_max = static_cast<std::size_t>(std::floor(sr / params.f0_min_hz));
    lag_min = std::max<std::size_t>(lag_min, 2);
    lag_max = std::min(lag_max, n - 2);
    if (lag_min > lag_max) {
        return out;
    }

    // r[k] holds the normalized autocorrelation at lag (lag_min - 1 + k).
    const std::size_t lo = lag_min - 1;
    const std::size_t hi = lag_max + 1;
    std::vector<double> r(hi - lo + 1, 0.0);
    for (std::size_t lag = lo; lag <= hi; ++lag) {
        const std::size_t len = n - lag;
        double acc = 0.0;
        for (std::size_t i = 0; i < len; ++i) {
            acc += static_cast<double>(frame[i]) * frame[i + lag];
        }
        const double e0 = cum[len];
        const double e1 = cum[n] - cum[lag];
        const double denom = std::sqrt(e0 * e1);
        r[lag - lo] = denom > 0.0 ? acc / denom : 0.0;
    }

    std::size_t best = lag_min;
    for (std::size_t lag = lag_min; lag <= lag_max; ++lag) {
        if (r[lag - lo] > r[best - lo]) {
            best = lag;
        }
    }
    const double peak_max = r[best - lo];
    // Octave guard: the period is the first local peak close to the band
    // maximum; later peaks at multiples of it are sub-harmonics.
    for (std::size_t lag = lag_min; lag < best; ++lag) {
        const double v = r[lag - lo];
        if (v >= params.octave_guard * peak_max && v >= r[lag - lo - 1] && v >= r[lag - lo + 1]) {
            best = lag;
            break;
        }
    }
    out.autocorr_peak = std::clamp(r[best - lo], 0.0, 1.0);
    if (out.autocorr_peak >= params.voicing_threshold && out.rms_energy >= params.energy_floor) {
        out.f0_hz = sr / static_cast<double>(best);
    }
    return out;
}

std::vector<PitchFrame> track_pitch(const AudioClip& clip, const StressParams& params) {
    std::vector<FrameView> frames = frame_audio(clip, params.frame_ms, params.frame_hop_ms);
    std::vector<PitchFrame> out;
    out.reserve(frames.size());
    for (const FrameView& f : frames) {
        out.push_back(estimate_f0(f.samples, clip.sample_rate_hz, params.pitch, f.t));
    }
    return out;
}

std::vector<StressWindowFeatures> window_features(std::span<const PitchFrame> frames, int window_ms, int hop_ms,
                                                  double min_voicing, std::optional<std::int64_t> end_ms) {
    std::vector<StressWindowFeatures> out;
    if (frames.empty() || window_ms <= 0 || hop_ms <= 0) {
        return out;
    }
    const std::int64_t end = end_ms.value_or(frames.back().t.ms + 1);
    std::size_t first = 0;
    for (std::int64_t s = 0; s + window_ms <= end; s += hop_ms) {
        while (first < frames.size() && frames[first].t.ms < s) {
            ++first;
        }
        StressWindowFeatures w{Timestamp{s}, Timestamp{s + window_ms}};
        std::size_t total = 0;
        std::size_t voiced = 0;
        double f0_sum = 0.0;
        double f0_sq = 0.0;
        double energy_sq = 0.0;
        double jitter_sum = 0.0;
        std::size_t jitter_pairs = 0;
        const PitchFrame* prev = nullptr;
        for (std::size_t i = first; i < frames.size() && frames[i].t.ms < s + window_ms; ++i) {
            const PitchFrame& f = frames[i];
            ++total;
            energy_sq += f.rms_energy * f.rms_energy;
            if (f.f0_hz) {
                ++voiced;
                f0_sum += *f.f0_hz;
                f0_sq += *f.f0_hz * *f.f0_hz;
                if (prev != nullptr && prev->f0_hz) {
                    jitter_sum += std::abs(*f.f0_hz - *prev->f0_hz);
                    ++jitter_pairs;
                }
            }
            prev = &f;
        }
        w.voiced_fraction = total > 0 ? static_cast<double>(voiced) / static_cast<double>(total) : 0.0;
        if (voiced > 0 && w.voiced_fraction >= min_voicing) {
            WindowFeatures feat;
            const auto nv = static_cast<double>(voiced);
            feat.f0_mean = f0_sum / nv;
            feat.f0_std = std::sqrt(std::max(0.0, f0_sq / nv - feat.f0_mean * feat.f0_mean));
            feat.jitter = jitter_pairs > 0 ? (jitter_sum / static_cast<double>(jitter_pairs)) / feat.f0_mean : 0.0;
            feat.energy_rms = std::sqrt(energy_sq / static_cast<double>(total));
            w.features = feat;
        }
        out.push_back(w);
    }
    return out;
}

namespace {

constexpr double kStdFloor = 1e-6;

FeatureStats stats_of(const std::vector<double>& xs) {
    double mean = 0.0;
    for (double x : xs) {
        mean += x;
    }
    mean /= static_cast<double>(xs.size());
    double var = 0.0;
    for (double x : xs) {
        var += (x - mean) * (x - mean);
    }
    var /= static_cast<double>(xs.size());
    return {mean, std::max(std::sqrt(var), kStdFloor)};
}

double logistic(double z, const StressParams& p) {
    return 1.0 / (1.0 + std::exp(-p.slope * (z - p.z0)));
}

}  // namespace

StressBaseline compute_baseline(std::span<const StressWindowFeatures> windows, std::int64_t baseline_ms) {
    std::vector<double> f0;
    std::vector<double> jitter;
    std::vector<double> energy;
    for (const StressWindowFeatures& w : windows) {
        if (w.window_end.ms > baseline_ms || !w.features) {
            continue;
        }
        f0.push_back(w.features->f0_mean);
        jitter.push_back(w.features->jitter);
        energy.push_back(w.features->energy_rms);
    }
    if (f0.empty()) {
        throw Error(Errc::MissingBaseline,
                    fmt::format("MissingBaseline: no voiced windows in the first {} ms", baseline_ms));
    }
    return {stats_of(f0), stats_of(jitter), stats_of(energy)};
}

double stress_z(const WindowFeatures& f, const StressBaseline& b, const StressParams& p) {
    auto pos_z = [](double x, const FeatureStats& s) {
        return std::max(0.0, (x - s.mean) / std::max(s.std, kStdFloor));
    };
    return p.a_f0 * pos_z(f.f0_mean, b.f0_mean) + p.a_jitter * pos_z(f.jitter, b.jitter) +
           p.a_energy * pos_z(f.energy_rms, b.energy_rms);
}

StressSample make_stress_sample(Timestamp t, double score, bool gap) {
    return {t, score, score >= 0.5 ? 1 : 0, gap};
}

StressSample stress_score(const WindowFeatures& features, const StressBaseline& baseline, const StressParams& params,
                          Timestamp t) {
    return make_stress_sample(t, logistic(stress_z(features, baseline, params), params));
}

std::vector<double> median_filter(std::span<const double> values, int k) {
    std::vector<double> out(values.size());
    const auto half = static_cast<std::size_t>(std::max(k, 1) / 2);
    std::vector<double> buf;
    for (std::size_t i = 0; i < values.size(); ++i) {
        const std::size_t lo = i >= half ? i - half : 0;
        const std::size_t hi = std::min(values.size() - 1, i + half);
        buf.assign(values.begin() + static_cast<std::ptrdiff_t>(lo), values.begin() + static_cast<std::ptrdiff_t>(hi) + 1);
        std::sort(buf.begin(), buf.end());
        const std::size_t m = buf.size();
        out[i] = m % 2 == 1 ? buf[m / 2] : (buf[m / 2 - 1] + buf[m / 2]) / 2.0;
    }
    return out;
}

std::string encode_stress_request(const AudioSegment& segment) {
    detail::ordered_json req;
    req["pcm"] = {{"ref", segment.source},
                  {"sample_rate_hz", segment.sample_rate_hz},
                  {"offset_samples", segment.offset_samples},
                  {"length_samples", segment.pcm.size()}};
    req["window"] = {{"start_ms", segment.start.ms}, {"end_ms", segment.end.ms}};
    return req.dump();
}

double decode_stress_response(std::string_view response) {
    auto doc = detail::json::parse(response.begin(), response.end(), nullptr, false);
    if (doc.is_discarded() || !doc.is_object() || !doc.contains("score") || !doc["score"].is_number()) {
        throw Error(Errc::MalformedAdapterResponse, "MalformedAdapterResponse: expected {\"score\": number}");
    }
    return doc["score"].get<double>();
}

double WireStressModel::score(const AudioSegment& segment, std::chrono::milliseconds timeout) {
    if (!transport_) {
        throw Error(Errc::AdapterUnavailable, "AdapterUnavailable: no transport configured");
    }
    return decode_stress_response(transport_(encode_stress_request(segment), timeout));
}

StressSample score_with_adapter(StressModelAdapter& adapter, const AudioSegment& segment,
                                std::chrono::milliseconds timeout) {
    const double s = adapter.score(segment, timeout);
    if (!(s >= 0.0 && s <= 1.0)) {
        throw Error(Errc::OutOfRangeScore, fmt::format("OutOfRangeScore: {}", s));
    }
    return make_stress_sample(segment.start, s);
}

StressTimeline stress_timeline(const AudioClip& clip, const StressParams& params, StressModelAdapter* adapter,
                               const std::string& source, std::chrono::milliseconds timeout) {
    validate_clip(clip);
    std::vector<PitchFrame> pitch = track_pitch(clip, params);
    const double duration = clip.duration_ms();
    if (duration <= static_cast<double>(params.baseline_ms)) {
        throw Error(Errc::MissingBaseline, fmt::format("MissingBaseline: {:.0f} ms clip, baseline needs {} ms",
                                                       duration, params.baseline_ms));
    }
    std::vector<StressWindowFeatures> windows =
        window_features(pitch, params.window_ms, params.window_hop_ms, params.min_voicing,
                        static_cast<std::int64_t>(std::floor(duration)));

    StressTimeline out;
    out.window_ms = params.window_ms;
    std::vector<double> raw;
    std::vector<bool> gaps;
    raw.reserve(windows.size());

    if (adapter != nullptr) {
        try {
            const auto sr = static_cast<std::int64_t>(clip.sample_rate_hz);
            std::span<const float> all(clip.samples);
            for (const StressWindowFeatures& w : windows) {
                const auto from = static_cast<std::size_t>(w.window_start.ms * sr / 1000);
                const auto to = std::min(all.size(), static_cast<std::size_t>(w.window_end.ms * sr / 1000));
                AudioSegment seg{source, clip.sample_rate_hz, from, all.subspan(from, to - from), w.window_start,
                                 w.window_end};
                raw.push_back(score_with_adapter(*adapter, seg, timeout).score);
                gaps.push_back(false);
            }
            out.adapter_used = true;
        } catch (const Error& e) {
            if (e.code() != Errc::AdapterUnavailable && e.code() != Errc::AdapterTimeout) {
                throw;
            }
            out.adapter_error = e.what();
            raw.clear();
            gaps.clear();
        }
    }

    if (!out.adapter_used) {
        out.baseline = compute_baseline(windows, params.baseline_ms);
        std::optional<double> last;
        for (const StressWindowFeatures& w : windows) {
            if (w.features) {
                last = logistic(stress_z(*w.features, *out.baseline, params), params);
                raw.push_back(*last);
                gaps.push_back(false);
            } else {
                raw.push_back(last.value_or(logistic(0.0, params)));
                gaps.push_back(true);
            }
        }
    }

    std::vector<double> smoothed = median_filter(raw, params.median_k);
    for (std::size_t i = 0; i < windows.size(); ++i) {
        Timestamp centre{windows[i].window_start.ms + params.window_ms / 2};
        out.samples.push_back(make_stress_sample(centre, smoothed[i], gaps[i]));
    }
    return out;
}

}  // namespace bridgewatch
