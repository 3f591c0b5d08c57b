#include "bridgewatch/attention.hpp"

#include "bridgewatch/error.hpp"

#include <algorithm>
#include <cmath>
#include <fmt/format.h>

namespace bridgewatch {

double nearest_rank_percentile(std::span<const double> sorted, double percent) {
    const auto n = static_cast<double>(sorted.size());
    auto rank = static_cast<std::size_t>(std::ceil(percent / 100.0 * n));
    rank = std::clamp<std::size_t>(rank, 1, sorted.size());
    return sorted[rank - 1];
}

PupilCalibration calibrate_pupil(std::span<const GazeSample> gaze, PupilMethod method) {
    std::vector<double> diam;
    diam.reserve(gaze.size());
    for (const GazeSample& s : gaze) {
        if (!s.valid) {
            continue;
        }
        if (auto d = s.mean_pupil_mm()) {
            diam.push_back(*d);
        }
    }
    if (diam.size() < 2) {
        throw Error(Errc::InsufficientPupilData,
                    fmt::format("InsufficientPupilData: {} usable pupil sample(s), need 2", diam.size()));
    }
    std::sort(diam.begin(), diam.end());

    PupilCalibration cal{diam.front(), diam.back(), method};
    if (method.kind == PupilMethod::Kind::Robust) {
        cal.pd_min_mm = nearest_rank_percentile(diam, method.p_low);
        cal.pd_max_mm = nearest_rank_percentile(diam, method.p_high);
    }
    if (!(cal.pd_min_mm < cal.pd_max_mm)) {
        throw Error(Errc::DegenerateCalibration,
                    fmt::format("DegenerateCalibration: pd_min {} >= pd_max {}", cal.pd_min_mm, cal.pd_max_mm));
    }
    return cal;
}

double pd_normalize(double pd_mm, const PupilCalibration& cal) {
    double v = (pd_mm - cal.pd_min_mm) / (cal.pd_max_mm - cal.pd_min_mm);
    return std::clamp(v, 0.0, 1.0);
}

double gaze_stability(std::span<const Point2> points, const ScreenGeometry& screen, GsDivisor divisor) {
    const std::size_t n = points.size();
    if (n < 2) {
        throw Error(Errc::WindowTooSmall, fmt::format("WindowTooSmall: {} point(s), need 2", n));
    }
    const double diagonal = screen.diagonal_px();
    double sum = 0.0;
    for (std::size_t i = 0; i + 1 < n; ++i) {
        sum += std::hypot(points[i].x - points[i + 1].x, points[i].y - points[i + 1].y) / diagonal;
    }
    const double d = divisor == GsDivisor::N ? static_cast<double>(n) : static_cast<double>(n - 1);
    return 1.0 - sum / d;
}

double gaze_stability(std::span<const GazeSample> window, const ScreenGeometry& screen, GsDivisor divisor) {
    std::vector<Point2> pts;
    pts.reserve(window.size());
    for (const GazeSample& s : window) {
        if (!s.gaze_px) {
            throw Error(Errc::OutOfRangeValue, "gaze_stability: sample without gaze position");
        }
        pts.push_back(*s.gaze_px);
    }
    return gaze_stability(std::span<const Point2>(pts), screen, divisor);
}

double attentional_focus(double pd_norm, double gs, double w1, double w2) {
    if (!(w1 >= 0.0 && w2 >= 0.0) || std::abs(w1 + w2 - 1.0) > 1e-9) {
        throw Error(Errc::InvalidWeights, fmt::format("InvalidWeights: w1={} w2={}", w1, w2));
    }
    return w1 * pd_norm + w2 * gs;
}

namespace {

void add_gap(std::vector<TimeRange>& gaps, Timestamp start, Timestamp end) {
    if (!gaps.empty() && gaps.back().end >= start) {
        gaps.back().end = std::max(gaps.back().end, end);
        return;
    }
    gaps.push_back({start, end});
}

}  // namespace

AFTimeline af_timeline(const Session& session, const AnalysisConfig& config) {
    AFTimeline out;
    const auto& gaze = session.gaze;
    if (gaze.empty()) {
        return out;
    }
    const bool any_valid = std::any_of(gaze.begin(), gaze.end(),
                                       [](const GazeSample& s) { return s.valid && s.gaze_px; });
    if (!any_valid) {
        out.gaps.push_back({gaze.front().t, gaze.back().t});
        return out;
    }
    out.calibration = calibrate_pupil(gaze, config.pd_calibration);

    const auto n = static_cast<std::size_t>(config.af_window_n);
    const auto stride = static_cast<std::size_t>(config.af_stride);
    if (gaze.size() < n) {
        out.gaps.push_back({gaze.front().t, gaze.back().t});
        return out;
    }

    std::vector<Point2> pts;
    pts.reserve(n);
    for (std::size_t start = 0; start + n <= gaze.size(); start += stride) {
        Timestamp t0 = gaze[start].t;
        Timestamp t1 = gaze[start + n - 1].t;
        if (t1 <= t0) {
            t1.ms = t0.ms + 1;
        }
        pts.clear();
        double pd_sum = 0.0;
        std::size_t pd_count = 0;
        for (std::size_t i = start; i < start + n; ++i) {
            const GazeSample& s = gaze[i];
            if (!s.valid || !s.gaze_px) {
                continue;
            }
            pts.push_back(*s.gaze_px);
            if (auto d = s.mean_pupil_mm()) {
                pd_sum += pd_normalize(*d, out.calibration);
                ++pd_count;
            }
        }
        if (pts.size() < 2 || pd_count == 0) {
            add_gap(out.gaps, t0, t1);
            continue;
        }
        AFSample a{t0, t1};
        a.pd_norm = pd_sum / static_cast<double>(pd_count);
        a.gs = gaze_stability(std::span<const Point2>(pts), session.screen(), config.gs_divisor);
        a.af = attentional_focus(a.pd_norm, a.gs, config.w1, config.w2);
        out.samples.push_back(a);
    }
    return out;
}

std::vector<EventSlice> event_locked_af(std::span<const AFSample> timeline,
                                        std::span<const TriggerEvent> events, std::int64_t pre_ms,
                                        std::int64_t post_ms) {
    std::vector<EventSlice> out;
    for (const TriggerEvent& e : events) {
        if (timeline.empty() || e.t > timeline.back().window_end) {
            throw Error(Errc::EventOutsideSession,
                        fmt::format("EventOutsideSession: '{}' at {} ms", e.kind, e.t.ms));
        }
        EventSlice slice{e, Timestamp{std::max<std::int64_t>(0, e.t.ms - pre_ms)}, Timestamp{e.t.ms + post_ms}};
        double pre_sum = 0.0;
        std::size_t pre_n = 0;
        for (const AFSample& s : timeline) {
            if (s.window_start < slice.from || s.window_start > slice.to) {
                continue;
            }
            slice.samples.push_back(s);
            if (s.window_start < e.t) {
                pre_sum += s.af;
                ++pre_n;
            } else {
                slice.post_max = std::max(slice.post_max.value_or(s.af), s.af);
            }
        }
        if (pre_n > 0) {
            slice.pre_mean = pre_sum / static_cast<double>(pre_n);
        }
        out.push_back(std::move(slice));
    }
    return out;
}

}  // namespace bridgewatch
