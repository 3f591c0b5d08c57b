/**
 * attention.hpp: Attentional-focus metric.
 *
 *   pd_norm = (pd - pd_min) / (pd_max - pd_min), clamped to [0, 1]
 *   gs      = 1 - (1/D) * sum_{i=1}^{N-1} |G_i - G_{i+1}| / diagonal
 *   af      = w1 * pd_norm + w2 * gs
 *
 * where D is N (default) or N-1 (GsDivisor::NMinus1). Pupil calibration is
 * per session.
 */
#pragma once

#include "bridgewatch/config.hpp"
#include "bridgewatch/session.hpp"

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

namespace bridgewatch {

struct PupilCalibration {
    double pd_min_mm = 0.0;
    double pd_max_mm = 0.0;
    PupilMethod method;
};

/// Uses the per-sample mean diameter of valid samples. Throws
/// InsufficientPupilData (< 2 usable samples) or DegenerateCalibration.
PupilCalibration calibrate_pupil(std::span<const GazeSample> gaze, PupilMethod method);

/// Nearest-rank percentile of an already sorted, non-empty range.
double nearest_rank_percentile(std::span<const double> sorted, double percent);

double pd_normalize(double pd_mm, const PupilCalibration& cal);

/// Throws WindowTooSmall when fewer than two points are given.
double gaze_stability(std::span<const Point2> points, const ScreenGeometry& screen,
                      GsDivisor divisor = GsDivisor::N);

/// Convenience overload over samples; every sample must carry a position.
double gaze_stability(std::span<const GazeSample> window, const ScreenGeometry& screen,
                      GsDivisor divisor = GsDivisor::N);

/// Throws InvalidWeights unless w1, w2 >= 0 and w1 + w2 = 1 (within 1e-9).
double attentional_focus(double pd_norm, double gs, double w1, double w2);

struct AFSample {
    Timestamp window_start;
    Timestamp window_end;
    double pd_norm = 0.0;
    double gs = 0.0;
    double af = 0.0;

    bool operator==(const AFSample&) const = default;
};

struct TimeRange {
    Timestamp start;
    Timestamp end;

    bool operator==(const TimeRange&) const = default;
};

struct AFTimeline {
    PupilCalibration calibration;
    std::vector<AFSample> samples;
    /// Spans covered by skipped windows, merged when adjacent.
    std::vector<TimeRange> gaps;
};

/// Windows of af_window_n consecutive gaze samples, advanced by af_stride.
/// Only valid samples contribute; a window with fewer than two valid
/// positions (or no pupil reading) is skipped and recorded as a gap.
/// Calibration errors propagate, except that a session with no valid
/// samples yields an empty timeline covering the session as one gap.
AFTimeline af_timeline(const Session& session, const AnalysisConfig& config);

struct EventSlice {
    TriggerEvent event;
    Timestamp from;
    Timestamp to;
    std::vector<AFSample> samples;
    std::optional<double> pre_mean;
    std::optional<double> post_max;

    bool operator==(const EventSlice&) const = default;
};

/// Samples are keyed by window_start. The pre-window [t - pre, t) is clipped
/// at 0; its mean AF is reported as the baseline. Throws
/// EventOutsideSession for events after the last window ends.
std::vector<EventSlice> event_locked_af(std::span<const AFSample> timeline,
                                        std::span<const TriggerEvent> events, std::int64_t pre_ms,
                                        std::int64_t post_ms);

}  // namespace bridgewatch
