/**
 * session.hpp: In-memory model of one simulator training session.
 *
 * A session is a set of independently time-ordered streams sharing a clock
 * that starts at 0 ms: gaze samples from the eye tracker, panel detections
 * from the scene camera, transcript segments, and trainer-injected events.
 * All values are plain aggregates; nothing here mutates shared state.
 */
#pragma once

#include <cmath>
#include <compare>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace bridgewatch {

/// Milliseconds since session start.
struct Timestamp {
    std::int64_t ms = 0;

    constexpr auto operator<=>(const Timestamp&) const = default;
};

struct ScreenGeometry {
    int width_px = 0;
    int height_px = 0;

    double diagonal_px() const {
        return std::hypot(static_cast<double>(width_px), static_cast<double>(height_px));
    }

    bool operator==(const ScreenGeometry&) const = default;
};

struct Point2 {
    double x = 0.0;
    double y = 0.0;

    bool operator==(const Point2&) const = default;
};

struct Vec3 {
    double x = 0.0;
    double y = 0.0;
    double z = 0.0;

    double norm() const { return std::sqrt(x * x + y * y + z * z); }
    bool operator==(const Vec3&) const = default;
};

struct GazeSample {
    Timestamp t;
    std::optional<Point2> gaze_px;
    std::optional<double> depth_m;
    std::optional<double> pd_left_mm;
    std::optional<double> pd_right_mm;
    std::optional<Vec3> direction;
    bool valid = false;

    /// Mean over the eyes that reported a diameter; empty when neither did.
    std::optional<double> mean_pupil_mm() const;

    bool operator==(const GazeSample&) const = default;
};

/// Detector bounding box in scene-frame pixels, (x0,y0) top-left.
struct BBox {
    double x0 = 0.0;
    double y0 = 0.0;
    double x1 = 0.0;
    double y1 = 0.0;

    double area() const { return (x1 - x0) * (y1 - y0); }
    Point2 center() const { return {(x0 + x1) / 2.0, (y0 + y1) / 2.0}; }
    bool operator==(const BBox&) const = default;
};

struct PanelObservation {
    Timestamp t;
    std::string panel_id;
    std::optional<std::string> subpanel_id;
    BBox bbox;
    double confidence = 0.0;

    bool operator==(const PanelObservation&) const = default;
};

struct Utterance {
    Timestamp t_start;
    Timestamp t_end;
    std::string speaker;
    std::string text;

    bool operator==(const Utterance&) const = default;
};

struct TriggerEvent {
    Timestamp t;
    std::string kind;
    std::string label;

    bool operator==(const TriggerEvent&) const = default;
};

struct SubpanelInfo {
    std::string id;
    std::string name;

    bool operator==(const SubpanelInfo&) const = default;
};

struct PanelInfo {
    std::string id;
    std::string name;
    std::vector<SubpanelInfo> subpanels;

    bool operator==(const PanelInfo&) const = default;
};

/// Panel/subpanel taxonomy of the bridge plus the scene-frame geometry.
struct PanelCatalog {
    ScreenGeometry screen;
    std::vector<PanelInfo> panels;

    const PanelInfo* find(const std::string& panel_id) const;
    bool operator==(const PanelCatalog&) const = default;
};

struct ExerciseMeta {
    std::string visibility;
    std::string scenario;

    bool operator==(const ExerciseMeta&) const = default;
};

struct Session {
    std::string id;
    ExerciseMeta meta;
    PanelCatalog catalog;
    std::vector<GazeSample> gaze;
    std::vector<PanelObservation> panels;
    std::vector<Utterance> utterances;
    std::vector<TriggerEvent> events;
    std::optional<std::string> audio_ref;
    /// Shift applied to audio-derived timestamps (stress timeline).
    std::int64_t audio_offset_ms = 0;

    const ScreenGeometry& screen() const { return catalog.screen; }
    bool operator==(const Session&) const = default;
};

struct Violation {
    std::string stream;
    std::size_t index = 0;
    std::string rule;

    bool operator==(const Violation&) const = default;
};

struct ValidationReport {
    std::vector<Violation> violations;

    bool ok() const { return violations.empty(); }
    bool operator==(const ValidationReport&) const = default;
};

/// Checks every stream invariant; violations are returned, never thrown.
ValidationReport validate_session(const Session& session);

/// Per-stream signed shifts in milliseconds.
struct ClockOffsets {
    std::int64_t gaze = 0;
    std::int64_t panels = 0;
    std::int64_t transcript = 0;
    std::int64_t events = 0;
    std::int64_t audio = 0;
};

struct OffsetResult {
    Session session;
    std::size_t dropped_gaze = 0;
    std::size_t dropped_panels = 0;
    std::size_t dropped_utterances = 0;
    std::size_t dropped_events = 0;

    std::size_t dropped_total() const {
        return dropped_gaze + dropped_panels + dropped_utterances + dropped_events;
    }
};

/// Shifts each stream by its offset. Records whose (start) timestamp would
/// become negative are dropped and counted.
OffsetResult apply_clock_offsets(const Session& session, const ClockOffsets& offsets);

}  // namespace bridgewatch
