/**
 * report.hpp: Session report assembly and rendering.
 *
 * A report gathers five independently computed sections: visual focus,
 * attentional focus, communication entities, checklist adherence and
 * stress. It renders to canonical JSON (sorted keys, two-space indent,
 * reals with six decimals), per-section CSV and fixed-size SVG charts. All
 * renderers are pure functions of the report, so equal reports produce equal
 * bytes.
 */
#pragma once

#include "bridgewatch/attention.hpp"
#include "bridgewatch/comms.hpp"
#include "bridgewatch/config.hpp"
#include "bridgewatch/session.hpp"
#include "bridgewatch/stress.hpp"
#include "bridgewatch/visual_focus.hpp"

#include <array>
#include <chrono>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace bridgewatch {

struct ReportMeta {
    std::string session_id;
    std::string visibility;
    std::string scenario;
    AnalysisConfig config;
    /// Sorted panel ids of the catalog the session was analysed against.
    std::vector<std::string> catalog;
    /// Notes about optional stages that were skipped or degraded.
    std::vector<std::string> flags;
};

struct AfSection {
    std::optional<PupilCalibration> calibration;
    std::vector<AFSample> timeline;
    std::vector<TimeRange> gaps;
    std::vector<EventSlice> events;
};

struct ChecklistBlock {
    TriggerEvent event;
    std::string backend;  // "rule" or "adapter"
    bool fell_back = false;
    std::vector<ChecklistResult> results;
};

struct SessionReport {
    ReportMeta meta;
    DwellSummary focus;
    AfSection af;
    EntitySummary entities;
    std::vector<ChecklistBlock> checklists;
    std::optional<StressTimeline> stress;
    std::vector<TriggerEvent> events;

    bool partial() const { return !meta.flags.empty(); }
};

struct Adapters {
    JudgeAdapter* judge = nullptr;
    StressModelAdapter* stress = nullptr;
    std::chrono::milliseconds timeout = kDefaultAdapterTimeout;
};

/// Runs every analysis over the session. Missing or unusable audio leaves
/// the stress section empty and adds a flag; other module errors propagate.
SessionReport build_report(const Session& session, const AnalysisConfig& config, const EntityLexicon& lexicon,
                           std::span<const ChecklistDefinition> checklists, const Adapters& adapters = {});

std::string render_json(const SessionReport& report);
/// Inverse of render_json (up to the six-decimal rounding).
SessionReport parse_report_json(std::string_view bytes);

inline constexpr std::array<std::string_view, 8> kCsvSections = {
    "focus", "focus_totals", "af", "af_events", "entities", "checklists", "stress", "events"};
inline constexpr std::array<std::string_view, 5> kCharts = {
    "focus_bars", "af_line", "entity_bars", "checklist_table", "stress_line"};

/// Throws UnknownSection for names outside kCsvSections.
std::string render_csv(const SessionReport& report, std::string_view section);
/// 960x540 SVG. Throws UnknownChart for names outside kCharts.
std::string render_svg(const SessionReport& report, std::string_view chart);

struct ComparedValue {
    std::string key;
    std::string category;  // entity rows only
    double a = 0.0;
    double b = 0.0;
    double delta = 0.0;  // b - a

    bool operator==(const ComparedValue&) const = default;
};

struct OptionalDelta {
    std::optional<double> a;
    std::optional<double> b;
    std::optional<double> delta;

    bool operator==(const OptionalDelta&) const = default;
};

struct ComparisonReport {
    std::string a_id;
    std::string b_id;
    std::vector<ComparedValue> focus;     // union of panel keys, zero-filled
    std::vector<ComparedValue> entities;  // union of entity names, zero-filled
    ComparedValue internal;
    ComparedValue external;
    OptionalDelta af_mean;
    OptionalDelta stress_mean;
    ComparedValue checklist_completed;

    bool operator==(const ComparisonReport&) const = default;
};

/// Deltas are b - a. Throws CatalogMismatch when the reports were built
/// against different panel catalogs.
ComparisonReport compare_reports(const SessionReport& a, const SessionReport& b);

std::string render_comparison_json(const ComparisonReport& cmp);
std::string render_comparison_csv(const ComparisonReport& cmp);
std::string render_comparison_svg(const ComparisonReport& cmp);

}  // namespace bridgewatch
