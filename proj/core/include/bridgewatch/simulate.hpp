/**
 * simulate.hpp: Deterministic synthetic sessions with ground truth.
 *
 * Generator algorithm (stable within this implementation, documented so other
 * implementations can match its structure):
 *
 *  - Each stream k (gaze=1, pupil=2, panels=3, dropout=4, audio=5) owns a
 *    std::mt19937_64 seeded with splitmix64(seed + k).
 *  - Uniform variates are (x >> 11) * 2^-53; normals use Box-Muller with the
 *    cosine branch only, so each normal consumes two uniforms.
 *  - Gaze is sampled at 50 Hz: target-panel centre plus N(0, scatter^2) on
 *    each axis, clamped to the frame. Free-scan phases draw uniform points.
 *  - Panel observations are emitted at 25 Hz for every catalog panel (or for
 *    each of its subpanels when it has any), with the scripted bbox.
 *  - Pupil diameter per eye is baseline + bump(t) + N(0, noise^2). The bump
 *    rises linearly over 1 s from the start of bump_t_range and then decays
 *    linearly to zero at its end.
 *  - Audio at 16 kHz is a four-harmonic voiced signal with a 12 s periodic
 *    pitch and loudness drift. Between transition_t_ms and recovery_t_ms the
 *    pitch moves to post_f0_hz, each glottal cycle gets relative jitter
 *    post_jitter, and the gain rises by 30%.
 */
#pragma once

#include "bridgewatch/audio.hpp"
#include "bridgewatch/comms.hpp"
#include "bridgewatch/config.hpp"
#include "bridgewatch/report.hpp"
#include "bridgewatch/session.hpp"

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace bridgewatch {

struct ScenarioPanel {
    std::string id;
    std::string name;
    BBox bbox;
    struct Sub {
        std::string id;
        std::string name;
        BBox bbox;
    };
    std::vector<Sub> subpanels;
};

struct GazePhase {
    std::int64_t t0_ms = 0;
    std::int64_t t1_ms = 0;
    /// Empty means free scan over the whole frame.
    std::string target_panel;
    std::string target_subpanel;
    double scatter_px = 20.0;
};

struct PupilProfile {
    double baseline_mm = 3.0;
    double bump_mm = 1.2;
    std::int64_t bump_t0_ms = 0;
    std::int64_t bump_t1_ms = 0;
    double noise_mm = 0.05;
};

struct ScriptLine {
    std::int64_t t_ms = 0;
    std::int64_t duration_ms = 3000;
    std::string speaker;
    std::string text;
    /// Hand-labelled entity names mentioned in the line, one per mention.
    std::vector<std::string> entities;
};

struct AudioProfile {
    double pre_f0_hz = 180.0;
    double post_f0_hz = 240.0;
    double post_jitter = 0.03;
    std::int64_t transition_t_ms = 0;
    /// Calm speech resumes here; 0 keeps the stressed voice to the end.
    std::int64_t recovery_t_ms = 0;
    int sample_rate_hz = 16000;
    double amplitude = 0.3;
};

struct Scenario {
    std::string name;
    std::string visibility;
    std::int64_t duration_ms = 0;
    std::uint64_t seed = 0;
    ScreenGeometry screen;
    std::vector<ScenarioPanel> layout;
    TriggerEvent event;
    std::vector<GazePhase> gaze_phases;
    PupilProfile pupil;
    std::vector<ScriptLine> script;
    AudioProfile audio;
    std::vector<LexiconEntry> entities;
    std::vector<ChecklistDefinition> checklists;
    /// Expected yes/no per checklist item id for the scripted transcript.
    std::vector<std::pair<std::string, bool>> expected_checklist;
    double dropout_rate = 0.01;
    double dwell_tolerance = 0.05;
    AnalysisConfig analysis;
};

/// Main engine failure at mid-session with a gaze shift to the engine panel,
/// a pupil bump, a pitch rise and a transcript whose checklist vector is
/// yes, no, no, yes, no, no.
Scenario default_scenario();

/// Throws InvalidScenario.
void validate_scenario(const Scenario& scenario);

Scenario parse_scenario_json(std::string_view bytes);
std::string write_scenario_json(const Scenario& scenario);

struct DwellExpectation {
    std::int64_t t0_ms = 0;
    std::int64_t t1_ms = 0;
    std::string panel;
    double expected_fraction = 0.0;
    double tolerance = 0.0;
};

struct AfSpikeExpectation {
    std::int64_t event_t_ms = 0;
    std::string event_kind;
    double min_delta = 0.0;
};

struct StressFlipExpectation {
    std::int64_t transition_t_ms = 0;
    std::int64_t window_start_ms = 0;
    std::int64_t window_end_ms = 0;
    std::int64_t baseline_ms = 0;
};

struct GroundTruth {
    std::vector<DwellExpectation> dwell;
    AfSpikeExpectation af_spike;
    std::string checklist_event_kind;
    std::vector<std::pair<std::string, bool>> checklist;
    std::vector<std::pair<std::string, std::size_t>> entities;  // sorted by name
    std::optional<StressFlipExpectation> stress_flip;
};

GroundTruth ground_truth_for(const Scenario& scenario);
std::string write_ground_truth_json(const GroundTruth& truth);
GroundTruth parse_ground_truth_json(std::string_view bytes);

struct GeneratedSession {
    Session session;
    AudioClip audio;
    GroundTruth truth;
};

/// Pure generation; nothing touches the filesystem.
GeneratedSession simulate_session(const Scenario& scenario);

/// Writes the session directory (gaze, panels, transcript, events, catalog,
/// session.json, audio.wav) plus ground_truth.json, config.json,
/// entities.json, checklists/<kind>.json and scenario.json.
GroundTruth generate_session(const Scenario& scenario, const std::filesystem::path& out_dir);

struct AssertionResult {
    std::string name;
    bool passed = false;
    std::string detail;
};

/// Throws SchemaMismatch when the report lacks a section the truth expects.
std::vector<AssertionResult> check_against_ground_truth(const SessionReport& report, const GroundTruth& truth);

std::string write_lexicon_json(const std::vector<LexiconEntry>& entries);
std::string write_checklist_json(const ChecklistDefinition& checklist);

}  // namespace bridgewatch
