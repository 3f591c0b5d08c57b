/**
 * ingest.hpp: Readers and writers for session directories.
 *
 * A session directory holds:
 *
 *   gaze.jsonl        one GazeSample per line            (required)
 *   panels.jsonl      one PanelObservation per line      (required)
 *   transcript.jsonl  one Utterance per line             (required)
 *   events.json       array of trigger events            (required)
 *   catalog.json      screen geometry + panel taxonomy   (required)
 *   audio.wav         16-bit PCM session audio           (optional)
 *   offsets.json      per-stream clock offsets in ms     (optional)
 *   session.json      {"id", "visibility", "scenario"}   (optional)
 *
 * Line-oriented streams support two modes. Strict stops at the first bad
 * line with a ParseError carrying the 1-based line number; tolerant skips
 * bad lines and counts them. Blank lines are ignored in both modes. Unknown
 * fields are ignored; absent optional fields stay absent.
 */
#pragma once

#include "bridgewatch/config.hpp"
#include "bridgewatch/session.hpp"

#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace bridgewatch {

enum class ParseMode { Strict, Tolerant };

template <typename T>
struct Parsed {
    std::vector<T> items;
    std::size_t skipped = 0;
};

Parsed<GazeSample> parse_gaze_jsonl(std::istream& in, ParseMode mode);
Parsed<GazeSample> parse_gaze_jsonl(std::string_view bytes, ParseMode mode);

Parsed<PanelObservation> parse_panels_jsonl(std::istream& in, ParseMode mode);
Parsed<PanelObservation> parse_panels_jsonl(std::string_view bytes, ParseMode mode);

Parsed<Utterance> parse_transcript_jsonl(std::istream& in, ParseMode mode);
Parsed<Utterance> parse_transcript_jsonl(std::string_view bytes, ParseMode mode);

// Single-document formats. Schema violations raise ParseError with the
// offending field path in the reason, e.g. "[0].kind: missing".
std::vector<TriggerEvent> parse_events_json(std::string_view bytes);
PanelCatalog parse_catalog_json(std::string_view bytes);
AnalysisConfig parse_config(std::string_view bytes);
ClockOffsets parse_offsets_json(std::string_view bytes);
ExerciseMeta parse_session_meta(std::string_view bytes, std::string* id_out);

void write_gaze_jsonl(std::ostream& out, std::span<const GazeSample> gaze);
void write_panels_jsonl(std::ostream& out, std::span<const PanelObservation> panels);
void write_transcript_jsonl(std::ostream& out, std::span<const Utterance> utterances);
std::string write_events_json(std::span<const TriggerEvent> events);
std::string write_catalog_json(const PanelCatalog& catalog);
std::string write_config_json(const AnalysisConfig& config);

struct LoadOptions {
    ParseMode mode = ParseMode::Strict;
};

struct LoadedSession {
    Session session;
    std::size_t skipped_lines = 0;
    std::size_t dropped_by_offsets = 0;
    ValidationReport validation;
};

/// Parses every file, applies offsets.json when present, then validates.
/// In strict mode a non-empty validation report raises ValidationFailed.
LoadedSession load_session(const std::filesystem::path& dir, const LoadOptions& options = {});

/// Writes the required files (plus session.json). Audio is not copied.
void write_session(const Session& session, const std::filesystem::path& dir);

/// Loads a config file and resolves its auxiliary paths against its directory.
AnalysisConfig load_config(const std::filesystem::path& file);

std::string read_file(const std::filesystem::path& file);
void write_file(const std::filesystem::path& file, std::string_view bytes);

}  // namespace bridgewatch
