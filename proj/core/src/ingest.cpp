#include "bridgewatch/ingest.hpp"

#include "json_io.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <istream>
#include <set>
#include <sstream>

namespace bridgewatch {

using detail::FieldError;
using detail::json;
using detail::ordered_json;

namespace {

constexpr double kUnitTolerance = 1e-6;

template <typename T, typename Decode>
Parsed<T> parse_lines(std::istream& in, ParseMode mode, Decode decode) {
    Parsed<T> out;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') {
            line.pop_back();
        }
        if (std::all_of(line.begin(), line.end(), [](unsigned char c) { return std::isspace(c) != 0; })) {
            continue;
        }
        try {
            json record = json::parse(line, nullptr, false);
            if (record.is_discarded()) {
                detail::field_fail(Errc::MalformedLine, "not valid JSON");
            }
            if (!record.is_object()) {
                detail::field_fail(Errc::MalformedLine, "record is not an object");
            }
            out.items.push_back(decode(record));
        } catch (const FieldError& e) {
            if (mode == ParseMode::Strict) {
                Errc code = e.code == Errc::SchemaViolation ? Errc::MalformedLine : e.code;
                throw ParseError(code, line_no, e.reason);
            }
            ++out.skipped;
        }
    }
    return out;
}

Timestamp timestamp_field(const json& rec, std::string_view key) {
    std::int64_t ms = detail::int_field(rec, key, "");
    if (ms < 0) {
        detail::field_fail(Errc::OutOfRangeValue, std::string(key) + " must be >= 0");
    }
    return Timestamp{ms};
}

std::optional<double> positive_opt(const json& rec, std::string_view key) {
    auto v = detail::opt_number(rec, key, "");
    if (v && !(*v > 0.0)) {
        detail::field_fail(Errc::OutOfRangeValue, std::string(key) + " must be > 0");
    }
    return v;
}

GazeSample decode_gaze(const json& rec) {
    GazeSample s;
    s.t = timestamp_field(rec, "t_ms");
    s.valid = detail::as_bool(detail::field(rec, "valid", ""), "valid");
    auto gx = detail::opt_number(rec, "gx", "");
    auto gy = detail::opt_number(rec, "gy", "");
    if (gx && gy) {
        s.gaze_px = Point2{*gx, *gy};
    } else if (s.valid) {
        detail::field_fail(Errc::MissingField, gx ? "gy: missing" : "gx: missing");
    }
    s.depth_m = detail::opt_number(rec, "depth_m", "");
    s.pd_left_mm = positive_opt(rec, "pd_left_mm");
    s.pd_right_mm = positive_opt(rec, "pd_right_mm");
    if (const json* dir = detail::opt_field(rec, "dir")) {
        detail::as_array(*dir, "dir");
        if (dir->size() != 3) {
            detail::field_fail(Errc::SchemaViolation, "dir: expected 3 components");
        }
        Vec3 d{detail::as_number((*dir)[0], "dir[0]"), detail::as_number((*dir)[1], "dir[1]"),
               detail::as_number((*dir)[2], "dir[2]")};
        if (std::abs(d.norm() - 1.0) > kUnitTolerance) {
            detail::field_fail(Errc::OutOfRangeValue, "dir must be a unit vector");
        }
        s.direction = d;
    }
    return s;
}

PanelObservation decode_panel(const json& rec) {
    PanelObservation p;
    p.t = timestamp_field(rec, "t_ms");
    p.panel_id = detail::string_field(rec, "panel", "");
    if (p.panel_id.empty()) {
        detail::field_fail(Errc::OutOfRangeValue, "panel must be non-empty");
    }
    p.subpanel_id = detail::opt_string(rec, "subpanel", "");
    const json& bbox = detail::as_array(detail::field(rec, "bbox", ""), "bbox");
    if (bbox.size() != 4) {
        detail::field_fail(Errc::SchemaViolation, "bbox: expected 4 numbers");
    }
    p.bbox = BBox{detail::as_number(bbox[0], "bbox[0]"), detail::as_number(bbox[1], "bbox[1]"),
                  detail::as_number(bbox[2], "bbox[2]"), detail::as_number(bbox[3], "bbox[3]")};
    if (!(p.bbox.x0 < p.bbox.x1)) {
        detail::field_fail(Errc::OutOfRangeValue, "x0 < x1");
    }
    if (!(p.bbox.y0 < p.bbox.y1)) {
        detail::field_fail(Errc::OutOfRangeValue, "y0 < y1");
    }
    p.confidence = detail::number_field(rec, "conf", "");
    if (!(p.confidence >= 0.0 && p.confidence <= 1.0)) {
        detail::field_fail(Errc::OutOfRangeValue, "conf must be in [0,1]");
    }
    return p;
}

Utterance decode_utterance(const json& rec) {
    Utterance u;
    u.t_start = timestamp_field(rec, "t0_ms");
    u.t_end = timestamp_field(rec, "t1_ms");
    if (u.t_end < u.t_start) {
        detail::field_fail(Errc::OutOfRangeValue, "t0_ms <= t1_ms");
    }
    u.speaker = detail::string_field(rec, "speaker", "");
    u.text = detail::string_field(rec, "text", "");
    if (std::all_of(u.text.begin(), u.text.end(), [](unsigned char c) { return std::isspace(c) != 0; })) {
        detail::field_fail(Errc::OutOfRangeValue, "text must be non-empty");
    }
    return u;
}

template <typename T, typename Decode>
Parsed<T> parse_bytes(std::string_view bytes, ParseMode mode, Decode decode) {
    std::istringstream in{std::string(bytes)};
    return parse_lines<T>(in, mode, decode);
}

}  // namespace

Parsed<GazeSample> parse_gaze_jsonl(std::istream& in, ParseMode mode) {
    return parse_lines<GazeSample>(in, mode, decode_gaze);
}
Parsed<GazeSample> parse_gaze_jsonl(std::string_view bytes, ParseMode mode) {
    return parse_bytes<GazeSample>(bytes, mode, decode_gaze);
}
Parsed<PanelObservation> parse_panels_jsonl(std::istream& in, ParseMode mode) {
    return parse_lines<PanelObservation>(in, mode, decode_panel);
}
Parsed<PanelObservation> parse_panels_jsonl(std::string_view bytes, ParseMode mode) {
    return parse_bytes<PanelObservation>(bytes, mode, decode_panel);
}
Parsed<Utterance> parse_transcript_jsonl(std::istream& in, ParseMode mode) {
    return parse_lines<Utterance>(in, mode, decode_utterance);
}
Parsed<Utterance> parse_transcript_jsonl(std::string_view bytes, ParseMode mode) {
    return parse_bytes<Utterance>(bytes, mode, decode_utterance);
}

std::vector<TriggerEvent> parse_events_json(std::string_view bytes) {
    return detail::read_document(bytes, [](const json& doc) {
        detail::as_array(doc, "events");
        std::vector<TriggerEvent> events;
        for (std::size_t i = 0; i < doc.size(); ++i) {
            std::string path = detail::index_path("", i);
            const json& rec = doc[i];
            TriggerEvent e;
            e.t = Timestamp{detail::int_field(rec, "t_ms", path)};
            if (e.t.ms < 0) {
                detail::field_fail(Errc::OutOfRangeValue, path + ".t_ms: must be >= 0");
            }
            e.kind = detail::string_field(rec, "kind", path);
            if (e.kind.empty()) {
                detail::field_fail(Errc::OutOfRangeValue, path + ".kind: must be non-empty");
            }
            e.label = detail::opt_string(rec, "label", path).value_or("");
            events.push_back(std::move(e));
        }
        return events;
    });
}

PanelCatalog parse_catalog_json(std::string_view bytes) {
    return detail::read_document(bytes, [](const json& doc) {
        PanelCatalog cat;
        const json& screen = detail::field(doc, "screen", "");
        cat.screen.width_px = static_cast<int>(detail::int_field(screen, "w_px", "screen"));
        cat.screen.height_px = static_cast<int>(detail::int_field(screen, "h_px", "screen"));
        if (cat.screen.width_px <= 0 || cat.screen.height_px <= 0) {
            detail::field_fail(Errc::OutOfRangeValue, "screen: dimensions must be positive");
        }
        const json& panels = detail::as_array(detail::field(doc, "panels", ""), "panels");
        std::set<std::string> ids;
        for (std::size_t i = 0; i < panels.size(); ++i) {
            std::string path = detail::index_path("panels", i);
            PanelInfo info;
            info.id = detail::string_field(panels[i], "id", path);
            info.name = detail::opt_string(panels[i], "name", path).value_or(info.id);
            if (info.id.empty()) {
                detail::field_fail(Errc::OutOfRangeValue, path + ".id: must be non-empty");
            }
            if (!ids.insert(info.id).second) {
                detail::field_fail(Errc::SchemaViolation, path + ".id: duplicate id '" + info.id + "'");
            }
            std::set<std::string> sub_ids;
            if (const json* subs = detail::opt_field(panels[i], "subpanels")) {
                detail::as_array(*subs, path + ".subpanels");
                for (std::size_t j = 0; j < subs->size(); ++j) {
                    std::string sp = detail::index_path(path + ".subpanels", j);
                    SubpanelInfo sub;
                    sub.id = detail::string_field((*subs)[j], "id", sp);
                    sub.name = detail::opt_string((*subs)[j], "name", sp).value_or(sub.id);
                    if (!sub_ids.insert(sub.id).second) {
                        detail::field_fail(Errc::SchemaViolation, sp + ".id: duplicate id '" + sub.id + "'");
                    }
                    info.subpanels.push_back(std::move(sub));
                }
            }
            cat.panels.push_back(std::move(info));
        }
        return cat;
    });
}

AnalysisConfig parse_config(std::string_view bytes) {
    AnalysisConfig config = detail::read_document(bytes, detail::config_from_json);
    validate_config(config);
    return config;
}

ClockOffsets parse_offsets_json(std::string_view bytes) {
    return detail::read_document(bytes, [](const json& doc) {
        if (!doc.is_object()) {
            detail::field_fail(Errc::SchemaViolation, "offsets: expected object");
        }
        ClockOffsets o;
        auto read = [&](std::string_view key, std::int64_t& dst) {
            if (const json* v = detail::opt_field(doc, key)) {
                dst = detail::as_int(*v, std::string(key));
            }
        };
        read("gaze", o.gaze);
        read("panels", o.panels);
        read("transcript", o.transcript);
        read("events", o.events);
        read("audio", o.audio);
        return o;
    });
}

ExerciseMeta parse_session_meta(std::string_view bytes, std::string* id_out) {
    return detail::read_document(bytes, [&](const json& doc) {
        ExerciseMeta meta;
        meta.visibility = detail::opt_string(doc, "visibility", "").value_or("");
        meta.scenario = detail::opt_string(doc, "scenario", "").value_or("");
        if (auto id = detail::opt_string(doc, "id", ""); id && id_out != nullptr) {
            *id_out = *id;
        }
        return meta;
    });
}

namespace {

ordered_json opt_json(const std::optional<double>& v) {
    return v ? ordered_json(*v) : ordered_json(nullptr);
}

}  // namespace

void write_gaze_jsonl(std::ostream& out, std::span<const GazeSample> gaze) {
    for (const GazeSample& s : gaze) {
        ordered_json rec;
        rec["t_ms"] = s.t.ms;
        rec["gx"] = s.gaze_px ? ordered_json(s.gaze_px->x) : ordered_json(nullptr);
        rec["gy"] = s.gaze_px ? ordered_json(s.gaze_px->y) : ordered_json(nullptr);
        rec["depth_m"] = opt_json(s.depth_m);
        rec["pd_left_mm"] = opt_json(s.pd_left_mm);
        rec["pd_right_mm"] = opt_json(s.pd_right_mm);
        rec["dir"] = s.direction ? ordered_json::array({s.direction->x, s.direction->y, s.direction->z})
                                 : ordered_json(nullptr);
        rec["valid"] = s.valid;
        out << rec.dump() << '\n';
    }
}

void write_panels_jsonl(std::ostream& out, std::span<const PanelObservation> panels) {
    for (const PanelObservation& p : panels) {
        ordered_json rec;
        rec["t_ms"] = p.t.ms;
        rec["panel"] = p.panel_id;
        rec["subpanel"] = p.subpanel_id ? ordered_json(*p.subpanel_id) : ordered_json(nullptr);
        rec["bbox"] = ordered_json::array({p.bbox.x0, p.bbox.y0, p.bbox.x1, p.bbox.y1});
        rec["conf"] = p.confidence;
        out << rec.dump() << '\n';
    }
}

void write_transcript_jsonl(std::ostream& out, std::span<const Utterance> utterances) {
    for (const Utterance& u : utterances) {
        ordered_json rec;
        rec["t0_ms"] = u.t_start.ms;
        rec["t1_ms"] = u.t_end.ms;
        rec["speaker"] = u.speaker;
        rec["text"] = u.text;
        out << rec.dump() << '\n';
    }
}

std::string write_events_json(std::span<const TriggerEvent> events) {
    ordered_json doc = ordered_json::array();
    for (const TriggerEvent& e : events) {
        ordered_json rec;
        rec["t_ms"] = e.t.ms;
        rec["kind"] = e.kind;
        rec["label"] = e.label;
        doc.push_back(std::move(rec));
    }
    return doc.dump(2) + "\n";
}

std::string write_catalog_json(const PanelCatalog& catalog) {
    ordered_json doc;
    doc["screen"] = {{"w_px", catalog.screen.width_px}, {"h_px", catalog.screen.height_px}};
    doc["panels"] = ordered_json::array();
    for (const PanelInfo& p : catalog.panels) {
        ordered_json panel;
        panel["id"] = p.id;
        panel["name"] = p.name;
        panel["subpanels"] = ordered_json::array();
        for (const SubpanelInfo& s : p.subpanels) {
            panel["subpanels"].push_back({{"id", s.id}, {"name", s.name}});
        }
        doc["panels"].push_back(std::move(panel));
    }
    return doc.dump(2) + "\n";
}

std::string write_config_json(const AnalysisConfig& config) {
    return detail::config_to_json(config).dump(2) + "\n";
}

std::string read_file(const std::filesystem::path& file) {
    std::ifstream in(file, std::ios::binary);
    if (!in) {
        throw Error(Errc::MissingFile, "MissingFile: " + file.string());
    }
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_file(const std::filesystem::path& file, std::string_view bytes) {
    std::ofstream out(file, std::ios::binary | std::ios::trunc);
    if (!out) {
        throw Error(Errc::MissingFile, "cannot write " + file.string());
    }
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
}

namespace {

std::filesystem::path required(const std::filesystem::path& dir, const char* name) {
    std::filesystem::path p = dir / name;
    if (!std::filesystem::is_regular_file(p)) {
        throw Error(Errc::MissingFile, std::string("MissingFile: ") + name);
    }
    return p;
}

// Prefixes a ParseError with the file it came from.
template <typename F>
auto with_file(const char* name, F f) {
    try {
        return f();
    } catch (const ParseError& e) {
        throw ParseError(e.code(), e.line_no(), std::string(name) + ": " + e.reason());
    }
}

}  // namespace

LoadedSession load_session(const std::filesystem::path& dir, const LoadOptions& options) {
    if (!std::filesystem::is_directory(dir)) {
        throw Error(Errc::MissingFile, "session directory not found: " + dir.string());
    }
    const char* names[] = {"gaze.jsonl", "panels.jsonl", "transcript.jsonl", "events.json", "catalog.json"};
    for (const char* name : names) {
        required(dir, name);
    }

    LoadedSession out;
    Session& s = out.session;
    s.id = dir.filename().string();
    if (s.id.empty()) {
        s.id = dir.parent_path().filename().string();
    }

    s.catalog = with_file("catalog.json", [&] { return parse_catalog_json(read_file(dir / "catalog.json")); });
    {
        std::ifstream in(dir / "gaze.jsonl", std::ios::binary);
        auto gaze = with_file("gaze.jsonl", [&] { return parse_gaze_jsonl(in, options.mode); });
        s.gaze = std::move(gaze.items);
        out.skipped_lines += gaze.skipped;
    }
    {
        std::ifstream in(dir / "panels.jsonl", std::ios::binary);
        auto panels = with_file("panels.jsonl", [&] { return parse_panels_jsonl(in, options.mode); });
        s.panels = std::move(panels.items);
        out.skipped_lines += panels.skipped;
    }
    {
        std::ifstream in(dir / "transcript.jsonl", std::ios::binary);
        auto utts = with_file("transcript.jsonl", [&] { return parse_transcript_jsonl(in, options.mode); });
        s.utterances = std::move(utts.items);
        out.skipped_lines += utts.skipped;
    }
    s.events = with_file("events.json", [&] { return parse_events_json(read_file(dir / "events.json")); });

    if (std::filesystem::is_regular_file(dir / "session.json")) {
        s.meta = with_file("session.json",
                           [&] { return parse_session_meta(read_file(dir / "session.json"), &s.id); });
    }
    if (std::filesystem::is_regular_file(dir / "audio.wav")) {
        s.audio_ref = (dir / "audio.wav").string();
    }
    if (std::filesystem::is_regular_file(dir / "offsets.json")) {
        ClockOffsets offsets =
            with_file("offsets.json", [&] { return parse_offsets_json(read_file(dir / "offsets.json")); });
        OffsetResult shifted = apply_clock_offsets(s, offsets);
        out.dropped_by_offsets = shifted.dropped_total();
        s = std::move(shifted.session);
    }

    out.validation = validate_session(s);
    if (options.mode == ParseMode::Strict && !out.validation.ok()) {
        const Violation& first = out.validation.violations.front();
        throw Error(Errc::ValidationFailed,
                    "ValidationFailed: " + std::to_string(out.validation.violations.size()) +
                        " violation(s), first: " + first.stream + "[" + std::to_string(first.index) +
                        "] " + first.rule);
    }
    return out;
}

void write_session(const Session& session, const std::filesystem::path& dir) {
    std::filesystem::create_directories(dir);
    {
        std::ofstream out(dir / "gaze.jsonl", std::ios::binary | std::ios::trunc);
        write_gaze_jsonl(out, session.gaze);
    }
    {
        std::ofstream out(dir / "panels.jsonl", std::ios::binary | std::ios::trunc);
        write_panels_jsonl(out, session.panels);
    }
    {
        std::ofstream out(dir / "transcript.jsonl", std::ios::binary | std::ios::trunc);
        write_transcript_jsonl(out, session.utterances);
    }
    write_file(dir / "events.json", write_events_json(session.events));
    write_file(dir / "catalog.json", write_catalog_json(session.catalog));
    ordered_json meta;
    meta["id"] = session.id;
    meta["visibility"] = session.meta.visibility;
    meta["scenario"] = session.meta.scenario;
    write_file(dir / "session.json", meta.dump(2) + "\n");
}

AnalysisConfig load_config(const std::filesystem::path& file) {
    AnalysisConfig config = with_file("config", [&] { return parse_config(read_file(file)); });
    const std::filesystem::path base = file.parent_path();
    auto resolve = [&](std::string& p) {
        if (!p.empty() && std::filesystem::path(p).is_relative()) {
            p = (base / p).lexically_normal().string();
        }
    };
    resolve(config.entities_path);
    for (std::string& p : config.checklist_paths) {
        resolve(p);
    }
    return config;
}

}  // namespace bridgewatch
