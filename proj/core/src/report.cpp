#include "bridgewatch/report.hpp"

#include "bridgewatch/audio.hpp"
#include "bridgewatch/error.hpp"
#include "canonical_json.hpp"
#include "json_io.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <map>
#include <set>

namespace bridgewatch {

using detail::json;

namespace {

bool is_one_of(Errc c, std::initializer_list<Errc> codes) {
    return std::find(codes.begin(), codes.end(), c) != codes.end();
}

std::vector<std::string> catalog_ids(const PanelCatalog& catalog) {
    std::vector<std::string> ids;
    for (const PanelInfo& p : catalog.panels) {
        ids.push_back(p.id);
    }
    std::sort(ids.begin(), ids.end());
    return ids;
}

const ChecklistDefinition* definition_for(std::span<const ChecklistDefinition> defs, const std::string& kind) {
    for (const ChecklistDefinition& d : defs) {
        if (d.event_kind == kind) {
            return &d;
        }
    }
    return nullptr;
}

}  // namespace

SessionReport build_report(const Session& session, const AnalysisConfig& config, const EntityLexicon& lexicon,
                           std::span<const ChecklistDefinition> checklists, const Adapters& adapters) {
    validate_config(config);
    SessionReport r;
    r.meta.session_id = session.id;
    r.meta.visibility = session.meta.visibility;
    r.meta.scenario = session.meta.scenario;
    r.meta.config = config;
    r.meta.config.entities_path = {};
    r.meta.config.checklist_paths.clear();
    r.meta.catalog = catalog_ids(session.catalog);
    r.events = session.events;
    std::stable_sort(r.events.begin(), r.events.end(),
                     [](const TriggerEvent& a, const TriggerEvent& b) { return a.t < b.t; });

    // visual focus
    std::vector<GazeAssignment> assignments = assign_all(session.gaze, session.panels, config.assign_dt_max_ms);
    r.focus = dwell_distribution(assignments, config.dwell_bin_ms);

    // attentional focus
    try {
        AFTimeline tl = af_timeline(session, config);
        if (tl.calibration.pd_max_mm > tl.calibration.pd_min_mm) {
            r.af.calibration = tl.calibration;
        }
        r.af.timeline = std::move(tl.samples);
        r.af.gaps = std::move(tl.gaps);
    } catch (const Error& e) {
        if (!is_one_of(e.code(), {Errc::InsufficientPupilData, Errc::DegenerateCalibration})) {
            throw;
        }
        r.meta.flags.push_back(fmt::format("af: {}", e.what()));
    }
    for (const TriggerEvent& ev : r.events) {
        try {
            auto slices = event_locked_af(r.af.timeline, std::span<const TriggerEvent>(&ev, 1), config.event_pre_ms,
                                          config.event_post_ms);
            r.af.events.insert(r.af.events.end(), slices.begin(), slices.end());
        } catch (const Error& e) {
            if (e.code() != Errc::EventOutsideSession) {
                throw;
            }
            r.meta.flags.push_back(fmt::format("af_event: {} at {} ms outside AF timeline", ev.kind, ev.t.ms));
        }
    }

    // communication
    r.entities = entity_summary(session.utterances, lexicon);

    for (const TriggerEvent& ev : r.events) {
        const ChecklistDefinition* def = definition_for(checklists, ev.kind);
        if (def == nullptr) {
            continue;
        }
        JudgeOutcome outcome = judge_with_fallback(adapters.judge, *def, session.utterances, ev,
                                                   config.checklist_horizon_ms, adapters.timeout);
        ChecklistBlock block;
        block.event = ev;
        block.backend = (adapters.judge != nullptr && !outcome.fell_back) ? "adapter" : "rule";
        block.fell_back = outcome.fell_back;
        block.results = std::move(outcome.results);
        if (outcome.fell_back) {
            r.meta.flags.push_back(fmt::format("checklist: judge adapter fell back ({})", outcome.adapter_error));
        }
        r.checklists.push_back(std::move(block));
    }

    // stress
    if (!session.audio_ref) {
        r.meta.flags.push_back("stress: no audio");
    } else {
        try {
            AudioClip clip = read_wav(*session.audio_ref);
            StressTimeline st =
                stress_timeline(clip, config.stress, adapters.stress, *session.audio_ref, adapters.timeout);
            for (StressSample& s : st.samples) {
                s.t.ms += session.audio_offset_ms;
            }
            if (!st.adapter_error.empty()) {
                r.meta.flags.push_back(fmt::format("stress: model adapter fell back ({})", st.adapter_error));
            }
            r.stress = std::move(st);
        } catch (const Error& e) {
            if (!is_one_of(e.code(),
                           {Errc::ClipTooShort, Errc::MissingBaseline, Errc::InvalidAudio, Errc::MissingFile})) {
                throw;
            }
            r.meta.flags.push_back(fmt::format("stress: {}", e.what()));
        }
    }
    return r;
}

// ---------------------------------------------------------------------------
// JSON

namespace {

json event_json(const TriggerEvent& e) { return {{"t_ms", e.t.ms}, {"kind", e.kind}, {"label", e.label}}; }

json opt_json(const std::optional<double>& v) { return v ? json(*v) : json(nullptr); }

json af_sample_json(const AFSample& s) {
    return {{"window_start_ms", s.window_start.ms},
            {"window_end_ms", s.window_end.ms},
            {"pd_norm", s.pd_norm},
            {"gs", s.gs},
            {"af", s.af}};
}

json method_json(const PupilMethod& m) {
    if (m.kind == PupilMethod::Kind::Strict) {
        return {{"method", "strict"}};
    }
    return {{"method", "robust"}, {"p_low", m.p_low}, {"p_high", m.p_high}};
}

json stats_json(const FeatureStats& s) { return {{"mean", s.mean}, {"std", s.std}}; }

json result_json(const ChecklistResult& r) {
    json j = {{"item_id", r.item_id},
              {"description", r.description},
              {"completed", r.completed},
              {"unknown", r.unknown},
              {"evidence", nullptr}};
    if (r.evidence) {
        const ChecklistEvidence& e = *r.evidence;
        j["evidence"] = {{"utterance_index", e.utterance_index ? json(*e.utterance_index) : json(nullptr)},
                         {"matched_terms", e.matched_terms},
                         {"quote", e.quote}};
    }
    return j;
}

json report_to_json(const SessionReport& r) {
    json config = detail::config_to_json(r.meta.config);
    config.erase("entities");
    config.erase("checklists");
    json meta = {{"session_id", r.meta.session_id},
                 {"visibility", r.meta.visibility},
                 {"scenario", r.meta.scenario},
                 {"config", config},
                 {"catalog", r.meta.catalog},
                 {"flags", r.meta.flags},
                 {"partial", r.partial()}};

    json bins = json::array();
    for (const DwellDistribution& d : r.focus.bins) {
        json fr = json::object();
        for (const auto& [k, v] : d.fractions) {
            fr[k] = v;
        }
        bins.push_back({{"bin_start_ms", d.bin_start.ms},
                        {"bin_ms", d.bin_ms},
                        {"valid_samples", d.valid_samples},
                        {"fractions", fr}});
    }
    json totals = json::object();
    for (const auto& [k, v] : r.focus.totals) {
        totals[k] = v;
    }
    json focus = {{"bin_ms", r.focus.bin_ms}, {"bins", bins}, {"totals", totals}};

    json timeline = json::array();
    for (const AFSample& s : r.af.timeline) {
        timeline.push_back(af_sample_json(s));
    }
    json gaps = json::array();
    for (const TimeRange& g : r.af.gaps) {
        gaps.push_back({{"start_ms", g.start.ms}, {"end_ms", g.end.ms}});
    }
    json slices = json::array();
    for (const EventSlice& s : r.af.events) {
        json samples = json::array();
        for (const AFSample& a : s.samples) {
            samples.push_back(af_sample_json(a));
        }
        slices.push_back({{"event", event_json(s.event)},
                          {"from_ms", s.from.ms},
                          {"to_ms", s.to.ms},
                          {"pre_mean", opt_json(s.pre_mean)},
                          {"post_max", opt_json(s.post_max)},
                          {"samples", samples}});
    }
    json calibration = nullptr;
    if (r.af.calibration) {
        calibration = {{"pd_min_mm", r.af.calibration->pd_min_mm},
                       {"pd_max_mm", r.af.calibration->pd_max_mm},
                       {"method", method_json(r.af.calibration->method)}};
    }
    json af = {{"calibration", calibration}, {"timeline", timeline}, {"gaps", gaps}, {"events", slices}};

    json ents = json::array();
    for (const EntityCount& e : r.entities.entities) {
        ents.push_back({{"name", e.name}, {"category", category_name(e.category)}, {"count", e.count}});
    }
    json entities = {{"entities", ents},
                     {"internal_total", r.entities.internal_total},
                     {"external_total", r.entities.external_total}};

    json checklists = json::array();
    for (const ChecklistBlock& b : r.checklists) {
        json results = json::array();
        for (const ChecklistResult& res : b.results) {
            results.push_back(result_json(res));
        }
        checklists.push_back(
            {{"event", event_json(b.event)}, {"backend", b.backend}, {"fell_back", b.fell_back}, {"results", results}});
    }

    json stress = nullptr;
    if (r.stress) {
        const StressTimeline& st = *r.stress;
        json samples = json::array();
        for (const StressSample& s : st.samples) {
            samples.push_back({{"t_ms", s.t.ms}, {"score", s.score}, {"binary", s.binary}, {"gap", s.gap}});
        }
        json baseline = nullptr;
        if (st.baseline) {
            baseline = {{"f0_mean", stats_json(st.baseline->f0_mean)},
                        {"jitter", stats_json(st.baseline->jitter)},
                        {"energy_rms", stats_json(st.baseline->energy_rms)}};
        }
        stress = {{"window_ms", st.window_ms},
                  {"adapter_used", st.adapter_used},
                  {"adapter_error", st.adapter_error},
                  {"baseline", baseline},
                  {"samples", samples}};
    }

    json events = json::array();
    for (const TriggerEvent& e : r.events) {
        events.push_back(event_json(e));
    }

    return {{"meta", meta},       {"focus", focus},           {"af", af},          {"entities", entities},
            {"checklists", checklists}, {"stress", stress}, {"events", events}};
}

using detail::as_array;
using detail::as_bool;
using detail::as_int;
using detail::as_number;
using detail::as_string;
using detail::field;
using detail::int_field;
using detail::number_field;
using detail::string_field;

TriggerEvent event_from(const json& j, const std::string& path) {
    return {Timestamp{int_field(j, "t_ms", path)}, string_field(j, "kind", path), string_field(j, "label", path)};
}

std::optional<double> opt_number_from(const json& j, std::string_view key, const std::string& path) {
    const json& v = field(j, key, path);
    if (v.is_null()) {
        return std::nullopt;
    }
    return as_number(v, detail::join_path(path, key));
}

AFSample af_sample_from(const json& j, const std::string& path) {
    return {Timestamp{int_field(j, "window_start_ms", path)}, Timestamp{int_field(j, "window_end_ms", path)},
            number_field(j, "pd_norm", path), number_field(j, "gs", path), number_field(j, "af", path)};
}

FeatureStats stats_from(const json& j, const std::string& path) {
    return {number_field(j, "mean", path), number_field(j, "std", path)};
}

EntityCategory category_from(const std::string& s, const std::string& path) {
    if (s == "internal") {
        return EntityCategory::Internal;
    }
    if (s == "external") {
        return EntityCategory::External;
    }
    detail::field_fail(Errc::SchemaMismatch, path + ": unknown category " + s);
}

std::vector<std::string> strings_from(const json& j, const std::string& path) {
    std::vector<std::string> out;
    for (std::size_t i = 0; i < as_array(j, path).size(); ++i) {
        out.push_back(as_string(j[i], detail::index_path(path, i)));
    }
    return out;
}

SessionReport report_from_json(const json& doc) {
    SessionReport r;
    const json& meta = field(doc, "meta", "");
    r.meta.session_id = string_field(meta, "session_id", "meta");
    r.meta.visibility = string_field(meta, "visibility", "meta");
    r.meta.scenario = string_field(meta, "scenario", "meta");
    r.meta.config = detail::config_from_json(field(meta, "config", "meta"));
    r.meta.catalog = strings_from(field(meta, "catalog", "meta"), "meta.catalog");
    r.meta.flags = strings_from(field(meta, "flags", "meta"), "meta.flags");

    const json& focus = field(doc, "focus", "");
    r.focus.bin_ms = int_field(focus, "bin_ms", "focus");
    const json& bins = as_array(field(focus, "bins", "focus"), "focus.bins");
    for (std::size_t i = 0; i < bins.size(); ++i) {
        const std::string p = detail::index_path("focus.bins", i);
        DwellDistribution d;
        d.bin_start = Timestamp{int_field(bins[i], "bin_start_ms", p)};
        d.bin_ms = int_field(bins[i], "bin_ms", p);
        d.valid_samples = static_cast<std::size_t>(int_field(bins[i], "valid_samples", p));
        for (const auto& [k, v] : field(bins[i], "fractions", p).items()) {
            d.fractions[k] = as_number(v, p + ".fractions." + k);
        }
        r.focus.bins.push_back(std::move(d));
    }
    for (const auto& [k, v] : field(focus, "totals", "focus").items()) {
        r.focus.totals[k] = as_number(v, "focus.totals." + k);
    }

    const json& af = field(doc, "af", "");
    const json& cal = field(af, "calibration", "af");
    if (!cal.is_null()) {
        PupilCalibration c;
        c.pd_min_mm = number_field(cal, "pd_min_mm", "af.calibration");
        c.pd_max_mm = number_field(cal, "pd_max_mm", "af.calibration");
        const json& m = field(cal, "method", "af.calibration");
        std::string method = string_field(m, "method", "af.calibration.method");
        c.method = method == "robust" ? PupilMethod::robust(number_field(m, "p_low", "af.calibration.method"),
                                                            number_field(m, "p_high", "af.calibration.method"))
                                      : PupilMethod::strict();
        r.af.calibration = c;
    }
    const json& timeline = as_array(field(af, "timeline", "af"), "af.timeline");
    for (std::size_t i = 0; i < timeline.size(); ++i) {
        r.af.timeline.push_back(af_sample_from(timeline[i], detail::index_path("af.timeline", i)));
    }
    const json& gaps = as_array(field(af, "gaps", "af"), "af.gaps");
    for (std::size_t i = 0; i < gaps.size(); ++i) {
        const std::string p = detail::index_path("af.gaps", i);
        r.af.gaps.push_back({Timestamp{int_field(gaps[i], "start_ms", p)}, Timestamp{int_field(gaps[i], "end_ms", p)}});
    }
    const json& slices = as_array(field(af, "events", "af"), "af.events");
    for (std::size_t i = 0; i < slices.size(); ++i) {
        const std::string p = detail::index_path("af.events", i);
        EventSlice s;
        s.event = event_from(field(slices[i], "event", p), p + ".event");
        s.from = Timestamp{int_field(slices[i], "from_ms", p)};
        s.to = Timestamp{int_field(slices[i], "to_ms", p)};
        s.pre_mean = opt_number_from(slices[i], "pre_mean", p);
        s.post_max = opt_number_from(slices[i], "post_max", p);
        const json& samples = as_array(field(slices[i], "samples", p), p + ".samples");
        for (std::size_t k = 0; k < samples.size(); ++k) {
            s.samples.push_back(af_sample_from(samples[k], detail::index_path(p + ".samples", k)));
        }
        r.af.events.push_back(std::move(s));
    }

    const json& entities = field(doc, "entities", "");
    const json& ents = as_array(field(entities, "entities", "entities"), "entities.entities");
    for (std::size_t i = 0; i < ents.size(); ++i) {
        const std::string p = detail::index_path("entities.entities", i);
        r.entities.entities.push_back({string_field(ents[i], "name", p),
                                       category_from(string_field(ents[i], "category", p), p),
                                       static_cast<std::size_t>(int_field(ents[i], "count", p))});
    }
    r.entities.internal_total = static_cast<std::size_t>(int_field(entities, "internal_total", "entities"));
    r.entities.external_total = static_cast<std::size_t>(int_field(entities, "external_total", "entities"));

    const json& checklists = as_array(field(doc, "checklists", ""), "checklists");
    for (std::size_t i = 0; i < checklists.size(); ++i) {
        const std::string p = detail::index_path("checklists", i);
        ChecklistBlock b;
        b.event = event_from(field(checklists[i], "event", p), p + ".event");
        b.backend = string_field(checklists[i], "backend", p);
        b.fell_back = as_bool(field(checklists[i], "fell_back", p), p + ".fell_back");
        const json& results = as_array(field(checklists[i], "results", p), p + ".results");
        for (std::size_t k = 0; k < results.size(); ++k) {
            const std::string q = detail::index_path(p + ".results", k);
            const json& rj = results[k];
            ChecklistResult res;
            res.item_id = string_field(rj, "item_id", q);
            res.description = string_field(rj, "description", q);
            res.completed = as_bool(field(rj, "completed", q), q + ".completed");
            res.unknown = as_bool(field(rj, "unknown", q), q + ".unknown");
            const json& ev = field(rj, "evidence", q);
            if (!ev.is_null()) {
                ChecklistEvidence e;
                const json& idx = field(ev, "utterance_index", q + ".evidence");
                if (!idx.is_null()) {
                    e.utterance_index = static_cast<std::size_t>(as_int(idx, q + ".evidence.utterance_index"));
                }
                e.matched_terms = strings_from(field(ev, "matched_terms", q + ".evidence"), q + ".evidence.matched_terms");
                e.quote = string_field(ev, "quote", q + ".evidence");
                res.evidence = std::move(e);
            }
            b.results.push_back(std::move(res));
        }
        r.checklists.push_back(std::move(b));
    }

    const json& stress = field(doc, "stress", "");
    if (!stress.is_null()) {
        StressTimeline st;
        st.window_ms = int_field(stress, "window_ms", "stress");
        st.adapter_used = as_bool(field(stress, "adapter_used", "stress"), "stress.adapter_used");
        st.adapter_error = string_field(stress, "adapter_error", "stress");
        const json& bl = field(stress, "baseline", "stress");
        if (!bl.is_null()) {
            st.baseline = StressBaseline{stats_from(field(bl, "f0_mean", "stress.baseline"), "stress.baseline.f0_mean"),
                                         stats_from(field(bl, "jitter", "stress.baseline"), "stress.baseline.jitter"),
                                         stats_from(field(bl, "energy_rms", "stress.baseline"),
                                                    "stress.baseline.energy_rms")};
        }
        const json& samples = as_array(field(stress, "samples", "stress"), "stress.samples");
        for (std::size_t i = 0; i < samples.size(); ++i) {
            const std::string p = detail::index_path("stress.samples", i);
            StressSample s;
            s.t = Timestamp{int_field(samples[i], "t_ms", p)};
            s.score = number_field(samples[i], "score", p);
            s.binary = static_cast<int>(int_field(samples[i], "binary", p));
            s.gap = as_bool(field(samples[i], "gap", p), p + ".gap");
            st.samples.push_back(s);
        }
        r.stress = std::move(st);
    }

    const json& events = as_array(field(doc, "events", ""), "events");
    for (std::size_t i = 0; i < events.size(); ++i) {
        r.events.push_back(event_from(events[i], detail::index_path("events", i)));
    }
    return r;
}

}  // namespace

std::string render_json(const SessionReport& report) { return detail::canonical_dump(report_to_json(report)); }

SessionReport parse_report_json(std::string_view bytes) {
    json doc = json::parse(bytes.begin(), bytes.end(), nullptr, false);
    if (doc.is_discarded()) {
        throw Error(Errc::SchemaMismatch, "SchemaMismatch: report is not valid JSON");
    }
    try {
        return report_from_json(doc);
    } catch (const detail::FieldError& e) {
        throw Error(Errc::SchemaMismatch, "SchemaMismatch: " + e.reason);
    } catch (const ParseError& e) {
        throw Error(Errc::SchemaMismatch, std::string("SchemaMismatch: ") + e.what());
    }
}

// ---------------------------------------------------------------------------
// comparison

namespace {

ComparedValue compared(std::string key, double a, double b, std::string category = {}) {
    return {std::move(key), std::move(category), a, b, b - a};
}

std::optional<double> af_mean(const SessionReport& r) {
    if (r.af.timeline.empty()) {
        return std::nullopt;
    }
    double s = 0.0;
    for (const AFSample& a : r.af.timeline) {
        s += a.af;
    }
    return s / static_cast<double>(r.af.timeline.size());
}

std::optional<double> stress_mean(const SessionReport& r) {
    if (!r.stress || r.stress->samples.empty()) {
        return std::nullopt;
    }
    double s = 0.0;
    for (const StressSample& x : r.stress->samples) {
        s += x.score;
    }
    return s / static_cast<double>(r.stress->samples.size());
}

OptionalDelta optional_delta(std::optional<double> a, std::optional<double> b) {
    OptionalDelta d{a, b, std::nullopt};
    if (a && b) {
        d.delta = *b - *a;
    }
    return d;
}

double completed_count(const SessionReport& r) {
    double n = 0.0;
    for (const ChecklistBlock& b : r.checklists) {
        n += static_cast<double>(std::count_if(b.results.begin(), b.results.end(),
                                               [](const ChecklistResult& x) { return x.completed; }));
    }
    return n;
}

}  // namespace

ComparisonReport compare_reports(const SessionReport& a, const SessionReport& b) {
    if (a.meta.catalog != b.meta.catalog) {
        throw Error(Errc::CatalogMismatch, fmt::format("CatalogMismatch: [{}] vs [{}]", fmt::join(a.meta.catalog, ","),
                                                       fmt::join(b.meta.catalog, ",")));
    }
    ComparisonReport c;
    c.a_id = a.meta.session_id;
    c.b_id = b.meta.session_id;

    std::set<std::string> panels;
    for (const auto& [k, v] : a.focus.totals) {
        panels.insert(k);
    }
    for (const auto& [k, v] : b.focus.totals) {
        panels.insert(k);
    }
    auto total = [](const SessionReport& r, const std::string& k) {
        auto it = r.focus.totals.find(k);
        return it == r.focus.totals.end() ? 0.0 : it->second;
    };
    for (const std::string& k : panels) {
        c.focus.push_back(compared(k, total(a, k), total(b, k)));
    }

    std::map<std::string, std::pair<EntityCategory, std::pair<double, double>>> ents;
    for (const EntityCount& e : a.entities.entities) {
        auto& slot = ents[e.name];
        slot.first = e.category;
        slot.second.first = static_cast<double>(e.count);
    }
    for (const EntityCount& e : b.entities.entities) {
        auto& slot = ents[e.name];
        slot.first = e.category;
        slot.second.second = static_cast<double>(e.count);
    }
    for (const auto& [name, v] : ents) {
        c.entities.push_back(compared(name, v.second.first, v.second.second, category_name(v.first)));
    }
    c.internal = compared("internal", static_cast<double>(a.entities.internal_total),
                          static_cast<double>(b.entities.internal_total));
    c.external = compared("external", static_cast<double>(a.entities.external_total),
                          static_cast<double>(b.entities.external_total));
    c.af_mean = optional_delta(af_mean(a), af_mean(b));
    c.stress_mean = optional_delta(stress_mean(a), stress_mean(b));
    c.checklist_completed = compared("checklist_completed", completed_count(a), completed_count(b));
    return c;
}

namespace {

json compared_json(const ComparedValue& v) {
    json j = {{"key", v.key}, {"a", v.a}, {"b", v.b}, {"delta", v.delta}};
    if (!v.category.empty()) {
        j["category"] = v.category;
    }
    return j;
}

json optional_delta_json(const OptionalDelta& d) {
    return {{"a", opt_json(d.a)}, {"b", opt_json(d.b)}, {"delta", opt_json(d.delta)}};
}

}  // namespace

std::string render_comparison_json(const ComparisonReport& cmp) {
    json focus = json::array();
    for (const ComparedValue& v : cmp.focus) {
        focus.push_back(compared_json(v));
    }
    json entities = json::array();
    for (const ComparedValue& v : cmp.entities) {
        entities.push_back(compared_json(v));
    }
    json doc = {{"a", cmp.a_id},
                {"b", cmp.b_id},
                {"focus_totals", focus},
                {"entities", entities},
                {"internal", compared_json(cmp.internal)},
                {"external", compared_json(cmp.external)},
                {"af_mean", optional_delta_json(cmp.af_mean)},
                {"stress_mean", optional_delta_json(cmp.stress_mean)},
                {"checklist_completed", compared_json(cmp.checklist_completed)}};
    return detail::canonical_dump(doc);
}

}  // namespace bridgewatch
