#include "bridgewatch/simulate.hpp"

#include "bridgewatch/error.hpp"
#include "bridgewatch/ingest.hpp"
#include "canonical_json.hpp"
#include "json_io.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <numbers>
#include <random>
#include <set>

namespace bridgewatch {

using detail::json;
using detail::ordered_json;

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9E3779B97F4A7C15ULL;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
    return x ^ (x >> 31);
}

class Stream {
public:
    Stream(std::uint64_t seed, std::uint64_t k) : eng_(splitmix64(seed + k)) {}

    double uniform() { return static_cast<double>(eng_() >> 11) * 0x1.0p-53; }

    double normal() {
        double u1 = uniform();
        double u2 = uniform();
        if (u1 < 1e-300) {
            u1 = 1e-300;
        }
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(kTwoPi * u2);
    }

private:
    std::mt19937_64 eng_;
};

[[noreturn]] void invalid(const std::string& why) { throw Error(Errc::InvalidScenario, "InvalidScenario: " + why); }

bool bbox_ok(const BBox& b, const ScreenGeometry& s) {
    return b.x0 < b.x1 && b.y0 < b.y1 && b.x0 >= 0 && b.y0 >= 0 && b.x1 <= s.width_px && b.y1 <= s.height_px;
}

bool inside(const BBox& inner, const BBox& outer) {
    return inner.x0 >= outer.x0 && inner.y0 >= outer.y0 && inner.x1 <= outer.x1 && inner.y1 <= outer.y1;
}

bool overlaps(const BBox& a, const BBox& b) {
    return a.x0 < b.x1 && b.x0 < a.x1 && a.y0 < b.y1 && b.y0 < a.y1;
}

const ScenarioPanel* find_panel(const Scenario& s, const std::string& id) {
    for (const ScenarioPanel& p : s.layout) {
        if (p.id == id) {
            return &p;
        }
    }
    return nullptr;
}

const ScenarioPanel::Sub* find_sub(const ScenarioPanel& p, const std::string& id) {
    for (const ScenarioPanel::Sub& sp : p.subpanels) {
        if (sp.id == id) {
            return &sp;
        }
    }
    return nullptr;
}

Point2 phase_target(const Scenario& s, const GazePhase& ph) {
    const ScenarioPanel* p = find_panel(s, ph.target_panel);
    if (!ph.target_subpanel.empty()) {
        return find_sub(*p, ph.target_subpanel)->bbox.center();
    }
    return p->bbox.center();
}

const ChecklistDefinition* checklist_for(const Scenario& s, const std::string& kind) {
    for (const ChecklistDefinition& c : s.checklists) {
        if (c.event_kind == kind) {
            return &c;
        }
    }
    return nullptr;
}

}  // namespace

void validate_scenario(const Scenario& s) {
    if (s.duration_ms <= 0) {
        invalid("duration_ms must be positive");
    }
    if (s.screen.width_px <= 0 || s.screen.height_px <= 0) {
        invalid("screen dimensions must be positive");
    }
    if (s.layout.empty()) {
        invalid("layout is empty");
    }
    std::set<std::string> ids;
    for (const ScenarioPanel& p : s.layout) {
        if (p.id.empty() || !ids.insert(p.id).second) {
            invalid("duplicate or empty panel id '" + p.id + "'");
        }
        if (!bbox_ok(p.bbox, s.screen)) {
            invalid("panel " + p.id + " bbox invalid or outside frame");
        }
        std::set<std::string> sub_ids;
        for (std::size_t i = 0; i < p.subpanels.size(); ++i) {
            const ScenarioPanel::Sub& sp = p.subpanels[i];
            if (sp.id.empty() || !sub_ids.insert(sp.id).second) {
                invalid("duplicate or empty subpanel id in " + p.id);
            }
            if (!(sp.bbox.x0 < sp.bbox.x1 && sp.bbox.y0 < sp.bbox.y1) || !inside(sp.bbox, p.bbox)) {
                invalid("subpanel " + sp.id + " must lie inside " + p.id);
            }
            for (std::size_t j = 0; j < i; ++j) {
                if (overlaps(sp.bbox, p.subpanels[j].bbox)) {
                    invalid("subpanels of " + p.id + " overlap");
                }
            }
        }
    }
    if (s.event.kind.empty()) {
        invalid("event kind is empty");
    }
    if (s.event.t.ms < 0 || s.event.t.ms >= s.duration_ms) {
        invalid(fmt::format("event at {} ms outside duration {} ms", s.event.t.ms, s.duration_ms));
    }
    std::int64_t cursor = 0;
    for (const GazePhase& ph : s.gaze_phases) {
        if (ph.t0_ms != cursor || ph.t1_ms <= ph.t0_ms) {
            invalid(fmt::format("gaze phases must tile [0, duration) without overlap (phase at {} ms)", ph.t0_ms));
        }
        cursor = ph.t1_ms;
        if (ph.scatter_px < 0) {
            invalid("scatter_px must be non-negative");
        }
        if (!ph.target_panel.empty()) {
            const ScenarioPanel* p = find_panel(s, ph.target_panel);
            if (p == nullptr) {
                invalid("unknown target panel " + ph.target_panel);
            }
            if (!ph.target_subpanel.empty() && find_sub(*p, ph.target_subpanel) == nullptr) {
                invalid("unknown target subpanel " + ph.target_subpanel);
            }
        } else if (!ph.target_subpanel.empty()) {
            invalid("subpanel target without panel");
        }
    }
    if (cursor != s.duration_ms) {
        invalid("gaze phases must cover the whole duration");
    }
    const PupilProfile& pp = s.pupil;
    if (pp.baseline_mm <= 0 || pp.bump_mm < 0 || pp.noise_mm < 0) {
        invalid("pupil profile values out of range");
    }
    if (pp.bump_mm > 0 && (pp.bump_t0_ms < 0 || pp.bump_t1_ms <= pp.bump_t0_ms + 1000 || pp.bump_t1_ms > s.duration_ms)) {
        invalid("pupil bump range must lie within the session and exceed 1 s");
    }
    std::vector<LexiconEntry> lexicon_entries = s.entities;
    try {
        EntityLexicon lex(std::move(lexicon_entries));
    } catch (const Error& e) {
        invalid(std::string("entities: ") + e.what());
    }
    std::set<std::string> names;
    for (const LexiconEntry& e : s.entities) {
        names.insert(e.name);
    }
    for (const ScriptLine& line : s.script) {
        if (line.t_ms < 0 || line.duration_ms < 0 || line.t_ms + line.duration_ms > s.duration_ms) {
            invalid(fmt::format("script line at {} ms outside duration", line.t_ms));
        }
        if (line.text.empty() || line.speaker.empty()) {
            invalid(fmt::format("script line at {} ms needs speaker and text", line.t_ms));
        }
        for (const std::string& n : line.entities) {
            if (!names.contains(n)) {
                invalid("script label references unknown entity " + n);
            }
        }
    }
    std::set<std::string> kinds;
    for (const ChecklistDefinition& c : s.checklists) {
        if (!kinds.insert(c.event_kind).second) {
            invalid("duplicate checklist for " + c.event_kind);
        }
    }
    if (!s.expected_checklist.empty()) {
        const ChecklistDefinition* c = checklist_for(s, s.event.kind);
        if (c == nullptr) {
            invalid("expected_checklist given but no checklist for " + s.event.kind);
        }
        std::set<std::string> item_ids;
        for (const ChecklistItem& it : c->items) {
            item_ids.insert(it.id);
        }
        for (const auto& [id, v] : s.expected_checklist) {
            if (!item_ids.contains(id)) {
                invalid("expected_checklist names unknown item " + id);
            }
        }
    }
    if (s.dropout_rate < 0 || s.dropout_rate >= 1) {
        invalid("dropout_rate must be in [0,1)");
    }
    if (s.dwell_tolerance <= 0) {
        invalid("dwell_tolerance must be positive");
    }
    const AudioProfile& a = s.audio;
    if (a.sample_rate_hz < 8000 || a.amplitude <= 0 || a.amplitude > 0.6) {
        invalid("audio sample rate must be >= 8000 and amplitude in (0, 0.6]");
    }
    const PitchParams& band = s.analysis.stress.pitch;
    // drift reaches 3% either side of the nominal pitch
    if (a.pre_f0_hz * 0.97 < band.f0_min_hz || a.pre_f0_hz * 1.03 > band.f0_max_hz ||
        a.post_f0_hz * 0.97 < band.f0_min_hz || a.post_f0_hz * 1.03 > band.f0_max_hz) {
        invalid("audio pitch outside the analysis band");
    }
    if (a.post_jitter < 0 || a.post_jitter > 0.2) {
        invalid("post_jitter must be in [0, 0.2]");
    }
    if (a.transition_t_ms < 0 || a.transition_t_ms > s.duration_ms) {
        invalid("audio transition outside duration");
    }
    if (a.recovery_t_ms != 0 && (a.recovery_t_ms <= a.transition_t_ms || a.recovery_t_ms > s.duration_ms)) {
        invalid("audio recovery must follow the transition");
    }
    try {
        validate_config(s.analysis);
    } catch (const Error& e) {
        invalid(std::string("analysis: ") + e.what());
    }
}

// ---------------------------------------------------------------------------
// generation

namespace {

double pupil_bump(const PupilProfile& p, std::int64_t t) {
    if (p.bump_mm <= 0 || t < p.bump_t0_ms || t >= p.bump_t1_ms) {
        return 0.0;
    }
    const double rise_end = static_cast<double>(p.bump_t0_ms) + 1000.0;
    const auto tt = static_cast<double>(t);
    if (tt < rise_end) {
        return p.bump_mm * (tt - static_cast<double>(p.bump_t0_ms)) / 1000.0;
    }
    return p.bump_mm * (static_cast<double>(p.bump_t1_ms) - tt) / (static_cast<double>(p.bump_t1_ms) - rise_end);
}

std::vector<GazeSample> gen_gaze(const Scenario& s) {
    Stream pos(s.seed, 1);
    Stream pupil(s.seed, 2);
    Stream drop(s.seed, 4);
    std::vector<GazeSample> out;
    const double w = s.screen.width_px;
    const double h = s.screen.height_px;
    std::size_t phase = 0;
    for (std::int64_t t = 0; t < s.duration_ms; t += 20) {
        while (t >= s.gaze_phases[phase].t1_ms) {
            ++phase;
        }
        const GazePhase& ph = s.gaze_phases[phase];
        Point2 p;
        if (ph.target_panel.empty()) {
            p = {pos.uniform() * w, pos.uniform() * h};
        } else {
            Point2 c = phase_target(s, ph);
            p = {c.x + ph.scatter_px * pos.normal(), c.y + ph.scatter_px * pos.normal()};
        }
        p.x = std::clamp(p.x, 0.0, w);
        p.y = std::clamp(p.y, 0.0, h);
        const double level = s.pupil.baseline_mm + pupil_bump(s.pupil, t);
        const double left = std::max(0.5, level + s.pupil.noise_mm * pupil.normal());
        const double right = std::max(0.5, level + s.pupil.noise_mm * pupil.normal());

        GazeSample g;
        g.t = Timestamp{t};
        if (drop.uniform() < s.dropout_rate) {
            g.valid = false;
        } else {
            g.valid = true;
            // round to 0.01 px / 0.001 mm so the JSONL text is compact and exact
            g.gaze_px = Point2{std::round(p.x * 100.0) / 100.0, std::round(p.y * 100.0) / 100.0};
            g.pd_left_mm = std::round(left * 1000.0) / 1000.0;
            g.pd_right_mm = std::round(right * 1000.0) / 1000.0;
            g.depth_m = 0.65;
        }
        out.push_back(g);
    }
    return out;
}

std::vector<PanelObservation> gen_panels(const Scenario& s) {
    Stream conf(s.seed, 3);
    std::vector<PanelObservation> out;
    auto confidence = [&] { return std::round((0.85 + 0.14 * conf.uniform()) * 1000.0) / 1000.0; };
    for (std::int64_t t = 0; t < s.duration_ms; t += 40) {
        for (const ScenarioPanel& p : s.layout) {
            if (p.subpanels.empty()) {
                out.push_back({Timestamp{t}, p.id, std::nullopt, p.bbox, confidence()});
                continue;
            }
            for (const ScenarioPanel::Sub& sp : p.subpanels) {
                out.push_back({Timestamp{t}, p.id, sp.id, sp.bbox, confidence()});
            }
        }
    }
    return out;
}

AudioClip gen_audio(const Scenario& s) {
    const AudioProfile& a = s.audio;
    Stream rng(s.seed, 5);
    AudioClip clip;
    clip.sample_rate_hz = a.sample_rate_hz;
    const double sr = a.sample_rate_hz;
    const auto n = static_cast<std::size_t>(static_cast<double>(s.duration_ms) * sr / 1000.0);
    clip.samples.resize(n);
    static constexpr double harmonics[4] = {1.0, 0.5, 0.3, 0.2};
    const double norm = 2.0;
    double phase = 0.0;  // glottal phase in cycles
    double cycle_factor = 1.0;
    const double t_on = static_cast<double>(a.transition_t_ms) / 1000.0;
    const double t_off = a.recovery_t_ms > 0 ? static_cast<double>(a.recovery_t_ms) / 1000.0 : 1e300;
    for (std::size_t i = 0; i < n; ++i) {
        const double t = static_cast<double>(i) / sr;
        const bool stressed = t >= t_on && t < t_off;
        const double drift = 1.0 + 0.02 * std::sin(kTwoPi * t / 12.0) + 0.01 * std::sin(kTwoPi * t / 4.0 + 0.7);
        const double f0 = (stressed ? a.post_f0_hz : a.pre_f0_hz) * drift * (stressed ? cycle_factor : 1.0);
        const double gain = a.amplitude * (1.0 + 0.15 * std::sin(kTwoPi * t / 6.0 + 0.3)) * (stressed ? 1.3 : 1.0);
        double v = 0.0;
        for (int h = 0; h < 4; ++h) {
            v += harmonics[h] * std::sin(kTwoPi * (h + 1) * phase);
        }
        v = gain * v / norm + 0.002 * rng.normal();
        clip.samples[i] = static_cast<float>(std::clamp(v, -1.0, 1.0));
        phase += f0 / sr;
        if (phase >= 1.0) {
            phase -= 1.0;
            const double j = std::clamp(rng.normal(), -3.0, 3.0);
            cycle_factor = 1.0 + a.post_jitter * j;
        }
    }
    return clip;
}

double axis_containment(double lo, double hi, double mu, double sigma) {
    if (sigma <= 0) {
        return (mu >= lo && mu < hi) ? 1.0 : 0.0;
    }
    const double k = sigma * std::numbers::sqrt2;
    return 0.5 * (std::erf((hi - mu) / k) - std::erf((lo - mu) / k));
}

}  // namespace

GroundTruth ground_truth_for(const Scenario& s) {
    GroundTruth gt;
    for (const GazePhase& ph : s.gaze_phases) {
        if (ph.target_panel.empty()) {
            continue;
        }
        const ScenarioPanel* p = find_panel(s, ph.target_panel);
        Point2 c = phase_target(s, ph);
        std::vector<BBox> boxes;
        if (p->subpanels.empty()) {
            boxes.push_back(p->bbox);
        } else {
            for (const ScenarioPanel::Sub& sp : p->subpanels) {
                boxes.push_back(sp.bbox);
            }
        }
        double prob = 0.0;
        for (const BBox& b : boxes) {
            prob += axis_containment(b.x0, b.x1, c.x, ph.scatter_px) * axis_containment(b.y0, b.y1, c.y, ph.scatter_px);
        }
        gt.dwell.push_back({ph.t0_ms, ph.t1_ms, ph.target_panel, prob, s.dwell_tolerance});
    }

    const double w1 = s.analysis.w1;
    const PupilProfile& pp = s.pupil;
    gt.af_spike = {s.event.t.ms, s.event.kind, w1 * (pp.bump_mm / (pp.bump_mm + 10.0 * pp.noise_mm)) / 2.0};

    if (const ChecklistDefinition* c = checklist_for(s, s.event.kind); c != nullptr && !s.expected_checklist.empty()) {
        gt.checklist_event_kind = s.event.kind;
        gt.checklist = s.expected_checklist;
    }

    std::map<std::string, std::size_t> counts;
    for (const LexiconEntry& e : s.entities) {
        counts[e.name] = 0;
    }
    for (const ScriptLine& line : s.script) {
        for (const std::string& n : line.entities) {
            ++counts[n];
        }
    }
    gt.entities.assign(counts.begin(), counts.end());

    const StressParams& sp = s.analysis.stress;
    const AudioProfile& a = s.audio;
    if (a.post_f0_hz > a.pre_f0_hz && a.transition_t_ms >= sp.baseline_ms + sp.window_ms) {
        gt.stress_flip = StressFlipExpectation{a.transition_t_ms, a.transition_t_ms - sp.window_ms,
                                               a.transition_t_ms + 10000, sp.baseline_ms};
    }
    return gt;
}

GeneratedSession simulate_session(const Scenario& s) {
    validate_scenario(s);
    GeneratedSession g;
    Session& session = g.session;
    session.id = s.name;
    session.meta = {s.visibility, s.name};
    session.catalog.screen = s.screen;
    for (const ScenarioPanel& p : s.layout) {
        PanelInfo info{p.id, p.name, {}};
        for (const ScenarioPanel::Sub& sp : p.subpanels) {
            info.subpanels.push_back({sp.id, sp.name});
        }
        session.catalog.panels.push_back(std::move(info));
    }
    session.gaze = gen_gaze(s);
    session.panels = gen_panels(s);
    std::vector<ScriptLine> script = s.script;
    std::stable_sort(script.begin(), script.end(),
                     [](const ScriptLine& a, const ScriptLine& b) { return a.t_ms < b.t_ms; });
    for (const ScriptLine& line : script) {
        session.utterances.push_back(
            {Timestamp{line.t_ms}, Timestamp{line.t_ms + line.duration_ms}, line.speaker, line.text});
    }
    session.events.push_back(s.event);
    g.audio = gen_audio(s);
    g.truth = ground_truth_for(s);
    return g;
}

// ---------------------------------------------------------------------------
// JSON

namespace {

ordered_json bbox_json(const BBox& b) { return ordered_json::array({b.x0, b.y0, b.x1, b.y1}); }

ordered_json checklist_to_json(const ChecklistDefinition& c) {
    ordered_json items = ordered_json::array();
    for (const ChecklistItem& it : c.items) {
        ordered_json item;
        item["id"] = it.id;
        item["description"] = it.description;
        item["match"] = {{"all_of", it.all_of}};
        if (it.horizon_ms) {
            item["horizon_ms"] = *it.horizon_ms;
        }
        items.push_back(item);
    }
    ordered_json j;
    j["event_kind"] = c.event_kind;
    j["items"] = items;
    return j;
}

ordered_json lexicon_to_json(const std::vector<LexiconEntry>& entries) {
    ordered_json arr = ordered_json::array();
    for (const LexiconEntry& e : entries) {
        ordered_json j;
        j["name"] = e.name;
        j["aliases"] = e.aliases;
        j["category"] = category_name(e.category);
        arr.push_back(j);
    }
    return arr;
}

BBox bbox_from(const json& j, const std::string& path) {
    const json& a = detail::as_array(j, path);
    if (a.size() != 4) {
        detail::field_fail(Errc::SchemaViolation, path + ": expected [x0, y0, x1, y1]");
    }
    return {detail::as_number(a[0], path), detail::as_number(a[1], path), detail::as_number(a[2], path),
            detail::as_number(a[3], path)};
}

std::pair<std::int64_t, std::int64_t> range_from(const json& j, const std::string& path) {
    const json& a = detail::as_array(j, path);
    if (a.size() != 2) {
        detail::field_fail(Errc::SchemaViolation, path + ": expected [t0, t1]");
    }
    return {detail::as_int(a[0], path), detail::as_int(a[1], path)};
}

template <typename T>
void opt_assign(const json& obj, std::string_view key, T& out) {
    if (const json* v = detail::opt_field(obj, key)) {
        if constexpr (std::is_same_v<T, std::string>) {
            out = detail::as_string(*v, std::string(key));
        } else if constexpr (std::is_integral_v<T>) {
            out = static_cast<T>(detail::as_int(*v, std::string(key)));
        } else {
            out = detail::as_number(*v, std::string(key));
        }
    }
}

}  // namespace

std::string write_lexicon_json(const std::vector<LexiconEntry>& entries) {
    return lexicon_to_json(entries).dump(2) + "\n";
}

std::string write_checklist_json(const ChecklistDefinition& checklist) {
    return checklist_to_json(checklist).dump(2) + "\n";
}

std::string write_scenario_json(const Scenario& s) {
    ordered_json j;
    j["name"] = s.name;
    j["visibility"] = s.visibility;
    j["duration_ms"] = s.duration_ms;
    j["seed"] = s.seed;
    j["screen"] = {{"width_px", s.screen.width_px}, {"height_px", s.screen.height_px}};
    ordered_json layout = ordered_json::array();
    for (const ScenarioPanel& p : s.layout) {
        ordered_json pj;
        pj["id"] = p.id;
        pj["name"] = p.name;
        pj["bbox"] = bbox_json(p.bbox);
        ordered_json subs = ordered_json::array();
        for (const ScenarioPanel::Sub& sp : p.subpanels) {
            ordered_json sj;
            sj["id"] = sp.id;
            sj["name"] = sp.name;
            sj["bbox"] = bbox_json(sp.bbox);
            subs.push_back(sj);
        }
        pj["subpanels"] = subs;
        layout.push_back(pj);
    }
    j["layout"] = layout;
    j["event"] = {{"t_ms", s.event.t.ms}, {"kind", s.event.kind}, {"label", s.event.label}};
    ordered_json phases = ordered_json::array();
    for (const GazePhase& ph : s.gaze_phases) {
        ordered_json pj;
        pj["t_range"] = {ph.t0_ms, ph.t1_ms};
        pj["target_panel"] = ph.target_panel.empty() ? ordered_json(nullptr) : ordered_json(ph.target_panel);
        pj["target_subpanel"] = ph.target_subpanel.empty() ? ordered_json(nullptr) : ordered_json(ph.target_subpanel);
        pj["scatter_px"] = ph.scatter_px;
        phases.push_back(pj);
    }
    j["gaze_phases"] = phases;
    ordered_json pupil;
    pupil["baseline_mm"] = s.pupil.baseline_mm;
    pupil["bump_mm"] = s.pupil.bump_mm;
    pupil["bump_t_range"] = {s.pupil.bump_t0_ms, s.pupil.bump_t1_ms};
    pupil["noise_mm"] = s.pupil.noise_mm;
    j["pupil_profile"] = pupil;
    ordered_json script = ordered_json::array();
    for (const ScriptLine& line : s.script) {
        ordered_json lj;
        lj["t_ms"] = line.t_ms;
        lj["duration_ms"] = line.duration_ms;
        lj["speaker"] = line.speaker;
        lj["text"] = line.text;
        lj["entities"] = line.entities;
        script.push_back(lj);
    }
    j["utterance_script"] = script;
    ordered_json audio;
    audio["pre_f0_hz"] = s.audio.pre_f0_hz;
    audio["post_f0_hz"] = s.audio.post_f0_hz;
    audio["post_jitter"] = s.audio.post_jitter;
    audio["transition_t_ms"] = s.audio.transition_t_ms;
    audio["recovery_t_ms"] = s.audio.recovery_t_ms;
    audio["sample_rate_hz"] = s.audio.sample_rate_hz;
    audio["amplitude"] = s.audio.amplitude;
    j["audio_profile"] = audio;
    j["entities"] = lexicon_to_json(s.entities);
    ordered_json checklists = ordered_json::array();
    for (const ChecklistDefinition& c : s.checklists) {
        checklists.push_back(checklist_to_json(c));
    }
    j["checklists"] = checklists;
    ordered_json expected = ordered_json::array();
    for (const auto& [id, v] : s.expected_checklist) {
        expected.push_back({{"id", id}, {"completed", v}});
    }
    j["expected_checklist"] = expected;
    j["dropout_rate"] = s.dropout_rate;
    j["dwell_tolerance"] = s.dwell_tolerance;
    json analysis = detail::config_to_json(s.analysis);
    analysis.erase("entities");
    analysis.erase("checklists");
    j["analysis"] = ordered_json::parse(analysis.dump());
    return j.dump(2) + "\n";
}

Scenario parse_scenario_json(std::string_view bytes) {
    try {
        return detail::read_document(bytes, [](const json& doc) {
            Scenario s;
            s.name = detail::string_field(doc, "name", "");
            opt_assign(doc, "visibility", s.visibility);
            s.duration_ms = detail::int_field(doc, "duration_ms", "");
            s.seed = static_cast<std::uint64_t>(detail::int_field(doc, "seed", ""));
            const json& screen = detail::field(doc, "screen", "");
            s.screen = {static_cast<int>(detail::int_field(screen, "width_px", "screen")),
                        static_cast<int>(detail::int_field(screen, "height_px", "screen"))};
            const json& layout = detail::as_array(detail::field(doc, "layout", ""), "layout");
            for (std::size_t i = 0; i < layout.size(); ++i) {
                const std::string p = detail::index_path("layout", i);
                ScenarioPanel panel;
                panel.id = detail::string_field(layout[i], "id", p);
                panel.name = detail::opt_string(layout[i], "name", p).value_or(panel.id);
                panel.bbox = bbox_from(detail::field(layout[i], "bbox", p), p + ".bbox");
                if (const json* subs = detail::opt_field(layout[i], "subpanels")) {
                    detail::as_array(*subs, p + ".subpanels");
                    for (std::size_t k = 0; k < subs->size(); ++k) {
                        const std::string q = detail::index_path(p + ".subpanels", k);
                        ScenarioPanel::Sub sp;
                        sp.id = detail::string_field((*subs)[k], "id", q);
                        sp.name = detail::opt_string((*subs)[k], "name", q).value_or(sp.id);
                        sp.bbox = bbox_from(detail::field((*subs)[k], "bbox", q), q + ".bbox");
                        panel.subpanels.push_back(std::move(sp));
                    }
                }
                s.layout.push_back(std::move(panel));
            }
            const json& ev = detail::field(doc, "event", "");
            s.event.t = Timestamp{detail::int_field(ev, "t_ms", "event")};
            s.event.kind = detail::string_field(ev, "kind", "event");
            s.event.label = detail::opt_string(ev, "label", "event").value_or(s.event.kind);
            const json& phases = detail::as_array(detail::field(doc, "gaze_phases", ""), "gaze_phases");
            for (std::size_t i = 0; i < phases.size(); ++i) {
                const std::string p = detail::index_path("gaze_phases", i);
                GazePhase ph;
                std::tie(ph.t0_ms, ph.t1_ms) = range_from(detail::field(phases[i], "t_range", p), p + ".t_range");
                ph.target_panel = detail::opt_string(phases[i], "target_panel", p).value_or("");
                ph.target_subpanel = detail::opt_string(phases[i], "target_subpanel", p).value_or("");
                ph.scatter_px = detail::opt_number(phases[i], "scatter_px", p).value_or(20.0);
                s.gaze_phases.push_back(std::move(ph));
            }
            if (const json* pj = detail::opt_field(doc, "pupil_profile")) {
                opt_assign(*pj, "baseline_mm", s.pupil.baseline_mm);
                opt_assign(*pj, "bump_mm", s.pupil.bump_mm);
                opt_assign(*pj, "noise_mm", s.pupil.noise_mm);
                if (const json* r = detail::opt_field(*pj, "bump_t_range")) {
                    std::tie(s.pupil.bump_t0_ms, s.pupil.bump_t1_ms) = range_from(*r, "pupil_profile.bump_t_range");
                }
            }
            if (const json* script = detail::opt_field(doc, "utterance_script")) {
                detail::as_array(*script, "utterance_script");
                for (std::size_t i = 0; i < script->size(); ++i) {
                    const std::string p = detail::index_path("utterance_script", i);
                    const json& lj = (*script)[i];
                    ScriptLine line;
                    line.t_ms = detail::int_field(lj, "t_ms", p);
                    opt_assign(lj, "duration_ms", line.duration_ms);
                    line.speaker = detail::string_field(lj, "speaker", p);
                    line.text = detail::string_field(lj, "text", p);
                    if (const json* ents = detail::opt_field(lj, "entities")) {
                        detail::as_array(*ents, p + ".entities");
                        for (std::size_t k = 0; k < ents->size(); ++k) {
                            line.entities.push_back(
                                detail::as_string((*ents)[k], detail::index_path(p + ".entities", k)));
                        }
                    }
                    s.script.push_back(std::move(line));
                }
            }
            if (const json* aj = detail::opt_field(doc, "audio_profile")) {
                opt_assign(*aj, "pre_f0_hz", s.audio.pre_f0_hz);
                opt_assign(*aj, "post_f0_hz", s.audio.post_f0_hz);
                opt_assign(*aj, "post_jitter", s.audio.post_jitter);
                opt_assign(*aj, "transition_t_ms", s.audio.transition_t_ms);
                opt_assign(*aj, "recovery_t_ms", s.audio.recovery_t_ms);
                opt_assign(*aj, "sample_rate_hz", s.audio.sample_rate_hz);
                opt_assign(*aj, "amplitude", s.audio.amplitude);
            }
            if (const json* ej = detail::opt_field(doc, "entities")) {
                s.entities = parse_lexicon_json(ej->dump()).entries();
            }
            if (const json* cj = detail::opt_field(doc, "checklists")) {
                detail::as_array(*cj, "checklists");
                for (const json& c : *cj) {
                    s.checklists.push_back(parse_checklist_json(c.dump()));
                }
            }
            if (const json* xj = detail::opt_field(doc, "expected_checklist")) {
                detail::as_array(*xj, "expected_checklist");
                for (std::size_t i = 0; i < xj->size(); ++i) {
                    const std::string p = detail::index_path("expected_checklist", i);
                    s.expected_checklist.emplace_back(detail::string_field((*xj)[i], "id", p),
                                                      detail::as_bool(detail::field((*xj)[i], "completed", p),
                                                                      p + ".completed"));
                }
            }
            opt_assign(doc, "dropout_rate", s.dropout_rate);
            opt_assign(doc, "dwell_tolerance", s.dwell_tolerance);
            if (const json* an = detail::opt_field(doc, "analysis")) {
                s.analysis = detail::config_from_json(*an);
            }
            return s;
        });
    } catch (const ParseError& e) {
        throw Error(Errc::InvalidScenario, std::string("InvalidScenario: ") + e.what());
    } catch (const Error& e) {
        if (e.code() == Errc::InvalidScenario) {
            throw;
        }
        throw Error(Errc::InvalidScenario, std::string("InvalidScenario: ") + e.what());
    }
}

std::string write_ground_truth_json(const GroundTruth& gt) {
    json dwell = json::array();
    for (const DwellExpectation& d : gt.dwell) {
        dwell.push_back({{"t_range", {d.t0_ms, d.t1_ms}},
                         {"panel", d.panel},
                         {"expected_fraction", d.expected_fraction},
                         {"tolerance", d.tolerance}});
    }
    json checklist = json::object();
    for (const auto& [id, v] : gt.checklist) {
        checklist[id] = v;
    }
    json order = json::array();
    for (const auto& [id, v] : gt.checklist) {
        order.push_back(id);
    }
    json entities = json::object();
    for (const auto& [name, n] : gt.entities) {
        entities[name] = n;
    }
    json stress = nullptr;
    if (gt.stress_flip) {
        stress = {{"transition_t_ms", gt.stress_flip->transition_t_ms},
                  {"window", {gt.stress_flip->window_start_ms, gt.stress_flip->window_end_ms}},
                  {"baseline_ms", gt.stress_flip->baseline_ms}};
    }
    json doc = {{"dwell", dwell},
                {"af_spike",
                 {{"event_t_ms", gt.af_spike.event_t_ms},
                  {"event_kind", gt.af_spike.event_kind},
                  {"min_delta", gt.af_spike.min_delta}}},
                {"checklist_event_kind", gt.checklist_event_kind},
                {"checklist", checklist},
                {"checklist_order", order},
                {"entities", entities},
                {"stress_flip", stress}};
    return detail::canonical_dump(doc);
}

GroundTruth parse_ground_truth_json(std::string_view bytes) {
    try {
        return detail::read_document(bytes, [](const json& doc) {
            GroundTruth gt;
            const json& dwell = detail::as_array(detail::field(doc, "dwell", ""), "dwell");
            for (std::size_t i = 0; i < dwell.size(); ++i) {
                const std::string p = detail::index_path("dwell", i);
                DwellExpectation d;
                std::tie(d.t0_ms, d.t1_ms) = range_from(detail::field(dwell[i], "t_range", p), p + ".t_range");
                d.panel = detail::string_field(dwell[i], "panel", p);
                d.expected_fraction = detail::number_field(dwell[i], "expected_fraction", p);
                d.tolerance = detail::number_field(dwell[i], "tolerance", p);
                if (d.tolerance <= 0) {
                    detail::field_fail(Errc::SchemaMismatch, p + ".tolerance: must be positive");
                }
                gt.dwell.push_back(std::move(d));
            }
            const json& af = detail::field(doc, "af_spike", "");
            gt.af_spike = {detail::int_field(af, "event_t_ms", "af_spike"),
                           detail::string_field(af, "event_kind", "af_spike"),
                           detail::number_field(af, "min_delta", "af_spike")};
            gt.checklist_event_kind = detail::opt_string(doc, "checklist_event_kind", "").value_or("");
            const json& checklist = detail::field(doc, "checklist", "");
            std::vector<std::string> order;
            if (const json* o = detail::opt_field(doc, "checklist_order")) {
                for (const json& id : *o) {
                    order.push_back(detail::as_string(id, "checklist_order"));
                }
            } else {
                for (const auto& [k, v] : checklist.items()) {
                    order.push_back(k);
                }
            }
            for (const std::string& id : order) {
                gt.checklist.emplace_back(id, detail::as_bool(detail::field(checklist, id, "checklist"), "checklist." + id));
            }
            for (const auto& [k, v] : detail::field(doc, "entities", "").items()) {
                gt.entities.emplace_back(k, static_cast<std::size_t>(detail::as_int(v, "entities." + k)));
            }
            if (const json* sf = detail::opt_field(doc, "stress_flip")) {
                auto [ws, we] = range_from(detail::field(*sf, "window", "stress_flip"), "stress_flip.window");
                gt.stress_flip = StressFlipExpectation{detail::int_field(*sf, "transition_t_ms", "stress_flip"), ws,
                                                       we, detail::int_field(*sf, "baseline_ms", "stress_flip")};
            }
            return gt;
        });
    } catch (const ParseError& e) {
        throw Error(Errc::SchemaMismatch, std::string("SchemaMismatch: ") + e.what());
    }
}

GroundTruth generate_session(const Scenario& scenario, const std::filesystem::path& out_dir) {
    GeneratedSession g = simulate_session(scenario);
    write_session(g.session, out_dir);
    write_wav(out_dir / "audio.wav", g.audio);
    write_file(out_dir / "ground_truth.json", write_ground_truth_json(g.truth));
    write_file(out_dir / "entities.json", write_lexicon_json(scenario.entities));
    AnalysisConfig config = scenario.analysis;
    config.entities_path = "entities.json";
    config.checklist_paths.clear();
    std::filesystem::create_directories(out_dir / "checklists");
    for (const ChecklistDefinition& c : scenario.checklists) {
        const std::string rel = "checklists/" + c.event_kind + ".json";
        write_file(out_dir / rel, write_checklist_json(c));
        config.checklist_paths.push_back(rel);
    }
    write_file(out_dir / "config.json", write_config_json(config));
    write_file(out_dir / "scenario.json", write_scenario_json(scenario));
    return g.truth;
}

// ---------------------------------------------------------------------------
// checking

namespace {

[[noreturn]] void mismatch(const std::string& why) { throw Error(Errc::SchemaMismatch, "SchemaMismatch: " + why); }

}  // namespace

std::vector<AssertionResult> check_against_ground_truth(const SessionReport& report, const GroundTruth& truth) {
    std::vector<AssertionResult> out;

    for (const DwellExpectation& d : truth.dwell) {
        AssertionResult a{fmt::format("dwell.{}@{}-{}", d.panel, d.t0_ms, d.t1_ms)};
        double sum = 0.0;
        std::size_t n = 0;
        for (const DwellDistribution& bin : report.focus.bins) {
            if (bin.bin_start.ms >= d.t0_ms && bin.bin_start.ms + bin.bin_ms <= d.t1_ms && bin.valid_samples > 0) {
                auto it = bin.fractions.find(d.panel);
                sum += it == bin.fractions.end() ? 0.0 : it->second;
                ++n;
            }
        }
        if (n == 0) {
            a.detail = "no focus bin lies inside the phase";
        } else {
            const double got = sum / static_cast<double>(n);
            a.passed = std::abs(got - d.expected_fraction) <= d.tolerance;
            a.detail = fmt::format("fraction {:.4f}, expected {:.4f} +/- {:.4f}", got, d.expected_fraction, d.tolerance);
        }
        out.push_back(std::move(a));
    }

    {
        const AfSpikeExpectation& e = truth.af_spike;
        auto it = std::find_if(report.af.events.begin(), report.af.events.end(), [&](const EventSlice& s) {
            return s.event.t.ms == e.event_t_ms && s.event.kind == e.event_kind;
        });
        if (it == report.af.events.end()) {
            mismatch("report has no AF slice for " + e.event_kind);
        }
        AssertionResult a{"af_spike." + e.event_kind};
        if (it->pre_mean && it->post_max) {
            const double delta = *it->post_max - *it->pre_mean;
            a.passed = delta >= e.min_delta;
            a.detail = fmt::format("post max {:.4f} - pre mean {:.4f} = {:.4f}, need >= {:.4f}", *it->post_max,
                                   *it->pre_mean, delta, e.min_delta);
        } else {
            a.detail = "slice lacks pre or post samples";
        }
        out.push_back(std::move(a));
    }

    if (!truth.checklist.empty()) {
        auto block = std::find_if(report.checklists.begin(), report.checklists.end(),
                                  [&](const ChecklistBlock& b) { return b.event.kind == truth.checklist_event_kind; });
        if (block == report.checklists.end()) {
            mismatch("report has no checklist block for " + truth.checklist_event_kind);
        }
        for (const auto& [id, expected] : truth.checklist) {
            AssertionResult a{"checklist." + id};
            auto r = std::find_if(block->results.begin(), block->results.end(),
                                  [&](const ChecklistResult& x) { return x.item_id == id; });
            if (r == block->results.end()) {
                a.detail = "item missing from report";
            } else {
                a.passed = !r->unknown && r->completed == expected;
                a.detail = fmt::format("got {}, expected {}", r->unknown ? "unknown" : (r->completed ? "yes" : "no"),
                                       expected ? "yes" : "no");
            }
            out.push_back(std::move(a));
        }
    }

    for (const auto& [name, expected] : truth.entities) {
        AssertionResult a{"entities." + name};
        auto it = std::find_if(report.entities.entities.begin(), report.entities.entities.end(),
                               [&](const EntityCount& c) { return c.name == name; });
        const std::size_t got = it == report.entities.entities.end() ? 0 : it->count;
        a.passed = got == expected;
        a.detail = fmt::format("count {}, expected {}", got, expected);
        out.push_back(std::move(a));
    }

    if (truth.stress_flip) {
        if (!report.stress) {
            mismatch("report has no stress section");
        }
        const StressFlipExpectation& f = *truth.stress_flip;
        AssertionResult a{"stress_flip"};
        std::optional<std::int64_t> first_one;
        for (const StressSample& s : report.stress->samples) {
            if (s.binary == 1) {
                first_one = s.t.ms;
                break;
            }
        }
        if (!first_one) {
            a.detail = "stress binary never reaches 1";
        } else {
            a.passed = *first_one >= f.window_start_ms && *first_one <= f.window_end_ms;
            a.detail = fmt::format("first stressed sample at {} ms, window [{}, {}]", *first_one, f.window_start_ms,
                                   f.window_end_ms);
        }
        out.push_back(std::move(a));
    }
    return out;
}

// ---------------------------------------------------------------------------
// default scenario

namespace {

ChecklistItem item(std::string id, std::string description, std::vector<std::vector<std::string>> all_of) {
    return {std::move(id), std::move(description), std::move(all_of), std::nullopt};
}

}  // namespace

Scenario default_scenario() {
    Scenario s;
    s.name = "engine_failure_default";
    s.visibility = "good";
    s.duration_ms = 240000;
    s.seed = 20240917;
    s.screen = {1920, 1080};
    s.layout = {
        {"radar", "Radar", {60, 260, 600, 740}, {}},
        {"ecdis", "ECDIS", {660, 260, 1260, 740}, {}},
        {"main_engine", "Main engine", {1320, 260, 1860, 740}, {}},
        {"sms",
         "Ship management system",
         {660, 780, 1260, 1060},
         {{"lateral_speed", "Lateral speed", {660, 780, 960, 1060}}, {"heading", "Heading", {960, 780, 1260, 1060}}}},
        {"bow_thruster", "Bow thruster", {60, 780, 600, 1060}, {}},
    };
    s.event = {Timestamp{120000}, "main_engine_failure", "Main Engine Failure"};
    s.gaze_phases = {
        {0, 60000, "ecdis", "", 25.0},
        {60000, 120000, "radar", "", 25.0},
        {120000, 180000, "main_engine", "", 15.0},
        {180000, 240000, "sms", "lateral_speed", 20.0},
    };
    s.pupil = {3.0, 1.2, 120000, 180000, 0.05};
    s.audio = {180.0, 240.0, 0.03, 120000, 200000, 16000, 0.3};

    s.entities = {
        {"Engine Room", {"engine room", "engine control room"}, EntityCategory::Internal},
        {"Engineer", {"engineer", "chief engineer", "duty engineer"}, EntityCategory::Internal},
        {"Captain", {"captain"}, EntityCategory::Internal},
        {"Port Control", {"port control", "port operations"}, EntityCategory::External},
        {"Keppel Control", {"keppel control"}, EntityCategory::External},
        {"Ocean Pride", {"ocean pride"}, EntityCategory::External},
        {"Sea Falcon", {"sea falcon"}, EntityCategory::External},
        {"Tug", {"tug", "tug boat"}, EntityCategory::External},
        {"Port Marine Safety", {"port marine safety", "marine safety"}, EntityCategory::External},
    };

    s.script = {
        {8000, 6000, "subject",
         "Keppel Control Keppel Control this is SMA Voyager, we are headed for Brani 7 and we have a vessel "
         "crossing ahead of us. Can you give us the name of that vessel over?",
         {"Keppel Control", "Keppel Control"}},
        {16000, 4000, "keppel_control", "SMA Voyager this is Keppel Control, the crossing vessel is Ocean Pride over",
         {"Keppel Control", "Ocean Pride"}},
        {30000, 4000, "subject", "Ocean Pride Ocean Pride this is SMA Voyager, I will pass astern of you over",
         {"Ocean Pride", "Ocean Pride"}},
        {52000, 5000, "subject",
         "Can you advise which berth is the vessel on my starboard side going to? Is it also berthing at Brani over?",
         {}},
        {75000, 4000, "subject", "Port Control this is SMA Voyager, proceeding to Brani 7 at eight knots over",
         {"Port Control"}},
        {100000, 4000, "subject", "Captain, traffic is light, Sea Falcon is anchored off our port bow",
         {"Captain", "Sea Falcon"}},
        {123000, 4000, "subject", "Engine Room this is bridge, the main engine has stopped, what is the status over",
         {"Engine Room"}},
        {131000, 4000, "engine_room", "Bridge this is Engine Room, fuel pressure lost, engineer checking now",
         {"Engine Room", "Engineer"}},
        {140000, 3000, "subject", "Chief Engineer, report how long until we can restart", {"Engineer"}},
        {152000, 5000, "subject",
         "Port Control Port Control this is SMA Voyager, we have a main engine failure and are drifting near Brani "
         "over",
         {"Port Control", "Port Control"}},
        {165000, 4000, "port_control", "SMA Voyager this is Port Control, understood, keep us advised over",
         {"Port Control"}},
        {178000, 3000, "subject", "Captain, all communications are logged", {"Captain"}},
        {196000, 3000, "subject", "Engineer, confirm when the main engine is ready", {"Engineer"}},
        {214000, 4000, "subject", "Port Control this is SMA Voyager, main engine restored, resuming passage over",
         {"Port Control"}},
        {228000, 4000, "subject", "Sea Falcon this is SMA Voyager, passing clear on your starboard side over",
         {"Sea Falcon"}},
    };

    ChecklistDefinition c;
    c.event_kind = "main_engine_failure";
    c.items = {
        item("contacted_engine_room", "Contacted engine room to know status", {{"engine room"}, {"status"}}),
        item("updated_nearby_vessels", "Updated nearby vessels",
             {{"all ships", "all stations", "all vessels", "nearby vessels", "ocean pride", "sea falcon"},
              {"engine failure", "engine breakdown", "not under command"}}),
        item("anchoring_standby", "Kept anchoring stations on stand by",
             {{"anchor", "anchors", "anchoring", "anchor station", "anchor stations", "anchoring stations"},
              {"stand by", "standby"}}),
        item("updated_port_control", "Updated port control",
             {{"port control", "keppel control"}, {"engine failure", "engine breakdown"}}),
        item("contacted_tug", "Contacted tug assistance", {{"tug", "tugs", "tug boat", "tug assistance"}}),
        item("contacted_port_marine_safety", "Contacted port marine safety", {{"port marine safety", "marine safety"}}),
    };
    s.checklists = {c};
    s.expected_checklist = {
        {"contacted_engine_room", true}, {"updated_nearby_vessels", false}, {"anchoring_standby", false},
        {"updated_port_control", true},  {"contacted_tug", false},          {"contacted_port_marine_safety", false},
    };
    s.dropout_rate = 0.01;
    s.dwell_tolerance = 0.05;
    s.analysis = AnalysisConfig{};
    return s;
}

}  // namespace bridgewatch
