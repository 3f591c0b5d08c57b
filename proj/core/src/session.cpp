#include "bridgewatch/session.hpp"

#include <algorithm>
#include <cctype>

namespace bridgewatch {

std::optional<double> GazeSample::mean_pupil_mm() const {
    if (pd_left_mm && pd_right_mm) {
        return (*pd_left_mm + *pd_right_mm) / 2.0;
    }
    if (pd_left_mm) {
        return pd_left_mm;
    }
    return pd_right_mm;
}

const PanelInfo* PanelCatalog::find(const std::string& panel_id) const {
    auto it = std::find_if(panels.begin(), panels.end(),
                           [&](const PanelInfo& p) { return p.id == panel_id; });
    return it == panels.end() ? nullptr : &*it;
}

namespace {

bool blank(const std::string& s) {
    return std::all_of(s.begin(), s.end(),
                       [](unsigned char c) { return std::isspace(c) != 0; });
}

template <typename T, typename KeyFn>
void check_order(const std::vector<T>& stream, const char* name, KeyFn key,
                 std::vector<Violation>& out) {
    for (std::size_t i = 0; i < stream.size(); ++i) {
        if (key(stream[i]).ms < 0) {
            out.push_back({name, i, "t_ms >= 0"});
        }
        if (i > 0 && key(stream[i]) < key(stream[i - 1])) {
            out.push_back({name, i, "non-decreasing"});
        }
    }
}

constexpr double kUnitTolerance = 1e-6;

}  // namespace

ValidationReport validate_session(const Session& session) {
    std::vector<Violation> v;
    const ScreenGeometry& screen = session.screen();
    const double w = screen.width_px;
    const double h = screen.height_px;

    if (session.id.empty()) {
        v.push_back({"session", 0, "id non-empty"});
    }
    if (screen.width_px <= 0 || screen.height_px <= 0) {
        v.push_back({"catalog", 0, "screen dimensions positive"});
    }

    check_order(session.gaze, "gaze", [](const GazeSample& s) { return s.t; }, v);
    for (std::size_t i = 0; i < session.gaze.size(); ++i) {
        const GazeSample& s = session.gaze[i];
        if (s.valid) {
            if (!s.gaze_px) {
                v.push_back({"gaze", i, "valid sample has gaze position"});
            } else if (s.gaze_px->x < 0 || s.gaze_px->x > w || s.gaze_px->y < 0 ||
                       s.gaze_px->y > h) {
                v.push_back({"gaze", i, "gaze within frame"});
            }
        }
        if ((s.pd_left_mm && *s.pd_left_mm <= 0) || (s.pd_right_mm && *s.pd_right_mm <= 0)) {
            v.push_back({"gaze", i, "pupil diameter > 0"});
        }
        if (s.direction && std::abs(s.direction->norm() - 1.0) > kUnitTolerance) {
            v.push_back({"gaze", i, "direction unit norm"});
        }
    }

    check_order(session.panels, "panels", [](const PanelObservation& p) { return p.t; }, v);
    for (std::size_t i = 0; i < session.panels.size(); ++i) {
        const PanelObservation& p = session.panels[i];
        const BBox& b = p.bbox;
        if (!(b.x0 < b.x1)) {
            v.push_back({"panels", i, "x0 < x1"});
        }
        if (!(b.y0 < b.y1)) {
            v.push_back({"panels", i, "y0 < y1"});
        }
        if (b.x0 < 0 || b.y0 < 0 || b.x1 > w || b.y1 > h) {
            v.push_back({"panels", i, "bbox within frame"});
        }
        if (!(p.confidence >= 0.0 && p.confidence <= 1.0)) {
            v.push_back({"panels", i, "confidence in [0,1]"});
        }
        if (p.panel_id.empty()) {
            v.push_back({"panels", i, "panel id non-empty"});
        } else if (!session.catalog.panels.empty()) {
            const PanelInfo* info = session.catalog.find(p.panel_id);
            if (info == nullptr) {
                v.push_back({"panels", i, "panel in catalog"});
            } else if (p.subpanel_id) {
                bool known = std::any_of(info->subpanels.begin(), info->subpanels.end(),
                                         [&](const SubpanelInfo& s) { return s.id == *p.subpanel_id; });
                if (!known) {
                    v.push_back({"panels", i, "subpanel in catalog"});
                }
            }
        }
    }

    check_order(session.utterances, "transcript", [](const Utterance& u) { return u.t_start; }, v);
    for (std::size_t i = 0; i < session.utterances.size(); ++i) {
        const Utterance& u = session.utterances[i];
        if (u.t_end < u.t_start) {
            v.push_back({"transcript", i, "t_start <= t_end"});
        }
        if (blank(u.text)) {
            v.push_back({"transcript", i, "text non-empty"});
        }
    }

    check_order(session.events, "events", [](const TriggerEvent& e) { return e.t; }, v);
    for (std::size_t i = 0; i < session.events.size(); ++i) {
        if (session.events[i].kind.empty()) {
            v.push_back({"events", i, "kind non-empty"});
        }
    }

    return ValidationReport{std::move(v)};
}

namespace {

template <typename T, typename Shift>
std::size_t shift_stream(std::vector<T>& stream, std::int64_t offset, Shift shift) {
    if (offset == 0) {
        return 0;
    }
    std::vector<T> kept;
    kept.reserve(stream.size());
    std::size_t dropped = 0;
    for (T& item : stream) {
        if (shift(item, offset)) {
            kept.push_back(std::move(item));
        } else {
            ++dropped;
        }
    }
    stream = std::move(kept);
    return dropped;
}

}  // namespace

OffsetResult apply_clock_offsets(const Session& session, const ClockOffsets& offsets) {
    OffsetResult result{session};
    Session& s = result.session;

    result.dropped_gaze = shift_stream(s.gaze, offsets.gaze, [](GazeSample& g, std::int64_t d) {
        g.t.ms += d;
        return g.t.ms >= 0;
    });
    result.dropped_panels =
        shift_stream(s.panels, offsets.panels, [](PanelObservation& p, std::int64_t d) {
            p.t.ms += d;
            return p.t.ms >= 0;
        });
    result.dropped_utterances =
        shift_stream(s.utterances, offsets.transcript, [](Utterance& u, std::int64_t d) {
            u.t_start.ms += d;
            u.t_end.ms += d;
            return u.t_start.ms >= 0;
        });
    result.dropped_events =
        shift_stream(s.events, offsets.events, [](TriggerEvent& e, std::int64_t d) {
            e.t.ms += d;
            return e.t.ms >= 0;
        });
    s.audio_offset_ms += offsets.audio;
    return result;
}

}  // namespace bridgewatch
