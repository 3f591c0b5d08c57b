#include "bridgewatch/error.hpp"
#include "bridgewatch/report.hpp"
#include "canonical_json.hpp"
#include "svg.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <set>

namespace bridgewatch {

using detail::fixed6;
using detail::num2;

namespace {

std::string csv_field(std::string_view s) {
    if (s.find_first_of(",\"\n\r") == std::string_view::npos) {
        return std::string(s);
    }
    std::string out = "\"";
    for (char c : s) {
        if (c == '"') {
            out += '"';
        }
        out += c;
    }
    out += '"';
    return out;
}

std::string opt6(const std::optional<double>& v) { return v ? fixed6(*v) : std::string(); }

const char* yes_no(bool b) { return b ? "yes" : "no"; }

std::string csv_focus(const SessionReport& r) {
    std::string out = "bin_start_ms,bin_ms,valid_samples,panel,fraction\n";
    for (const DwellDistribution& d : r.focus.bins) {
        for (const auto& [panel, f] : d.fractions) {
            out += fmt::format("{},{},{},{},{}\n", d.bin_start.ms, d.bin_ms, d.valid_samples, csv_field(panel),
                               fixed6(f));
        }
    }
    return out;
}

std::string csv_focus_totals(const SessionReport& r) {
    std::string out = "panel,fraction\n";
    for (const auto& [panel, f] : r.focus.totals) {
        out += fmt::format("{},{}\n", csv_field(panel), fixed6(f));
    }
    return out;
}

std::string csv_af(const SessionReport& r) {
    std::string out = "window_start_ms,window_end_ms,pd_norm,gs,af\n";
    for (const AFSample& s : r.af.timeline) {
        out += fmt::format("{},{},{},{},{}\n", s.window_start.ms, s.window_end.ms, fixed6(s.pd_norm), fixed6(s.gs),
                           fixed6(s.af));
    }
    return out;
}

std::string csv_af_events(const SessionReport& r) {
    std::string out = "event_t_ms,event_kind,from_ms,to_ms,samples,pre_mean,post_max\n";
    for (const EventSlice& s : r.af.events) {
        out += fmt::format("{},{},{},{},{},{},{}\n", s.event.t.ms, csv_field(s.event.kind), s.from.ms, s.to.ms,
                           s.samples.size(), opt6(s.pre_mean), opt6(s.post_max));
    }
    return out;
}

std::string csv_entities(const SessionReport& r) {
    std::string out = "name,category,count\n";
    for (const EntityCount& e : r.entities.entities) {
        out += fmt::format("{},{},{}\n", csv_field(e.name), category_name(e.category), e.count);
    }
    out += fmt::format("TOTAL,internal,{}\n", r.entities.internal_total);
    out += fmt::format("TOTAL,external,{}\n", r.entities.external_total);
    return out;
}

std::string csv_checklists(const SessionReport& r) {
    std::string out =
        "event_t_ms,event_kind,item_id,description,completed,unknown,backend,evidence_utterance,quote\n";
    for (const ChecklistBlock& b : r.checklists) {
        for (const ChecklistResult& res : b.results) {
            std::string utt;
            std::string quote;
            if (res.evidence) {
                if (res.evidence->utterance_index) {
                    utt = std::to_string(*res.evidence->utterance_index);
                }
                quote = res.evidence->quote;
            }
            out += fmt::format("{},{},{},{},{},{},{},{},{}\n", b.event.t.ms, csv_field(b.event.kind),
                               csv_field(res.item_id), csv_field(res.description), yes_no(res.completed),
                               yes_no(res.unknown), b.backend, utt, csv_field(quote));
        }
    }
    return out;
}

std::string csv_stress(const SessionReport& r) {
    std::string out = "t_ms,score,binary,gap\n";
    if (r.stress) {
        for (const StressSample& s : r.stress->samples) {
            out += fmt::format("{},{},{},{}\n", s.t.ms, fixed6(s.score), s.binary, s.gap ? 1 : 0);
        }
    }
    return out;
}

std::string csv_events(const SessionReport& r) {
    std::string out = "t_ms,kind,label\n";
    for (const TriggerEvent& e : r.events) {
        out += fmt::format("{},{},{}\n", e.t.ms, csv_field(e.kind), csv_field(e.label));
    }
    return out;
}

// plot frame shared by the time-series charts
constexpr double kLeft = 80;
constexpr double kRight = 820;
constexpr double kTop = 60;
constexpr double kBottom = 470;

struct TimeAxis {
    double t0 = 0;
    double t1 = 1;

    double x(double t) const { return kLeft + (t - t0) / (t1 - t0) * (kRight - kLeft); }
};

double y_unit(double v) { return kBottom - std::clamp(v, 0.0, 1.0) * (kBottom - kTop); }

void draw_frame(detail::Svg& svg, const TimeAxis& axis, std::string_view y_label) {
    svg.line(kLeft, kBottom, kRight, kBottom, "#333333");
    svg.line(kLeft, kTop, kLeft, kBottom, "#333333");
    for (int i = 0; i <= 4; ++i) {
        double v = i / 4.0;
        svg.line(kLeft - 4, y_unit(v), kLeft, y_unit(v), "#333333");
        svg.text(kLeft - 8, y_unit(v) + 4, fmt::format("{:.2f}", v), 11, "end");
    }
    for (int i = 0; i <= 5; ++i) {
        double t = axis.t0 + (axis.t1 - axis.t0) * i / 5.0;
        svg.line(axis.x(t), kBottom, axis.x(t), kBottom + 4, "#333333");
        svg.text(axis.x(t), kBottom + 18, fmt::format("{:.0f} s", t / 1000.0), 11, "middle");
    }
    svg.text((kLeft + kRight) / 2, kBottom + 40, "time", 12, "middle");
    svg.text(20, (kTop + kBottom) / 2, y_label, 12, "middle");
}

void draw_events(detail::Svg& svg, const TimeAxis& axis, const std::vector<TriggerEvent>& events) {
    for (const TriggerEvent& e : events) {
        auto t = static_cast<double>(e.t.ms);
        if (t < axis.t0 || t > axis.t1) {
            continue;
        }
        svg.line(axis.x(t), kTop, axis.x(t), kBottom, "#d62728", 1.0, "4 3");
        svg.text(axis.x(t) + 4, kTop + 12, e.kind, 11, "start", "event");
    }
}

std::string points(const std::vector<std::pair<double, double>>& pts) {
    std::string s;
    for (const auto& [x, y] : pts) {
        if (!s.empty()) {
            s += ' ';
        }
        s += num2(x) + "," + num2(y);
    }
    return s;
}

std::string svg_focus_bars(const SessionReport& r) {
    detail::Svg svg("Visual focus on equipment");
    std::vector<std::string> keys;
    for (const auto& [k, v] : r.focus.totals) {
        keys.push_back(k);
    }
    const auto& bins = r.focus.bins;
    TimeAxis axis;
    axis.t0 = 0;
    axis.t1 = bins.empty() ? 1.0 : static_cast<double>(bins.back().bin_start.ms + bins.back().bin_ms);
    draw_frame(svg, axis, "fraction");
    for (const DwellDistribution& d : bins) {
        double x0 = axis.x(static_cast<double>(d.bin_start.ms));
        double x1 = axis.x(static_cast<double>(d.bin_start.ms + d.bin_ms));
        double w = std::max(1.0, (x1 - x0) * 0.8);
        double acc = 0.0;
        for (std::size_t k = 0; k < keys.size(); ++k) {
            auto it = d.fractions.find(keys[k]);
            if (it == d.fractions.end()) {
                continue;
            }
            double ytop = y_unit(acc + it->second);
            double ybot = y_unit(acc);
            svg.rect(x0 + (x1 - x0) * 0.1, ytop, w, ybot - ytop, detail::palette(k), "bar");
            acc += it->second;
        }
    }
    for (std::size_t k = 0; k < keys.size(); ++k) {
        double y = kTop + 10 + static_cast<double>(k) * 20;
        svg.rect(kRight + 16, y - 10, 12, 12, detail::palette(k));
        svg.text(kRight + 34, y, fmt::format("{} {:.1f}%", keys[k], 100.0 * r.focus.totals.at(keys[k])), 11);
    }
    return svg.finish();
}

std::string svg_af_line(const SessionReport& r) {
    detail::Svg svg("Attentional focus");
    TimeAxis axis;
    if (!r.af.timeline.empty()) {
        axis.t0 = static_cast<double>(r.af.timeline.front().window_start.ms);
        axis.t1 = std::max(axis.t0 + 1.0, static_cast<double>(r.af.timeline.back().window_end.ms));
    }
    draw_frame(svg, axis, "AF");
    for (const TimeRange& g : r.af.gaps) {
        double x0 = axis.x(static_cast<double>(g.start.ms));
        double x1 = axis.x(static_cast<double>(g.end.ms));
        if (x1 > x0) {
            svg.rect(x0, kTop, x1 - x0, kBottom - kTop, "#eeeeee", "gap");
        }
    }
    std::vector<std::pair<double, double>> pts;
    for (const AFSample& s : r.af.timeline) {
        pts.emplace_back(axis.x(static_cast<double>(s.window_start.ms)), y_unit(s.af));
    }
    if (!pts.empty()) {
        svg.polyline(points(pts), "#1f77b4");
    }
    draw_events(svg, axis, r.events);
    return svg.finish();
}

std::string svg_entity_bars(const SessionReport& r) {
    detail::Svg svg("Communication entities");
    const auto& ents = r.entities.entities;
    std::size_t max_count = 1;
    for (const EntityCount& e : ents) {
        max_count = std::max(max_count, e.count);
    }
    const double left = 220;
    const double right = 860;
    const double row = ents.empty() ? 0.0 : std::min(36.0, (kBottom - kTop) / static_cast<double>(ents.size()));
    for (std::size_t i = 0; i < ents.size(); ++i) {
        const EntityCount& e = ents[i];
        double y = kTop + row * static_cast<double>(i);
        double w = (right - left) * static_cast<double>(e.count) / static_cast<double>(max_count);
        std::string_view fill = e.category == EntityCategory::Internal ? "#4e79a7" : "#f28e2b";
        svg.text(left - 8, y + row * 0.6, e.name, 12, "end");
        svg.rect(left, y + row * 0.15, w, row * 0.7, fill, category_name(e.category));
        svg.text(left + w + 6, y + row * 0.6, std::to_string(e.count), 11);
    }
    double ly = kBottom + 30;
    svg.rect(left, ly - 10, 12, 12, "#4e79a7");
    svg.text(left + 18, ly, fmt::format("internal ({})", r.entities.internal_total), 12);
    svg.rect(left + 180, ly - 10, 12, 12, "#f28e2b");
    svg.text(left + 198, ly, fmt::format("external ({})", r.entities.external_total), 12);
    return svg.finish();
}

std::string svg_checklist_table(const SessionReport& r) {
    detail::Svg svg("Checklist adherence");
    const double x_desc = 60;
    const double x_cell = 760;
    double y = 70;
    svg.text(x_desc, y, "Item", 13, "start", "header");
    svg.text(x_cell, y, "Completed", 13, "middle", "header");
    svg.line(40, y + 8, 920, y + 8, "#333333");
    y += 30;
    for (const ChecklistBlock& b : r.checklists) {
        svg.text(x_desc, y, fmt::format("{} at {:.0f} s", b.event.kind, static_cast<double>(b.event.t.ms) / 1000.0),
                 12, "start", "event");
        y += 24;
        for (const ChecklistResult& res : b.results) {
            const char* cell = res.unknown ? "unknown" : yes_no(res.completed);
            std::string_view fill = res.unknown ? "#dddddd" : (res.completed ? "#c7e9c0" : "#fcbba1");
            svg.open_group("row");
            svg.text(x_desc, y, res.description.empty() ? res.item_id : res.description, 12, "start", "description");
            svg.rect(x_cell - 40, y - 14, 80, 20, fill);
            svg.text(x_cell, y, cell, 12, "middle", cell);
            svg.close_group();
            y += 26;
        }
    }
    return svg.finish();
}

std::string svg_stress_line(const SessionReport& r) {
    detail::Svg svg("Stress experienced by subject");
    TimeAxis axis;
    if (r.stress && !r.stress->samples.empty()) {
        axis.t0 = static_cast<double>(r.stress->samples.front().t.ms);
        axis.t1 = std::max(axis.t0 + 1.0, static_cast<double>(r.stress->samples.back().t.ms));
    }
    draw_frame(svg, axis, "stress");
    if (!r.stress) {
        svg.text((kLeft + kRight) / 2, (kTop + kBottom) / 2, "no stress data", 14, "middle", "absent");
        return svg.finish();
    }
    svg.line(kLeft, y_unit(0.5), kRight, y_unit(0.5), "#999999", 1.0, "2 2");
    std::vector<std::pair<double, double>> score;
    std::vector<std::pair<double, double>> binary;
    for (const StressSample& s : r.stress->samples) {
        double x = axis.x(static_cast<double>(s.t.ms));
        score.emplace_back(x, y_unit(s.score));
        if (!binary.empty()) {
            binary.emplace_back(x, binary.back().second);
        }
        binary.emplace_back(x, y_unit(s.binary));
    }
    if (!score.empty()) {
        svg.polyline(points(binary), "#d62728", 1.0);
        svg.polyline(points(score), "#9467bd");
    }
    draw_events(svg, axis, r.events);
    return svg.finish();
}

}  // namespace

std::string render_csv(const SessionReport& report, std::string_view section) {
    if (section == "focus") return csv_focus(report);
    if (section == "focus_totals") return csv_focus_totals(report);
    if (section == "af") return csv_af(report);
    if (section == "af_events") return csv_af_events(report);
    if (section == "entities") return csv_entities(report);
    if (section == "checklists") return csv_checklists(report);
    if (section == "stress") return csv_stress(report);
    if (section == "events") return csv_events(report);
    throw Error(Errc::UnknownSection, fmt::format("UnknownSection: {}", section));
}

std::string render_svg(const SessionReport& report, std::string_view chart) {
    if (chart == "focus_bars") return svg_focus_bars(report);
    if (chart == "af_line") return svg_af_line(report);
    if (chart == "entity_bars") return svg_entity_bars(report);
    if (chart == "checklist_table") return svg_checklist_table(report);
    if (chart == "stress_line") return svg_stress_line(report);
    throw Error(Errc::UnknownChart, fmt::format("UnknownChart: {}", chart));
}

std::string render_comparison_csv(const ComparisonReport& cmp) {
    std::string out = "section,key,category,a,b,delta\n";
    auto row = [&](std::string_view section, const ComparedValue& v) {
        out += fmt::format("{},{},{},{},{},{}\n", section, csv_field(v.key), v.category, fixed6(v.a), fixed6(v.b),
                           fixed6(v.delta));
    };
    for (const ComparedValue& v : cmp.focus) {
        row("focus_totals", v);
    }
    for (const ComparedValue& v : cmp.entities) {
        row("entities", v);
    }
    row("entity_totals", cmp.internal);
    row("entity_totals", cmp.external);
    row("checklists", cmp.checklist_completed);
    out += fmt::format("af,mean,,{},{},{}\n", opt6(cmp.af_mean.a), opt6(cmp.af_mean.b), opt6(cmp.af_mean.delta));
    out += fmt::format("stress,mean,,{},{},{}\n", opt6(cmp.stress_mean.a), opt6(cmp.stress_mean.b),
                       opt6(cmp.stress_mean.delta));
    return out;
}

std::string render_comparison_svg(const ComparisonReport& cmp) {
    detail::Svg svg(fmt::format("Visual focus: {} vs {}", cmp.a_id, cmp.b_id));
    const double left = 200;
    const double right = 860;
    const double row = cmp.focus.empty() ? 0.0 : std::min(44.0, (kBottom - kTop) / static_cast<double>(cmp.focus.size()));
    for (std::size_t i = 0; i < cmp.focus.size(); ++i) {
        const ComparedValue& v = cmp.focus[i];
        double y = kTop + row * static_cast<double>(i);
        svg.text(left - 8, y + row * 0.55, v.key, 12, "end");
        svg.rect(left, y + row * 0.1, (right - left) * std::clamp(v.a, 0.0, 1.0), row * 0.35, detail::palette(0), "a");
        svg.rect(left, y + row * 0.5, (right - left) * std::clamp(v.b, 0.0, 1.0), row * 0.35, detail::palette(1), "b");
    }
    double ly = kBottom + 30;
    svg.rect(left, ly - 10, 12, 12, detail::palette(0));
    svg.text(left + 18, ly, cmp.a_id, 12);
    svg.rect(left + 240, ly - 10, 12, 12, detail::palette(1));
    svg.text(left + 258, ly, cmp.b_id, 12);
    return svg.finish();
}

}  // namespace bridgewatch
