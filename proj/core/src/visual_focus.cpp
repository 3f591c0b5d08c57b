#include "bridgewatch/visual_focus.hpp"

#include "bridgewatch/error.hpp"
#include "bridgewatch/ingest.hpp"

#include <algorithm>
#include <fstream>
#include <tuple>

namespace bridgewatch {

bool point_in_bbox(Point2 p, const BBox& box) {
    return box.x0 <= p.x && p.x < box.x1 && box.y0 <= p.y && p.y < box.y1;
}

namespace {

auto first_at_or_after(std::span<const PanelObservation> panels, std::int64_t t_ms) {
    return std::lower_bound(panels.begin(), panels.end(), t_ms,
                            [](const PanelObservation& p, std::int64_t t) { return p.t.ms < t; });
}

}  // namespace

GazeAssignment assign_gaze(const GazeSample& sample, std::span<const PanelObservation> panels,
                           std::int64_t dt_max_ms) {
    GazeAssignment out{sample.t, sample.valid && sample.gaze_px.has_value()};
    if (!out.valid) {
        return out;
    }
    const Point2 g = *sample.gaze_px;
    const std::int64_t t = sample.t.ms;

    std::optional<std::size_t> best;
    auto key = [&](std::size_t i) {
        const PanelObservation& p = panels[i];
        std::int64_t dt = p.t.ms > t ? p.t.ms - t : t - p.t.ms;
        return std::make_tuple(dt, -p.confidence, p.bbox.area(), i);
    };
    for (auto it = first_at_or_after(panels, t - dt_max_ms); it != panels.end() && it->t.ms <= t + dt_max_ms;
         ++it) {
        if (!point_in_bbox(g, it->bbox)) {
            continue;
        }
        auto idx = static_cast<std::size_t>(it - panels.begin());
        if (!best || key(idx) < key(*best)) {
            best = idx;
        }
    }
    if (best) {
        out.panel_id = panels[*best].panel_id;
        out.subpanel_id = panels[*best].subpanel_id;
        out.source_observation_index = best;
    }
    return out;
}

std::vector<GazeAssignment> assign_all(std::span<const GazeSample> gaze,
                                       std::span<const PanelObservation> panels, std::int64_t dt_max_ms) {
    std::vector<GazeAssignment> out;
    out.reserve(gaze.size());
    for (const GazeSample& s : gaze) {
        out.push_back(assign_gaze(s, panels, dt_max_ms));
    }
    return out;
}

DwellSummary dwell_distribution(std::span<const GazeAssignment> assignments, std::int64_t bin_ms) {
    DwellSummary summary;
    summary.bin_ms = bin_ms;
    if (assignments.empty() || bin_ms <= 0) {
        return summary;
    }
    const std::int64_t last_bin = std::max<std::int64_t>(assignments.back().t.ms, 0) / bin_ms;
    std::vector<std::map<std::string, std::size_t>> counts(static_cast<std::size_t>(last_bin + 1));
    std::vector<std::size_t> valid(counts.size(), 0);

    for (const GazeAssignment& a : assignments) {
        if (!a.valid) {
            continue;
        }
        auto bin = static_cast<std::size_t>(std::clamp<std::int64_t>(a.t.ms / bin_ms, 0, last_bin));
        ++valid[bin];
        ++counts[bin][a.panel_id.value_or(kUnassigned)];
    }

    std::map<std::string, double> sums;
    std::size_t occupied = 0;
    for (std::size_t b = 0; b < counts.size(); ++b) {
        DwellDistribution d;
        d.bin_start = Timestamp{static_cast<std::int64_t>(b) * bin_ms};
        d.bin_ms = bin_ms;
        d.valid_samples = valid[b];
        if (valid[b] > 0) {
            ++occupied;
            for (const auto& [panel, n] : counts[b]) {
                double f = static_cast<double>(n) / static_cast<double>(valid[b]);
                d.fractions[panel] = f;
                sums[panel] += f;
            }
        }
        summary.bins.push_back(std::move(d));
    }
    for (const auto& [panel, s] : sums) {
        summary.totals[panel] = s / static_cast<double>(occupied);
    }
    return summary;
}

ScriptedDetector::ScriptedDetector(std::vector<PanelObservation> observations, std::int64_t dt_max_ms)
    : observations_(std::move(observations)), dt_max_ms_(dt_max_ms) {
    std::stable_sort(observations_->begin(), observations_->end(),
                     [](const PanelObservation& a, const PanelObservation& b) { return a.t < b.t; });
}

ScriptedDetector::ScriptedDetector(std::filesystem::path panels_file, std::int64_t dt_max_ms)
    : file_(std::move(panels_file)), dt_max_ms_(dt_max_ms) {}

std::vector<PanelObservation> ScriptedDetector::detect(const FrameRef& /*frame*/, Timestamp t) {
    if (!observations_) {
        std::ifstream in(*file_, std::ios::binary);
        if (!in) {
            throw Error(Errc::AdapterUnavailable, "AdapterUnavailable: cannot open " + file_->string());
        }
        auto parsed = parse_panels_jsonl(in, ParseMode::Strict);
        *this = ScriptedDetector(std::move(parsed.items), dt_max_ms_);
    }
    std::span<const PanelObservation> all(*observations_);
    std::vector<PanelObservation> out;
    for (auto it = first_at_or_after(all, t.ms - dt_max_ms_); it != all.end() && it->t.ms <= t.ms + dt_max_ms_;
         ++it) {
        out.push_back(*it);
    }
    return out;
}

}  // namespace bridgewatch
