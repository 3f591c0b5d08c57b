/**
 * visual_focus.hpp: Gaze-to-panel assignment and dwell distributions.
 *
 * Each valid gaze sample is matched against detector observations taken
 * within dt_max of it. Bounding boxes are closed on the low edge and open on
 * the high edge so that adjacent panels partition the frame.
 */
#pragma once

#include "bridgewatch/session.hpp"

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace bridgewatch {

/// Key used in dwell fractions for valid samples that hit no panel.
inline const std::string kUnassigned = "unassigned";

bool point_in_bbox(Point2 p, const BBox& box);

struct GazeAssignment {
    Timestamp t;
    bool valid = false;
    std::optional<std::string> panel_id;
    std::optional<std::string> subpanel_id;
    std::optional<std::size_t> source_observation_index;

    bool operator==(const GazeAssignment&) const = default;
};

/// Among observations with |t_obs - t| <= dt_max whose box contains the gaze
/// point, picks the temporally nearest; ties go to higher confidence, then
/// smaller box area, then lower index. `panels` must be time-ordered.
GazeAssignment assign_gaze(const GazeSample& sample, std::span<const PanelObservation> panels,
                           std::int64_t dt_max_ms);

std::vector<GazeAssignment> assign_all(std::span<const GazeSample> gaze,
                                       std::span<const PanelObservation> panels, std::int64_t dt_max_ms);

struct DwellDistribution {
    Timestamp bin_start;
    std::int64_t bin_ms = 0;
    std::size_t valid_samples = 0;
    /// Panel id (or kUnassigned) -> share of the bin's valid samples. Only
    /// keys with a non-zero share appear; empty when the bin has no valid
    /// samples.
    std::map<std::string, double> fractions;

    bool operator==(const DwellDistribution&) const = default;
};

struct DwellSummary {
    std::int64_t bin_ms = 0;
    std::vector<DwellDistribution> bins;
    /// Time-weighted mean of the per-bin fractions over bins that hold at
    /// least one valid sample (equal-width bins, so an unweighted mean).
    std::map<std::string, double> totals;

    bool operator==(const DwellSummary&) const = default;
};

/// Bins start at 0 and run through the bin holding the last assignment.
DwellSummary dwell_distribution(std::span<const GazeAssignment> assignments, std::int64_t bin_ms);

/// Opaque handle to a scene-camera frame.
struct FrameRef {
    std::string source;
    std::int64_t frame_index = 0;
};

/// Boundary for a panel detector. Implementations may be remote; they
/// report AdapterUnavailable / AdapterTimeout as bridgewatch::Error.
class DetectorAdapter {
public:
    virtual ~DetectorAdapter() = default;
    virtual std::vector<PanelObservation> detect(const FrameRef& frame, Timestamp t) = 0;
};

/// Replays recorded detections (panels.jsonl) instead of running a model.
class ScriptedDetector final : public DetectorAdapter {
public:
    ScriptedDetector(std::vector<PanelObservation> observations, std::int64_t dt_max_ms);
    /// Reads the file lazily on first detect(); a missing file is reported
    /// as AdapterUnavailable at that point.
    ScriptedDetector(std::filesystem::path panels_file, std::int64_t dt_max_ms);

    std::vector<PanelObservation> detect(const FrameRef& frame, Timestamp t) override;

private:
    std::optional<std::filesystem::path> file_;
    std::optional<std::vector<PanelObservation>> observations_;
    std::int64_t dt_max_ms_;
};

}  // namespace bridgewatch
