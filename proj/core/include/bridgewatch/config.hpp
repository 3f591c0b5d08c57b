#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace bridgewatch {

/// Which divisor the gaze-stability sum is scaled by. `N` is the window
/// length (the literal form of the metric); `NMinus1` is the hop count.
enum class GsDivisor { N, NMinus1 };

struct PupilMethod {
    enum class Kind { Strict, Robust };

    Kind kind = Kind::Strict;
    double p_low = 0.0;    // percent, robust only
    double p_high = 100.0;  // percent, robust only

    static PupilMethod strict() { return {}; }
    static PupilMethod robust(double p_low, double p_high) {
        return {Kind::Robust, p_low, p_high};
    }
    bool operator==(const PupilMethod&) const = default;
};

struct PitchParams {
    double f0_min_hz = 60.0;
    double f0_max_hz = 400.0;
    double voicing_threshold = 0.5;
    double energy_floor = 1e-4;
    /// Octave guard: the earliest local autocorrelation peak within this
    /// fraction of the band maximum is taken as the period.
    double octave_guard = 0.95;

    bool operator==(const PitchParams&) const = default;
};

struct StressParams {
    int frame_ms = 40;
    int frame_hop_ms = 10;
    int window_ms = 3000;
    int window_hop_ms = 1000;
    double min_voicing = 0.2;
    std::int64_t baseline_ms = 30000;
    int median_k = 5;
    double a_f0 = 0.5;
    double a_jitter = 0.3;
    double a_energy = 0.2;
    double slope = 2.0;
    double z0 = 2.0;
    PitchParams pitch;

    bool operator==(const StressParams&) const = default;
};

struct AnalysisConfig {
    double w1 = 0.5;
    double w2 = 0.5;
    int af_window_n = 30;
    int af_stride = 10;
    GsDivisor gs_divisor = GsDivisor::N;
    PupilMethod pd_calibration;
    std::int64_t assign_dt_max_ms = 100;
    std::int64_t dwell_bin_ms = 60000;
    std::int64_t checklist_horizon_ms = 15 * 60 * 1000;
    std::int64_t event_pre_ms = 30000;
    std::int64_t event_post_ms = 60000;
    StressParams stress;

    /// Auxiliary inputs, resolved relative to the config file's directory.
    std::string entities_path;
    std::vector<std::string> checklist_paths;

    bool operator==(const AnalysisConfig&) const = default;
};

/// Throws Error(InvalidWeights / SchemaViolation) when an invariant fails.
void validate_config(const AnalysisConfig& config);

}  // namespace bridgewatch
