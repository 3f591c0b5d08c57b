#include "bridgewatch/config.hpp"

#include "bridgewatch/error.hpp"
#include "json_io.hpp"

#include <cmath>

namespace bridgewatch {

void validate_config(const AnalysisConfig& c) {
    if (!(c.w1 >= 0.0 && c.w2 >= 0.0)) {
        throw Error(Errc::InvalidWeights, "w1 and w2 must be non-negative");
    }
    if (std::abs(c.w1 + c.w2 - 1.0) > 1e-9) {
        throw Error(Errc::InvalidWeights, "w1+w2 must equal 1");
    }
    auto require = [](bool ok, const char* what) {
        if (!ok) {
            throw Error(Errc::SchemaViolation, what);
        }
    };
    require(c.af_window_n >= 2, "af_window_n must be >= 2");
    require(c.af_stride >= 1, "af_stride must be >= 1");
    require(c.assign_dt_max_ms > 0, "assign_dt_max_ms must be positive");
    require(c.dwell_bin_ms > 0, "dwell_bin_ms must be positive");
    require(c.checklist_horizon_ms > 0, "checklist_horizon_ms must be positive");
    require(c.event_pre_ms >= 0 && c.event_post_ms >= 0, "event window must be non-negative");
    if (c.pd_calibration.kind == PupilMethod::Kind::Robust) {
        require(c.pd_calibration.p_low >= 0.0 && c.pd_calibration.p_low < c.pd_calibration.p_high &&
                    c.pd_calibration.p_high <= 100.0,
                "robust calibration needs 0 <= p_low < p_high <= 100");
    }
    const StressParams& s = c.stress;
    require(s.frame_ms > 0 && s.frame_hop_ms > 0, "stress frame sizes must be positive");
    require(s.window_ms > 0 && s.window_hop_ms > 0, "stress window sizes must be positive");
    require(s.median_k >= 1 && s.median_k % 2 == 1, "stress median_k must be odd");
    require(s.baseline_ms > 0, "stress baseline_ms must be positive");
    require(s.min_voicing >= 0.0 && s.min_voicing <= 1.0, "stress min_voicing must be in [0,1]");
    require(s.a_f0 >= 0.0 && s.a_jitter >= 0.0 && s.a_energy >= 0.0, "stress weights must be non-negative");
    require(s.slope > 0.0, "stress slope must be positive");
    require(s.pitch.f0_min_hz > 0.0 && s.pitch.f0_min_hz < s.pitch.f0_max_hz, "pitch band invalid");
}

namespace detail {

json config_to_json(const AnalysisConfig& c) {
    json j;
    j["w1"] = c.w1;
    j["w2"] = c.w2;
    j["af_window_n"] = c.af_window_n;
    j["af_stride"] = c.af_stride;
    j["gs_divisor"] = c.gs_divisor == GsDivisor::N ? "n" : "n_minus_1";
    if (c.pd_calibration.kind == PupilMethod::Kind::Strict) {
        j["pd_calibration"] = "strict";
    } else {
        j["pd_calibration"] = {{"method", "robust"},
                               {"p_low", c.pd_calibration.p_low},
                               {"p_high", c.pd_calibration.p_high}};
    }
    j["assign_dt_max_ms"] = c.assign_dt_max_ms;
    j["dwell_bin_ms"] = c.dwell_bin_ms;
    j["checklist_horizon_ms"] = c.checklist_horizon_ms;
    j["event_pre_ms"] = c.event_pre_ms;
    j["event_post_ms"] = c.event_post_ms;
    const StressParams& s = c.stress;
    j["stress"] = {
        {"frame_ms", s.frame_ms},
        {"frame_hop_ms", s.frame_hop_ms},
        {"window_ms", s.window_ms},
        {"window_hop_ms", s.window_hop_ms},
        {"min_voicing", s.min_voicing},
        {"baseline_ms", s.baseline_ms},
        {"median_k", s.median_k},
        {"weights", {s.a_f0, s.a_jitter, s.a_energy}},
        {"slope", s.slope},
        {"z0", s.z0},
        {"f0_min_hz", s.pitch.f0_min_hz},
        {"f0_max_hz", s.pitch.f0_max_hz},
        {"voicing_threshold", s.pitch.voicing_threshold},
        {"energy_floor", s.pitch.energy_floor},
        {"octave_guard", s.pitch.octave_guard},
    };
    if (!c.entities_path.empty()) {
        j["entities"] = c.entities_path;
    }
    if (!c.checklist_paths.empty()) {
        j["checklists"] = c.checklist_paths;
    }
    return j;
}

AnalysisConfig config_from_json(const json& doc) {
    if (!doc.is_object()) {
        field_fail(Errc::SchemaViolation, "config: expected object");
    }
    AnalysisConfig c;
    auto num = [&](const json& obj, std::string_view key, const std::string& path, double& dst) {
        if (auto v = opt_number(obj, key, path)) {
            dst = *v;
        }
    };
    auto integer = [&](const json& obj, std::string_view key, const std::string& path, auto& dst) {
        if (const json* v = opt_field(obj, key)) {
            dst = static_cast<std::remove_reference_t<decltype(dst)>>(as_int(*v, join_path(path, key)));
        }
    };
    num(doc, "w1", "", c.w1);
    num(doc, "w2", "", c.w2);
    integer(doc, "af_window_n", "", c.af_window_n);
    integer(doc, "af_stride", "", c.af_stride);
    if (auto div = opt_string(doc, "gs_divisor", "")) {
        if (*div == "n") {
            c.gs_divisor = GsDivisor::N;
        } else if (*div == "n_minus_1") {
            c.gs_divisor = GsDivisor::NMinus1;
        } else {
            field_fail(Errc::OutOfRangeValue, "gs_divisor: expected \"n\" or \"n_minus_1\"");
        }
    }
    if (const json* cal = opt_field(doc, "pd_calibration")) {
        if (cal->is_string() && cal->get<std::string>() == "strict") {
            c.pd_calibration = PupilMethod::strict();
        } else if (cal->is_object()) {
            std::string method = string_field(*cal, "method", "pd_calibration");
            if (method == "strict") {
                c.pd_calibration = PupilMethod::strict();
            } else if (method == "robust") {
                c.pd_calibration = PupilMethod::robust(number_field(*cal, "p_low", "pd_calibration"),
                                                       number_field(*cal, "p_high", "pd_calibration"));
            } else {
                field_fail(Errc::OutOfRangeValue, "pd_calibration.method: expected strict or robust");
            }
        } else {
            field_fail(Errc::SchemaViolation, "pd_calibration: expected \"strict\" or object");
        }
    }
    integer(doc, "assign_dt_max_ms", "", c.assign_dt_max_ms);
    integer(doc, "dwell_bin_ms", "", c.dwell_bin_ms);
    integer(doc, "checklist_horizon_ms", "", c.checklist_horizon_ms);
    integer(doc, "event_pre_ms", "", c.event_pre_ms);
    integer(doc, "event_post_ms", "", c.event_post_ms);
    if (const json* st = opt_field(doc, "stress")) {
        StressParams& s = c.stress;
        integer(*st, "frame_ms", "stress", s.frame_ms);
        integer(*st, "frame_hop_ms", "stress", s.frame_hop_ms);
        integer(*st, "window_ms", "stress", s.window_ms);
        integer(*st, "window_hop_ms", "stress", s.window_hop_ms);
        num(*st, "min_voicing", "stress", s.min_voicing);
        integer(*st, "baseline_ms", "stress", s.baseline_ms);
        integer(*st, "median_k", "stress", s.median_k);
        if (const json* w = opt_field(*st, "weights")) {
            as_array(*w, "stress.weights");
            if (w->size() != 3) {
                field_fail(Errc::SchemaViolation, "stress.weights: expected 3 numbers");
            }
            s.a_f0 = as_number((*w)[0], "stress.weights[0]");
            s.a_jitter = as_number((*w)[1], "stress.weights[1]");
            s.a_energy = as_number((*w)[2], "stress.weights[2]");
        }
        num(*st, "slope", "stress", s.slope);
        num(*st, "z0", "stress", s.z0);
        num(*st, "f0_min_hz", "stress", s.pitch.f0_min_hz);
        num(*st, "f0_max_hz", "stress", s.pitch.f0_max_hz);
        num(*st, "voicing_threshold", "stress", s.pitch.voicing_threshold);
        num(*st, "energy_floor", "stress", s.pitch.energy_floor);
        num(*st, "octave_guard", "stress", s.pitch.octave_guard);
    }
    if (auto e = opt_string(doc, "entities", "")) {
        c.entities_path = *e;
    }
    if (const json* lists = opt_field(doc, "checklists")) {
        as_array(*lists, "checklists");
        for (std::size_t i = 0; i < lists->size(); ++i) {
            c.checklist_paths.push_back(as_string((*lists)[i], index_path("checklists", i)));
        }
    }
    return c;
}

}  // namespace detail

}  // namespace bridgewatch
